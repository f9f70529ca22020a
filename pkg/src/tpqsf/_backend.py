"""Select the compiled kernel core at import, falling back to numpy.

Set ``TPQSF_BACKEND=python`` to force the fallback.
"""

import os
import warnings

from . import _kernels_py

BACKEND = "python"
kernels = _kernels_py

if os.environ.get("TPQSF_BACKEND", "").lower() != "python":
    try:
        from . import _kernels_cy as kernels  # noqa: F811

        BACKEND = "cython"
    except ImportError as exc:  # pragma: no cover - depends on build
        warnings.warn(f"tpqsf: compiled kernels unavailable ({exc}); using numpy fallback")
        kernels = _kernels_py
