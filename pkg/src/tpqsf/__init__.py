"""Student-t process quadrature filtering.

Subpackages: :mod:`tpqsf.stats`, :mod:`tpqsf.kernels`, :mod:`tpqsf.quadrature`,
:mod:`tpqsf.transforms`, :mod:`tpqsf.filters` and the benchmark
:mod:`tpqsf.harness`. ``BACKEND`` names the active kernel core.
"""

from ._backend import BACKEND

__version__ = "0.1.0"
__all__ = ["BACKEND", "__version__"]
