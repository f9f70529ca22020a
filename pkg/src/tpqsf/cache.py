"""Memory and on-disk cache of kernel expectations.

Entries are keyed by the kernel parameters, a hash of the unit point set, the
input dof, the estimator and its sample count and seed. On disk each entry is
an ``.npz`` file next to a ``manifest.json`` that lists the key fields.
"""

import hashlib
import json
import os

import numpy as np

from .kernels import DEFAULT_MC_SAMPLES, KernelExpectations, RbfParams, kernel_expectations

MANIFEST = "manifest.json"


def points_hash(points):
    a = np.ascontiguousarray(np.asarray(points, dtype=np.float64))
    h = hashlib.sha256(str(a.shape).encode())
    h.update(a.tobytes())
    return h.hexdigest()[:16]


def _dof_repr(dof):
    return "inf" if np.isinf(dof) else repr(float(dof))


def expectation_key(theta, points, input_dof, method, n_samples, seed):
    fields = {
        "theta": [float(t) for t in np.ravel(theta)],
        "points": points_hash(points),
        "dof": _dof_repr(input_dof),
        "method": method,
        "n_samples": int(n_samples),
        "seed": int(seed),
    }
    text = json.dumps(fields, sort_keys=True)
    return hashlib.sha256(text.encode()).hexdigest()[:20], fields


class ExpectationCache:
    """Look up or compute :class:`~tpqsf.kernels.KernelExpectations`.

    Parameters
    ----------
    directory : str or None
        Where to persist entries. ``None`` keeps the cache in memory only.
    """

    def __init__(self, directory=None):
        self.directory = directory
        self._mem = {}
        self._manifest = {}
        if directory is not None:
            os.makedirs(directory, exist_ok=True)
            path = os.path.join(directory, MANIFEST)
            if os.path.exists(path):
                with open(path, encoding="utf-8") as fh:
                    self._manifest = json.load(fh)

    def __len__(self):
        return len(set(self._mem) | set(self._manifest))

    def get(self, theta, points, input_dof, method="auto", n_samples=DEFAULT_MC_SAMPLES, seed=0):
        key, fields = expectation_key(theta, points, input_dof, method, n_samples, seed)
        if key in self._mem:
            return self._mem[key]
        ke = self._load(key)
        if ke is None:
            p = RbfParams.from_theta(theta)
            ke = kernel_expectations(p, points, input_dof, method=method, n_samples=n_samples, seed=seed)
            self._store(key, fields, ke)
        self._mem[key] = ke
        return ke

    def _load(self, key):
        if self.directory is None or key not in self._manifest:
            return None
        path = os.path.join(self.directory, key + ".npz")
        if not os.path.exists(path):
            return None
        with np.load(path) as z:
            return KernelExpectations(
                q=z["q"], Qm=z["Qm"], Rm=z["Rm"], kbar=float(z["kbar"]), kbar2=float(z["kbar2"]),
                input_dof=float(z["input_dof"]), mc_samples=int(z["mc_samples"]),
                seed=self._manifest[key]["seed"], q_se=z["q_se"], Qm_se=z["Qm_se"],
                Rm_se=z["Rm_se"], kbar2_se=float(z["kbar2_se"]),
            )

    def _store(self, key, fields, ke):
        if self.directory is None:
            return
        np.savez(
            os.path.join(self.directory, key + ".npz"),
            q=ke.q, Qm=ke.Qm, Rm=ke.Rm, kbar=ke.kbar, kbar2=ke.kbar2, input_dof=ke.input_dof,
            mc_samples=ke.mc_samples, q_se=ke.q_se, Qm_se=ke.Qm_se, Rm_se=ke.Rm_se, kbar2_se=ke.kbar2_se,
        )
        self._manifest[key] = fields
        tmp = os.path.join(self.directory, MANIFEST + ".tmp")
        with open(tmp, "w", encoding="utf-8") as fh:
            json.dump(self._manifest, fh, sort_keys=True, indent=2)
        os.replace(tmp, os.path.join(self.directory, MANIFEST))
