"""Pure-numpy implementations of the hot RBF kernels.

Selected by :mod:`tpqsf._backend` when the compiled extension is unavailable.
Signatures mirror ``_kernels_cy`` exactly.
"""

import numpy as np


def rbf_cross(X1, X2, alpha, inv_ell):
    """``alpha**2 * exp(-0.5 * |(x1 - x2) / ell|^2)`` for all row pairs; shape ``(n1, n2)``."""
    D = (X1[:, None, :] - X2[None, :, :]) * inv_ell
    return alpha * alpha * np.exp(-0.5 * np.einsum("ijk,ijk->ij", D, D))


def mc_accumulate(xi, eta, U, alpha, inv_ell):
    """Antithetic sums for the kernel-expectation estimators over one chunk.

    For each base draw ``xi_j`` the pair ``(xi_j, -xi_j)`` is averaged before
    accumulating, so every returned sum runs over pair means.

    Parameters
    ----------
    xi, eta : (m, d) ndarray
        Base draws and an independent second set (used for ``E[k(x, x')]``).
    U : (N, d) ndarray
        Unit sigma-points as rows.

    Returns
    -------
    tuple
        ``(s_q, ss_q, s_Q, ss_Q, s_R, ss_R, s_k2, ss_k2)``: sums and sums of
        squares of the pair means for ``q`` (N,), ``Q`` (N, N), ``R`` (d, N)
        and ``kbar2`` (scalar).
    """
    kp = rbf_cross(xi, U, alpha, inv_ell)
    km = rbf_cross(-xi, U, alpha, inv_ell)
    aq = 0.5 * (kp + km)
    aQ = 0.5 * (kp[:, :, None] * kp[:, None, :] + km[:, :, None] * km[:, None, :])
    aR = 0.5 * xi[:, :, None] * (kp - km)[:, None, :]
    dp = ((xi - eta) * inv_ell) ** 2
    dm = ((-xi - eta) * inv_ell) ** 2
    a2 = 0.5 * alpha * alpha * (np.exp(-0.5 * dp.sum(1)) + np.exp(-0.5 * dm.sum(1)))
    return (
        aq.sum(0), (aq * aq).sum(0),
        aQ.sum(0), (aQ * aQ).sum(0),
        aR.sum(0), (aR * aR).sum(0),
        float(a2.sum()), float((a2 * a2).sum()),
    )
