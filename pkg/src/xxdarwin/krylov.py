"""Lanczos-Krylov propagation ``exp(-i H t) v`` for sparse Hermitian H."""
from __future__ import annotations

import numpy as np
from scipy.linalg import eigh_tridiagonal


def _lanczos(matvec, v: np.ndarray, m: int):
    """Lanczos with full re-orthogonalization.

    Returns the basis ``V`` (n, k), diagonal ``alpha``, off-diagonal ``beta``
    (length k - 1) and the residual norm ``beta_k`` coupling out of the space.
    """
    n = v.size
    V = np.zeros((n, m), dtype=complex)
    alpha = np.zeros(m)
    beta = np.zeros(m)
    V[:, 0] = v
    k = m
    for j in range(m):
        w = matvec(V[:, j])
        alpha[j] = np.vdot(V[:, j], w).real
        w = w - alpha[j] * V[:, j]
        if j > 0:
            w = w - beta[j - 1] * V[:, j - 1]
        # two passes of classical Gram-Schmidt keep the basis orthonormal to ~eps
        for _ in range(2):
            w = w - V[:, : j + 1] @ (V[:, : j + 1].conj().T @ w)
        beta[j] = np.linalg.norm(w)
        if j + 1 == m:
            break
        if beta[j] < 1e-13:
            k = j + 1
            break
        V[:, j + 1] = w / beta[j]
    return V[:, :k], alpha[:k], beta[: k - 1], float(beta[k - 1])


def expm_krylov(matvec, v: np.ndarray, t: float, m: int = 30, tol: float = 1e-12, norm_hint: float | None = None):
    """Propagate ``v`` by ``exp(-i H t)`` with adaptive substeps.

    Each substep builds an ``m``-dimensional Lanczos space and shrinks the
    step until the a-posteriori error estimate
    ``beta_m * |e_m^T exp(-i T tau) e_1|`` is below ``tol``.

    Returns the propagated vector and the number of substeps taken.
    """
    v = np.asarray(v, dtype=complex)
    if t == 0:
        return v.copy(), 0
    sign = 1.0 if t > 0 else -1.0
    remaining = abs(t)
    nrm = np.linalg.norm(v)
    w = v / nrm
    tau = remaining if norm_hint is None else min(remaining, 10.0 / max(norm_hint, 1e-300))
    steps = 0
    while remaining > 0:
        V, alpha, beta, resid = _lanczos(matvec, w, m)
        k = alpha.size
        if k == 1:
            evals, evecs = alpha, np.ones((1, 1))
        else:
            evals, evecs = eigh_tridiagonal(alpha, beta)
        tau = min(tau, remaining)
        while True:
            y = evecs @ (np.exp(-1j * sign * evals * tau) * evecs[0].conj())
            # an exhausted Krylov space is invariant: the step is exact
            err = resid * abs(y[-1]) if k == m else 0.0
            if err <= tol or tau < 1e-14:
                break
            tau *= 0.5
        w = V @ y
        w /= np.linalg.norm(w)
        remaining -= tau
        if remaining < 1e-15 * abs(t):
            remaining = 0.0
        steps += 1
        if err < 0.01 * tol:
            tau *= 2.0
    return nrm * w, steps
