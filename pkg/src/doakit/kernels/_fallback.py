"""Pure-numpy implementations of the hot scan kernels.

Both kernels evaluate the concentrated ML objective on a ULA segment whose
element i carries phase ``omega * (offset + i)`` with ``omega = 2 pi
(d/lambda) sin(theta)``.  Degenerate candidates come back as NaN so callers
can drop them from an argmax without branching.
"""

from __future__ import annotations

import numpy as np

RCOND_GUARD = 1e-12
NULL_GUARD = 1e-12


def _steering_batch(omegas: np.ndarray, n: int, offset: int) -> np.ndarray:
    """Steering vectors for a (...,) array of spatial frequencies -> (..., n)."""
    idx = offset + np.arange(n)
    return np.exp(1j * np.multiply.outer(omegas, idx))


def batch_objective(r: np.ndarray, omegas: np.ndarray, offset: int = 0) -> np.ndarray:
    """tr{P_A R} for a batch of candidate angle tuples.

    Parameters
    ----------
    r : (n, n) complex Hermitian matrix.
    omegas : (T, Q) spatial frequencies, one row per candidate tuple.
    offset : global index of the segment's first element.

    Returns
    -------
    (T,) float64; NaN where A^H A has reciprocal condition number < 1e-12.
    """
    r = np.asarray(r, dtype=np.complex128)
    omegas = np.atleast_2d(np.asarray(omegas, dtype=np.float64))
    n = r.shape[0]
    t, q = omegas.shape
    if t == 0:
        return np.empty(0)

    a = _steering_batch(omegas, n, offset).transpose(0, 2, 1)  # (T, n, Q)
    gram = np.einsum("tnp,tnq->tpq", a.conj(), a)
    eigvals = np.linalg.eigvalsh(gram)
    with np.errstate(divide="ignore", invalid="ignore"):
        rcond = eigvals[:, 0] / eigvals[:, -1]
    valid = (eigvals[:, 0] > 0) & (rcond >= RCOND_GUARD)

    out = np.full(t, np.nan)
    if np.any(valid):
        av = a[valid]
        ra = np.einsum("nm,tmq->tnq", r, av)
        quad = np.einsum("tnp,tnq->tpq", av.conj(), ra)
        sol = np.linalg.solve(gram[valid], quad)
        out[valid] = np.einsum("tqq->t", sol).real
    return out


def scan_objective(r: np.ndarray, omega_fixed: np.ndarray, omega_grid: np.ndarray,
                   offset: int = 0) -> np.ndarray:
    """1-D objective b^H R b over a grid, with the other sources held fixed.

    b is the unit vector obtained by projecting the candidate steering vector
    onto the orthogonal complement of the fixed manifold.  Grid points whose
    projection is numerically null (candidate inside the fixed span) are NaN;
    an ill-conditioned fixed manifold yields an all-NaN scan.
    """
    r = np.asarray(r, dtype=np.complex128)
    omega_fixed = np.asarray(omega_fixed, dtype=np.float64).ravel()
    omega_grid = np.asarray(omega_grid, dtype=np.float64).ravel()
    n = r.shape[0]
    g = omega_grid.size
    if g == 0:
        return np.empty(0)

    if omega_fixed.size:
        a_fixed = _steering_batch(omega_fixed, n, offset).T  # (n, Qf)
        gram = a_fixed.conj().T @ a_fixed
        eigvals = np.linalg.eigvalsh(gram)
        if eigvals[0] <= 0 or eigvals[0] / eigvals[-1] < RCOND_GUARD:
            return np.full(g, np.nan)
        proj = a_fixed @ np.linalg.solve(gram, a_fixed.conj().T)
        complement = np.eye(n) - proj
    else:
        complement = np.eye(n)

    a_grid = _steering_batch(omega_grid, n, offset).T  # (n, G)
    c = complement @ a_grid
    norms_sq = np.einsum("ng,ng->g", c.conj(), c).real
    out = np.full(g, np.nan)
    ok = norms_sq >= NULL_GUARD * n
    if np.any(ok):
        rc = r @ c[:, ok]
        quad = np.einsum("ng,ng->g", c[:, ok].conj(), rc).real
        out[ok] = quad / norms_sq[ok]
    return out
