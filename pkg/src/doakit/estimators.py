"""Classical DOA estimators: ML grid search, AP refinement, Root-MUSIC.

The maximum-likelihood criterion throughout is tr{P_A(theta) R} with
P_A = A (A^H A)^{-1} A^H.  The alternating-projection refinement replaces
the Q-dimensional grid search by cyclic 1-D scans of

    b^H(theta_q, Theta_(q)) R b(theta_q, Theta_(q)),

where b is the unit vector obtained by projecting a(theta_q) onto the
orthogonal complement of the manifold of the other Q-1 angles.  Every argmax
in this module breaks ties toward the lowest angle so results are
reproducible.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from itertools import combinations, islice

import numpy as np

from . import kernels
from .arrays import CovarianceMatrix, steering_matrix, steering_vector
from .exceptions import (
    ArcsinDomainError,
    ConditioningError,
    GridSizeError,
    RootDegeneracyError,
    ValidationError,
)

RCOND_MIN = 1e-12
GRID_CANDIDATE_LIMIT = 10 ** 8

AP_INIT_MODES = ("given", "sequential")


@dataclass(frozen=True)
class GridSpec:
    """Uniform angle grid [lo, hi] with step sigma, all in degrees."""

    lo_deg: float
    hi_deg: float
    step_deg: float

    def __post_init__(self):
        if not self.lo_deg < self.hi_deg:
            raise ValidationError("grid requires lo_deg < hi_deg")
        if self.step_deg <= 0:
            raise ValidationError("grid step must be > 0")

    @property
    def n_points(self) -> int:
        return int(math.floor((self.hi_deg - self.lo_deg) / self.step_deg + 1e-9)) + 1

    def points(self) -> np.ndarray:
        return self.lo_deg + self.step_deg * np.arange(self.n_points)


@dataclass(frozen=True)
class ApSettings:
    """Alternating-projection loop controls."""

    max_iters: int = 30
    tol_deg: float = 1e-3
    init: str = "given"

    def __post_init__(self):
        if self.max_iters < 1:
            raise ValidationError("max_iters must be >= 1")
        if self.tol_deg <= 0:
            raise ValidationError("tol_deg must be > 0")
        if self.init not in AP_INIT_MODES:
            raise ValidationError(f"init must be one of {AP_INIT_MODES}")


@dataclass(frozen=True)
class EigenDecomposition:
    """Hermitian eigensystem split into signal and noise subspaces."""

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray
    signal_dim: int

    def __post_init__(self):
        vals = np.asarray(self.eigenvalues, dtype=np.float64)
        vecs = np.asarray(self.eigenvectors, dtype=np.complex128)
        object.__setattr__(self, "eigenvalues", vals)
        object.__setattr__(self, "eigenvectors", vecs)
        if np.any(np.diff(vals) > 0):
            raise ValidationError("eigenvalues must be sorted descending")
        if not 0 <= self.signal_dim <= vals.size:
            raise ValidationError("signal_dim out of range")
        gram = vecs.conj().T @ vecs
        if np.linalg.norm(gram - np.eye(vals.size)) > 1e-10 * vals.size:
            raise ValidationError("eigenvectors are not orthonormal")

    @property
    def signal_subspace(self) -> np.ndarray:
        return self.eigenvectors[:, :self.signal_dim]

    @property
    def noise_subspace(self) -> np.ndarray:
        return self.eigenvectors[:, self.signal_dim:]


@dataclass(frozen=True)
class AngleEstimate:
    """Sorted source angles in degrees plus the stage that produced them.

    ``converged`` is False when an iterative stage hit its iteration cap
    before meeting tolerance; ``objective_trace`` records the ML objective
    after each sweep for stages that iterate.
    """

    angles_deg: tuple[float, ...]
    source: str
    converged: bool = True
    objective_trace: tuple[float, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "angles_deg",
                           tuple(float(a) for a in self.angles_deg))
        object.__setattr__(self, "objective_trace",
                           tuple(float(v) for v in self.objective_trace))

    @property
    def n_sources(self) -> int:
        return len(self.angles_deg)


def _entries(r) -> np.ndarray:
    if isinstance(r, CovarianceMatrix):
        return r.entries
    return np.asarray(r, dtype=np.complex128)


def _omega(angles_deg, spacing_ratio: float) -> np.ndarray:
    """Spatial frequency 2 pi (d/lambda) sin(theta) per angle."""
    return 2.0 * np.pi * spacing_ratio * np.sin(np.deg2rad(np.asarray(angles_deg,
                                                                      dtype=float)))


def projection_matrix(angles_deg, n: int, spacing_ratio: float = 0.5,
                      offset: int = 0) -> np.ndarray:
    """Orthogonal projector onto the span of the manifold A(theta).

    Raises ConditioningError when A^H A has reciprocal condition number
    below 1e-12, which is what closely spaced candidate angles look like.
    """
    angles = [float(a) for a in angles_deg]
    if len(set(angles)) != len(angles):
        raise ValidationError("candidate angles must be distinct")
    if len(angles) >= n:
        raise ValidationError("need fewer candidate angles than elements")
    a = steering_matrix(angles, n, spacing_ratio, offset)
    gram = a.conj().T @ a
    eigvals = np.linalg.eigvalsh(gram)
    if eigvals[0] <= 0 or eigvals[0] / eigvals[-1] < RCOND_MIN:
        raise ConditioningError(
            f"manifold Gram matrix is numerically singular for angles {angles}")
    return a @ np.linalg.solve(gram, a.conj().T)


def ml_objective(r, angles_deg, spacing_ratio: float = 0.5,
                 offset: int = 0) -> float:
    """Concentrated likelihood tr{P_A R} at one angle tuple."""
    entries = _entries(r)
    p = projection_matrix(angles_deg, entries.shape[0], spacing_ratio, offset)
    val = complex(np.trace(p @ entries))
    trace = abs(float(np.trace(entries).real))
    if abs(val.imag) > 1e-9 * max(trace, 1.0):
        raise ValidationError("objective has a non-negligible imaginary part; "
                              "covariance input is not Hermitian enough")
    return float(val.real)


def ml_grid_search(r, grid: GridSpec, q: int, spacing_ratio: float = 0.5,
                   offset: int = 0) -> AngleEstimate:
    """Exhaustive ML search over all q-subsets of the grid.

    This is the oracle baseline: cost grows as C(points, q), so a candidate
    explosion guard refuses points^q > 1e8 up front.  Intended for small
    problems only; OPSC exists because this is hopeless at scale.
    """
    if q < 1:
        raise ValidationError("q must be >= 1")
    points = grid.points()
    if points.size < q:
        raise ValidationError("grid must have at least q points")
    if float(points.size) ** q > GRID_CANDIDATE_LIMIT:
        raise GridSizeError(
            f"{points.size} grid points with q={q} exceeds the candidate limit")

    entries = _entries(r)
    omega_points = _omega(points, spacing_ratio)

    combo_iter = combinations(range(points.size), q)
    best_val = -np.inf
    best_combo = None
    chunk = max(1, 65536 // max(q, 1))
    while True:
        block = list(islice(combo_iter, chunk))
        if not block:
            break
        idx = np.array(block, dtype=np.intp)
        vals = kernels.batch_objective(entries, omega_points[idx], offset)
        finite = np.where(np.isfinite(vals))[0]
        if finite.size == 0:
            continue
        local = finite[np.argmax(vals[finite])]
        # strict > keeps the first (lexicographically lowest) combination on ties
        if vals[local] > best_val:
            best_val = float(vals[local])
            best_combo = block[local]
    if best_combo is None:
        raise ConditioningError("no valid candidate tuple on the grid")
    angles = tuple(float(points[i]) for i in best_combo)
    return AngleEstimate(angles_deg=angles, source="ml-grid")


def _grids_per_dim(grid, q: int) -> list[np.ndarray]:
    """Normalize a GridSpec or a per-dimension sequence to q point arrays."""
    if isinstance(grid, GridSpec):
        pts = grid.points()
        return [pts] * q
    grids = list(grid)
    if len(grids) != q:
        raise ValidationError(f"need one grid per source, got {len(grids)} for q={q}")
    out = []
    for g in grids:
        pts = g.points() if isinstance(g, GridSpec) else np.asarray(g, dtype=float)
        if pts.size < 1:
            raise ValidationError("empty per-dimension grid")
        out.append(pts)
    return out


def sequential_init(r, grid, q: int, spacing_ratio: float = 0.5,
                    offset: int = 0) -> AngleEstimate:
    """Source-by-source initialization for the AP loop.

    Solves the 1-source problem on dimension 1's grid, then source 2 given
    source 1, and so on; each step is one projection scan.
    """
    entries = _entries(r)
    grids = _grids_per_dim(grid, q)
    chosen: list[float] = []
    for dim in range(q):
        omega_fixed = _omega(chosen, spacing_ratio)
        vals = kernels.scan_objective(entries, omega_fixed,
                                      _omega(grids[dim], spacing_ratio), offset)
        finite = np.where(np.isfinite(vals))[0]
        if finite.size == 0:
            raise ConditioningError("sequential initialization scan found no "
                                    "admissible grid point")
        best = finite[np.argmax(vals[finite])]
        chosen.append(float(grids[dim][best]))
    return AngleEstimate(angles_deg=tuple(sorted(chosen)), source="sequential-init")


def ap_refine(r, init: AngleEstimate | None, grid, settings: ApSettings,
              spacing_ratio: float = 0.5, offset: int = 0) -> AngleEstimate:
    """Cyclic 1-D maximization of the ML objective (coordinate ascent).

    ``grid`` is either one GridSpec shared by every dimension or a sequence
    of Q per-dimension grids (the narrow candidate sets use the latter).
    Each sweep rescans dimensions in order; the objective tr{P_A R} is
    non-decreasing across sweeps.  Stops when the largest per-sweep angle
    change drops below ``settings.tol_deg``; hitting max_iters first returns
    the best-so-far angles flagged unconverged.
    """
    entries = _entries(r)
    if not isinstance(grid, GridSpec):
        grid = list(grid)
    if settings.init == "sequential":
        if init is not None:
            q = init.n_sources
        elif not isinstance(grid, GridSpec):
            q = len(grid)
        else:
            raise ValidationError("sequential init with a shared grid cannot "
                                  "infer q; pass an init estimate or one grid "
                                  "per dimension")
        init = sequential_init(entries, grid, q, spacing_ratio, offset)
    if init is None:
        raise ValidationError("init estimate required when settings.init='given'")
    q = init.n_sources
    grids = _grids_per_dim(grid, q)
    current = list(init.angles_deg)
    for dim, (angle, pts) in enumerate(zip(current, grids)):
        if not pts.min() - 1e-9 <= angle <= pts.max() + 1e-9:
            raise ValidationError(
                f"init angle {angle} outside grid for dimension {dim}")

    omega_grids = [_omega(pts, spacing_ratio) for pts in grids]
    trace: list[float] = []
    converged = False
    for _ in range(settings.max_iters):
        max_change = 0.0
        for dim in range(q):
            others = current[:dim] + current[dim + 1:]
            vals = kernels.scan_objective(entries, _omega(others, spacing_ratio),
                                          omega_grids[dim], offset)
            finite = np.where(np.isfinite(vals))[0]
            if finite.size == 0:
                raise ConditioningError(
                    "AP scan found no admissible grid point; fixed angles are "
                    "numerically degenerate")
            best = finite[np.argmax(vals[finite])]
            new_angle = float(grids[dim][best])
            max_change = max(max_change, abs(new_angle - current[dim]))
            current[dim] = new_angle
        sweep_obj = kernels.batch_objective(
            entries, _omega(current, spacing_ratio)[None, :], offset)[0]
        trace.append(float(sweep_obj))
        if max_change < settings.tol_deg:
            converged = True
            break
    return AngleEstimate(angles_deg=tuple(sorted(current)), source="ml-ap",
                         converged=converged, objective_trace=tuple(trace))


def hermitian_eig(r, signal_dim: int) -> EigenDecomposition:
    """Eigendecomposition with eigenvalues descending and a signal/noise split."""
    entries = _entries(r)
    scale = np.linalg.norm(entries)
    if scale > 0 and np.linalg.norm(entries - entries.conj().T) > 1e-10 * scale:
        raise ValidationError("matrix is not Hermitian within tolerance")
    vals, vecs = np.linalg.eigh(0.5 * (entries + entries.conj().T))
    order = np.argsort(vals)[::-1]
    return EigenDecomposition(eigenvalues=vals[order], eigenvectors=vecs[:, order],
                              signal_dim=signal_dim)


_POLISH_CAP_RAD = 1e-6


def _polish_arguments(pos: np.ndarray, args: np.ndarray) -> np.ndarray:
    """Newton-polish root arguments on the unit circle.

    The null spectrum D(phi) = sum_l c_l e^{j l phi} is real with a quadratic
    minimum at each signal argument, so a few Newton steps on D' recover the
    argument to machine precision where the companion-matrix eigensolve left
    ~sqrt(eps) radial splitting residue.  Strictly a numerical cleanup: any
    cumulative shift beyond 1e-6 rad is discarded and the plain root argument
    kept, so noisy-data estimates are never pulled toward the spectral peak.
    """
    l = np.arange(1, pos.size)
    cl = pos[1:]
    out = np.empty_like(args)
    for i, phi0 in enumerate(args):
        phi = phi0
        for _ in range(4):
            e = cl * np.exp(1j * l * phi)
            d1 = -2.0 * np.sum(l * e.imag)
            d2 = -2.0 * np.sum(l * l * e.real)
            if d2 <= 0:
                break
            step = d1 / d2
            phi -= step
            if abs(step) < 1e-15:
                break
        out[i] = phi if abs(phi - phi0) <= _POLISH_CAP_RAD else phi0
    return out


def root_music(r, q: int, spacing_ratio: float = 0.5) -> AngleEstimate:
    """Root-MUSIC: angles from the roots of the noise-subspace polynomial.

    The polynomial sum_l c_l z^l with c_l the l-th diagonal sum of
    C = U_N U_N^H is conjugate-symmetric (c_{-l} = conj(c_l)), so its roots
    come in conjugate-reciprocal pairs (z, 1/conj(z)) sharing one argument.
    The mirror half of the coefficients is constructed by conjugation rather
    than summed separately, which keeps that pairing exact in floating point;
    on-circle double roots then split radially instead of smearing in angle.
    Selection: the q roots strictly inside the unit circle with modulus
    closest to 1; each maps to arcsin(arg(z) / (2 pi spacing_ratio)).
    """
    entries = _entries(r)
    m = entries.shape[0]
    if not 1 <= q < m:
        raise ValidationError("require 1 <= q < matrix dimension")
    if isinstance(r, CovarianceMatrix) and r.n_averaged is not None \
            and r.n_averaged < q:
        raise ValidationError("covariance averaged over fewer snapshots than "
                              "sources; rank cannot support q")

    eig = hermitian_eig(entries, signal_dim=q)
    u_n = eig.noise_subspace
    c = u_n @ u_n.conj().T

    # c_l for l >= 0; highest-power-first coefficient vector is
    # [c_{M-1}, ..., c_1, c_0, conj(c_1), ..., conj(c_{M-1})].
    pos = np.array([np.trace(c, offset=l) for l in range(m)])
    pos[0] = pos[0].real
    coeffs = np.concatenate([pos[::-1][:-1], [pos[0]], np.conj(pos[1:])])
    roots = np.roots(coeffs)

    inside = roots[np.abs(roots) < 1.0]
    if inside.size < q:
        raise RootDegeneracyError(
            f"only {inside.size} roots strictly inside the unit circle, need {q}")
    picked = inside[np.argsort(1.0 - np.abs(inside))[:q]]

    args = _polish_arguments(pos, np.angle(picked))
    sin_vals = args / (2.0 * np.pi * spacing_ratio)
    bad = np.where(np.abs(sin_vals) > 1.0)[0]
    if bad.size:
        detail = ", ".join(f"arg(z)={args[i]:+.6f} rad -> "
                           f"sin(theta)={sin_vals[i]:+.6f}" for i in bad)
        raise ArcsinDomainError(
            f"{bad.size} root(s) map outside the arcsin domain: {detail}")
    angles = np.degrees(np.arcsin(sin_vals))
    return AngleEstimate(angles_deg=tuple(sorted(float(a) for a in angles)),
                         source="root-music")
