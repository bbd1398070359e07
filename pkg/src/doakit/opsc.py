"""Overlapped-partition subarray coherent combining (OPSC).

Pipeline: split the array into K overlapped subarrays, run Root-MUSIC on
each subarray's sample covariance for a coarse estimate, average the K
estimates, then refine with a few AP sweeps restricted to a narrow candidate
set around the average.  The refinement always runs on the full-array
covariance; the subarrays exist only to make the coarse stage cheap.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .arrays import SnapshotBlock, SubarrayPlan, extract_subarray, sample_covariance
from .estimators import AngleEstimate, ApSettings, ap_refine, root_music
from .exceptions import (
    ArcsinDomainError,
    ConditioningError,
    PipelineError,
    RootDegeneracyError,
    ValidationError,
)

WEIGHT_SUM_TOL = 1e-12

# estimation failures that invalidate one subarray without aborting the run
_COARSE_FAILURES = (RootDegeneracyError, ArcsinDomainError, ConditioningError)


@dataclass(frozen=True)
class CombineWeights:
    """Non-negative per-subarray weights summing to 1."""

    weights: tuple[float, ...]

    def __post_init__(self):
        w = tuple(float(x) for x in self.weights)
        object.__setattr__(self, "weights", w)
        if not w:
            raise ValidationError("weights must be non-empty")
        if any(x < 0 for x in w):
            raise ValidationError("weights must be non-negative")
        if abs(sum(w) - 1.0) > WEIGHT_SUM_TOL:
            raise ValidationError(f"weights sum to {sum(w)!r}, expected 1")

    @classmethod
    def uniform(cls, k: int) -> "CombineWeights":
        if k < 1:
            raise ValidationError("k must be >= 1")
        return cls(weights=(1.0 / k,) * k)

    def __len__(self) -> int:
        return len(self.weights)


@dataclass(frozen=True)
class CandidateSet:
    """Narrow per-source search grids around a coarse estimate.

    Each dimension holds 2hp+1 points spanning [center - h*sigma,
    center + h*sigma] with step sigma/p, so the total 1-D point count is
    Q(2hp+1).  Values falling outside [-90, 90] are clamped to the boundary
    (point count is preserved; ``clipped`` records that it happened).
    """

    grids_deg: tuple[tuple[float, ...], ...]
    centers: AngleEstimate
    half_width_steps: int
    refine_factor: int
    base_step_deg: float
    clipped: bool = False

    def __post_init__(self):
        if self.half_width_steps < 1 or self.refine_factor < 1:
            raise ValidationError("h and p must be >= 1")
        if self.base_step_deg <= 0:
            raise ValidationError("sigma must be > 0")
        expected = self.points_per_dim
        if len(self.grids_deg) != self.centers.n_sources:
            raise ValidationError("one grid per source required")
        for center, grid in zip(self.centers.angles_deg, self.grids_deg):
            if len(grid) != expected:
                raise ValidationError(f"each dimension needs {expected} points")
            half = self.half_width_steps * self.base_step_deg
            if min(grid) < max(center - half, -90.0) - 1e-9 \
                    or max(grid) > min(center + half, 90.0) + 1e-9:
                raise ValidationError("grid exceeds the candidate box")

    @property
    def points_per_dim(self) -> int:
        return 2 * self.half_width_steps * self.refine_factor + 1

    @property
    def total_points(self) -> int:
        """Total 1-D scan points, the epsilon-tilde of the cost model."""
        return self.centers.n_sources * self.points_per_dim


def build_candidate_set(center: AngleEstimate, sigma: float, h: int,
                        p: int) -> CandidateSet:
    """Grids of 2hp+1 points, step sigma/p, centered per source angle."""
    if h < 1 or p < 1:
        raise ValidationError("h and p must be >= 1")
    if sigma <= 0:
        raise ValidationError("sigma must be > 0")
    steps = (np.arange(2 * h * p + 1) - h * p) * (sigma / p)
    grids = []
    clipped = False
    for angle in center.angles_deg:
        grid = angle + steps
        lo, hi = grid[0], grid[-1]
        if lo < -90.0 or hi > 90.0:
            clipped = True
            grid = np.clip(grid, -90.0, 90.0)
        grids.append(tuple(float(g) for g in grid))
    return CandidateSet(grids_deg=tuple(grids), centers=center,
                        half_width_steps=h, refine_factor=p,
                        base_step_deg=sigma, clipped=clipped)


def opsc_coarse(block: SnapshotBlock, plan: SubarrayPlan, q: int,
                spacing_ratio: float = 0.5) -> list[AngleEstimate | None]:
    """Per-subarray coarse estimates: extract, sample covariance, Root-MUSIC.

    Returns one entry per subarray in index order; a subarray whose rooting
    degenerates yields None instead of aborting the whole pipeline (callers
    drop it and renormalize the combining weights).
    """
    estimates: list[AngleEstimate | None] = []
    for k in range(plan.k_subarrays):
        sub = extract_subarray(block, plan, k)
        cov = sample_covariance(sub)
        try:
            estimates.append(root_music(cov, q, spacing_ratio))
        except _COARSE_FAILURES:
            estimates.append(None)
    return estimates


def coherent_combine(estimates, weights: CombineWeights) -> AngleEstimate:
    """Weighted element-wise average of K sorted estimates.

    Pairing across subarrays is by sort order: source i of one estimate
    averages with source i of every other.  That is the right pairing when
    source separation exceeds the coarse error and a documented failure mode
    when it does not.
    """
    ests = list(estimates)
    if not ests:
        raise ValidationError("no estimates to combine")
    if len(ests) != len(weights):
        raise ValidationError(f"{len(ests)} estimates but {len(weights)} weights")
    q = ests[0].n_sources
    for est in ests:
        if est.n_sources != q:
            raise ValidationError("estimates disagree on source count")
        if any(b < a for a, b in zip(est.angles_deg, est.angles_deg[1:])):
            raise ValidationError("estimates must be sorted ascending")
    stacked = np.array([est.angles_deg for est in ests])
    combined = np.asarray(weights.weights) @ stacked
    return AngleEstimate(angles_deg=tuple(float(a) for a in combined),
                         source="opsc-combine")


def opsc_estimate(block: SnapshotBlock, plan: SubarrayPlan, q: int,
                  sigma: float = 1.0, h: int = 2, p: int = 10,
                  ap_settings: ApSettings | None = None,
                  spacing_ratio: float = 0.5) -> AngleEstimate:
    """Full OPSC pipeline on one snapshot block.

    Coarse per-subarray Root-MUSIC, uniform-weight combining (failed
    subarrays dropped, weights renormalized), candidate set of half-width
    h*sigma and step sigma/p, then AP refinement of the full-array sample
    covariance over that set.
    """
    coarse = opsc_coarse(block, plan, q, spacing_ratio)
    valid = [est for est in coarse if est is not None]
    if not valid:
        raise PipelineError("every subarray failed its coarse estimate")
    combined = coherent_combine(valid, CombineWeights.uniform(len(valid)))
    candidates = build_candidate_set(combined, sigma, h, p)
    if ap_settings is None:
        ap_settings = ApSettings(max_iters=20,
                                 tol_deg=max(sigma / (2.0 * p), 1e-9),
                                 init="given")
    full_cov = sample_covariance(block)
    refined = ap_refine(full_cov, combined, candidates.grids_deg, ap_settings,
                        spacing_ratio, offset=block.offset)
    return AngleEstimate(angles_deg=refined.angles_deg, source="opsc",
                         converged=refined.converged,
                         objective_trace=refined.objective_trace)
