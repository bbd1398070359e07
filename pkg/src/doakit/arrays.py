"""ULA geometry, steering vectors, subarray partitioning and snapshot synthesis.

Conventions used throughout the package:

* Angles are measured from array broadside, in degrees, inside [-90, 90].
* Element ``i`` of a (sub)array sits at global index ``offset + i``; phase is
  always referenced to global element 0 (the left end of the full array), so
  a subarray steering vector keeps its global phase offset.
* The per-antenna SNR convention is total signal power over noise power:
  every source has unit power, so ``sigma_w^2 = Q / 10**(snr_db/10)``.
  ``snr_db = inf`` disables noise entirely.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

from .exceptions import AngleDomainError, PartitionError, ValidationError

SOURCE_MODELS = ("uncorrelated-gaussian", "coherent")

HERMITIAN_RTOL = 1e-12
PSD_RTOL = 1e-10


@dataclass(frozen=True)
class ArrayConfig:
    """Uniform linear array geometry.

    Parameters
    ----------
    n_elements : int
        Number of antenna elements (N >= 2).
    spacing_ratio : float
        Element spacing over carrier wavelength, d / lambda.
    carrier_wavelength : float
        Informational only; all phase math uses ``spacing_ratio``.
    """

    n_elements: int
    spacing_ratio: float = 0.5
    carrier_wavelength: float = 1.0

    def __post_init__(self):
        if self.n_elements < 2:
            raise ValidationError("n_elements must be >= 2")
        if self.spacing_ratio <= 0:
            raise ValidationError("spacing_ratio must be > 0")


@dataclass(frozen=True)
class SubarrayPlan:
    """Overlapped partition of an N-element ULA into K subarrays of M elements.

    Adjacent subarrays share ``overlap`` elements, so subarray k starts at
    global element ``k * (m_elements - overlap)``.
    """

    m_elements: int
    overlap: int
    k_subarrays: int
    offsets: tuple[int, ...]

    def __post_init__(self):
        if not 0 <= self.overlap < self.m_elements:
            raise ValidationError("overlap must satisfy 0 <= overlap < m_elements")
        if self.k_subarrays < 1:
            raise ValidationError("k_subarrays must be >= 1")
        if len(self.offsets) != self.k_subarrays:
            raise ValidationError("offsets length must equal k_subarrays")
        stride = self.m_elements - self.overlap
        if any(o != k * stride for k, o in enumerate(self.offsets)):
            raise ValidationError("offsets must be k * (m_elements - overlap)")


@dataclass(frozen=True)
class SourceScene:
    """Emitter configuration for one synthesized snapshot block."""

    angles_deg: tuple[float, ...]
    snr_db: float
    n_snapshots: int
    seed: int = 0
    source_model: str = "uncorrelated-gaussian"

    def __post_init__(self):
        angles = tuple(float(a) for a in self.angles_deg)
        object.__setattr__(self, "angles_deg", angles)
        if len(angles) < 1:
            raise ValidationError("at least one source angle required")
        if any(not -90.0 < a < 90.0 for a in angles):
            raise AngleDomainError("source angles must lie strictly inside (-90, 90)")
        if any(b <= a for a, b in zip(angles, angles[1:])):
            raise ValidationError("source angles must be strictly ascending")
        if self.n_snapshots < 1:
            raise ValidationError("n_snapshots must be >= 1")
        if self.seed < 0:
            raise ValidationError("seed must be a non-negative integer")
        if self.source_model not in SOURCE_MODELS:
            raise ValidationError(f"source_model must be one of {SOURCE_MODELS}")

    @property
    def n_sources(self) -> int:
        return len(self.angles_deg)

    @property
    def noise_variance(self) -> float:
        """Noise power sigma_w^2 under the unit-power-per-source convention."""
        if math.isinf(self.snr_db):
            return 0.0
        return self.n_sources / 10.0 ** (self.snr_db / 10.0)


@dataclass(frozen=True)
class SnapshotBlock:
    """Complex baseband samples of a (sub)array, elements x snapshots."""

    samples: np.ndarray
    scene: SourceScene
    offset: int = 0

    def __post_init__(self):
        samples = np.asarray(self.samples, dtype=np.complex128)
        object.__setattr__(self, "samples", samples)
        if samples.ndim != 2:
            raise ValidationError("samples must be a 2-D elements x snapshots matrix")
        if samples.shape[1] != self.scene.n_snapshots:
            raise ValidationError("snapshot count does not match scene")
        if self.offset < 0:
            raise ValidationError("offset must be non-negative")

    @property
    def n_elements(self) -> int:
        return self.samples.shape[0]

    @property
    def n_snapshots(self) -> int:
        return self.samples.shape[1]


@dataclass(frozen=True)
class CovarianceMatrix:
    """Hermitian PSD sample covariance of a (sub)array.

    ``n_averaged`` is the number of snapshots averaged; ``None`` marks an
    analytic (infinite-snapshot) covariance.
    """

    entries: np.ndarray
    n_averaged: int | None = None

    def __post_init__(self):
        entries = np.asarray(self.entries, dtype=np.complex128)
        object.__setattr__(self, "entries", entries)
        if entries.ndim != 2 or entries.shape[0] != entries.shape[1]:
            raise ValidationError("covariance must be square")
        scale = np.linalg.norm(entries)
        if scale > 0:
            herm_defect = np.linalg.norm(entries - entries.conj().T)
            if herm_defect > HERMITIAN_RTOL * scale:
                raise ValidationError("covariance is not Hermitian within tolerance")
        trace = float(np.trace(entries).real)
        eigvals = np.linalg.eigvalsh(entries)
        if eigvals.size and eigvals[0] < -PSD_RTOL * max(trace, 0.0):
            raise ValidationError("covariance is not positive semidefinite")

    @property
    def n_elements(self) -> int:
        return self.entries.shape[0]


def steering_vector(theta_deg: float, n: int, spacing_ratio: float = 0.5,
                    offset: int = 0) -> np.ndarray:
    """Steering vector of an n-element ULA segment starting at global ``offset``.

    Entry i equals ``exp(j 2 pi spacing_ratio (offset + i) sin(theta))``, so
    every entry has unit modulus and the phase reference is global element 0.
    """
    if not -90.0 <= theta_deg <= 90.0:
        raise AngleDomainError(f"theta {theta_deg} outside [-90, 90] degrees")
    if n < 1:
        raise ValidationError("n must be >= 1")
    if offset < 0:
        raise ValidationError("offset must be non-negative")
    idx = offset + np.arange(n)
    phase = 2.0 * np.pi * spacing_ratio * np.sin(np.deg2rad(theta_deg))
    return np.exp(1j * phase * idx)


def steering_matrix(angles_deg, n: int, spacing_ratio: float = 0.5,
                    offset: int = 0) -> np.ndarray:
    """Array manifold: one steering-vector column per angle."""
    cols = [steering_vector(a, n, spacing_ratio, offset) for a in angles_deg]
    return np.column_stack(cols) if cols else np.zeros((n, 0), dtype=np.complex128)


def plan_subarrays(config: ArrayConfig, m: int, m0: int) -> SubarrayPlan:
    """Partition the array into K = (N - M0) / (M - M0) overlapped subarrays.

    The division must be exact; a fractional subarray count is rejected
    rather than silently truncated or padded.
    """
    n = config.n_elements
    if not 0 <= m0 < m <= n:
        raise ValidationError("require 0 <= m0 < m <= n_elements")
    stride = m - m0
    if (n - m0) % stride != 0:
        raise PartitionError(
            f"(N - M0) = {n - m0} is not divisible by (M - M0) = {stride}")
    k = (n - m0) // stride
    offsets = tuple(i * stride for i in range(k))
    return SubarrayPlan(m_elements=m, overlap=m0, k_subarrays=k, offsets=offsets)


def _complex_gaussian(rng: np.random.Generator, shape) -> np.ndarray:
    """Unit-variance circular complex Gaussian samples."""
    return (rng.standard_normal(shape) + 1j * rng.standard_normal(shape)) \
        / np.sqrt(2.0)


def _source_gains(scene: SourceScene, rng: np.random.Generator) -> np.ndarray:
    """Unit-modulus per-source gains used by the coherent source model."""
    return np.exp(2j * np.pi * rng.random(scene.n_sources))


def source_waveforms(scene: SourceScene, rng: np.random.Generator) -> np.ndarray:
    """Draw the Q x J source matrix for a scene.

    ``uncorrelated-gaussian`` sources are i.i.d. unit-power circular complex
    Gaussians; ``coherent`` sources share a single waveform with fixed
    per-source unit-modulus gains, which is the case motivating ML over
    subspace methods.
    """
    q, j = scene.n_sources, scene.n_snapshots
    if scene.source_model == "coherent":
        gains = _source_gains(scene, rng)
        waveform = _complex_gaussian(rng, (1, j))
        return gains[:, None] * waveform
    return _complex_gaussian(rng, (q, j))


def synthesize(config: ArrayConfig, scene: SourceScene) -> SnapshotBlock:
    """Generate y(n) = A(theta) s(n) + v(n) for every snapshot.

    The draw is deterministic given ``scene.seed``: sources are drawn first,
    then noise, from a single PCG64 stream.
    """
    rng = np.random.default_rng(scene.seed)
    manifold = steering_matrix(scene.angles_deg, config.n_elements,
                               config.spacing_ratio)
    sources = source_waveforms(scene, rng)
    samples = manifold @ sources
    noise_var = scene.noise_variance
    if noise_var > 0:
        samples = samples + np.sqrt(noise_var) * _complex_gaussian(
            rng, (config.n_elements, scene.n_snapshots))
    return SnapshotBlock(samples=samples, scene=scene)


def extract_subarray(block: SnapshotBlock, plan: SubarrayPlan, k: int) -> SnapshotBlock:
    """Rows [offsets[k], offsets[k] + M - 1] of the parent block.

    The extracted block records its global element offset so downstream
    manifolds can keep the global phase reference.
    """
    if not 0 <= k < plan.k_subarrays:
        raise IndexError(f"subarray index {k} out of range [0, {plan.k_subarrays})")
    start = plan.offsets[k]
    stop = start + plan.m_elements
    if stop > block.n_elements:
        raise ValidationError("plan does not fit the block")
    return replace(block, samples=block.samples[start:stop].copy(),
                   offset=block.offset + start)


def sample_covariance(block: SnapshotBlock) -> CovarianceMatrix:
    """(1/J) sum_j y(j) y(j)^H, symmetrized to be exactly Hermitian."""
    y = block.samples
    r = y @ y.conj().T / block.n_snapshots
    r = 0.5 * (r + r.conj().T)
    return CovarianceMatrix(entries=r, n_averaged=block.n_snapshots)


def analytic_covariance(angles_deg, n: int, spacing_ratio: float = 0.5,
                        noise_var: float = 0.0, source_cov=None,
                        offset: int = 0) -> CovarianceMatrix:
    """Exact covariance A P A^H + sigma^2 I for known source statistics.

    Used as the infinite-snapshot reference when checking estimator bias.
    """
    a = steering_matrix(angles_deg, n, spacing_ratio, offset)
    q = a.shape[1]
    p = np.eye(q) if source_cov is None else np.asarray(source_cov, dtype=np.complex128)
    r = a @ p @ a.conj().T + noise_var * np.eye(n)
    r = 0.5 * (r + r.conj().T)
    return CovarianceMatrix(entries=r, n_averaged=None)


def derive_seed(master_seed: int, *counters: int) -> int:
    """Counter-mode child seed for parallel Monte Carlo and dataset workers.

    Uses numpy's SeedSequence so (master, counters) -> seed is stable across
    platforms and releases.
    """
    ss = np.random.SeedSequence([int(master_seed), *[int(c) for c in counters]])
    return int(ss.generate_state(1, np.uint64)[0])
