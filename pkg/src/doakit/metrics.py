"""Closed-form FLOP models, the deterministic CRLB, and RMSE scoring.

The FLOP models are the comparison currency between estimators, evaluated
exactly as closed formulas; they are never inferred from wall-clock timing.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .arrays import ArrayConfig, SourceScene, _source_gains, steering_matrix
from .estimators import AngleEstimate
from .exceptions import ConditioningError, ValidationError

ESTIMATOR_MODELS = ("ml_ap", "opsc", "osap_cnn", "nn_forward")

FIM_CONDITION_LIMIT = 1e12


@dataclass(frozen=True)
class FlopModel:
    """One estimator's cost formula bound to concrete parameters."""

    estimator: str
    parameters: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.estimator not in ESTIMATOR_MODELS:
            raise ValidationError(f"estimator must be one of {ESTIMATOR_MODELS}")
        for name, value in self.parameters.items():
            if isinstance(value, (int, float)) and value <= 0:
                raise ValidationError(f"parameter {name} must be positive")

    def value(self) -> float:
        fn = {
            "ml_ap": flops_ml_ap,
            "opsc": flops_opsc,
            "osap_cnn": flops_osap_cnn,
            "nn_forward": flops_nn_forward,
        }[self.estimator]
        return fn(**self.parameters)


def _require_positive(**named) -> None:
    for name, value in named.items():
        if value <= 0:
            raise ValidationError(f"{name} must be positive, got {value}")


def flops_opsc(k: int, m: int, l: int) -> float:
    """K (M^3 - M^2 + M L (2M + 1)): K eigendecompositions plus rooting."""
    _require_positive(k=k, m=m, l=l)
    return float(k * (m ** 3 - m ** 2 + m * l * (2 * m + 1)))


def _ap_point_cost(n: int, q_sources: int) -> int:
    """Cost of one 1-D objective evaluation inside an AP scan."""
    return 2 * n ** 2 * (q_sources - 1) + 3 * n ** 2 + 4 * n * (q_sources - 1) ** 2


def flops_ml_ap(n: int, q_sources: int, q: int, sigma_rad: float,
                iteration_multiplier: int = 1) -> float:
    """(pi/sigma + 1) q (2N^2(Q-1) + 3N^2 + 4N(Q-1)^2).

    ``sigma_rad`` is the grid step in radians; pi/sigma + 1 is the full-range
    grid point count.  ``iteration_multiplier`` scales for multiple AP sweeps
    if desired (the printed formula counts a single pass, so it defaults
    to 1).
    """
    _require_positive(n=n, q_sources=q_sources, q=q, sigma_rad=sigma_rad,
                      iteration_multiplier=iteration_multiplier)
    points = math.pi / sigma_rad + 1.0
    return float(points * q * _ap_point_cost(n, q_sources) * iteration_multiplier)


def flops_osap_cnn(n: int, q_sources: int, eps_tilde: int) -> float:
    """Refinement-stage cost: eps-tilde candidate-scan evaluations."""
    _require_positive(n=n, q_sources=q_sources, eps_tilde=eps_tilde)
    return float(eps_tilde * _ap_point_cost(n, q_sources))


def flops_nn_forward(conv_dims, kernel_sizes, filters, dense_widths,
                     k_networks: int = 1, squared_filters: bool = True) -> float:
    """Forward-pass cost of K identical conv + dense stacks.

    Conv layer c contributes M_c^2 e_c^2 F_{c-1}^2 F_c^2 with the filter
    counts squared, which is how the source formula is printed (standard
    conv cost would use F_{c-1} F_c; pass squared_filters=False for that
    variant).  Dense layers contribute products of consecutive widths.
    """
    conv_dims = list(conv_dims)
    kernel_sizes = list(kernel_sizes)
    filters = list(filters)
    dense_widths = list(dense_widths)
    if len(kernel_sizes) != len(conv_dims):
        raise ValidationError("need one kernel size per conv layer")
    if len(filters) != len(conv_dims) + 1:
        raise ValidationError("filters must list input channels plus one "
                              "count per conv layer")
    if k_networks < 1:
        raise ValidationError("k_networks must be >= 1")
    if any(v <= 0 for v in conv_dims + kernel_sizes + filters + dense_widths):
        raise ValidationError("layer dimensions must be positive")

    power = 2 if squared_filters else 1
    conv = sum(m ** 2 * e ** 2 * (f_in ** power) * (f_out ** power)
               for m, e, f_in, f_out in zip(conv_dims, kernel_sizes,
                                            filters[:-1], filters[1:]))
    dense = sum(a * b for a, b in zip(dense_widths[:-1], dense_widths[1:]))
    return float(k_networks * (conv + dense))


def source_covariance(scene: SourceScene) -> np.ndarray:
    """Model source covariance matching what synthesize draws.

    Uncorrelated unit-power sources give the identity; coherent sources give
    the rank-one g g^H built from the same seed-derived gains the simulator
    uses.
    """
    q = scene.n_sources
    if scene.source_model == "coherent":
        gains = _source_gains(scene, np.random.default_rng(scene.seed))
        return np.outer(gains, gains.conj())
    return np.eye(q, dtype=np.complex128)


def crlb(scene: SourceScene, config: ArrayConfig) -> np.ndarray:
    """Deterministic-signal Cramer-Rao bound per source angle, in deg^2.

    CRB = (sigma^2 / 2J) {Re[(D^H P_perp D) o P_s^T]}^{-1} where D holds the
    steering derivatives, P_perp projects off the manifold, o is the
    elementwise product, and P_s is the source covariance.  An infinite-SNR
    scene gives all-zero bounds.
    """
    n = config.n_elements
    sr = config.spacing_ratio
    theta = np.radians(np.asarray(scene.angles_deg))
    a = steering_matrix(scene.angles_deg, n, sr)
    idx = np.arange(n)
    # d a / d theta: elementwise j 2 pi sr cos(theta) idx factor per column
    d = 1j * 2.0 * np.pi * sr * np.cos(theta)[None, :] * idx[:, None] * a

    gram = a.conj().T @ a
    eigvals = np.linalg.eigvalsh(gram)
    if eigvals[0] <= 0 or eigvals[0] / eigvals[-1] < 1e-12:
        raise ConditioningError("sources too close: manifold numerically singular")
    p_perp = np.eye(n) - a @ np.linalg.solve(gram, a.conj().T)

    p_s = source_covariance(scene)
    fim_core = ((d.conj().T @ p_perp @ d) * p_s.T).real
    cond = np.linalg.cond(fim_core)
    if not np.isfinite(cond) or cond > FIM_CONDITION_LIMIT:
        raise ConditioningError("Fisher information matrix is singular; "
                                "bounds undefined for merged sources")
    noise_var = scene.noise_variance
    if noise_var == 0.0:
        return np.zeros(scene.n_sources)
    crb_rad2 = noise_var / (2.0 * scene.n_snapshots) * np.diag(
        np.linalg.inv(fim_core))
    return crb_rad2 * (180.0 / np.pi) ** 2


def rmse(estimates, truths) -> float:
    """Root mean squared degree error over trials and sources, sorted pairing."""
    est_rows = [_angles(e) for e in estimates]
    truth_rows = [_angles(t) for t in truths]
    if len(est_rows) != len(truth_rows):
        raise ValidationError("estimate and truth trial counts differ")
    if not est_rows:
        raise ValidationError("no trials to score")
    total = 0.0
    count = 0
    for est, truth in zip(est_rows, truth_rows):
        if est.size != truth.size:
            raise ValidationError("estimate and truth source counts differ")
        total += float(np.sum((np.sort(est) - np.sort(truth)) ** 2))
        count += est.size
    return math.sqrt(total / count)


def _angles(value) -> np.ndarray:
    if isinstance(value, AngleEstimate):
        return np.asarray(value.angles_deg, dtype=float)
    return np.atleast_1d(np.asarray(value, dtype=float))
