"""Monte Carlo RMSE sweeps and closed-form complexity sweeps.

Rows come back as plain dicts so the CLI can serialize them to CSV or JSON
without further shaping.  All randomness is derived from the master seed by
counter splitting, so a sweep is reproducible row for row.
"""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass

import numpy as np

from .arrays import (
    ArrayConfig,
    SourceScene,
    derive_seed,
    plan_subarrays,
    sample_covariance,
    synthesize,
)
from .estimators import ApSettings, GridSpec, ap_refine, ml_grid_search, root_music
from .exceptions import DoakitError, PartitionError, ValidationError
from .metrics import crlb, flops_ml_ap, flops_opsc, flops_osap_cnn, rmse
from .opsc import opsc_estimate

SWEEP_ESTIMATORS = ("opsc", "ml-ap", "root-music", "ml-grid")


@dataclass(frozen=True)
class SweepConfig:
    """One RMSE-versus-SNR Monte Carlo run."""

    snr_points_db: tuple[float, ...]
    trials: int
    angles_deg: tuple[float, ...]
    n_elements: int
    n_snapshots: int
    m_elements: int | None = None
    overlap: int | None = None
    estimators: tuple[str, ...] = ("opsc",)
    master_seed: int = 0
    source_model: str = "uncorrelated-gaussian"
    spacing_ratio: float = 0.5
    sigma_deg: float = 1.0
    h: int = 2
    p: int = 10

    def __post_init__(self):
        if not self.snr_points_db:
            raise ValidationError("need at least one SNR point")
        if self.trials < 1:
            raise ValidationError("trials must be >= 1")
        unknown = set(self.estimators) - set(SWEEP_ESTIMATORS)
        if unknown:
            raise ValidationError(f"unknown estimators: {sorted(unknown)}")
        needs_plan = {"opsc"} & set(self.estimators)
        if needs_plan and (self.m_elements is None or self.overlap is None):
            raise ValidationError("opsc sweeps need m_elements and overlap")


def _run_one(name: str, block, config: SweepConfig, plan):
    q = len(config.angles_deg)
    if name == "opsc":
        return opsc_estimate(block, plan, q, sigma=config.sigma_deg,
                             h=config.h, p=config.p,
                             spacing_ratio=config.spacing_ratio)
    if name == "ml-ap":
        grid = GridSpec(-90.0, 90.0, config.sigma_deg)
        settings = ApSettings(max_iters=30, tol_deg=config.sigma_deg / 2,
                              init="sequential")
        cov = sample_covariance(block)
        return ap_refine(cov, None, [grid] * q, settings,
                         config.spacing_ratio, offset=block.offset)
    if name == "root-music":
        return root_music(sample_covariance(block), q, config.spacing_ratio)
    if name == "ml-grid":
        grid = GridSpec(-90.0, 90.0, config.sigma_deg)
        return ml_grid_search(sample_covariance(block), grid, q,
                              config.spacing_ratio, offset=block.offset)
    raise ValidationError(f"unknown estimator {name!r}")


def run_rmse_sweep(config: SweepConfig) -> list[dict]:
    """RMSE per (SNR, estimator), with the CRLB alongside.

    Estimator failures on individual trials are excluded from the RMSE and
    reported through the divergence_rate column instead of aborting the
    sweep; crlb_deg is the square root of the mean per-source variance
    bound, making it directly comparable to rmse_deg.
    """
    array = ArrayConfig(config.n_elements, config.spacing_ratio)
    plan = None
    if config.m_elements is not None and config.overlap is not None:
        plan = plan_subarrays(array, config.m_elements, config.overlap)

    rows: list[dict] = []
    for snr_idx, snr_db in enumerate(config.snr_points_db):
        estimates: dict[str, list] = {name: [] for name in config.estimators}
        truths: dict[str, list] = {name: [] for name in config.estimators}
        failures = {name: 0 for name in config.estimators}
        crlb_acc = 0.0
        for trial in range(config.trials):
            seed = derive_seed(config.master_seed, snr_idx, trial)
            scene = SourceScene(angles_deg=config.angles_deg, snr_db=snr_db,
                                n_snapshots=config.n_snapshots, seed=seed,
                                source_model=config.source_model)
            crlb_acc += float(np.mean(crlb(scene, array)))
            block = synthesize(array, scene)
            for name in config.estimators:
                try:
                    est = _run_one(name, block, config, plan)
                except DoakitError:
                    failures[name] += 1
                    continue
                estimates[name].append(est)
                truths[name].append(config.angles_deg)
        crlb_deg = math.sqrt(crlb_acc / config.trials)
        for name in config.estimators:
            ok = len(estimates[name])
            rows.append({
                "snr_db": snr_db,
                "estimator": name,
                "rmse_deg": rmse(estimates[name], truths[name]) if ok else math.nan,
                "crlb_deg": crlb_deg,
                "trials": config.trials,
                "divergence_rate": failures[name] / config.trials,
            })
    return rows


def run_complexity_sweep(n_list, sigma_rad: float, q_sources: int = 2,
                         q: int = 2, l_snapshots: int = 1000, h: int = 2,
                         p: int = 10) -> list[dict]:
    """FLOP counts per array size under the M = N/4, M0 = N/8 family.

    That family keeps K = (N - M0)/(M - M0) = 7 for every conforming N.
    Ns that break the integer geometry are rejected outright.
    """
    rows = []
    for n in n_list:
        n = int(n)
        if n % 8 != 0:
            raise PartitionError(
                f"N={n} does not admit integer M=N/4, M0=N/8 subarrays")
        m = n // 4
        m0 = n // 8
        k = (n - m0) // (m - m0)
        eps_tilde = q_sources * (2 * h * p + 1)
        rows.append({
            "n_elements": n,
            "k_subarrays": k,
            "flops_ml_ap": flops_ml_ap(n, q_sources, q, sigma_rad),
            "flops_opsc": flops_opsc(k, m, l_snapshots),
            "flops_osap_cbam_cnn": flops_osap_cnn(n, q_sources, eps_tilde),
        })
    return rows


def write_rows_csv(rows: list[dict], path) -> None:
    if not rows:
        raise ValidationError("no rows to write")
    with open(path, "w", newline="") as fh:
        writer = csv.DictWriter(fh, fieldnames=list(rows[0].keys()))
        writer.writeheader()
        writer.writerows(rows)


def write_rows_json(rows: list[dict], path) -> None:
    with open(path, "w") as fh:
        json.dump(rows, fh, indent=2)
        fh.write("\n")


def format_rows_csv(rows: list[dict]) -> str:
    if not rows:
        return ""
    buf = io.StringIO()
    writer = csv.DictWriter(buf, fieldnames=list(rows[0].keys()))
    writer.writeheader()
    writer.writerows(rows)
    return buf.getvalue()
