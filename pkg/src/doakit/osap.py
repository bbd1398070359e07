"""Combine-and-refine stage of the learned pipeline.

The coarse stage lives outside this package (per-subarray regression
networks emit prediction CSVs); this module averages those K predictions
per sample and runs the same narrow AP refinement OPSC uses, against the
full-array covariance of each sample.
"""

from __future__ import annotations

import csv
from pathlib import Path

import numpy as np

from .arrays import ArrayConfig, SnapshotBlock, sample_covariance, synthesize
from .dataset import DatasetManifest, scene_for_sample
from .estimators import AngleEstimate, ApSettings, ap_refine
from .exceptions import ValidationError
from .opsc import build_candidate_set


def prediction_header(q: int) -> list[str]:
    return ["sample_id"] + [f"angle_{i + 1}_deg" for i in range(q)]


def write_predictions(path, sample_ids, angles_deg) -> None:
    """Write a per-subarray predictions CSV, one row per sample."""
    angles = np.atleast_2d(np.asarray(angles_deg, dtype=float))
    ids = list(sample_ids)
    if len(ids) != angles.shape[0]:
        raise ValidationError("sample_ids and angle rows disagree")
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(prediction_header(angles.shape[1]))
        for sid, row in zip(ids, angles):
            writer.writerow([sid] + [f"{a:.10g}" for a in row])


def read_predictions(path):
    """Read a predictions CSV back as (sample_ids, angles) arrays."""
    path = Path(path)
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if not header or header[0] != "sample_id" or len(header) < 2:
            raise ValidationError(f"{path}: missing prediction header")
        q = len(header) - 1
        if header != prediction_header(q):
            raise ValidationError(f"{path}: unexpected header {header}")
        ids = []
        angles = []
        for row in reader:
            if not row:
                continue
            if len(row) != q + 1:
                raise ValidationError(f"{path}: malformed row {row}")
            try:
                ids.append(int(row[0]))
                angles.append([float(v) for v in row[1:]])
            except ValueError as exc:
                raise ValidationError(f"{path}: malformed row {row}") from exc
    if not ids:
        raise ValidationError(f"{path}: no prediction rows")
    return np.asarray(ids), np.asarray(angles)


def combine_predictions(paths):
    """Average K per-subarray prediction files row by row (weights 1/K).

    Every file must list the same sample ids in the same order; a file whose
    ids disagree is named in the error.
    """
    paths = [Path(p) for p in paths]
    if not paths:
        raise ValidationError("no prediction files given")
    ref_ids = None
    stacks = []
    for path in paths:
        if not path.exists():
            raise ValidationError(f"missing prediction file: {path}")
        ids, angles = read_predictions(path)
        if ref_ids is None:
            ref_ids = ids
        elif ids.shape != ref_ids.shape or np.any(ids != ref_ids):
            raise ValidationError(f"{path}: sample ids disagree with {paths[0]}")
        stacks.append(angles)
    shapes = {s.shape for s in stacks}
    if len(shapes) != 1:
        raise ValidationError("prediction files disagree on angle count")
    return ref_ids, np.mean(stacks, axis=0)


def combine_and_refine(paths, blocks, sigma: float, h: int, p: int,
                       ap_settings: ApSettings | None = None,
                       spacing_ratio: float = 0.5) -> list[AngleEstimate]:
    """Per sample: 1/K-average the K predictions, then AP-refine.

    ``blocks`` supplies the full-array snapshot block for each sample, in
    sample-id order; the refinement scans the narrow candidate set around
    the averaged prediction against that block's covariance.
    """
    ids, combined = combine_predictions(paths)
    block_list = [blocks] if isinstance(blocks, SnapshotBlock) else list(blocks)
    if len(block_list) != len(ids):
        raise ValidationError(f"{len(ids)} prediction rows but "
                              f"{len(block_list)} snapshot blocks")
    if ap_settings is None:
        ap_settings = ApSettings(max_iters=20,
                                 tol_deg=max(sigma / (2.0 * p), 1e-9),
                                 init="given")
    refined = []
    for row, block in zip(combined, block_list):
        center = AngleEstimate(angles_deg=tuple(sorted(float(a) for a in row)),
                               source="osap-combine")
        candidates = build_candidate_set(center, sigma, h, p)
        cov = sample_covariance(block)
        est = ap_refine(cov, center, candidates.grids_deg, ap_settings,
                        spacing_ratio, offset=block.offset)
        refined.append(AngleEstimate(angles_deg=est.angles_deg, source="osap",
                                     converged=est.converged,
                                     objective_trace=est.objective_trace))
    return refined


# public alias: the CLI calls this step "import predictions"
import_predictions = combine_and_refine


def blocks_for_dataset(manifest: DatasetManifest, snr_idx: int,
                       sample_ids=None, spacing_ratio: float = 0.5):
    """Re-synthesize the full-array blocks behind exported dataset samples.

    Exports derive each sample's seed from (master_seed, snr_idx, sample_idx)
    only, so the parent-array realization is reproducible here without ever
    storing raw snapshots.
    """
    config = ArrayConfig(manifest.n_elements, spacing_ratio)
    if sample_ids is None:
        sample_ids = range(manifest.count)
    blocks = []
    for sample_idx in sample_ids:
        scene = scene_for_sample(manifest, snr_idx, int(sample_idx))
        blocks.append(synthesize(config, scene))
    return blocks
