"""Training-dataset export and loading for the learned coarse stage.

One dataset directory holds, per SNR level, a raw binary of float32
covariance planes and a labels CSV, plus a single human-readable manifest.
The manifest is written only after every data file is complete, so its
presence marks a finished export.  The binary layout is sample-major:
for each sample, the real plane then the imaginary plane of the subarray
sample covariance, each an M x M row-major little-endian float32 block.
Keeping the format this dumb is deliberate: any language can consume it
with nothing but a binary read.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, asdict
from itertools import combinations
from pathlib import Path

import numpy as np

from .arrays import (
    ArrayConfig,
    SourceScene,
    SubarrayPlan,
    derive_seed,
    extract_subarray,
    sample_covariance,
    synthesize,
)
from .exceptions import GridSizeError, ValidationError

MANIFEST_NAME = "manifest.txt"
SAMPLE_LIMIT = 10 ** 7
LAYOUT = "sample-major, channel, row, column"


@dataclass(frozen=True)
class DatasetManifest:
    """Everything a consumer needs to read and regenerate one export."""

    version: int
    subarray_index: int
    m_elements: int
    channels: int
    count: int
    q_sources: int
    snr_db: tuple[float, ...]
    grid_deg: float
    angle_range_deg: float
    dtype: str
    endianness: str
    layout: str
    n_elements: int
    m_overlap: int
    offset: int
    n_snapshots: int
    master_seed: int

    def __post_init__(self):
        if self.channels != 2:
            raise ValidationError("format defines exactly 2 channels (Re, Im)")
        if self.dtype != "f32" or self.endianness != "little":
            raise ValidationError("format is little-endian float32 only")
        phi = grid_point_count(self.angle_range_deg, self.grid_deg)
        expected = math.comb(phi, self.q_sources)
        if self.count != expected:
            raise ValidationError(
                f"count {self.count} != C({phi},{self.q_sources}) = {expected}")

    @property
    def plane_bytes(self) -> int:
        """Size of one per-SNR planes file."""
        return self.count * self.channels * self.m_elements ** 2 * 4


def grid_point_count(angle_range_deg: float, grid_deg: float) -> int:
    """phi = 2 theta / g + 1 grid angles spanning [-theta, theta]."""
    steps = 2.0 * angle_range_deg / grid_deg
    if abs(steps - round(steps)) > 1e-9:
        raise ValidationError("grid step must divide the angle range evenly")
    return int(round(steps)) + 1


def grid_angles(angle_range_deg: float, grid_deg: float) -> np.ndarray:
    phi = grid_point_count(angle_range_deg, grid_deg)
    return -angle_range_deg + grid_deg * np.arange(phi)


def label_combinations(angle_range_deg: float, grid_deg: float, q: int):
    """All Q-subsets of the grid, lexicographic, each sorted ascending."""
    angles = grid_angles(angle_range_deg, grid_deg)
    return list(combinations(angles.tolist(), q))


def planes_name(snr_idx: int) -> str:
    return f"planes_{snr_idx:03d}.f32"


def labels_name(snr_idx: int) -> str:
    return f"labels_{snr_idx:03d}.csv"


def covariance_planes(cov_entries: np.ndarray) -> np.ndarray:
    """Stack Re and Im of a covariance into the (2, M, M) float32 channels."""
    return np.stack([cov_entries.real, cov_entries.imag]).astype("<f4")


def export_dataset(config: ArrayConfig, plan: SubarrayPlan, k: int, q: int,
                   grid_deg: float, angle_range_deg: float, snr_db_list,
                   n_snapshots: int, seed: int, out_dir,
                   source_model: str = "uncorrelated-gaussian") -> DatasetManifest:
    """Write one subarray's training set for every requested SNR.

    Sample i of every SNR uses the scene seed derived from (seed, snr_idx, i)
    with no dependence on k, so exports for different subarrays see the same
    signal realizations through different element windows, exactly like K
    subarrays of one physical array.
    """
    if not 0 <= k < plan.k_subarrays:
        raise ValidationError(f"subarray index {k} out of range")
    snr_db = tuple(float(s) for s in snr_db_list)
    if not snr_db:
        raise ValidationError("need at least one SNR level")
    # check the count arithmetically before materializing any combinations
    phi = grid_point_count(angle_range_deg, grid_deg)
    if math.comb(phi, q) > SAMPLE_LIMIT:
        raise GridSizeError(f"{math.comb(phi, q)} samples per SNR exceeds "
                            f"the export limit {SAMPLE_LIMIT}")
    combos = label_combinations(angle_range_deg, grid_deg, q)

    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    manifest = DatasetManifest(
        version=1, subarray_index=k, m_elements=plan.m_elements, channels=2,
        count=len(combos), q_sources=q, snr_db=snr_db, grid_deg=float(grid_deg),
        angle_range_deg=float(angle_range_deg), dtype="f32",
        endianness="little", layout=LAYOUT, n_elements=config.n_elements,
        m_overlap=plan.overlap, offset=plan.offsets[k],
        n_snapshots=int(n_snapshots), master_seed=int(seed))

    header = "sample_id," + ",".join(f"angle_{i + 1}_deg" for i in range(q))
    for snr_idx, snr in enumerate(snr_db):
        with open(out / planes_name(snr_idx), "wb") as planes_fh, \
                open(out / labels_name(snr_idx), "w") as labels_fh:
            labels_fh.write(header + "\n")
            for sample_idx, angles in enumerate(combos):
                scene = SourceScene(
                    angles_deg=angles, snr_db=snr, n_snapshots=n_snapshots,
                    seed=derive_seed(seed, snr_idx, sample_idx),
                    source_model=source_model)
                block = synthesize(config, scene)
                cov = sample_covariance(extract_subarray(block, plan, k))
                planes_fh.write(covariance_planes(cov.entries).tobytes())
                labels_fh.write(f"{sample_idx},"
                                + ",".join(f"{a:.10g}" for a in angles) + "\n")
    write_manifest(manifest, out / MANIFEST_NAME)
    return manifest


def write_manifest(manifest: DatasetManifest, path) -> None:
    lines = []
    for key, value in asdict(manifest).items():
        if isinstance(value, tuple):
            value = ",".join(f"{v:.10g}" for v in value)
        lines.append(f"{key}: {value}")
    Path(path).write_text("\n".join(lines) + "\n")


def load_manifest(path) -> DatasetManifest:
    text = Path(path).read_text()
    raw: dict[str, str] = {}
    for line in text.splitlines():
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        if ":" not in line:
            raise ValidationError(f"malformed manifest line: {line!r}")
        key, value = line.split(":", 1)
        raw[key.strip()] = value.strip()
    try:
        return DatasetManifest(
            version=int(raw["version"]),
            subarray_index=int(raw["subarray_index"]),
            m_elements=int(raw["m_elements"]),
            channels=int(raw["channels"]),
            count=int(raw["count"]),
            q_sources=int(raw["q_sources"]),
            snr_db=tuple(float(v) for v in raw["snr_db"].split(",")),
            grid_deg=float(raw["grid_deg"]),
            angle_range_deg=float(raw["angle_range_deg"]),
            dtype=raw["dtype"],
            endianness=raw["endianness"],
            layout=raw["layout"],
            n_elements=int(raw["n_elements"]),
            m_overlap=int(raw["m_overlap"]),
            offset=int(raw["offset"]),
            n_snapshots=int(raw["n_snapshots"]),
            master_seed=int(raw["master_seed"]),
        )
    except KeyError as exc:
        raise ValidationError(f"manifest missing field {exc}") from exc


def load_dataset_dir(dir_path) -> DatasetManifest:
    return load_manifest(Path(dir_path) / MANIFEST_NAME)


def load_planes(dir_path, manifest: DatasetManifest, snr_idx: int) -> np.ndarray:
    """Read one SNR's planes as a (count, channels, M, M) float32 array."""
    if not 0 <= snr_idx < len(manifest.snr_db):
        raise ValidationError(f"snr index {snr_idx} out of range")
    path = Path(dir_path) / planes_name(snr_idx)
    data = path.read_bytes()
    if len(data) != manifest.plane_bytes:
        raise ValidationError(
            f"{path} holds {len(data)} bytes, expected {manifest.plane_bytes}")
    m = manifest.m_elements
    arr = np.frombuffer(data, dtype="<f4")
    return arr.reshape(manifest.count, manifest.channels, m, m)


def load_labels(dir_path, manifest: DatasetManifest, snr_idx: int):
    """Read one SNR's labels as (sample_ids, angles) arrays."""
    if not 0 <= snr_idx < len(manifest.snr_db):
        raise ValidationError(f"snr index {snr_idx} out of range")
    path = Path(dir_path) / labels_name(snr_idx)
    ids = []
    angles = []
    with open(path) as fh:
        header = fh.readline().strip().split(",")
        expected = ["sample_id"] + [f"angle_{i + 1}_deg"
                                    for i in range(manifest.q_sources)]
        if header != expected:
            raise ValidationError(f"unexpected labels header {header}")
        for line in fh:
            parts = line.strip().split(",")
            if len(parts) != manifest.q_sources + 1:
                raise ValidationError(f"malformed labels row: {line!r}")
            ids.append(int(parts[0]))
            angles.append([float(v) for v in parts[1:]])
    return np.asarray(ids), np.asarray(angles)


def scene_for_sample(manifest: DatasetManifest, snr_idx: int,
                     sample_idx: int,
                     source_model: str = "uncorrelated-gaussian") -> SourceScene:
    """Reconstruct the exact scene behind one exported sample."""
    combos = label_combinations(manifest.angle_range_deg, manifest.grid_deg,
                                manifest.q_sources)
    return SourceScene(
        angles_deg=combos[sample_idx], snr_db=manifest.snr_db[snr_idx],
        n_snapshots=manifest.n_snapshots,
        seed=derive_seed(manifest.master_seed, snr_idx, sample_idx),
        source_model=source_model)
