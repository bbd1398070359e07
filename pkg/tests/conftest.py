"""Shared helpers for the test suite."""

from doakit import ArrayConfig, SourceScene, synthesize


def block_for(n, angles, snr_db, snaps, seed, model="uncorrelated-gaussian"):
    """Synthesize one snapshot block with the default half-wavelength array."""
    scene = SourceScene(angles_deg=tuple(float(a) for a in angles),
                        snr_db=snr_db, n_snapshots=snaps, seed=seed,
                        source_model=model)
    return synthesize(ArrayConfig(n_elements=n), scene)
