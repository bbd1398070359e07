import numpy as np
import numpy.testing as npt
import pytest

from conftest import block_for
from doakit import (
    AngleEstimate,
    ArrayConfig,
    CombineWeights,
    PipelineError,
    SnapshotBlock,
    SourceScene,
    ValidationError,
    build_candidate_set,
    coherent_combine,
    derive_seed,
    ml_objective,
    opsc_coarse,
    opsc_estimate,
    plan_subarrays,
    rmse,
    sample_covariance,
)


# ------------------------------------------------------------------- weights


def test_uniform_weights():
    w = CombineWeights.uniform(7)
    assert len(w) == 7
    assert sum(w.weights) == pytest.approx(1.0, abs=1e-15)


def test_weights_validation():
    with pytest.raises(ValidationError):
        CombineWeights(weights=(0.5, 0.6))
    with pytest.raises(ValidationError):
        CombineWeights(weights=(1.5, -0.5))
    with pytest.raises(ValidationError):
        CombineWeights(weights=())


# ------------------------------------------------------------- candidate set


def test_candidate_set_reference_window():
    center = AngleEstimate(angles_deg=(10.0,), source="opsc-combine")
    cs = build_candidate_set(center, sigma=1.0, h=2, p=10)
    assert cs.points_per_dim == 41
    grid = np.array(cs.grids_deg[0])
    assert grid[0] == pytest.approx(8.0)
    assert grid[-1] == pytest.approx(12.0)
    npt.assert_allclose(np.diff(grid), 0.1)
    assert not cs.clipped


def test_candidate_set_minimal_window():
    center = AngleEstimate(angles_deg=(0.0,), source="opsc-combine")
    cs = build_candidate_set(center, sigma=1.0, h=1, p=1)
    assert cs.points_per_dim == 3
    npt.assert_allclose(cs.grids_deg[0], (-1.0, 0.0, 1.0))


def test_candidate_set_total_point_count_scales_with_sources():
    center = AngleEstimate(angles_deg=(-5.0, 15.0), source="opsc-combine")
    cs = build_candidate_set(center, sigma=1.0, h=2, p=10)
    assert cs.total_points == 2 * 41
    assert len(cs.grids_deg) == 2


def test_candidate_set_clamps_at_domain_edge():
    center = AngleEstimate(angles_deg=(89.5,), source="opsc-combine")
    cs = build_candidate_set(center, sigma=1.0, h=2, p=10)
    assert cs.clipped
    grid = np.array(cs.grids_deg[0])
    assert grid.size == 41  # count preserved, values clamped
    assert grid.max() == 90.0
    assert grid.min() == pytest.approx(87.5)


def test_candidate_set_rejects_bad_parameters():
    center = AngleEstimate(angles_deg=(0.0,), source="opsc-combine")
    with pytest.raises(ValidationError):
        build_candidate_set(center, sigma=0.0, h=2, p=10)
    with pytest.raises(ValidationError):
        build_candidate_set(center, sigma=1.0, h=0, p=10)


# ------------------------------------------------------------------ combine


def test_combine_identical_estimates_is_identity():
    est = AngleEstimate(angles_deg=(-12.0, 34.0), source="root-music")
    out = coherent_combine([est, est, est], CombineWeights.uniform(3))
    assert out.angles_deg == (-12.0, 34.0)
    assert out.source == "opsc-combine"


def test_combine_hand_average():
    a = AngleEstimate(angles_deg=(10.0,), source="root-music")
    b = AngleEstimate(angles_deg=(12.0,), source="root-music")
    out = coherent_combine([a, b], CombineWeights(weights=(0.5, 0.5)))
    assert out.angles_deg == (11.0,)


def test_combine_is_exact_average_under_uniform_weights():
    rng = np.random.default_rng(51)
    for _ in range(200):
        k = int(rng.integers(1, 9))
        q = int(rng.integers(1, 4))
        rows = np.sort(rng.uniform(-80, 80, (k, q)), axis=1)
        ests = [AngleEstimate(angles_deg=tuple(row), source="root-music")
                for row in rows]
        out = coherent_combine(ests, CombineWeights.uniform(k))
        npt.assert_allclose(out.angles_deg, rows.mean(axis=0), atol=1e-12)


def test_combine_validates_inputs():
    a = AngleEstimate(angles_deg=(10.0,), source="root-music")
    b = AngleEstimate(angles_deg=(0.0, 12.0), source="root-music")
    with pytest.raises(ValidationError):
        coherent_combine([a, b], CombineWeights.uniform(2))
    with pytest.raises(ValidationError):
        coherent_combine([a], CombineWeights.uniform(2))
    with pytest.raises(ValidationError):
        coherent_combine([], CombineWeights.uniform(1))


# ------------------------------------------------------------- coarse stage


def test_coarse_noiseless_single_source_every_subarray():
    block = block_for(32, [15.0], float("inf"), 50, seed=61)
    plan = plan_subarrays(ArrayConfig(n_elements=32), 8, 4)
    coarse = opsc_coarse(block, plan, 1)
    assert len(coarse) == plan.k_subarrays == 7
    for est in coarse:
        assert est is not None
        assert est.angles_deg[0] == pytest.approx(15.0, abs=1e-6)


def test_coarse_reference_partition_returns_seven():
    block = block_for(128, [-10.0, 20.0], 10.0, 100, seed=62)
    plan = plan_subarrays(ArrayConfig(n_elements=128), 32, 16)
    coarse = opsc_coarse(block, plan, 2)
    assert len(coarse) == 7
    assert all(est is not None for est in coarse)


def test_coarse_high_snr_sorted_near_truth():
    block = block_for(32, [-10.0, 20.0], 20.0, 200, seed=63)
    plan = plan_subarrays(ArrayConfig(n_elements=32), 8, 4)
    for est in opsc_coarse(block, plan, 2):
        assert est is not None
        assert est.angles_deg[0] < est.angles_deg[1]
        npt.assert_allclose(est.angles_deg, (-10.0, 20.0), atol=1.5)


# ------------------------------------------------------------ full pipeline


def test_single_noiseless_source_agrees_across_stages():
    block = block_for(32, [15.0], float("inf"), 50, seed=64)
    plan = plan_subarrays(ArrayConfig(n_elements=32), 8, 4)
    coarse = opsc_coarse(block, plan, 1)
    combined = coherent_combine([e for e in coarse if e is not None],
                                CombineWeights.uniform(7))
    refined = opsc_estimate(block, plan, 1)
    assert combined.angles_deg[0] == pytest.approx(15.0, abs=1e-6)
    assert refined.angles_deg[0] == pytest.approx(15.0, abs=1e-6)
    assert refined.source == "opsc"


def test_refinement_stays_inside_candidate_box():
    sigma, h = 1.0, 2
    plan = plan_subarrays(ArrayConfig(n_elements=32), 8, 4)
    for seed in range(20):
        block = block_for(32, [-10.0, 20.0], 0.0, 100, seed=seed)
        coarse = [e for e in opsc_coarse(block, plan, 2) if e is not None]
        combined = coherent_combine(coarse, CombineWeights.uniform(len(coarse)))
        refined = opsc_estimate(block, plan, 2, sigma=sigma, h=h, p=10)
        for fine, center in zip(refined.angles_deg, combined.angles_deg):
            assert abs(fine - center) <= h * sigma + 1e-9


def test_refinement_never_decreases_objective():
    plan = plan_subarrays(ArrayConfig(n_elements=32), 8, 4)
    for seed in range(20):
        block = block_for(32, [-10.0, 20.0], 0.0, 100, seed=100 + seed)
        coarse = [e for e in opsc_coarse(block, plan, 2) if e is not None]
        combined = coherent_combine(coarse, CombineWeights.uniform(len(coarse)))
        refined = opsc_estimate(block, plan, 2)
        r = sample_covariance(block)
        assert ml_objective(r, refined.angles_deg) >= \
            ml_objective(r, combined.angles_deg) - 1e-9


def test_pipeline_accepts_quarter_and_eighth_partitions():
    # the M = N/4, M0 = N/8 family keeps K = 7 at every size
    for n in (32, 64):
        plan = plan_subarrays(ArrayConfig(n_elements=n), n // 4, n // 8)
        assert plan.k_subarrays == 7
        block = block_for(n, [-10.0, 20.0], 10.0, 100, seed=65)
        est = opsc_estimate(block, plan, 2)
        npt.assert_allclose(est.angles_deg, (-10.0, 20.0), atol=1.0)


def test_more_overlap_means_more_subarrays():
    config = ArrayConfig(n_elements=32)
    ks = [plan_subarrays(config, 8, m0).k_subarrays for m0 in (0, 4, 6)]
    assert ks == [4, 7, 13]
    block = block_for(32, [5.0], 10.0, 100, seed=66)
    for m0 in (0, 4, 6):
        est = opsc_estimate(block, plan_subarrays(config, 8, m0), 1)
        assert est.angles_deg[0] == pytest.approx(5.0, abs=0.5)


def test_all_subarrays_failing_raises_pipeline_error():
    # every subarray sees a spatial frequency outside the arcsin domain for
    # quarter-wavelength spacing, so every coarse stage fails
    n, j = 16, 8
    rng = np.random.default_rng(67)
    v = np.exp(1j * 3.0 * np.arange(n))
    s = rng.standard_normal((1, j)) + 1j * rng.standard_normal((1, j))
    scene = SourceScene(angles_deg=(0.0,), snr_db=float("inf"), n_snapshots=j)
    block = SnapshotBlock(samples=v[:, None] * s, scene=scene)
    plan = plan_subarrays(ArrayConfig(n_elements=16), 4, 2)
    coarse = opsc_coarse(block, plan, 1, spacing_ratio=0.25)
    assert coarse == [None] * plan.k_subarrays
    with pytest.raises(PipelineError):
        opsc_estimate(block, plan, 1, spacing_ratio=0.25)


def test_combined_tracks_best_subarray_at_desk_scale():
    """Averaging K coarse estimates must not lose accuracy vs any single one."""
    plan = plan_subarrays(ArrayConfig(n_elements=32), 8, 4)
    truth = (-10.0, 20.0)
    trials = 200
    per_sub = [[] for _ in range(plan.k_subarrays)]
    combined_all = []
    for trial in range(trials):
        block = block_for(32, truth, 10.0, 200,
                          seed=derive_seed(777, trial))
        coarse = opsc_coarse(block, plan, 2)
        assert all(est is not None for est in coarse)
        for k, est in enumerate(coarse):
            per_sub[k].append(est)
        combined_all.append(
            coherent_combine(coarse, CombineWeights.uniform(len(coarse))))
    truths = [truth] * trials
    combined_rmse = rmse(combined_all, truths)
    for k in range(plan.k_subarrays):
        assert combined_rmse <= rmse(per_sub[k], truths) + 0.002
