import numpy as np
import numpy.testing as npt
import pytest

from conftest import block_for
from doakit import (
    AngleEstimate,
    ApSettings,
    ArcsinDomainError,
    ConditioningError,
    CovarianceMatrix,
    GridSizeError,
    GridSpec,
    RootDegeneracyError,
    ValidationError,
    analytic_covariance,
    ap_refine,
    hermitian_eig,
    ml_grid_search,
    ml_objective,
    projection_matrix,
    root_music,
    sample_covariance,
    sequential_init,
    steering_vector,
)
import oracles


# ---------------------------------------------------------------- projection


def test_projection_single_source_closed_form():
    a = steering_vector(25.0, 6)
    p = projection_matrix([25.0], 6)
    npt.assert_allclose(p, np.outer(a, a.conj()) / 6, atol=1e-12)


def test_projection_reproduces_manifold_columns():
    p = projection_matrix([-10.0, 20.0], 8)
    for theta in (-10.0, 20.0):
        a = steering_vector(theta, 8)
        npt.assert_allclose(p @ a, a, atol=1e-10)


def test_projection_orthogonal_pair_is_sum_of_rank_ones():
    # on 4 elements a(0) and a(30) are exactly orthogonal: the inner product
    # is a geometric sum over exp(j pi k / 2), a full cycle of i
    a1 = steering_vector(0.0, 4)
    a2 = steering_vector(30.0, 4)
    assert abs(a1.conj() @ a2) < 1e-12
    p = projection_matrix([0.0, 30.0], 4)
    npt.assert_allclose(p, (np.outer(a1, a1.conj()) + np.outer(a2, a2.conj())) / 4,
                        atol=1e-12)


def test_projection_matches_pinv_oracle():
    rng = np.random.default_rng(41)
    for _ in range(50):
        n = int(rng.integers(3, 16))
        q = int(rng.integers(1, 3))
        angles = np.sort(rng.uniform(-80, 80, q))
        while q > 1 and np.diff(angles).min() < 5.0:
            angles = np.sort(rng.uniform(-80, 80, q))
        p = projection_matrix(angles, n)
        npt.assert_allclose(p, oracles.naive_projector(angles, n), atol=1e-9)


def test_projection_idempotent_hermitian_trace_property():
    rng = np.random.default_rng(43)
    for _ in range(1000):
        n = int(rng.integers(2, 24))
        q = int(rng.integers(1, min(n, 4)))
        angles = np.sort(rng.uniform(-85, 85, q))
        while q > 1 and np.diff(angles).min() < 3.0:
            angles = np.sort(rng.uniform(-85, 85, q))
        p = projection_matrix(angles, n)
        assert np.linalg.norm(p @ p - p) <= 1e-9
        assert np.linalg.norm(p - p.conj().T) <= 1e-9
        assert abs(np.trace(p).real - q) <= 1e-9


def test_projection_rejects_degenerate_manifold():
    with pytest.raises(ConditioningError):
        projection_matrix([10.0, 10.0 + 1e-9], 8)
    with pytest.raises(ValidationError):
        projection_matrix([10.0, 10.0], 8)
    with pytest.raises(ValidationError):
        projection_matrix([0.0, 10.0, 20.0], 3)


# ----------------------------------------------------------------- objective


def test_objective_rank_one_at_truth_equals_n():
    r = analytic_covariance([35.0], 4)
    assert ml_objective(r, [35.0]) == pytest.approx(4.0, abs=1e-12)


def test_objective_identity_single_angle_is_one():
    r = np.eye(5, dtype=complex)
    for theta in (-60.0, 0.0, 42.0):
        assert ml_objective(r, [theta]) == pytest.approx(1.0, abs=1e-12)


def test_objective_maximized_at_true_angles():
    r = analytic_covariance([-10.0, 20.0], 8, noise_var=0.01)
    at_truth = ml_objective(r, [-10.0, 20.0])
    for probe in ([-12.0, 20.0], [-10.0, 17.0], [0.0, 40.0]):
        assert ml_objective(r, probe) < at_truth


def test_objective_rejects_large_imaginary_residue():
    r = np.array([[0.0, 1.0], [0.0, 0.0]], dtype=complex)  # not Hermitian
    with pytest.raises(ValidationError):
        ml_objective(r, [30.0])


def test_objective_matches_naive_oracle():
    rng = np.random.default_rng(47)
    block = block_for(8, [-15.0, 25.0], 5.0, 60, seed=4)
    r = sample_covariance(block)
    for _ in range(30):
        angles = np.sort(rng.uniform(-70, 70, 2))
        if np.diff(angles).min() < 2.0:
            continue
        npt.assert_allclose(ml_objective(r, angles),
                            oracles.naive_objective(r.entries, angles),
                            rtol=1e-9)


# --------------------------------------------------------------- grid search


def test_grid_search_recovers_on_grid_source():
    r = analytic_covariance([10.0], 8)
    est = ml_grid_search(r, GridSpec(-90.0, 90.0, 1.0), 1)
    assert est.angles_deg == (10.0,)
    assert est.source == "ml-grid"


def test_grid_search_two_sources_matches_exhaustive_oracle():
    r = analytic_covariance([-20.0, 30.0], 8, noise_var=0.1)
    grid = GridSpec(-90.0, 90.0, 1.0)
    est = ml_grid_search(r, grid, 2)
    assert est.angles_deg == (-20.0, 30.0)
    oracle_angles, _ = oracles.exhaustive_search(r.entries, grid.points(), 2)
    assert est.angles_deg == tuple(sorted(oracle_angles))


def test_grid_search_tie_breaks_to_lowest_combination():
    # identity covariance scores every pair identically
    r = np.eye(6, dtype=complex)
    grid = GridSpec(-30.0, 30.0, 10.0)
    est = ml_grid_search(r, grid, 2)
    assert est.angles_deg == (-30.0, -20.0)


def test_grid_search_candidate_explosion_guard():
    with pytest.raises(GridSizeError):
        ml_grid_search(np.eye(4, dtype=complex), GridSpec(-90.0, 90.0, 0.01), 3)


def test_grid_search_needs_enough_points():
    with pytest.raises(ValidationError):
        ml_grid_search(np.eye(4, dtype=complex), GridSpec(0.0, 1.0, 1.0), 3)


def test_grid_search_scaling_invariance():
    block = block_for(8, [-20.0, 30.0], 0.0, 100, seed=6)
    r = sample_covariance(block).entries
    grid = GridSpec(-90.0, 90.0, 2.0)
    base = ml_grid_search(r, grid, 2).angles_deg
    for c in (1e-6, 3.7, 1e6):
        assert ml_grid_search(c * r, grid, 2).angles_deg == base


# ----------------------------------------------------------------- AP refine


def test_ap_refine_fixed_point_at_truth():
    r = analytic_covariance([-20.0, 30.0], 8)
    init = AngleEstimate(angles_deg=(-20.0, 30.0), source="given")
    est = ap_refine(r, init, GridSpec(-90.0, 90.0, 1.0), ApSettings())
    assert est.angles_deg == (-20.0, 30.0)
    assert est.converged
    assert est.source == "ml-ap"


def test_ap_refine_objective_trace_non_decreasing():
    block = block_for(8, [-20.0, 30.0], 0.0, 100, seed=11)
    r = sample_covariance(block)
    init = AngleEstimate(angles_deg=(-40.0, 10.0), source="given")
    est = ap_refine(r, init, GridSpec(-90.0, 90.0, 1.0),
                    ApSettings(max_iters=30, tol_deg=0.5))
    trace = np.array(est.objective_trace)
    assert trace.size >= 1
    assert np.all(np.diff(trace) >= -1e-9)


def test_ap_refine_stays_within_grid_bounds():
    block = block_for(8, [-20.0, 30.0], 0.0, 100, seed=12)
    r = sample_covariance(block)
    grid = GridSpec(-45.0, 45.0, 1.0)
    init = AngleEstimate(angles_deg=(-40.0, 10.0), source="given")
    est = ap_refine(r, init, grid, ApSettings(max_iters=30, tol_deg=0.5))
    for a in est.angles_deg:
        assert -45.0 <= a <= 45.0


def test_ap_refine_reports_non_convergence():
    block = block_for(8, [-20.0, 30.0], 0.0, 100, seed=13)
    r = sample_covariance(block)
    init = AngleEstimate(angles_deg=(-60.0, 60.0), source="given")
    est = ap_refine(r, init, GridSpec(-90.0, 90.0, 1.0),
                    ApSettings(max_iters=1, tol_deg=1e-6))
    assert not est.converged
    assert len(est.angles_deg) == 2


def test_ap_refine_rejects_init_outside_grid():
    r = analytic_covariance([0.0], 8)
    init = AngleEstimate(angles_deg=(50.0,), source="given")
    with pytest.raises(ValidationError):
        ap_refine(r, init, GridSpec(-45.0, 45.0, 1.0), ApSettings())


def test_ap_refine_requires_init_or_sequential():
    r = analytic_covariance([0.0], 8)
    with pytest.raises(ValidationError):
        ap_refine(r, None, GridSpec(-45.0, 45.0, 1.0), ApSettings(init="given"))
    with pytest.raises(ValidationError):
        # shared grid gives no way to infer the source count
        ap_refine(r, None, GridSpec(-45.0, 45.0, 1.0), ApSettings(init="sequential"))


def test_ap_refine_sequential_init_per_dimension_grids():
    r = analytic_covariance([-20.0, 30.0], 8, noise_var=0.01)
    grids = [GridSpec(-90.0, 90.0, 1.0), GridSpec(-90.0, 90.0, 1.0)]
    est = ap_refine(r, None, grids, ApSettings(init="sequential", tol_deg=0.5))
    assert est.angles_deg == (-20.0, 30.0)


def test_ap_refine_per_dimension_candidate_grids():
    r = analytic_covariance([-20.0, 30.0], 8, noise_var=0.01)
    grids = [GridSpec(-22.0, -18.0, 0.5), GridSpec(28.0, 32.0, 0.5)]
    init = AngleEstimate(angles_deg=(-19.0, 31.0), source="given")
    est = ap_refine(r, init, grids, ApSettings())
    assert est.angles_deg == (-20.0, 30.0)


def test_ap_refine_matches_grid_search_on_small_instances():
    grid = GridSpec(-90.0, 90.0, 2.0)
    hits = 0
    for trial in range(10):
        angles = (-30.0 + trial, 10.0 + 2 * trial)
        r = analytic_covariance(angles, 8)
        full = ml_grid_search(r, grid, 2)
        ap = ap_refine(r, None, [grid, grid],
                       ApSettings(max_iters=30, tol_deg=0.5, init="sequential"))
        hits += ap.angles_deg == full.angles_deg
    assert hits >= 9


def test_sequential_init_lands_near_truth():
    r = analytic_covariance([-20.0, 30.0], 8, noise_var=0.01)
    est = sequential_init(r, GridSpec(-90.0, 90.0, 1.0), 2)
    assert est.source == "sequential-init"
    npt.assert_allclose(est.angles_deg, (-20.0, 30.0), atol=1.0)


def test_ap_refine_scaling_invariance():
    block = block_for(8, [-20.0, 30.0], 0.0, 100, seed=14)
    r = sample_covariance(block).entries
    grid = GridSpec(-90.0, 90.0, 1.0)
    init = AngleEstimate(angles_deg=(-25.0, 25.0), source="given")
    settings = ApSettings(max_iters=30, tol_deg=0.5)
    base = ap_refine(r, init, grid, settings).angles_deg
    for c in (1e-4, 7.0, 1e5):
        assert ap_refine(c * r, init, grid, settings).angles_deg == base


# ---------------------------------------------------------------- root-MUSIC


def test_root_music_symmetric_single_source():
    r = analytic_covariance([0.0], 8, noise_var=0.5)
    est = root_music(r, 1)
    assert est.source == "root-music"
    assert abs(est.angles_deg[0]) < 1e-8


def test_root_music_two_sources_exact_covariance():
    r = analytic_covariance([-20.0, 20.0], 32, noise_var=0.1)
    est = root_music(r, 2)
    npt.assert_allclose(est.angles_deg, (-20.0, 20.0), atol=1e-6)


def test_root_music_narrow_spacing_ratio():
    r = analytic_covariance([15.0], 16, spacing_ratio=0.25, noise_var=0.2)
    est = root_music(r, 1, spacing_ratio=0.25)
    assert est.angles_deg[0] == pytest.approx(15.0, abs=1e-7)


def test_root_music_scaling_invariance():
    block = block_for(16, [-10.0, 25.0], 5.0, 200, seed=15)
    r = sample_covariance(block)
    base = root_music(r, 2).angles_deg
    for c in (1e-3, 2.5, 1e4):
        scaled = CovarianceMatrix(entries=c * r.entries, n_averaged=r.n_averaged)
        npt.assert_allclose(root_music(scaled, 2).angles_deg, base, atol=1e-9)


def test_root_music_arcsin_domain_error():
    # a spatial frequency of 3 rad/element cannot come from any real angle
    # when the element spacing ratio is 0.25 (max |omega| = pi/2)
    k = np.arange(4)
    v = np.exp(1j * 3.0 * k)
    r = np.outer(v, v.conj()) + 0.01 * np.eye(4)
    cm = CovarianceMatrix(entries=0.5 * (r + r.conj().T), n_averaged=100)
    with pytest.raises(ArcsinDomainError, match="sin"):
        root_music(cm, 1, spacing_ratio=0.25)
    # the same covariance is in-domain at half-wavelength spacing
    est = root_music(cm, 1, spacing_ratio=0.5)
    assert est.angles_deg[0] == pytest.approx(np.degrees(np.arcsin(3.0 / np.pi)),
                                              abs=1e-6)


def test_root_music_degeneracy_guard(monkeypatch):
    # force every polynomial root onto or outside the unit circle; the
    # selection step must refuse rather than pick a meaningless root
    r = analytic_covariance([0.0], 6, noise_var=0.5)
    monkeypatch.setattr(np, "roots",
                        lambda coeffs: np.array([2.0, 1.0 + 0j, -3.0 + 1j]))
    with pytest.raises(RootDegeneracyError):
        root_music(r, 1)


def test_root_music_input_validation():
    r = analytic_covariance([0.0], 6, noise_var=0.5)
    with pytest.raises(ValidationError):
        root_music(r, 6)
    with pytest.raises(ValidationError):
        root_music(r, 0)
    starved = CovarianceMatrix(entries=r.entries, n_averaged=1)
    with pytest.raises(ValidationError):
        root_music(starved, 2)


def test_root_music_roots_pair_conjugate_reciprocal():
    """The noise polynomial's roots must pair as (z, 1/conj(z)) exactly."""
    block = block_for(8, [-10.0, 25.0], 5.0, 100, seed=16)
    r = sample_covariance(block)
    eig = hermitian_eig(r, signal_dim=2)
    c = eig.noise_subspace @ eig.noise_subspace.conj().T
    pos = np.array([np.trace(c, offset=l) for l in range(8)])
    pos[0] = pos[0].real
    coeffs = np.concatenate([pos[::-1][:-1], [pos[0]], np.conj(pos[1:])])
    roots = np.roots(coeffs)
    mirrored = 1.0 / np.conj(roots)
    for z in roots:
        assert np.min(np.abs(mirrored - z)) < 1e-6 * max(1.0, abs(z))


# ------------------------------------------------------------------- eigen


def test_hermitian_eig_identity():
    eig = hermitian_eig(np.eye(5, dtype=complex), signal_dim=2)
    npt.assert_allclose(eig.eigenvalues, np.ones(5))
    assert eig.signal_subspace.shape == (5, 2)
    assert eig.noise_subspace.shape == (5, 3)


def test_hermitian_eig_rank_one():
    a = steering_vector(18.0, 6)
    eig = hermitian_eig(np.outer(a, a.conj()), signal_dim=1)
    npt.assert_allclose(eig.eigenvalues, [6.0] + [0.0] * 5, atol=1e-12)
    # dominant eigenvector spans the steering direction
    v = eig.signal_subspace[:, 0]
    assert abs(abs(v.conj() @ a) - np.sqrt(6.0) * np.linalg.norm(v)) < 1e-10


def test_hermitian_eig_descending_orthonormal_reconstruction():
    block = block_for(10, [-25.0, 5.0, 40.0], 3.0, 80, seed=17)
    r = sample_covariance(block)
    eig = hermitian_eig(r, signal_dim=3)
    assert np.all(np.diff(eig.eigenvalues) <= 1e-12)
    v = eig.eigenvectors
    npt.assert_allclose(v.conj().T @ v, np.eye(10), atol=1e-10)
    rebuilt = v @ np.diag(eig.eigenvalues) @ v.conj().T
    assert np.linalg.norm(rebuilt - r.entries) <= 1e-9 * np.linalg.norm(r.entries)


def test_hermitian_eig_rejects_non_hermitian():
    with pytest.raises(ValidationError):
        hermitian_eig(np.array([[1.0, 2.0], [0.0, 1.0]], dtype=complex), 1)
