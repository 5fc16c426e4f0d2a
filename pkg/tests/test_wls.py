# Copyright 2026 mmloc contributors
#
# Description:
# mmloc Joint WLS estimator tests

import numpy as np
import pytest
from scipy.linalg import cholesky, qr, solve_triangular

import mmloc
from mmloc import MeasurementSet, NoiseModel, UnderdeterminedError


def noiseless(scenario, na, stds=(0.1, 0.01, 0.001)):
    m = mmloc.location_parameters(scenario, na)
    return MeasurementSet(na=na, m=m, q=mmloc.joint_covariance(na, stds))


def test_design_is_consistent_with_truth(scenario):
    for na in (2, 4, 6):
        design = mmloc.build_design(noiseless(scenario, na), scenario.rrhs)
        assert design.g.shape == (4 * na - 2, 6)
        assert design.na == na
        res = design.h - design.g @ scenario.x
        assert np.max(np.abs(res)) <= 1e-9 * max(1.0, np.max(np.abs(design.h)))


def test_design_needs_enough_rrhs(scenario):
    with pytest.raises(UnderdeterminedError):
        mmloc.build_design(noiseless(scenario, 6), scenario.rrhs[:4])


def test_identity_weighting_recovers_truth(scenario):
    design = mmloc.build_design(noiseless(scenario, 6), scenario.rrhs)
    est = mmloc.wls_solve(design, np.eye(22))
    np.testing.assert_allclose(est.x, scenario.x, atol=1e-8)
    assert not est.flagged


def test_wls_solve_matches_qr_oracle(scenario, rng):
    noise = NoiseModel(sigma_d=1.0, sigma_a=0.01)
    meas = mmloc.synthesize_measurements(scenario, noise, 6, rng)
    design = mmloc.build_design(meas, scenario.rrhs)
    w = np.diag(rng.uniform(0.5, 2.0, 22))
    est = mmloc.wls_solve(design, w)

    r = cholesky(w, lower=False)
    qmat, rmat = qr(r @ design.g, mode="economic")
    x = solve_triangular(rmat, qmat.T @ (r @ design.h))
    np.testing.assert_allclose(est.x, x, rtol=1e-8, atol=1e-8)


def test_linearization_structure(scenario):
    bm = mmloc.build_linearization(scenario, scenario.rrhs, 6).b
    assert bm.shape == (22, 22)
    off = 10
    for k in range(off, 22):
        row = bm[k].copy()
        assert row[k] > 0
        row[k] = 0.0
        assert np.all(row == 0.0)
    for i in range(1, 6):
        k = 2 * (i - 1)
        row = bm[k].copy()
        row[k] = 0.0
        assert np.all(row == 0.0)
        nz = set(np.flatnonzero(bm[k + 1]))
        assert nz <= {k, k + 1, off, off + 1}


def test_linearization_accepts_states(scenario):
    from_scenario = mmloc.build_linearization(scenario, scenario.rrhs, 5).b
    from_vector = mmloc.build_linearization(scenario.x, scenario.rrhs, 5).b
    est = mmloc.JointEstimate(u=scenario.ue_pos.copy(), udot=scenario.ue_vel.copy())
    from_estimate = mmloc.build_linearization(est, scenario.rrhs, 5).b
    np.testing.assert_array_equal(from_scenario, from_vector)
    np.testing.assert_array_equal(from_scenario, from_estimate)
    with pytest.raises(mmloc.GeometryError):
        mmloc.build_linearization(np.zeros(5), scenario.rrhs, 5)


def test_noiseless_recovery(scenario):
    for iterations in (1, 5):
        est = mmloc.estimate_joint(noiseless(scenario, 6), scenario.rrhs, iterations=iterations)
        np.testing.assert_allclose(est.u, scenario.ue_pos, atol=1e-5)
        np.testing.assert_allclose(est.udot, scenario.ue_vel, atol=1e-5)
        assert 1 <= est.iterations_used <= iterations
        assert not est.flagged


def test_velocity_unobservable_below_four_rrhs(scenario):
    est = mmloc.estimate_joint(noiseless(scenario, 3), scenario.rrhs)
    assert est.flagged
    np.testing.assert_allclose(est.u, scenario.ue_pos, atol=1e-5)
    assert np.all(np.isfinite(est.udot))


def test_noisy_estimate(scenario, rng):
    noise = NoiseModel(sigma_d=0.4, sigma_a=0.001)
    meas = mmloc.synthesize_measurements(scenario, noise, 6, rng)
    est = mmloc.estimate_joint(meas, scenario.rrhs)
    assert 1 <= est.iterations_used <= 5
    assert np.isfinite(est.cond)
    assert est.weighting.shape == (22, 22)
    np.testing.assert_allclose(est.weighting, est.weighting.T, rtol=1e-9, atol=0.0)
    assert np.linalg.norm(est.u - scenario.ue_pos) < 5.0
    d = est.to_dict()
    assert set(d) == {"u", "udot", "iterations", "cond", "flagged"}


def test_iterations_must_be_positive(scenario):
    with pytest.raises(ValueError):
        mmloc.estimate_joint(noiseless(scenario, 6), scenario.rrhs, iterations=0)


def test_ill_conditioned_reweighting_is_flagged(scenario, rng):
    meas = mmloc.synthesize_measurements(scenario, NoiseModel(sigma_d=0.4, sigma_a=0.001), 6, rng)
    est = mmloc.estimate_joint(meas, scenario.rrhs, cond_limit=1.0)
    assert est.flagged
    assert est.iterations_used == 1


def test_weighting_scale_does_not_move_the_solution(scenario, rng):
    meas = mmloc.synthesize_measurements(scenario, NoiseModel(sigma_d=1.0, sigma_a=0.01), 6, rng)
    design = mmloc.build_design(meas, scenario.rrhs)
    w = np.diag(rng.uniform(0.5, 2.0, 22))
    ref = mmloc.wls_solve(design, w).x
    for c in (1e-6, 0.25, 3.7, 1e6):
        np.testing.assert_allclose(mmloc.wls_solve(design, c * w).x, ref, rtol=1e-8, atol=1e-8)


@pytest.mark.slow
def test_small_noise_estimate_is_unbiased(scenario):
    cfg = mmloc.RunConfig(scenario=scenario, trials=10000, rho=1e-3, seed=21, record_timing=False)
    errors = mmloc.monte_carlo(cfg).errors
    n = errors.shape[0]
    assert n == cfg.trials
    mean = errors.mean(axis=0)
    stderr = errors.std(axis=0, ddof=1) / np.sqrt(n)
    assert np.all(np.abs(mean) < 3.0 * stderr)
