# Copyright 2026 mmloc contributors
#
# Description:
# mmloc Monte Carlo harness tests

import dataclasses
import math

import numpy as np
import pandas as pd
import pytest
from conftest import small_network

import mmloc
from mmloc import ConfigError, Factory, NoiseModel, RunAborted, RunConfig, UnderdeterminedError, WlsNetConfig


def test_db_conversions():
    assert mmloc.db_to_linear(-20.0) == pytest.approx(0.01)
    assert mmloc.linear_to_db(1e-3) == pytest.approx(-30.0)
    with pytest.raises(ValueError):
        mmloc.linear_to_db(0.0)


def test_families():
    d2 = mmloc.build_scenario_family("D2", seed=4)
    assert d2.is_dominant
    assert (d2.sigma_d, d2.sigma_a) == pytest.approx((10.0, 0.1))
    assert d2.gaussian_stds() == pytest.approx((1e-3, 1e-3, 1e-4))
    assert d2.seed == 4
    p2 = mmloc.build_scenario_family("p2")
    assert p2.gaussian_stds() == pytest.approx((1e-4, 1e-4, 1e-5))
    p4 = mmloc.build_scenario_family("P4")
    assert not p4.is_dominant
    assert p4.gaussian_stds() == pytest.approx((0.1, 0.01, 0.001))
    with pytest.raises(ConfigError):
        mmloc.build_scenario_family("D5")


def test_run_config_validation(scenario):
    with pytest.raises(ConfigError):
        RunConfig(scenario=scenario, estimator="kalman")
    with pytest.raises(UnderdeterminedError):
        RunConfig(scenario=scenario, na=7)
    with pytest.raises(ConfigError):
        RunConfig(scenario=scenario, trials=0)
    with pytest.raises(ConfigError):
        RunConfig(scenario=scenario, rho=0.0)


def test_run_config_from_factory():
    Factory.set_variable("run.rho_db", -20.0)
    Factory.set_variable("run.trials", 12)
    Factory.set_variable("run.na", 5)
    Factory.set_variable("wls.iterations", 3)
    Factory.set_variable("mapping.truth_ue", True)
    Factory.set_variable("noise.family", "D1")
    cfg = RunConfig.from_config()
    assert cfg.rho == pytest.approx(0.01)
    assert (cfg.trials, cfg.na, cfg.iterations) == (12, 5, 3)
    assert cfg.mapping_truth_ue
    assert cfg.noise.is_dominant
    assert cfg.scenario_label == "six_rrh/D1"


def test_trials_are_reproducible(scenario):
    cfg = RunConfig(scenario=scenario, trials=30, rho=0.01, seed=7, record_timing=False)
    a = mmloc.monte_carlo(cfg)
    b = mmloc.monte_carlo(cfg)
    assert a.rmse_u == b.rmse_u
    np.testing.assert_array_equal(a.errors, b.errors)
    assert math.isnan(a.t_per_estimate)
    assert a.failures == 0
    c = mmloc.monte_carlo(dataclasses.replace(cfg, seed=8))
    assert c.rmse_u != a.rmse_u

    rng = mmloc.trial_rng(7, 3)
    np.testing.assert_array_equal(rng.normal(size=4), mmloc.trial_rng(7, 3).normal(size=4))


def test_neural_estimator_without_networks_aborts(scenario):
    with pytest.raises(RunAborted):
        mmloc.monte_carlo(RunConfig(scenario=scenario, estimator="wlsnet", trials=10, rho=0.01))


def test_neural_estimators_run(scenario):
    members = (small_network(22, 22, seed=1, scale=50.0), small_network(22, 22, seed=2, scale=50.0))
    fp = small_network(22, 6, kind="fp", scale=500.0)
    for est in ("wlsnet", "lsnet", "ewlsnet", "fp"):
        r = mmloc.monte_carlo(RunConfig(scenario=scenario, estimator=est, trials=5, rho=0.01, members=members, fp_params=fp))
        assert r.estimator == est
        assert r.failures == 0
        assert np.isfinite(r.rmse_u)


@pytest.mark.slow
@pytest.mark.parametrize("rho", [1e-3, 1e-2])
def test_wls_attains_the_bound(scenario, rho):
    r = mmloc.monte_carlo(RunConfig(scenario=scenario, trials=2000, rho=rho, seed=1))
    assert 0.95 <= r.rmse_u / r.crlb_pos <= 1.10
    assert 0.95 <= r.rmse_udot / r.crlb_vel <= 1.10


def test_sub_decimeter_at_low_noise(scenario):
    r = mmloc.monte_carlo(RunConfig(scenario=scenario, trials=200, rho=1e-3, seed=2))
    assert r.rmse_u < 0.1
    assert r.crlb_pos < 0.1


def test_more_rrhs_help(scenario):
    reports = mmloc.sweep_na(RunConfig(scenario=scenario, trials=500, rho=1e-2, seed=3), [4, 5, 6])
    assert [r.na for r in reports] == [4, 5, 6]
    for a, b in zip(reports, reports[1:]):
        assert b.crlb_pos <= a.crlb_pos
        assert b.crlb_vel <= a.crlb_vel
    for r in reports:
        assert 0.85 <= r.rmse_u / r.crlb_pos <= 1.15


def test_three_rrhs_have_no_velocity_bound(scenario):
    r = mmloc.monte_carlo(RunConfig(scenario=scenario, trials=20, rho=1e-2, na=3))
    assert math.isnan(r.crlb_pos) and math.isnan(r.crlb_vel)
    assert np.isfinite(r.rmse_u)
    assert r.failures == 0
    assert r.flagged == r.trials - r.failures
    assert r.median_u == pytest.approx(np.median(np.linalg.norm(r.errors[:, :3], axis=1)), rel=1e-12)
    assert r.median_udot == pytest.approx(np.median(np.linalg.norm(r.errors[:, 3:], axis=1)), rel=1e-12)


@pytest.mark.slow
def test_position_error_shrinks_with_rrhs(scenario):
    reports = mmloc.sweep_na(RunConfig(scenario=scenario, trials=1000, rho=1e-2, seed=3, record_timing=False), [2, 3, 4, 5, 6])
    for a, b in zip(reports, reports[1:]):
        assert b.rmse_u <= a.rmse_u
    for a, b in zip(reports[2:], reports[3:]):
        assert b.rmse_udot <= a.rmse_udot


def test_error_grows_with_noise(scenario):
    reports = mmloc.sweep_rho(RunConfig(scenario=scenario, trials=200, seed=9, record_timing=False), [1e-3, 1e-2, 1e-1, 1.0])
    for a, b in zip(reports, reports[1:]):
        assert b.rmse_u >= a.rmse_u
        assert b.rmse_udot >= a.rmse_udot


@pytest.mark.slow
def test_trial_errors_are_uncorrelated(scenario):
    r = mmloc.monte_carlo(RunConfig(scenario=scenario, trials=10000, rho=1e-2, seed=10, record_timing=False))
    assert r.errors.shape == (10000, 6)
    for k in range(6):
        assert abs(mmloc.lag1_autocorrelation(r.errors[:, k])) < 0.05


@pytest.mark.slow
def test_mapping_attains_the_bound(scenario):
    r = mmloc.monte_carlo(RunConfig(scenario=scenario, estimator="mapping", trials=2000, rho=1e-2, seed=4, mapping_truth_ue=True))
    n = mmloc.MAPPING_RRH_INDEX
    assert set(r.rmse_s) == {n}
    assert 0.95 <= r.rmse_s[n] / r.crlb_s[n] <= 1.15


def test_mapping_with_estimated_ue(scenario):
    r = mmloc.monte_carlo(RunConfig(scenario=scenario, estimator="mapping", trials=50, rho=1e-2, seed=4))
    n = mmloc.MAPPING_RRH_INDEX
    assert np.isfinite(r.rmse_s[n])
    assert r.rmse_s[n] >= 0.5 * r.crlb_s[n]


def test_sweeps(scenario):
    cfg = RunConfig(scenario=scenario, trials=10, seed=5)
    rhos = mmloc.sweep_rho(cfg, [1e-3, 1e-2, 1e-1])
    assert [r.rho for r in rhos] == [1e-3, 1e-2, 1e-1]
    assert rhos[0].crlb_pos < rhos[1].crlb_pos < rhos[2].crlb_pos
    grid = mmloc.sweep_sigmas(cfg, [0.1, 1.0], [1e-3, 1e-2, 1e-1])
    assert len(grid) == 6
    assert all(r.rho == 1.0 for r in grid)


def test_emit_csv(tmp_path, scenario):
    reports = mmloc.sweep_rho(RunConfig(scenario=scenario, trials=5, seed=6), [1e-2, 1e-1])
    path = tmp_path / "report.csv"
    mmloc.emit_report(reports, str(path), "csv")
    df = pd.read_csv(path)
    assert list(df.columns) == mmloc.REPORT_COLUMNS
    assert len(df) == 2
    assert list(df["estimator"]) == ["wls", "wls"]
    with pytest.raises(ConfigError):
        mmloc.emit_report(reports, str(path), "xml")


def test_json_report_keeps_missing_values(tmp_path, scenario):
    reports = [
        mmloc.monte_carlo(RunConfig(scenario=scenario, trials=5, rho=1e-2, na=3, record_timing=False)),
        mmloc.monte_carlo(RunConfig(scenario=scenario, estimator="mapping", trials=5, rho=1e-2)),
    ]
    path = tmp_path / "report.json"
    mmloc.emit_report(reports, str(path), "json")
    back = mmloc.load_report_json(str(path))
    assert len(back) == 2
    assert math.isnan(back[0].crlb_vel)
    assert math.isnan(back[0].t_per_estimate)
    assert back[0].rmse_u == reports[0].rmse_u
    assert back[0].rmse_udot == reports[0].rmse_udot
    assert back[0].median_u == reports[0].median_u
    assert back[0].flagged == reports[0].flagged == 5
    assert back[1].rmse_s[1] == reports[1].rmse_s[1]
    assert back[1].crlb_s[1] == reports[1].crlb_s[1]
    np.testing.assert_array_equal(back[1].mean_error, reports[1].mean_error)
    with pytest.raises(ConfigError):
        mmloc.load_report_json(str(tmp_path / "none.json"))


def test_bench_timing(scenario):
    cfg = RunConfig(scenario=scenario, rho=1e-2)
    with pytest.raises(ConfigError):
        mmloc.bench_timing(cfg)
    members = tuple(small_network(22, 22, seed=k, scale=50.0) for k in range(3))
    t = mmloc.bench_timing(dataclasses.replace(cfg, members=members), repetitions=50)
    assert t.t_wls > 0 and t.t_wlsnet > 0
    assert t.t_wlsnet < t.t_wls
    assert t.t_ewlsnet > t.t_wlsnet
    assert set(t.to_dict()) == {"t_wls", "t_wlsnet", "t_ewlsnet"}


def test_compare_family(scenario):
    nn = WlsNetConfig(hidden=(8,), epochs=3, batch_size=16, log_interval=0)
    reports = mmloc.compare_family("D1", scenario, na=6, samples=100, nn=nn, members=2, seed=1)
    assert [r.estimator for r in reports] == ["wls", "wlsnet", "lsnet", "ewlsnet", "fp"]
    assert all(r.trials == 20 for r in reports)
    assert all(r.scenario == "six_rrh/D1" for r in reports)
    assert all(np.isfinite(r.rmse_u) for r in reports)


@pytest.mark.slow
def test_estimator_ordering_per_family(scenario):
    nn = WlsNetConfig(epochs=150, log_interval=0)
    rmse = {}
    for fam in ("D1", "D0", "P4", "P1"):
        reports = mmloc.compare_family(fam, scenario, na=6, samples=3000, nn=nn, members=3, seed=0)
        rmse[fam] = {r.estimator: r.rmse_u for r in reports}

    # dominant offsets: the learned residual beats plain WLS, the ensemble does not hurt
    assert rmse["D1"]["wlsnet"] < rmse["D1"]["wls"]
    assert rmse["D1"]["ewlsnet"] <= rmse["D1"]["wlsnet"]
    assert rmse["D0"]["lsnet"] <= rmse["D0"]["wlsnet"]
    # purely gaussian errors: WLS is already efficient
    assert rmse["P4"]["wls"] < rmse["P4"]["wlsnet"]
    assert rmse["P1"]["fp"] > rmse["P1"]["wls"]


def test_evaluate_testset_needs_networks(scenario):
    data = mmloc.generate_dataset(scenario, NoiseModel(sigma_d=1.0, sigma_a=0.01), 6, samples=50, seed=0)
    cfg = RunConfig(scenario=scenario)
    wls = mmloc.evaluate_testset("wls", data, cfg)
    assert wls.trials == 10
    with pytest.raises(RunAborted):
        mmloc.evaluate_testset("fp", data, cfg)
