# Copyright 2026 mmloc contributors
#
# Description:
# mmloc Geometry tests

import numpy as np
import pytest

import mmloc
from mmloc import ConfigError, Factory, GeometryError, Scenario


def test_six_rrh_preset(scenario):
    assert scenario.n_rrh == 6
    assert scenario.scatterer_indices() == [mmloc.MAPPING_RRH_INDEX]
    np.testing.assert_array_equal(scenario.x, [300.0, -20.0, -100.0, -9.0, 7.0, 5.0])
    with pytest.raises(ValueError):
        scenario.rrhs[0, 0] = 1.0


def test_degenerate_scenarios_rejected():
    rrhs = np.array([[0.0, 0.0, 0.0], [0.0, 0.0, 0.0], [10.0, 0.0, 0.0]])
    with pytest.raises(GeometryError):
        Scenario(rrhs=rrhs, ue_pos=[5, 5, 5], ue_vel=[0, 0, 0])
    rrhs[1] = [0.0, 10.0, 0.0]
    with pytest.raises(GeometryError):
        Scenario(rrhs=rrhs, ue_pos=[10, 0, 0], ue_vel=[0, 0, 0])
    with pytest.raises(GeometryError):
        Scenario(rrhs=rrhs, ue_pos=[5, 5, 5], ue_vel=[0, 0, 0], scatterers=(None, [0.0, 10.0, 0.0]))
    with pytest.raises(GeometryError):
        Scenario(rrhs=rrhs, ue_pos=[5, 5, np.nan], ue_vel=[0, 0, 0])


def test_unknown_preset():
    with pytest.raises(ConfigError):
        mmloc.load_preset("twelve_rrh")


def test_clock_bias_cancels_in_tdoa(scenario):
    biased = Scenario(rrhs=scenario.rrhs, ue_pos=scenario.ue_pos, ue_vel=scenario.ue_vel, clock_bias=1e-3)
    for n in range(1, 6):
        assert mmloc.tdoa_related(biased, n) == mmloc.tdoa_related(scenario, n)
        dt = mmloc.arrival_time(biased, n) - mmloc.arrival_time(biased, 0)
        assert dt * biased.light_speed == pytest.approx(mmloc.tdoa_related(scenario, n), rel=1e-9)


def test_tdoa_needs_non_reference(scenario):
    with pytest.raises(GeometryError):
        mmloc.tdoa_related(scenario, 0)
    with pytest.raises(GeometryError):
        mmloc.range_rate_diff(scenario, 0)
    with pytest.raises(GeometryError):
        mmloc.los_range(scenario, 6)


def test_range_rate_is_range_derivative(scenario):
    t = 1e-4
    for n in range(6):
        ahead = scenario.with_ue(scenario.ue_pos + t * scenario.ue_vel)
        behind = scenario.with_ue(scenario.ue_pos - t * scenario.ue_vel)
        fd = (mmloc.los_range(ahead, n) - mmloc.los_range(behind, n)) / (2 * t)
        rr = mmloc.range_rate(scenario, n)
        assert abs(fd - rr) <= 1e-6 * max(abs(rr), 1.0)


def test_nlos_params_sum_of_norms(scenario):
    s = np.array([50.0, 200.0, -70.0])
    u = np.array([300.0, -20.0, -100.0])
    b = scenario.rrhs[1]
    expected = np.linalg.norm(s - b) + np.linalg.norm(u - s) - np.linalg.norm(u - scenario.rrhs[0])
    r_s, phi, theta = mmloc.nlos_params(scenario, 1)
    assert r_s == pytest.approx(expected, rel=1e-12)
    d = s - b
    assert phi == pytest.approx(np.arctan2(d[1], d[0]))
    assert theta == pytest.approx(np.arcsin(d[2] / np.linalg.norm(d)))
    with pytest.raises(GeometryError):
        mmloc.nlos_params(scenario, 0)


def test_aoa_pair_ranges():
    assert mmloc.aoa_pair([0, 0, 0], [-1, 0, 0]) == pytest.approx((np.pi, 0.0))
    assert mmloc.aoa_pair([0, 0, 0], [0, 0, 5])[1] == pytest.approx(np.pi / 2)
    assert mmloc.aoa_pair([0, 0, 0], [0, -3, 0])[0] == pytest.approx(-np.pi / 2)
    with pytest.raises(GeometryError):
        mmloc.aoa_pair([1, 2, 3], [1, 2, 3])


def test_aoa_basis():
    phi, theta = 0.7, -0.3
    a, c, d = mmloc.aoa_basis(phi, theta)
    frame = np.vstack([a, c, d])
    np.testing.assert_allclose(frame @ frame.T, np.eye(3), atol=1e-12)
    h = 1e-6
    da_dphi = (mmloc.aoa_basis(phi + h, theta)[0] - mmloc.aoa_basis(phi - h, theta)[0]) / (2 * h)
    da_dtheta = (mmloc.aoa_basis(phi, theta + h)[0] - mmloc.aoa_basis(phi, theta - h)[0]) / (2 * h)
    np.testing.assert_allclose(da_dphi, np.cos(theta) * c, atol=1e-8)
    np.testing.assert_allclose(da_dtheta, d, atol=1e-8)


def test_location_parameters_order(scenario):
    m = mmloc.location_parameters(scenario, 4)
    assert m.shape == (14,)
    for i in range(1, 4):
        assert m[2 * (i - 1)] == mmloc.tdoa_related(scenario, i)
        assert m[2 * (i - 1) + 1] == mmloc.range_rate_diff(scenario, i)
    for j in range(4):
        assert tuple(m[6 + 2 * j : 8 + 2 * j]) == mmloc.aoa_pair(scenario.rrhs[j], scenario.ue_pos)


def test_wrap_angle():
    assert mmloc.wrap_angle(np.pi) == pytest.approx(np.pi)
    assert mmloc.wrap_angle(-np.pi) == pytest.approx(np.pi)
    assert mmloc.wrap_angle(1.5 * np.pi) == pytest.approx(-0.5 * np.pi)
    np.testing.assert_allclose(mmloc.wrap_angle(np.array([0.1, -0.1 - 4 * np.pi])), [0.1, -0.1])


def test_street_canyon():
    sc = mmloc.street_canyon_scenario(count=12, seed=3)
    assert sc.n_rrh == 18
    assert sc.scatterer_indices() == list(range(12))
    for k in sc.scatterer_indices():
        assert sc.scatterers[k][0] == mmloc.STREET_WALLS_X[k % 2]
    with pytest.raises(ConfigError):
        mmloc.street_canyon_scenario(count=13)


def test_from_config():
    Factory.set_variable("scenario.preset", "eighteen_rrh")
    assert Scenario.from_config().n_rrh == 18

    Factory.clear_factory()
    Factory.set_variable("scenario.ue_pos", [100.0, 50.0, -20.0])
    sc = Scenario.from_config()
    assert sc.n_rrh == 6
    assert sc.name == "custom"
    np.testing.assert_array_equal(sc.ue_pos, [100.0, 50.0, -20.0])
    assert sc.scatterer_indices() == [1]
