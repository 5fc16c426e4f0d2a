# Copyright 2026 mmloc contributors
#
# Description:
# mmloc Environment mapping tests

import numpy as np
import pandas as pd
import pytest

import mmloc
from mmloc import GeometryError, MappingFailure, MappingMeasurement, NoiseModel, ScattererEstimate

STDS = (0.1, 0.01, 0.001)


def noiseless_triple(scenario, n):
    return MappingMeasurement(rrh_index=n, m_s=mmloc.nlos_params(scenario, n), q_s=mmloc.mapping_covariance(STDS))


def test_system_is_consistent_with_truth(scenario):
    n = mmloc.MAPPING_RRH_INDEX
    meas = noiseless_triple(scenario, n)
    r1 = mmloc.los_range(scenario, 0)
    system = mmloc.build_mapping_system(meas, scenario.rrhs[n], scenario.ue_pos, r1)
    s = scenario.scatterers[n]
    assert system.j == pytest.approx(np.linalg.norm(s - scenario.rrhs[n]) + np.linalg.norm(scenario.ue_pos - s))
    res = system.h_s - system.g_s @ s
    assert np.max(np.abs(res)) <= 1e-9 * max(1.0, np.max(np.abs(system.h_s)))


def test_reference_range_must_be_positive(scenario):
    meas = noiseless_triple(scenario, 1)
    with pytest.raises(GeometryError):
        mmloc.build_mapping_system(meas, scenario.rrhs[1], scenario.ue_pos, 0.0)


def test_linearization():
    bs = mmloc.build_mapping_linearization(3.0, 4.0, 0.5)
    np.testing.assert_allclose(bs, np.diag([8.0, 3.0 * np.cos(0.5), 3.0]))
    with pytest.raises(GeometryError):
        mmloc.build_mapping_linearization(0.0, 4.0, 0.5)


def test_noiseless_recovery(scenario):
    n = mmloc.MAPPING_RRH_INDEX
    est = mmloc.estimate_scatterer(noiseless_triple(scenario, n), scenario.rrhs, scenario.ue_pos)
    np.testing.assert_allclose(est.s, scenario.scatterers[n], atol=1e-6)
    assert est.rrh_index == n
    assert est.iterations_used >= 1
    assert set(est.to_dict()) == {"rrh_index", "s", "iterations", "cond"}


def test_index_out_of_range(scenario):
    meas = MappingMeasurement(rrh_index=9, m_s=[10.0, 0.1, 0.1], q_s=np.eye(3))
    with pytest.raises(GeometryError):
        mmloc.estimate_scatterer(meas, scenario.rrhs, scenario.ue_pos)


def test_batch_keeps_going_after_a_failure(scenario):
    good = noiseless_triple(scenario, 1)
    bad = MappingMeasurement(rrh_index=9, m_s=[10.0, 0.1, 0.1], q_s=np.eye(3))
    out = mmloc.map_environment([bad, good], scenario.rrhs, scenario.ue_pos)
    assert isinstance(out[0], MappingFailure)
    assert out[0].error == "GeometryError"
    assert isinstance(out[1], ScattererEstimate)

    df = mmloc.point_cloud(out)
    assert list(df.columns) == mmloc.POINT_CLOUD_COLUMNS
    assert len(df) == 1
    assert df["rrh_index"].iloc[0] == 1


def test_street_canyon_lies_on_the_walls(tmp_path):
    sc = mmloc.street_canyon_scenario(count=12, seed=4)
    noise = NoiseModel(sigma_d=0.01, sigma_a=1e-4)
    rng = np.random.default_rng(9)
    meas = [mmloc.synthesize_mapping_measurement(sc, n, noise, rng) for n in sc.scatterer_indices()]
    out = mmloc.map_environment(meas, sc.rrhs, sc.ue_pos)
    assert all(isinstance(e, ScattererEstimate) for e in out)
    for e in out:
        assert abs(e.s[0] - mmloc.STREET_WALLS_X[e.rrh_index % 2]) < 0.5

    path = tmp_path / "cloud.csv"
    mmloc.write_point_cloud(str(path), out)
    df = pd.read_csv(path)
    assert len(df) == 12
    assert sorted(df["rrh_index"]) == list(range(12))
