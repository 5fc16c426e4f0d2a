# Copyright 2026 mmloc contributors
#
# Description:
# mmloc Command line tests

import json

import numpy as np
import pandas as pd
import pytest

import mmloc
from mmloc.tools import report_analysis
from mmloc.tools.cli import main

NN_CONFIG = """
nn:
  hidden: [8]
  epochs: 2
  batch_size: 16
  log_interval: 0
dataset:
  samples: 60
"""


def last_error(capsys):
    err = capsys.readouterr().err.strip().splitlines()
    return json.loads(err[-1])


@pytest.fixture
def measurements(tmp_path):
    path = tmp_path / "meas.csv"
    assert main(["simulate", "--measurements", "5", "--rho", "0.001", "--seed", "3", "--out", str(path)]) == 0
    return path


@pytest.fixture
def nn_config(tmp_path):
    path = tmp_path / "nn.yml"
    path.write_text(NN_CONFIG)
    return path


def test_crlb(capsys, scenario):
    assert main(["crlb", "--rho", "0.01"]) == 0
    doc = json.loads(capsys.readouterr().out)
    q = mmloc.joint_covariance(6, (0.4, 0.04, 0.001))
    expected = mmloc.crlb_joint(scenario, q, 6)
    assert doc["pos_bound"] == pytest.approx(expected.pos_bound, rel=1e-9)
    assert doc["vel_bound"] == pytest.approx(expected.vel_bound, rel=1e-9)

    assert main(["crlb", "--rho", "0.01", "--scatterer", "1"]) == 0
    doc = json.loads(capsys.readouterr().out)
    assert doc["pos_bound"] > 0


def test_crlb_unobservable(capsys):
    assert main(["crlb", "--na", "3"]) == 2
    assert last_error(capsys)["error"] == "UnobservableError"


def test_simulate_csv_report(tmp_path):
    path = tmp_path / "report.csv"
    assert main(["simulate", "--trials", "20", "--rho", "0.01", "--out", str(path), "--format", "csv"]) == 0
    df = pd.read_csv(path)
    assert list(df.columns) == mmloc.REPORT_COLUMNS
    assert df["estimator"].iloc[0] == "wls"
    assert df["rmse_u"].iloc[0] > 0


def test_simulate_prints_table(capsys):
    assert main(["simulate", "--trials", "5", "--rho-db", "-20", "--sweep-na", "4,6"]) == 0
    out = capsys.readouterr().out
    assert "rmse_u" in out
    assert "+--" in out


def test_estimate_from_measurements(tmp_path, measurements, scenario):
    out = tmp_path / "est.json"
    assert main(["estimate", "--input", str(measurements), "--out", str(out)]) == 0
    rows = json.loads(out.read_text())
    assert len(rows) == 5
    for row in rows:
        assert np.linalg.norm(np.array(row["u"]) - scenario.ue_pos) < 0.5
        assert set(row) >= {"row", "u", "udot", "iterations", "cond", "flagged"}


def test_missing_input(capsys, tmp_path):
    assert main(["estimate", "--input", str(tmp_path / "none.csv")]) == 2
    assert last_error(capsys)["error"] == "ConfigError"


def test_unknown_estimator(capsys):
    assert main(["simulate", "--estimator", "kalman", "--trials", "2"]) == 2
    assert last_error(capsys)["error"] == "ConfigError"


def test_bad_logfile(capsys):
    assert main(["crlb", "--logfile", "run.xlsx"]) == 2
    assert last_error(capsys)["error"] == "ConfigError"


def test_logfile_is_written(tmp_path):
    log = tmp_path / "run.csv"
    assert main(["simulate", "--trials", "3", "--rho", "0.01", "--logfile", str(log), "--out", str(tmp_path / "r.csv")]) == 0
    df = pd.read_csv(log)
    assert "mmloc.harness" in set(df["Group"])


def test_yaml_config(tmp_path):
    cfg = tmp_path / "run.yml"
    cfg.write_text("run:\n  trials: 15\n  rho: 0.01\n  na: 5\n")
    path = tmp_path / "report.csv"
    assert main(["simulate", "--config", str(cfg), "--out", str(path), "--format", "csv"]) == 0
    df = pd.read_csv(path)
    assert df["na"].iloc[0] == 5
    assert df["rho"].iloc[0] == pytest.approx(0.01)


def test_street_canyon(tmp_path):
    cfg = tmp_path / "canyon.yml"
    cfg.write_text("noise:\n  sigma_d: 0.01\n  sigma_a: 0.0001\n")
    out = tmp_path / "cloud.csv"
    assert main(["map", "--street-canyon", "12", "--truth-ue", "--config", str(cfg), "--out", str(out)]) == 0
    df = pd.read_csv(out)
    assert list(df.columns) == mmloc.POINT_CLOUD_COLUMNS
    assert len(df) == 12
    walls = np.array([mmloc.STREET_WALLS_X[k % 2] for k in df["rrh_index"]])
    assert np.all(np.abs(df["x"].to_numpy() - walls) < 0.5)


def test_map_from_files(tmp_path, measurements, scenario):
    mpath = tmp_path / "mapping.csv"
    assert main(["simulate", "--estimator", "mapping", "--measurements", "3", "--rho", "0.001", "--out", str(mpath)]) == 0
    assert len(pd.read_csv(mpath)) == 3

    out = tmp_path / "cloud.csv"
    assert main(["map", "--input", str(mpath), "--ue", "300,-20,-100", "--out", str(out)]) == 0
    df = pd.read_csv(out)
    assert len(df) == 3
    s = scenario.scatterers[mmloc.MAPPING_RRH_INDEX]
    assert np.all(np.linalg.norm(df[["x", "y", "z"]].to_numpy() - s, axis=1) < 1.0)

    est = tmp_path / "est.json"
    assert main(["estimate", "--input", str(measurements), "--out", str(est)]) == 0
    assert main(["map", "--input", str(mpath), "--ue", str(est), "--out", str(out)]) == 0
    assert len(pd.read_csv(out)) == 3


def test_map_needs_inputs(capsys):
    assert main(["map"]) == 2
    assert last_error(capsys)["error"] == "ConfigError"


def test_train_and_infer(tmp_path, measurements, nn_config):
    net = tmp_path / "net.npz"
    data = tmp_path / "data.csv"
    assert main(["train", "--config", str(nn_config), "--out", str(net), "--dataset-out", str(data)]) == 0
    assert mmloc.load_network(str(net)).kind == "residual"
    assert len(pd.read_csv(data)) == 60

    for method in ("wlsnet", "lsnet"):
        out = tmp_path / f"{method}.json"
        assert main(["infer", "--network", str(net), "--input", str(measurements), "--method", method, "--out", str(out)]) == 0
        assert len(json.loads(out.read_text())) == 5

    fp = tmp_path / "fp.npz"
    assert main(["train", "--config", str(nn_config), "--fp", "--out", str(fp)]) == 0
    out = tmp_path / "fp.json"
    assert main(["infer", "--network", str(fp), "--input", str(measurements), "--out", str(out)]) == 0
    assert len(json.loads(out.read_text())) == 5

    sub2 = tmp_path / "sub2.npz"
    assert main(["train", "--config", str(nn_config), "--mapping", "--out", str(sub2)]) == 0
    assert mmloc.load_network(str(sub2)).kind == "mapping"


def test_ensemble_and_bench(tmp_path, measurements, nn_config):
    members = tmp_path / "members"
    assert main(["train", "--config", str(nn_config), "--members", "2", "--out", str(members)]) == 0
    assert sorted(p.name for p in members.iterdir()) == ["member_00.npz", "member_01.npz"]

    out = tmp_path / "ens.json"
    assert main(["ensemble", "--members-dir", str(members), "--input", str(measurements), "--out", str(out)]) == 0
    assert len(json.loads(out.read_text())) == 5

    bench = tmp_path / "bench.json"
    assert main(["bench", "--members-dir", str(members), "--repetitions", "5", "--out", str(bench)]) == 0
    row = json.loads(bench.read_text())[0]
    assert set(row) == {"t_wls", "t_wlsnet", "t_ewlsnet"}


def test_ensemble_needs_members(capsys, tmp_path, measurements):
    assert main(["ensemble", "--members-dir", str(tmp_path / "none"), "--input", str(measurements)]) == 2
    assert last_error(capsys)["error"] == "ConfigError"


def test_report_analysis(tmp_path, capsys):
    csv = tmp_path / "report.csv"
    js = tmp_path / "report.json"
    assert main(["simulate", "--trials", "5", "--sweep-rho", "0.001,0.01", "--out", str(csv), "--format", "csv"]) == 0
    assert main(["simulate", "--trials", "5", "--rho", "0.1", "--out", str(js)]) == 0
    capsys.readouterr()

    assert report_analysis.main(["--report", str(csv), str(js), "--efficiency", "--sort", "rho"]) == 0
    out = capsys.readouterr().out
    assert "eff_u" in out
    assert "rho_db" in out

    html = tmp_path / "reports.html"
    assert report_analysis.main(["--report", str(csv), "--query", "rho < 0.005", "--output", str(html)]) == 0
    text = html.read_text()
    assert 'id="reports"' in text
    assert "rho < 0.005" in text

    assert report_analysis.main(["--report", str(tmp_path / "report.txt")]) == 2
