# Copyright 2026 mmloc contributors
#
# Description:
# mmloc Logging tests

import json
import logging

import pandas as pd
import pytest
import yaml

from mmloc import Log, RunAborted


@pytest.fixture(autouse=True)
def keep_records():
    Log.set_flush_level(10**6)


def test_records_carry_group_and_message():
    Log.info("solver ready", group="mmloc.test")
    df = Log.records()
    last = df.iloc[-1]
    assert last["Group"] == "mmloc.test"
    assert last["Message"] == "solver ready"
    assert last["Level"] == "INFO"


def test_parent_logger_does_not_duplicate():
    Log.warn("only once", group="mmloc.test.dup")
    df = Log.records()
    assert (df["Message"] == "only once").sum() == 1


def test_level_filters_debug():
    Log.debug("hidden detail", group="mmloc.test.level")
    assert "hidden detail" not in set(Log.records()["Message"])
    Log.set_level(logging.DEBUG)
    Log.debug("shown detail", group="mmloc.test.level")
    assert "shown detail" in set(Log.records()["Message"])


def test_critical_and_fatal_abort():
    with pytest.raises(RunAborted, match="too many"):
        Log.critical("too many failures", group="mmloc.test")
    with pytest.raises(RunAborted):
        Log.fatal("stop", group="mmloc.test")


def test_unsupported_logfile_extension():
    with pytest.raises(ValueError):
        Log.set_logfile("run.xlsx")


def test_csv_logfile(tmp_path):
    path = tmp_path / "run.csv"
    Log.set_logfile(str(path))
    Log.warn("first\tline", group="mmloc.test.file")
    Log._flush_log()
    df = pd.read_csv(path)
    assert list(df.columns) == ["Time", "Level", "Group", "Message", "Filename", "LineNo"]
    assert "first\\tline" in set(df["Message"])


def test_json_and_yaml_logfiles(tmp_path):
    jpath = tmp_path / "run.json"
    Log.set_logfile(str(jpath))
    Log.error("json record", group="mmloc.test.file")
    Log._flush_log()
    rows = [json.loads(line) for line in jpath.read_text().splitlines() if line.strip()]
    assert any(r["Message"] == "json record" for r in rows)

    ypath = tmp_path / "run.yml"
    Log.set_logfile(str(ypath))
    Log.info("yaml record", group="mmloc.test.file")
    Log._flush_log()
    doc = yaml.safe_load(ypath.read_text())
    assert any(r["Message"] == "yaml record" for r in doc)
