import json
import os

import pytest

import layout
from errors import ExportError


def test_layout_and_manifest(tmp_path):
    out = str(tmp_path / "run1")
    layout.ensure_layout(out)
    assert sorted(os.listdir(out)) == ["fields", "matrices", "series"]
    layout.write_manifest(out, "simulate", {"bath": {"linear_size": 16}}, "9.9.9",
                          {"series": ["series/survival.csv"]}, {"norm_drift": 1e-12})
    man = layout.read_manifest(out)
    assert man["command"] == "simulate"
    assert man["toolkit_version"] == "9.9.9"
    assert man["created"].endswith("+00:00")
    assert layout.list_runs(str(tmp_path)) == ["run1"]


def test_runs_need_a_manifest(tmp_path):
    os.makedirs(tmp_path / "half")
    assert layout.list_runs(str(tmp_path)) == []
    assert layout.list_runs(str(tmp_path / "nowhere")) == []


def test_csv_round_trip_keeps_17_digits(tmp_path):
    p = str(tmp_path / "s.csv")
    layout.write_csv(p, ["t", "x"], [[0.1, 1 / 3], [0.2, 2 / 3]], {"design": "chiral", "eta": 0.5})
    text = open(p, encoding="utf-8").read().splitlines()
    assert text[:3] == ["# design=chiral", "# eta=0.5", "t,x"]
    assert text[3] == "0.10000000000000001,0.33333333333333331"
    meta, header, rows = layout.read_csv(p)
    assert meta == {"design": "chiral", "eta": "0.5"}
    assert rows[1] == [0.2, 2 / 3]


def test_error_record_only_into_existing_dirs(tmp_path):
    rec = {"error": "ConfigurationError", "message": "bad", "command": "simulate"}
    assert layout.write_error_record(str(tmp_path / "missing"), rec) is None
    assert layout.write_error_record(None, rec) is None
    p = layout.write_error_record(str(tmp_path), rec)
    assert json.load(open(p)) == rec


def test_unwritable_targets_raise_export_errors(tmp_path):
    blocker = tmp_path / "file"
    blocker.write_text("x")
    with pytest.raises(ExportError):
        layout.ensure_layout(str(blocker / "run"))
    with pytest.raises(ExportError):
        layout.write_csv(str(blocker / "a.csv"), ["t"], [])
