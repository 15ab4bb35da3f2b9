from __future__ import annotations

import csv

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from stripns.io import atomic_write_text, csv_text, dumps_json, sha256_file, write_csv, write_json
from stripns.plotting import emit_plot


def test_atomic_write_leaves_no_partial(tmp_path):
    p = atomic_write_text(tmp_path / "sub" / "a.txt", "hello")
    assert p.read_text() == "hello"
    assert not list(tmp_path.rglob("*.partial"))


def test_json_is_canonical(tmp_path):
    a = write_json(tmp_path / "a.json", {"b": 1, "a": [1.5, 2]})
    b = write_json(tmp_path / "b.json", {"a": [1.5, 2], "b": 1})
    assert sha256_file(a) == sha256_file(b)
    assert dumps_json({}) == "{}\n"


@settings(max_examples=50, deadline=None)
@given(st.lists(st.floats(allow_nan=False, allow_infinity=False), min_size=1, max_size=20))
def test_csv_floats_roundtrip(values):
    text = csv_text(("v",), [(v,) for v in values])
    back = [float(r["v"]) for r in csv.DictReader(text.splitlines())]
    assert back == values


def _energy_csv(path, rows=3):
    cols = ("t", "kinetic", "dissipation", "boundary_production", "forcing_power", "dt_norm", "h1_norm")
    return write_csv(path, cols, [tuple(float(i + j) for j in range(len(cols))) for i in range(rows)])


def test_plot_deterministic(tmp_path):
    src = _energy_csv(tmp_path / "ledger.csv")
    a = emit_plot(src, "energy", tmp_path / "a.svg")
    b = emit_plot(src, "energy", tmp_path / "b.svg")
    assert a.read_bytes() == b.read_bytes()
    assert b"<svg" in a.read_bytes()


def test_plot_kinds(tmp_path):
    s = write_csv(tmp_path / "spectrum.csv", ("j", "a", "Lambda"), [(0, 1, 3.0), (1, 2, 5.0)])
    assert emit_plot(s, "spectrum").suffix == ".svg"
    w = write_csv(
        tmp_path / "sweep.csv",
        ("lemma", "L", "ensemble_size", "max_ratio", "violated"),
        [("korn", 1.0, 5, 1.4, 0), ("korn", 2.0, 5, 1.41, 0)],
    )
    assert emit_plot(w, "sweep").exists()


def test_plot_schema_errors(tmp_path):
    s = write_csv(tmp_path / "bad.csv", ("x", "y"), [(1, 2)])
    with pytest.raises(ValueError):
        emit_plot(s, "energy")
    with pytest.raises(ValueError):
        emit_plot(s, "histogram")
    empty = _energy_csv(tmp_path / "empty.csv", rows=0)
    with pytest.raises(ValueError):
        emit_plot(empty, "energy")
