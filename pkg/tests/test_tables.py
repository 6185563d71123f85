"""Deterministic CSV/JSON serialization."""

import json
import math

from hypothesis import given, settings
from hypothesis import strategies as st

from markovlab.tables import format_cell, read_csv, write_csv, write_json


def test_format_cell_rendering():
    assert format_cell(True) == "true"
    assert format_cell(False) == "false"
    assert format_cell(3) == "3"
    assert format_cell(0.5) == "0.5"
    assert format_cell("label") == "label"


@settings(max_examples=300, deadline=None)
@given(st.floats(allow_nan=False, allow_infinity=False))
def test_float_cells_round_trip_exactly(x):
    assert float(format_cell(x)) == x


def test_write_csv_crlf_and_roundtrip(tmp_path):
    p = tmp_path / "t.csv"
    write_csv(p, ["a", "b"], [[1.5, True], [-0.25, False]])
    raw = p.read_bytes()
    assert raw.count(b"\r\n") == 3
    header, rows = read_csv(p)
    assert header == ["a", "b"]
    assert rows == [["1.5", "true"], ["-0.25", "false"]]


def test_write_json_stable_layout(tmp_path):
    p = tmp_path / "m.json"
    write_json(p, {"b": 1, "a": [1, 2]})
    text = p.read_text()
    assert text.endswith("\n")
    # keys sorted, two-space indent: byte-stable across reruns
    assert text.index('"a"') < text.index('"b"')
    assert json.loads(text) == {"b": 1, "a": [1, 2]}


def test_write_json_identical_reruns(tmp_path):
    obj = {"suite": "x", "values": [1.0, 2.5], "flag": True}
    p1, p2 = tmp_path / "1.json", tmp_path / "2.json"
    write_json(p1, obj)
    write_json(p2, obj)
    assert p1.read_bytes() == p2.read_bytes()
