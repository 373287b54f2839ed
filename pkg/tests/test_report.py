"""Deterministic formatting and CSV rendering."""

import numpy as np
import pytest

from phaselab.report import format_cell, render_csv, write_csv, write_lines


def test_format_cell_round_trips_floats():
    for value in (0.1, 1.0, 6.123233995736766e-17, float("inf"), -0.0, 1e300):
        assert float(format_cell(value)) == value or (value == -0.0)
    assert format_cell(0.1) == "0.1"
    assert format_cell(float("inf")) == "inf"


def test_format_cell_numpy_scalars():
    # numpy 2 repr would embed the type name; cells must stay bare numbers
    assert format_cell(np.float64(0.25)) == "0.25"
    assert format_cell(np.int64(3)) == "3"
    assert format_cell(np.bool_(True)) == "1"


def test_format_cell_strings_and_bools():
    assert format_cell("qpsk") == "qpsk"
    assert format_cell(True) == "1"
    assert format_cell(False) == "0"
    with pytest.raises(ValueError):
        format_cell("a,b")
    with pytest.raises(TypeError):
        format_cell(1 + 2j)
    with pytest.raises(TypeError):
        format_cell(object())


def test_render_csv_layout():
    text = render_csv(
        {"x": [1, 2], "y": [0.5, 1.5]},
        header=[("alpha", 1.0), ("name", "demo")],
    )
    assert text.splitlines() == [
        "# alpha = 1.0",
        "# name = demo",
        "x,y",
        "1,0.5",
        "2,1.5",
    ]


def test_render_csv_rejects_ragged_columns():
    with pytest.raises(ValueError):
        render_csv({"x": [1, 2], "y": [1]})
    with pytest.raises(ValueError):
        render_csv({})


def test_write_csv_and_lines_create_parents(tmp_path):
    out = write_csv(tmp_path / "a" / "b.csv", {"x": [1]})
    assert out.read_text().endswith("x\n1\n")
    lines = write_lines(tmp_path / "c" / "d.txt", ["one", "two"])
    assert lines.read_text() == "one\ntwo\n"
