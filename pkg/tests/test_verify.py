"""Check bookkeeping for the verification engine (criteria run in
test_acceptance via the command line)."""

import math

import pytest

from phaselab.verify import Check, CriterionResult, make_check


def test_make_check_basic_pass_fail():
    assert make_check("ok", 1.0, 1.05, 0.1).passed
    assert not make_check("off", 1.0, 1.2, 0.1).passed
    # boundary counts as pass (values chosen exactly representable)
    assert make_check("edge", 1.0, 1.5, 0.5).passed


def test_make_check_infinite_target():
    assert make_check("inf", math.inf, math.inf, 0.0).passed
    assert not make_check("fin", 5.0, math.inf, 0.0).passed
    assert not make_check("sign", -math.inf, math.inf, 0.0).passed


def test_make_check_nan_fails():
    assert not make_check("nan", math.nan, 0.0, 1.0).passed


def test_check_margin():
    assert make_check("a", 1.0, 1.0, 0.5).margin == pytest.approx(0.5)
    assert make_check("b", 1.4, 1.0, 0.5).margin == pytest.approx(0.1)
    assert make_check("c", 2.0, 1.0, 0.5).margin == pytest.approx(-0.5)
    assert make_check("d", math.inf, math.inf, 0.0).margin == math.inf


def test_criterion_result_summary_line():
    checks = (
        make_check("wide", 0.0, 0.0, 1.0),
        make_check("tight", 0.3, 0.0, 0.5),
    )
    result = CriterionResult("sample", checks, seconds=1.0)
    assert result.passed
    assert result.worst.name == "tight"
    assert result.summary_line() == "sample PASS 0.3 0.0 0.5"
    failing = CriterionResult(
        "sample", checks + (make_check("broken", 9.0, 0.0, 1.0),), seconds=1.0)
    assert not failing.passed
    assert failing.summary_line() == "sample FAIL 9.0 0.0 1.0"


def test_check_is_frozen():
    check = make_check("a", 1.0, 1.0, 0.5)
    with pytest.raises(AttributeError):
        check.measured = 2.0
