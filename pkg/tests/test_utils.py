import math
import numpy as np
import pytest
from utils.decorators import finite_result, with_context
from utils.errors import GeometryError, NumericError, ValidationError
from utils.expressions import Polynomial
from utils.formatters import format_check_table, format_duration, format_float
from utils.validators import (
    validate_choice, validate_count, validate_open_unit, validate_positive, validate_poisson_ratio
)


# ==================== VALIDATORS ====================

def test_validate_positive_accepts_numbers_and_strings():
    assert validate_positive(2, "h") == 2.0
    assert validate_positive("0.5", "h") == 0.5


@pytest.mark.parametrize("value", [0, -1.0, math.nan, math.inf, "abc", None])
def test_validate_positive_rejects(value):
    with pytest.raises(ValidationError) as info:
        validate_positive(value, "target_h")
    assert info.value.field == "target_h"


def test_validate_count():
    assert validate_count(8.0, "n") == 8
    with pytest.raises(ValidationError):
        validate_count(2.5, "n")
    with pytest.raises(ValidationError):
        validate_count(True, "n")
    with pytest.raises(ValidationError):
        validate_count(3, "n", minimum=8)


def test_open_unit_choice_and_poisson():
    assert validate_open_unit(0.25, "t") == 0.25
    with pytest.raises(ValidationError):
        validate_open_unit(1.0, "t")
    assert validate_choice("a", "kind", ["a", "b"]) == "a"
    with pytest.raises(ValidationError):
        validate_choice("c", "kind", ["a", "b"])
    assert validate_poisson_ratio(0.3) == 0.3
    with pytest.raises(ValidationError):
        validate_poisson_ratio(0.5)


# ==================== EXPRESSIONS ====================

def test_polynomial_parse_and_evaluate():
    poly = Polynomial.parse("1 + 2*x - y^2")
    assert poly.degree == 2
    assert float(poly(1.0, 2.0)) == pytest.approx(-1.0)
    values = poly.at(np.array([[0.0, 0.0], [1.0, 1.0]]))
    np.testing.assert_allclose(values, [1.0, 2.0])


def test_polynomial_partials_and_constants():
    poly = Polynomial.parse("x^2*y + pi")
    assert float(poly.partial("x")(2.0, 3.0)) == pytest.approx(12.0)
    assert float(poly.partial("y")(2.0, 3.0)) == pytest.approx(4.0)
    assert Polynomial.parse(0).is_zero
    assert float(Polynomial.parse("x/2")(3.0, 0.0)) == pytest.approx(1.5)


def test_polynomial_expands_products():
    poly = Polynomial.parse("(x + 1)^2 * (y - 2)")
    assert poly.degree == 3
    assert float(poly.partial("y")(1.0, 5.0)) == pytest.approx(4.0)
    assert float(Polynomial.parse("1e-3*x")(1000.0, 0.0)) == pytest.approx(1.0)
    np.testing.assert_allclose(Polynomial.parse("2").at(np.zeros((3, 2))), [2.0, 2.0, 2.0])


@pytest.mark.parametrize("text", [
    "x^5", "sin(x)", "1/x", "z + 1", "x^0.5", "1/0", "x +", "__import__('os')", "(x).func", "x^2^3",
])
def test_polynomial_rejects(text):
    with pytest.raises(ValidationError):
        Polynomial.parse(text, "physics.source")


# ==================== FORMATTERS ====================

def test_format_float_round_trips():
    text = format_float(0.1)
    assert float(text) == 0.1
    assert text == "0.10000000000000001"


def test_format_duration():
    assert format_duration(0.5) == "500 ms"
    assert format_duration(2.0) == "2.00 s"
    assert format_duration(600.0) == "10.0 min"


def test_format_check_table():
    table = format_check_table([("fem", "order", True, 2.01, 0.3), ("bem", "center", False, 0.5, 0.05)])
    lines = table.splitlines()
    assert lines[0].split() == ["suite", "check", "status", "value", "threshold"]
    assert "PASS" in lines[2]
    assert "FAIL" in lines[3]


# ==================== DECORATORS ====================

def test_finite_result_rejects_nan():
    @finite_result
    def produce():
        return np.array([1.0, np.nan])

    with pytest.raises(NumericError):
        produce()


def test_with_context_prefixes_message():
    @with_context("state solve")
    def fail():
        raise GeometryError("bad triangle")

    with pytest.raises(GeometryError, match="state solve: bad triangle"):
        fail()
