from fractions import Fraction

import pytest
from hypothesis import HealthCheck, given, settings
from hypothesis import strategies as st

from exprgen import expressions
from gensundman.parser import (
    ExprSyntaxError,
    NotQuadraticInDerivative,
    NotSecondOrder,
    QuadraticOde,
    format_expr,
    format_ode,
    parse_expr,
    parse_ode,
)
from gensundman.symcore import Const, Pow, Var, exp, simplify, x, y

PROPS = settings(max_examples=200, deadline=None, suppress_health_check=[HealthCheck.too_slow])


def lambdas(ode):
    return tuple(format_expr(c) for c in (ode.lambda2, ode.lambda1, ode.lambda0))


def test_reciprocal():
    assert parse_expr("1/y") == Pow(Var("y"), Const(-1))


def test_exponential():
    assert parse_expr("exp(-2*x*y)") == simplify(exp(-2 * x * y))


def test_precedence_and_associativity():
    assert parse_expr("2^3^2") == Const(512)
    assert parse_expr("-x^2") == simplify(-(x**2))
    assert parse_expr("8/2/2") == Const(2)
    assert parse_expr("1 - 2 - 3") == Const(-4)
    assert parse_expr("2*(x+1)") == simplify(2 * x + 2)


def test_number_forms():
    assert parse_expr("3/2") == Const(Fraction(3, 2))
    v = parse_expr("0.25").value
    assert isinstance(v, float) and v == 0.25
    assert parse_expr("1e-3").value == 1e-3


def test_parameters():
    e = parse_expr("k*y", params=["k"])
    assert e == simplify(Var("k") * y)


def test_prime_after_caret_is_rejected():
    with pytest.raises(ExprSyntaxError) as info:
        parse_expr("y^'")
    assert info.value.offset == 2
    assert info.value.expected


@pytest.mark.parametrize(
    "text, offset",
    [("x +", 3), ("(x", 2), ("x y", 2), ("foo(x)", 0), ("2x", 1), ("exp x", 4), ("x $ y", 2)],
)
def test_syntax_errors_report_offsets(text, offset):
    with pytest.raises(ExprSyntaxError) as info:
        parse_expr(text)
    assert info.value.offset == offset


def test_offsets_are_bytes():
    with pytest.raises(ExprSyntaxError) as info:
        parse_expr("x + μ")
    assert info.value.offset == 4


def test_unknown_name_lists_choices():
    with pytest.raises(ExprSyntaxError) as info:
        parse_expr("z + 1")
    assert {"x", "y", "exp"} <= info.value.expected


def test_first_example_ode():
    ode = parse_ode("y'' + (1/y)*y'^2 + y*y' + 1/2 = 0")
    assert lambdas(ode) == ("1/y", "y", "1/2")


def test_second_example_ode():
    ode = parse_ode("y'' + x*y'^2 + y*y' + exp(-2*x*y) = 0")
    assert lambdas(ode) == ("x", "y", "exp(-2*x*y)")


def test_rearranged_ode():
    ode = parse_ode("y'' = -y*y' - 1/2 - y'^2/y")
    assert lambdas(ode) == ("1/y", "y", "1/2")


def test_leading_coefficient_is_divided_out():
    ode = parse_ode("2*y'' + 2*x*y'^2 = 0")
    assert ode.lambda2 == x
    ode = parse_ode("x*y'' + y' = 0")
    assert ode.lambda1 == simplify(1 / x)


def test_numeric_parameters_are_substituted():
    ode = parse_ode("y'' + mu*y^k*y' = 0", params={"mu": 2, "k": 3})
    assert ode.lambda1 == simplify(2 * y**3)
    ode = parse_ode("y'' + a*y' = 0", params={"a": "1/2"})
    assert ode.lambda1 == Const(Fraction(1, 2))


def test_cubic_derivative_is_rejected():
    with pytest.raises(NotQuadraticInDerivative):
        parse_ode("y'' + y'^3 = 0")


def test_derivative_inside_function_is_rejected():
    with pytest.raises(NotQuadraticInDerivative):
        parse_ode("y'' + exp(y') = 0")
    with pytest.raises(NotQuadraticInDerivative):
        parse_ode("y'' + 1/y' = 0")


@pytest.mark.parametrize("text", ["y' + y = 0", "y''^2 + y = 0", "y''*y' + y = 0", "sin(y'') = 0", "x*y'' - x*y'' + y = 0"])
def test_not_second_order(text):
    with pytest.raises((NotSecondOrder, NotQuadraticInDerivative)):
        parse_ode(text)


def test_missing_second_derivative_is_not_second_order():
    with pytest.raises(NotSecondOrder):
        parse_ode("y' + y = 0")


def test_lie_form():
    ode = parse_ode("y'' + x*y'^2 + y*y' + 3 = 0")
    lf = ode.lie_form()
    assert (lf.a, lf.b, lf.c, lf.d) == (Const(0), x, y, Const(3))


def test_format_examples():
    assert format_expr(y**3) == "y^3"
    assert format_expr(simplify(exp(-2 * x * y))) == "exp(-2*x*y)"
    assert format_expr(Const(Fraction(-3, 2))) == "-3/2"


def test_format_ode_reparses():
    ode = parse_ode("y'' + (1/y)*y'^2 + y*y' + 1/2 = 0")
    assert ode.to_text() == "y'' + (1/y)*y'^2 + (y)*y' + 1/2 = 0"


@PROPS
@given(expressions())
def test_round_trip(e):
    s = simplify(e)
    assert parse_expr(format_expr(s)) == s


@PROPS
@given(expressions(max_depth=3), expressions(max_depth=3), expressions(max_depth=3))
def test_ode_round_trip(a, b, c):
    ode = QuadraticOde.from_coefficients(c, b, a)
    back = parse_ode(format_ode(*ode.lambdas))
    assert back.lambdas == ode.lambdas
