from fractions import Fraction

import pytest
from hypothesis import HealthCheck, given, settings
from hypothesis import strategies as st

from gensundman.invariants import check_sundman, derived_invariants
from gensundman.parser import QuadraticOde, parse_expr, parse_ode
from gensundman.sundman import (
    C1,
    C2,
    T_VAR,
    LinearTarget,
    NonConstantTarget,
    Provenance,
    SundmanTransform,
    derive_f,
    derive_g,
    derive_g_detailed,
    find_transform,
    g_equation_residuals,
    linear_general_solution,
    target_coeffs,
    verify_candidate,
)
from gensundman.symcore import Const, ZeroTag, cos, diff, exp, is_zero, simplify, sin, x, y

PROPS = settings(max_examples=40, deadline=None, suppress_health_check=[HealthCheck.too_slow])

FIRST = "y'' + (1/y)*y'^2 + y*y' + 1/2 = 0"
SECOND = "y'' + x*y'^2 + y*y' + exp(-2*x*y) = 0"
EMDEN = "y'' + 3*y*y' + y^3 = 0"
CUBIC = "y'' + y*y' + y^3 = 0"
QUADRATIC_TERM = "y'' + y*y'^2 + y*y' = 0"

t = T_VAR


def T(F, G):
    return SundmanTransform(parse_expr(F), parse_expr(G))


def proportional(a, b):
    """a = c*b for a nonzero constant c."""
    r = simplify(a / b)
    return not r.children or all(not diff(r, v).children and diff(r, v) == Const(0) for v in "xy")


def forward_ode(F, G, alpha, beta, gamma):
    """The equation that (F(y), G) maps to u'' + beta u' + alpha u = gamma."""
    Fy, Fyy = diff(F, "y"), diff(F, "y", 2)
    K = G * Fy
    lam2 = (Fyy * G - Fy * diff(G, "y")) / K
    lam1 = (-Fy * diff(G, "x") + Fy * Const(beta) * G * G) / K
    lam0 = (Const(alpha) * F * G**3 - G**3 * Const(gamma)) / K
    return QuadraticOde.from_coefficients(lam0, lam1, lam2)


# ---------------------------------------------------------------- G and F


def test_derive_g_first_example():
    ode = parse_ode(FIRST)
    assert derive_g(ode, derived_invariants(ode), "A1") == y


def test_derive_g_second_example():
    ode = parse_ode(SECOND)
    gd = derive_g_detailed(ode, derived_invariants(ode), "A2")
    assert gd.G == simplify(exp(-x * y))
    assert gd.provenance is Provenance.ANSATZ
    assert not gd.point_transformation


def test_derive_g_family_instance():
    ode = parse_ode(CUBIC)
    assert derive_g(ode, derived_invariants(ode), "A1") == y


def test_derive_g_reports_point_transformation():
    ode = parse_ode("y'' = 0")
    gd = derive_g_detailed(ode, derived_invariants(ode), "DMS0")
    assert gd.G == Const(1) and gd.point_transformation


@pytest.mark.parametrize("text, case", [(FIRST, "A1"), (SECOND, "A2"), (CUBIC, "A1"), (EMDEN, "A1"), (QUADRATIC_TERM, "A1")])
def test_derived_g_solves_the_g_equations(text, case):
    ode = parse_ode(text)
    G = derive_g(ode, derived_invariants(ode), case)
    verdicts = g_equation_residuals(ode, G)
    assert all(v.tag is ZeroTag.PROVED_ZERO for v in verdicts.values()), verdicts


def test_derive_f_examples():
    assert derive_f(parse_ode(FIRST), y) == y**3 or proportional(derive_f(parse_ode(FIRST), y), y**3)
    assert derive_f(parse_ode(SECOND), simplify(exp(-x * y))) == y
    assert derive_f(parse_ode(QUADRATIC_TERM), y) == simplify(exp(y**2 / 2))
    assert derive_f(parse_ode(CUBIC), y) == simplify(y**2)


def test_derive_f_rejects_x_dependence():
    # G chosen so that G(x0, y) exp(int lambda2) cannot work for all x
    assert derive_f(parse_ode(FIRST), simplify(x * y + 1)) is None


# ---------------------------------------------------------------- targets


def test_target_first_example():
    tgt = target_coeffs(parse_ode(FIRST), T("y^3", "y"))
    assert (tgt.alpha, tgt.beta, tgt.gamma) == (0, 1, Fraction(-3, 2))
    assert tgt.exact and all(isinstance(c, Fraction) for c in (tgt.alpha, tgt.beta, tgt.gamma))


def test_target_second_example():
    tgt = target_coeffs(parse_ode(SECOND), T("y", "exp(-x*y)"))
    assert (tgt.alpha, tgt.beta, tgt.gamma) == (0, 0, -1)


def test_target_cubic_oscillator():
    tgt = target_coeffs(parse_ode(EMDEN), T("y^2", "y"))
    assert (tgt.alpha, tgt.beta, tgt.gamma) == (2, 3, 0)


def test_target_non_constant():
    with pytest.raises(NonConstantTarget) as info:
        target_coeffs(parse_ode(FIRST), T("y^2", "y"))
    assert info.value.which == "gamma" and info.value.witness


def test_target_serialization():
    tgt = target_coeffs(parse_ode(FIRST), T("y^3", "y"))
    assert tgt.to_dict() == {"alpha": "0", "beta": "1", "gamma": "-3/2", "exact": True}
    assert str(tgt) == "u'' + (1)*u' + (0)*u = -3/2"


# ---------------------------------------------------------------- candidates


@pytest.mark.parametrize(
    "text, F, G",
    [(FIRST, "y^3", "y"), (SECOND, "y", "exp(-x*y)"), (QUADRATIC_TERM, "exp(y^2/2)", "y"), (CUBIC, "y^2", "y"), (EMDEN, "y^2", "y")],
)
def test_known_candidates_verify(text, F, G):
    rep = verify_candidate(parse_ode(text), T(F, G))
    assert rep.ok and rep.target_constant
    assert all(v.tag is ZeroTag.PROVED_ZERO for v in rep.verdicts.values())
    assert rep.nonvanishing.is_nonzero


def test_wrong_candidate_fails_on_lambda2():
    rep = verify_candidate(parse_ode(FIRST), T("y^2", "y"))
    assert not rep.ok
    assert rep.verdicts["lambda2"].tag is ZeroTag.NONZERO
    assert rep.verdicts["lambda2"].witness is not None
    assert not rep.target_constant


def test_candidate_with_vanishing_fy():
    rep = verify_candidate(parse_ode(FIRST), T("1", "y"))
    assert not rep.ok and not rep.nonvanishing.is_nonzero


@pytest.mark.parametrize("text", [FIRST, SECOND, CUBIC, QUADRATIC_TERM, EMDEN, "y'' = 0"])
def test_derived_transform_verifies(text):
    ode = parse_ode(text)
    res = find_transform(ode, check_sundman(ode).case)
    assert res.transform is not None and res.report.ok
    assert all(v.is_zero for v in res.report.verdicts.values())


def test_find_transform_targets():
    res = find_transform(parse_ode(FIRST), "A1")
    assert (res.target.alpha, res.target.beta) == (0, 1)
    # F is y^3 up to a constant factor, so gamma is -3/2 up to that factor
    k = simplify(res.transform.F / y**3)
    assert res.target.gamma == Fraction(-3, 2) * k.value
    res = find_transform(parse_ode(SECOND), "A2")
    assert (res.transform.F, res.transform.G) == (y, simplify(exp(-x * y)))
    assert (res.target.alpha, res.target.beta, res.target.gamma) == (0, 0, -1)


@PROPS
@given(st.fractions(min_value=-20, max_value=20, max_denominator=9).filter(lambda k: k != 0))
def test_scaling_f(k):
    ode = parse_ode(FIRST)
    base = verify_candidate(ode, T("y^3", "y"))
    scaled = verify_candidate(ode, SundmanTransform(simplify(Const(k) * y**3), y))
    assert (scaled.target.alpha, scaled.target.beta) == (base.target.alpha, base.target.beta)
    assert scaled.target.gamma == k * base.target.gamma
    assert scaled.target == base.target.scaled(k)
    assert {n: v.tag for n, v in scaled.verdicts.items()} == {n: v.tag for n, v in base.verdicts.items()}


_FS = ["y", "y^2", "y^3", "exp(y)", "y^(1/2)", "exp(y^2/2)"]
_GS = ["1", "y", "y^2", "exp(x)", "y*exp(-x*y)", "exp(2*y)"]
small = st.integers(-3, 3).map(Fraction)


@PROPS
@given(st.sampled_from(_FS), st.sampled_from(_GS), small, small, small)
def test_forward_generated_equations_verify(F, G, alpha, beta, gamma):
    Fe, Ge = parse_expr(F), parse_expr(G)
    ode = forward_ode(Fe, Ge, alpha, beta, gamma)
    rep = verify_candidate(ode, SundmanTransform(Fe, Ge))
    assert rep.ok
    assert (rep.target.alpha, rep.target.beta, rep.target.gamma) == (alpha, beta, gamma)
    assert rep.point_transformation == is_zero(diff(Ge, "y")).is_zero


@pytest.mark.parametrize(
    "F, G, target",
    [("y^2", "y^2", (1, 0, 0)), ("y", "y*exp(-x*y)", (0, 1, 2)), ("exp(y)", "y", (2, 3, 1)), ("y", "y^(1/2)", (1, 2, 3))],
)
def test_forward_generated_equations_are_recovered(F, G, target):
    ode = forward_ode(parse_expr(F), parse_expr(G), *map(Fraction, target))
    rep = check_sundman(ode)
    assert rep.linearizable
    res = find_transform(ode, rep.case)
    assert res.report.ok


# ---------------------------------------------------------------- linear solutions


def test_solution_first_example():
    sol = linear_general_solution(LinearTarget(Fraction(0), Fraction(1), Fraction(-3, 2)))
    assert sol.u == simplify(C1 * exp(-t) + C2 - Const(Fraction(3, 2)) * t) or sol.u == simplify(C1 + C2 * exp(-t) - Const(Fraction(3, 2)) * t)
    assert sol.residual() == Const(0)


def test_solution_second_example():
    sol = linear_general_solution(LinearTarget(Fraction(0), Fraction(0), Fraction(-1)))
    assert sol.kind == "double"
    assert sol.u == simplify(-t * t / 2 + C1 * t + C2)


def test_solution_distinct_roots():
    sol = linear_general_solution(LinearTarget(Fraction(2), Fraction(3), Fraction(0)))
    assert sol.kind == "distinct"
    assert sol.u == simplify(C1 * exp(-t) + C2 * exp(-2 * t))
    assert {r[0] for r in sol.roots} == {Const(-1), Const(-2)}


def test_solution_complex_roots():
    sol = linear_general_solution(LinearTarget(Fraction(5), Fraction(2), Fraction(10)))
    assert sol.kind == "complex"
    assert sol.u == simplify(exp(-t) * (C1 * cos(2 * t) + C2 * sin(2 * t)) + 2)
    assert sol.evaluate(0.0, 1.0, 0.0) == pytest.approx(3.0)


def test_solution_float_target():
    sol = linear_general_solution(LinearTarget(0.0, 1.5, 0.25))
    assert is_zero(sol.residual()).is_zero


@PROPS
@given(small, small, small)
def test_solution_residual_vanishes(alpha, beta, gamma):
    sol = linear_general_solution(LinearTarget(alpha, beta, gamma))
    assert sol.residual() == Const(0)
