import json
import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import HealthCheck, given, settings
from hypothesis import strategies as st

from gensundman.numverify import (
    GVanishes,
    NoBracket,
    SingularEncounter,
    anchor_time,
    integrate_ode,
    invert_f,
    residual_linear,
    sundman_map_trajectory,
    transport_solution,
)
from gensundman.parser import parse_expr, parse_ode
from gensundman.sundman import LinearTarget, SundmanTransform, linear_general_solution, target_coeffs

FIRST = "y'' + (1/y)*y'^2 + y*y' + 1/2 = 0"
SECOND = "y'' + x*y'^2 + y*y' + exp(-2*x*y) = 0"


def T(F, G):
    return SundmanTransform(parse_expr(F), parse_expr(G))


def first_solution():
    return integrate_ode(parse_ode(FIRST), (-4.0, 2.0, -0.25), -0.25, h=1e-3)


def max_error(traj):
    return float(np.max(np.abs(traj.y - np.sqrt(-traj.x))))


# ---------------------------------------------------------------- integration


def test_first_example_matches_square_root():
    traj = first_solution()
    assert traj.x[0] == -4.0 and traj.x[-1] == pytest.approx(-0.25, abs=1e-15)
    assert max_error(traj) <= 1e-8
    assert np.all(np.diff(traj.x) > 0)


def test_second_derivative_is_the_defining_relation():
    traj = first_solution()
    y, yp = traj.y, traj.yp
    assert np.allclose(traj.ypp, -(yp**2) / y - y * yp - 0.5, rtol=1e-15, atol=1e-15)


def test_free_particle_is_exact():
    traj = integrate_ode(parse_ode("y'' = 0"), (0.0, 1.0, 2.0), 3.0, h=1e-2)
    assert np.max(np.abs(traj.y - (1 + 2 * traj.x))) <= 1e-13
    assert traj.error_estimate <= 1e-14


def test_singular_approach_is_reported():
    with pytest.raises(SingularEncounter) as info:
        integrate_ode(parse_ode(FIRST), (-4.0, 2.0, -0.25), 0.5, h=1e-3)
    assert -0.05 < info.value.x <= 0.0
    x, y, _ = info.value.state
    assert y > 0 and x == info.value.x


def test_fourth_order_convergence():
    ode = parse_ode(FIRST)
    errs = [max_error(integrate_ode(ode, (-4.0, 2.0, -0.25), -0.25, h=h, estimate_error=False)) for h in (0.04, 0.02)]
    assert errs[0] / errs[1] >= 12


def test_trajectories_are_bit_identical():
    a, b = first_solution(), first_solution()
    assert a.to_csv() == b.to_csv()
    assert np.array_equal(a.y, b.y)


def test_exports_use_seventeen_digits():
    traj = integrate_ode(parse_ode("y'' = 0"), (0.0, 0.1, 1.0 / 3.0), 0.3, h=0.1)
    rows = traj.to_csv().splitlines()
    assert rows[0] == "x,y,yp,ypp"
    assert float(rows[1].split(",")[2]) == 1.0 / 3.0
    data = json.loads(traj.to_json())
    assert data["yp"][0] == 1.0 / 3.0 and data["h"] == pytest.approx(0.1)


# ---------------------------------------------------------------- mapping


def test_first_example_mapped_residual():
    m = sundman_map_trajectory(first_solution(), T("y^3", "y"))
    res, _ = residual_linear(m, LinearTarget(Fraction(0), Fraction(1), Fraction(-3, 2)))
    assert res <= 1e-7
    assert np.allclose(m.u, (-m.x) ** 1.5, rtol=1e-8)
    # t = int_{-4}^{x} sqrt(-s) ds
    assert np.allclose(m.t, (8 - (-m.x) ** 1.5) * 2 / 3, atol=1e-8)
    assert np.all(np.diff(m.t) > 0)


def test_wrong_target_is_detected():
    # on y = sqrt(-x) itself u' is exactly -3/2 and u'' = 0, so start with
    # a slope that excites the exp(-t) mode
    traj = integrate_ode(parse_ode(FIRST), (-4.0, 2.0, 0.0), -2.0, h=1e-3)
    m = sundman_map_trajectory(traj, T("y^3", "y"))
    res, i = residual_linear(m, LinearTarget(Fraction(0), Fraction(0), Fraction(0)))
    assert res > 0.1
    assert res == pytest.approx(abs(m.up[i] + 1.5), rel=1e-6)


def test_point_transformation_map_on_free_particle():
    traj = integrate_ode(parse_ode("y'' = 0"), (0.0, 1.0, 2.0), 1.0, h=1e-2)
    m = sundman_map_trajectory(traj, T("y", "1"))
    assert np.max(np.abs(m.upp)) == 0.0
    assert np.allclose(m.t, traj.x, atol=1e-14)


def test_second_example_mapped_residual():
    traj = integrate_ode(parse_ode(SECOND), (0.0, 1.0, 0.0), 2.0, h=1e-3)
    m = sundman_map_trajectory(traj, T("y", "exp(-x*y)"))
    res, _ = residual_linear(m, LinearTarget(Fraction(0), Fraction(0), Fraction(-1)))
    assert res <= 1e-6


def test_constant_solution_has_zero_residual():
    # u = gamma/alpha: y'' = -2*y + 6 starting at rest at y = 3
    traj = integrate_ode(parse_ode("y'' + 2*y - 6 = 0"), (0.0, 3.0, 0.0), 1.0, h=1e-2)
    m = sundman_map_trajectory(traj, T("y", "1"))
    assert residual_linear(m, LinearTarget(Fraction(2), Fraction(0), Fraction(6)))[0] == 0.0


def test_vanishing_g_is_reported():
    traj = integrate_ode(parse_ode("y'' = 0"), (-1.0, -1.0, 1.0), 1.0, h=1e-2)
    with pytest.raises(GVanishes):
        sundman_map_trajectory(traj, T("y", "y"))


def test_mapped_exports():
    m = sundman_map_trajectory(first_solution(), T("y^3", "y"))
    assert m.to_csv().splitlines()[0] == "t,u,up,upp"
    assert set(json.loads(m.to_json())) == {"x", "t", "u", "up", "upp"}


@pytest.mark.parametrize(
    "text, init, span, F, G",
    [
        (FIRST, (-4.0, 2.0, -0.25), -0.25, "y^3", "y"),
        (SECOND, (0.0, 1.0, 0.0), 2.0, "y", "exp(-x*y)"),
        ("y'' + y*y'^2 + y*y' = 0", (0.0, 0.5, 0.3), 2.0, "exp(y^2/2)", "y"),
        ("y'' + y*y' + y^3 = 0", (0.0, 1.0, 0.0), 1.0, "y^2", "y"),
        ("y'' + 3*y*y' + y^3 = 0", (0.0, 1.0, 0.0), 3.0, "y^2", "y"),
    ],
)
def test_verified_candidates_close_numerically(text, init, span, F, G):
    ode = parse_ode(text)
    tr = T(F, G)
    target = target_coeffs(ode, tr)
    m = sundman_map_trajectory(integrate_ode(ode, init, span, h=1e-3), tr)
    assert residual_linear(m, target)[0] <= 1e-6


@settings(max_examples=25, deadline=None, suppress_health_check=[HealthCheck.too_slow])
@given(st.floats(1.2, 3.0), st.floats(-0.5, 0.5))
def test_round_trip_for_random_initial_data(y0, yp0):
    ode = parse_ode("y'' + 3*y*y' + y^3 = 0")
    m = sundman_map_trajectory(integrate_ode(ode, (0.0, y0, yp0), 1.0, h=1e-3), T("y^2", "y"))
    assert residual_linear(m, LinearTarget(Fraction(2), Fraction(3), Fraction(0)))[0] <= 1e-6
    assert np.all(np.diff(m.t) > 0)


# ---------------------------------------------------------------- inversion and transport


def test_invert_cube():
    y = invert_f(parse_expr("y^3"), 8.0, (0.0, 3.0))
    assert y == pytest.approx(2.0, abs=1e-12)


def test_invert_with_x_dependence():
    y = invert_f(parse_expr("y^3"), (4.0) ** 1.5, (0.0, 3.0), x=-4.0)
    assert abs(y**3 - 8.0) <= 1e-12 * 9


def test_invert_without_bracket():
    with pytest.raises(NoBracket):
        invert_f(parse_expr("y^2"), -1.0, (0.0, 3.0))


@settings(max_examples=50, deadline=None)
@given(st.floats(-20.0, 20.0))
def test_inversion_tolerance(u):
    F = parse_expr("y^3 + y")
    y = invert_f(F, u, (-5.0, 5.0))
    assert abs(y**3 + y - u) <= 1e-12 * (1 + abs(u)) * 10


def test_transport_identity():
    # F = y, G = 1, u0 = t: the target u'' = 0 with c1 = 1 (slope), c2 = 0
    tgt = LinearTarget(Fraction(0), Fraction(0), Fraction(0))
    sol = linear_general_solution(tgt)
    c = (1.0, 0.0) if sol.evaluate(1.0, 1.0, 0.0) == 1.0 else (0.0, 1.0)
    out = transport_solution(tgt, T("y", "1"), c, (0.5, 2.0), 3.0, h=1e-2, y_start=2.0)
    assert np.max(np.abs(out.y - (out.x - 0.5 + 2.0))) <= 1e-12


def test_first_example_transport():
    tgt = LinearTarget(Fraction(0), Fraction(1), Fraction(-3, 2))
    tr = T("y^3", "y")
    sol = linear_general_solution(tgt)
    t0 = anchor_time(sol, tr, (0.0, 0.0), -4.0, 2.0)
    assert t0 == pytest.approx(-16 / 3)
    out = transport_solution(tgt, tr, (0.0, 0.0), (-4.0, t0), -0.25, h=1e-3, y_start=2.0, solution=sol)
    assert np.max(np.abs(out.y - np.sqrt(-out.x))) <= 1e-6


def fd4_second(y, h):
    return (-y[4:] + 16 * y[3:-1] - 30 * y[2:-2] + 16 * y[1:-3] - y[:-4]) / (12 * h * h)


def fd4_first(y, h):
    return (-y[4:] + 8 * y[3:-1] - 8 * y[1:-3] + y[:-4]) / (12 * h)


def test_second_example_transport_solves_the_equation():
    tgt = LinearTarget(Fraction(0), Fraction(0), Fraction(-1))
    h = 1e-2
    out = transport_solution(tgt, T("y", "exp(-x*y)"), (0.5, 1.0), (0.0, 0.0), 1.0, h=h, y_start=1.0)
    x, y = out.x[2:-2], out.y[2:-2]
    yp, ypp = fd4_first(out.y, h), fd4_second(out.y, h)
    defect = ypp + x * yp**2 + y * yp + np.exp(-2 * x * y)
    assert np.max(np.abs(defect)) <= 1e-6


def test_transport_exports():
    tgt = LinearTarget(Fraction(0), Fraction(0), Fraction(0))
    out = transport_solution(tgt, T("y", "1"), (1.0, 0.0), (0.0, 0.0), 0.1, h=0.05, y_start=0.0)
    assert out.to_csv().splitlines()[0] == "x,t,y"
    assert math.isfinite(json.loads(out.to_json())["y"][-1])
