"""Numerical closure of the symbolic pipeline.

Integrate y'' = -lambda2*y'^2 - lambda1*y' - lambda0 with fixed-step RK4, map
the samples through u = F, dt = G dx, and check the linear image.  The
derivatives u', u'' come from the chain-rule identities

    u' G = F_x + F_y y'
    u'' G^2 + u' (G_x + G_y y') = F_y y'' + 2 F_xy y' + F_yy y'^2 + F_xx

so no differencing enters the residual.
"""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass
from typing import Callable, Optional, Sequence, Tuple

import numpy as np
from scipy.integrate import cumulative_simpson
from scipy.optimize import brentq

from .parser import QuadraticOde
from .sundman import LinearSolution, LinearTarget, SundmanTransform, linear_general_solution
from .symcore import DomainError, Expr, compile_expr, diff


class SingularEncounter(ArithmeticError):
    """The solution left the domain of the coefficients or blew up."""

    def __init__(self, x: float, state: Tuple[float, float, float], reason: str = ""):
        self.x = x
        self.state = state
        self.reason = reason
        super().__init__(f"singular behaviour near x = {x!r} (last good state {state}){': ' + reason if reason else ''}")


class StepUnderflow(ValueError):
    pass


class GVanishes(ArithmeticError):
    def __init__(self, x: float):
        self.x = x
        super().__init__(f"G vanishes or changes sign near x = {x!r}")


class NoBracket(ValueError):
    pass


class InversionFailure(ArithmeticError):
    pass


def _fmt(v: float) -> str:
    return format(float(v), ".17g")


def _table_csv(columns: Sequence[str], arrays) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(columns)
    for row in zip(*arrays):
        w.writerow([_fmt(v) for v in row])
    return buf.getvalue()


def _table_json(columns, arrays, meta) -> str:
    data = {c: [float(_fmt(v)) for v in a] for c, a in zip(columns, arrays)}
    return json.dumps({**meta, **data})


@dataclass(frozen=True)
class Trajectory:
    x: np.ndarray
    y: np.ndarray
    yp: np.ndarray
    ypp: np.ndarray
    h: float
    init: Tuple[float, float, float]
    error_estimate: Optional[float] = None

    COLUMNS = ("x", "y", "yp", "ypp")

    def to_csv(self) -> str:
        return _table_csv(self.COLUMNS, (self.x, self.y, self.yp, self.ypp))

    def to_json(self) -> str:
        meta = {"h": self.h, "init": list(self.init), "error_estimate": self.error_estimate}
        return _table_json(self.COLUMNS, (self.x, self.y, self.yp, self.ypp), meta)


@dataclass(frozen=True)
class MappedTrajectory:
    x: np.ndarray
    t: np.ndarray
    u: np.ndarray
    up: np.ndarray
    upp: np.ndarray

    COLUMNS = ("t", "u", "up", "upp")

    def to_csv(self) -> str:
        return _table_csv(self.COLUMNS, (self.t, self.u, self.up, self.upp))

    def to_json(self) -> str:
        return _table_json(("x",) + self.COLUMNS, (self.x, self.t, self.u, self.up, self.upp), {})


# ---------------------------------------------------------------- integration


def _rk4(f: Callable, x0: float, s0: np.ndarray, h: float, n: int, on_fail: Callable):
    """n fixed RK4 steps of size h; f(x, s) -> ds/dx."""
    xs = np.empty(n + 1)
    ss = np.empty((n + 1, len(s0)))
    xs[0], ss[0] = x0, s0
    s = np.array(s0, dtype=float)
    for i in range(n):
        x = x0 + i * h
        try:
            k1 = f(x, s)
            k2 = f(x + h / 2, s + h / 2 * k1)
            k3 = f(x + h / 2, s + h / 2 * k2)
            k4 = f(x + h, s + h * k3)
        except DomainError as exc:
            on_fail(x, s, str(exc))
        s = s + h / 6 * (k1 + 2 * k2 + 2 * k3 + k4)
        if not np.all(np.isfinite(s)):
            on_fail(x, ss[i], "non-finite state")
        xs[i + 1], ss[i + 1] = x0 + (i + 1) * h, s
    return xs, ss


def _steps(x0: float, x1: float, h: Optional[float]) -> Tuple[int, float]:
    span = x1 - x0
    if span == 0:
        raise ValueError("empty integration span")
    if h is None:
        h = abs(span) * 1e-3
    h = abs(h)
    if h <= abs(span) * 1e-12 or h < 1e-300:
        raise StepUnderflow(f"step {h!r} too small for span {span!r}")
    n = max(1, math.ceil(abs(span) / h - 1e-9))
    return n, span / n


def _rhs(ode: QuadraticOde, blowup: float):
    l0, l1, l2 = (compile_expr(l) for l in ode.lambdas)

    def f(x, s):
        y, yp = s
        env = {"x": x, "y": y}
        ypp = -l2(env) * yp * yp - l1(env) * yp - l0(env)
        if not abs(ypp) < blowup:
            raise DomainError(f"|y''| exceeded {blowup:g}")
        return np.array([yp, ypp])

    return f


def integrate_ode(
    ode: QuadraticOde,
    init: Tuple[float, float, float],
    span: float,
    h: Optional[float] = None,
    estimate_error: bool = True,
    blowup: float = 1e8,
    abort_tol: float = 1e-4,
) -> Trajectory:
    """Integrate from init = (x0, y0, y'0) to x = span with fixed steps.

    The step is shrunk slightly so the grid ends exactly at ``span``.  With
    ``estimate_error`` a second pass at h/2 gives max|y_h - y_{h/2}|/15, and
    a relative disagreement above ``abort_tol`` is treated as a singularity.
    """
    x0, y0, yp0 = (float(v) for v in init)
    n, step = _steps(x0, float(span), h)
    f = _rhs(ode, blowup)

    def fail(x, s, reason):
        raise SingularEncounter(float(x), (float(x), float(s[0]), float(s[1])), reason)

    xs, ss = _rk4(f, x0, np.array([y0, yp0]), step, n, fail)
    err = None
    if estimate_error:
        _, fine = _rk4(f, x0, np.array([y0, yp0]), step / 2, 2 * n, fail)
        gap = np.max(np.abs(fine[::2] - ss) / (1 + np.abs(ss)), axis=1)
        bad = np.flatnonzero(gap > abort_tol)
        if bad.size:
            # h and h/2 disagree: the solution is no longer resolved
            i = max(int(bad[0]) - 1, 0)
            raise SingularEncounter(float(xs[i]), (float(xs[i]), float(ss[i, 0]), float(ss[i, 1])),
                                    "step-halving estimates diverge")
        err = float(np.max(np.abs(fine[::2, 0] - ss[:, 0])) / 15)
    ypp = np.array([f(x, s)[1] for x, s in zip(xs, ss)])
    return Trajectory(xs, ss[:, 0].copy(), ss[:, 1].copy(), ypp, abs(step), (x0, y0, yp0), err)


# ---------------------------------------------------------------- mapping


class _Partials:
    def __init__(self, T: SundmanTransform):
        F, G = T.F, T.G
        self.F = compile_expr(F)
        self.Fx = compile_expr(diff(F, "x"))
        self.Fy = compile_expr(diff(F, "y"))
        self.Fxx = compile_expr(diff(F, "x", 2))
        self.Fxy = compile_expr(diff(diff(F, "x"), "y"))
        self.Fyy = compile_expr(diff(F, "y", 2))
        self.G = compile_expr(G)
        self.Gx = compile_expr(diff(G, "x"))
        self.Gy = compile_expr(diff(G, "y"))


def sundman_map_trajectory(traj: Trajectory, T: SundmanTransform, t0: float = 0.0) -> MappedTrajectory:
    """(x, y, y', y'') samples to (t, u, u', u'') with t(x0) = t0."""
    P = _Partials(T)
    n = len(traj.x)
    g = np.empty(n)
    u = np.empty(n)
    up = np.empty(n)
    upp = np.empty(n)
    for i in range(n):
        env = {"x": float(traj.x[i]), "y": float(traj.y[i])}
        try:
            G = P.G(env)
        except DomainError:
            raise GVanishes(float(traj.x[i]))
        if G == 0 or (i and G * g[i - 1] < 0):
            raise GVanishes(float(traj.x[i]))
        g[i] = G
        yp, ypp = float(traj.yp[i]), float(traj.ypp[i])
        Fx, Fy = P.Fx(env), P.Fy(env)
        u[i] = P.F(env)
        up[i] = (Fx + Fy * yp) / G
        rhs = Fy * ypp + 2 * P.Fxy(env) * yp + P.Fyy(env) * yp * yp + P.Fxx(env)
        upp[i] = (rhs - up[i] * (P.Gx(env) + P.Gy(env) * yp)) / (G * G)
    if n >= 3:
        t = t0 + cumulative_simpson(g, x=traj.x, initial=0.0)
    else:
        t = t0 + np.concatenate([[0.0], np.cumsum(np.diff(traj.x) * (g[1:] + g[:-1]) / 2)])
    return MappedTrajectory(traj.x.copy(), t, u, up, upp)


def residual_linear(m: MappedTrajectory, target: LinearTarget) -> Tuple[float, int]:
    """max |u'' + beta u' + alpha u - gamma| and the sample index where it occurs."""
    a, b, c = target.as_floats()
    r = np.abs(m.upp + b * m.up + a * m.u - c)
    i = int(np.argmax(r))
    return float(r[i]), i


# ---------------------------------------------------------------- inversion and transport


def invert_f(F: Expr, u: float, bracket: Tuple[float, float], x: Optional[float] = None, _compiled=None) -> float:
    """Solve F(y) = u for y in the bracket by safeguarded Newton (bisection fallback)."""
    f, fy = _compiled or (compile_expr(F), compile_expr(diff(F, "y")))
    env = {} if x is None else {"x": float(x)}

    def val(y):
        return f({**env, "y": y}) - u

    lo, hi = (float(b) for b in bracket)
    try:
        flo, fhi = val(lo), val(hi)
    except DomainError as exc:
        raise NoBracket(f"F undefined at the bracket ends ({exc})")
    tol = 1e-12 * (1 + abs(u))
    if abs(flo) <= tol:
        return lo
    if abs(fhi) <= tol:
        return hi
    if flo * fhi > 0:
        raise NoBracket(f"F - u has the same sign at y = {lo!r} and y = {hi!r}")
    yk = 0.5 * (lo + hi)
    for _ in range(200):
        fk = val(yk)
        if abs(fk) <= tol:
            return yk
        if (fk < 0) == (flo < 0):
            lo, flo = yk, fk
        else:
            hi = yk
        d = fy({**env, "y": yk})
        step = yk - fk / d if d != 0 else None
        yk = step if step is not None and lo < step < hi else 0.5 * (lo + hi)
        if hi - lo <= 4 * math.ulp(max(abs(lo), abs(hi))):
            return yk
    return yk


def _monotone(Fy: Callable, lo: float, hi: float, x: Optional[float], n: int = 64) -> bool:
    env = {} if x is None else {"x": x}
    signs = set()
    for y in np.linspace(lo, hi, n):
        try:
            v = Fy({**env, "y": float(y)})
        except DomainError:
            continue
        if v != 0:
            signs.add(v > 0)
    return len(signs) == 1


@dataclass(frozen=True)
class TransportedSolution:
    x: np.ndarray
    t: np.ndarray
    y: np.ndarray

    def to_csv(self) -> str:
        return _table_csv(("x", "t", "y"), (self.x, self.t, self.y))

    def to_json(self) -> str:
        return _table_json(("x", "t", "y"), (self.x, self.t, self.y), {})


def _local_bracket(val: Callable, y_prev: float, width: float, limits: Tuple[float, float]):
    """Smallest widening window around y_prev whose ends straddle a root."""
    lo_lim, hi_lim = limits
    w = width
    for _ in range(60):
        lo, hi = max(lo_lim, y_prev - w), min(hi_lim, y_prev + w)
        try:
            if val(lo) * val(hi) <= 0:
                return lo, hi
        except DomainError:
            pass
        if lo == lo_lim and hi == hi_lim:
            break
        w *= 2
    raise NoBracket(f"no root of F - u found around y = {y_prev!r}")


def transport_solution(
    target: LinearTarget,
    T: SundmanTransform,
    c: Tuple[float, float],
    anchor: Tuple[float, float],
    span: float,
    h: Optional[float] = None,
    y_start: Optional[float] = None,
    limits: Tuple[float, float] = (-1e6, 1e6),
    solution: Optional[LinearSolution] = None,
) -> TransportedSolution:
    """y(x) from u0(t) by integrating dt/dx = G(x, F^{-1}(u0(t))).

    ``anchor`` = (x0, t0).  Each inversion searches a window around the
    previous y (``y_start`` seeds the first one; without it the first window
    is ``limits``), which keeps the branch of F^{-1} continuous.
    """
    sol = solution or linear_general_solution(target)
    u0 = compile_expr(sol.u)
    c1, c2 = (float(v) for v in c)
    F, Fy = compile_expr(T.F), compile_expr(diff(T.F, "y"))
    G = compile_expr(T.G)
    x0, t0 = (float(v) for v in anchor)
    n, step = _steps(x0, float(span), h)
    state = {"y": y_start}

    def y_of(x, t):
        u = u0({"t": t, "c1": c1, "c2": c2})

        def val(y):
            return F({"x": x, "y": y}) - u

        if state["y"] is None:
            lo, hi = limits
        else:
            lo, hi = _local_bracket(val, state["y"], 1e-3 * (1 + abs(state["y"])), limits)
        if not _monotone(Fy, lo, hi, x, 16):
            raise InversionFailure(f"F_y changes sign on [{lo!r}, {hi!r}] at x = {x!r}")
        y = invert_f(T.F, u, (lo, hi), x, (F, Fy))
        return y

    def f(x, s):
        y = y_of(x, s[0])
        return np.array([G({"x": x, "y": y})])

    def fail(x, s, reason):
        raise SingularEncounter(float(x), (float(x), float(s[0]), math.nan), reason)

    xs = np.empty(n + 1)
    ts = np.empty(n + 1)
    ys = np.empty(n + 1)
    xs[0], ts[0] = x0, t0
    ys[0] = y_of(x0, t0)
    state["y"] = ys[0]
    t = t0
    for i in range(n):
        x = x0 + i * step
        try:
            k1 = f(x, [t])[0]
            k2 = f(x + step / 2, [t + step / 2 * k1])[0]
            k3 = f(x + step / 2, [t + step / 2 * k2])[0]
            k4 = f(x + step, [t + step * k3])[0]
        except DomainError as exc:
            fail(x, [t], str(exc))
        t = t + step / 6 * (k1 + 2 * k2 + 2 * k3 + k4)
        xs[i + 1], ts[i + 1] = x0 + (i + 1) * step, t
        ys[i + 1] = y_of(xs[i + 1], t)
        state["y"] = ys[i + 1]
    return TransportedSolution(xs, ts, ys)


def anchor_time(solution: LinearSolution, T: SundmanTransform, c: Tuple[float, float], x0: float, y0: float,
                t_range: Tuple[float, float] = (-1e3, 1e3)) -> float:
    """A t with u0(t) = F(x0, y0): the anchor that makes the transported y pass through (x0, y0)."""
    u_target = compile_expr(T.F)({"x": float(x0), "y": float(y0)})
    u0 = compile_expr(solution.u)
    c1, c2 = (float(v) for v in c)

    def g(t):
        return u0({"t": t, "c1": c1, "c2": c2}) - u_target

    if g(0.0) == 0:
        return 0.0
    radii = np.geomspace(1e-6, max(abs(t_range[0]), abs(t_range[1])), 400)
    best = None
    for sign in (1.0, -1.0):
        prev_t, prev_g = 0.0, g(0.0)
        for r in radii:
            t = sign * r
            if not t_range[0] <= t <= t_range[1]:
                break
            try:
                gv = g(t)
            except DomainError:
                break
            if gv * prev_g <= 0:
                root = brentq(g, min(prev_t, t), max(prev_t, t), xtol=1e-15, rtol=4 * np.finfo(float).eps)
                if best is None or abs(root) < abs(best):
                    best = root
                break
            prev_t, prev_g = t, gv
    if best is None:
        raise NoBracket("no t with u0(t) = F(x0, y0) in the search range")
    return float(best)
