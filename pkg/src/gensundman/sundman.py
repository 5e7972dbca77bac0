"""Construction and verification of the transformation u = F(y), dt = G(x, y) dx.

G is found from its logarithmic derivatives.  Whatever the case, G must
satisfy a fixed family of first and second order equations (constancy of
beta and alpha, and F_x = 0 surviving differentiation of the F_yy relation).
Those are written here in terms of L = ln G, which turns every equation into
a polynomial in any undetermined constant of an ansatz.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from .invariants import Invariants, derived_invariants
from .parser import QuadraticOde, format_expr
from .symcore import (
    ZERO,
    Add,
    Const,
    Expr,
    Mul,
    Var,
    ZeroTestConfig,
    ZeroVerdict,
    antiderivative,
    compile_expr,
    cos,
    diff,
    eval_expr,
    exp,
    free_vars,
    is_constant,
    is_zero,
    ln,
    simplify,
    sin,
    substitute,
)
from .symcore.canon import NotPolynomialError, coefficients_in
from .symcore.evaluate import DomainError
from .symcore.zerotest import DEFAULT_CONFIG


class Provenance(enum.Enum):
    SYMBOLIC = "derived-symbolic"
    ANSATZ = "derived-ansatz"
    USER = "user-supplied"


@dataclass(frozen=True)
class SundmanTransform:
    """u = F(x, y), dt = G(x, y) dx."""

    F: Expr
    G: Expr
    provenance: Provenance = Provenance.USER
    note: str = ""

    def to_dict(self) -> dict:
        d = {"F": format_expr(self.F), "G": format_expr(self.G), "provenance": self.provenance.value}
        if self.note:
            d["note"] = self.note
        return d


def _const_text(c) -> str:
    if isinstance(c, Fraction):
        return str(c.numerator) if c.denominator == 1 else f"{c.numerator}/{c.denominator}"
    return repr(float(c))


@dataclass(frozen=True)
class LinearTarget:
    """Coefficients of u'' + beta*u' + alpha*u = gamma.

    Each is a :class:`~fractions.Fraction` when known exactly, otherwise a float.
    """

    alpha: object
    beta: object
    gamma: object

    @property
    def exact(self) -> bool:
        return all(isinstance(c, Fraction) for c in (self.alpha, self.beta, self.gamma))

    def as_floats(self) -> Tuple[float, float, float]:
        return float(self.alpha), float(self.beta), float(self.gamma)

    def scaled(self, k) -> "LinearTarget":
        """Target for (k*F, G): only gamma changes."""
        return LinearTarget(self.alpha, self.beta, self.gamma * k)

    def __str__(self) -> str:
        return f"u'' + ({_const_text(self.beta)})*u' + ({_const_text(self.alpha)})*u = {_const_text(self.gamma)}"

    def to_dict(self) -> dict:
        return {
            "alpha": _const_text(self.alpha),
            "beta": _const_text(self.beta),
            "gamma": _const_text(self.gamma),
            "exact": self.exact,
        }


class NonConstantTarget(ValueError):
    """(F, G) maps the equation to a linear one whose coefficient is not constant."""

    def __init__(self, which: str, expr: Expr, verdicts: Dict[str, ZeroVerdict]):
        witness = next((v.witness for v in verdicts.values() if v.is_nonzero), None)
        self.which = which
        self.expr = expr
        self.witness = witness
        super().__init__(f"{which} = {format_expr(expr)} is not constant (witness {witness})")


# ---------------------------------------------------------------- the G-equations


def _g_equations(ode: QuadraticOde, inv: Invariants, Lx: Expr, Ly: Expr) -> Dict[str, Expr]:
    """Every equation G must satisfy, divided by the appropriate power of G.

    Lx, Ly are G_x/G and G_y/G.
    """
    l0, l1, l2 = ode.lambdas
    l3, l4, l5 = inv.lambda3, inv.lambda4, inv.lambda5
    d = diff
    g1, g2 = Lx, Ly
    g11 = d(Lx, "x") + Lx * Lx
    g12 = d(Lx, "y") + Lx * Ly
    g22 = d(Ly, "y") + Ly * Ly
    l0x, l0y, l2x = d(l0, "x"), d(l0, "y"), d(l2, "x")
    return {
        "F_x=0 compatibility": g12 - g1 * g2 + l2x,
        "beta_x=0": g11 - 2 * g1 * g1 - g1 * l1 + d(l1, "x"),
        "beta_y=0": g12 - l3 + g2 * l1,
        "gamma_x=0": 2 * g1 * l0 - l0x,
        "G_x relation": g1 * l3 - (d(l2, "x", 2) + l2x * l1 + d(l3, "x")),
        "alpha_x=0": 2 * g1 * (l0y + l0 * l2)
        + g2 * (l0x + 2 * l0 * l1)
        - (d(l0x, "y") + l0x * l2 + 4 * l2x * l0 + 2 * l0 * l3),
        "alpha_y=0": 2 * g22 * l0
        - 6 * g2 * g2 * l0
        + 2 * g2 * (3 * l0y + 2 * l0 * l2)
        - (l4 + 2 * l5 - l1 * l3),
    }


def g_equation_residuals(ode: QuadraticOde, G: Expr, cfg: ZeroTestConfig = DEFAULT_CONFIG, seed=None):
    """Zero-test every G-equation for a concrete G; returns {name: ZeroVerdict}."""
    inv = derived_invariants(ode)
    Lx = simplify(diff(G, "x") / G)
    Ly = simplify(diff(G, "y") / G)
    return {k: is_zero(e, cfg, seed) for k, e in _g_equations(ode, inv, Lx, Ly).items()}


def _log_derivatives(ode: QuadraticOde, inv: Invariants, case: str):
    """Known (G_x/G, G_y/G) for the case; None where the case leaves it open."""
    l0 = ode.lambda0
    l1, l2 = ode.lambda1, ode.lambda2
    l3, l5, l6 = inv.lambda3, inv.lambda5, inv.lambda6
    p = q = None
    if case in ("A1", "A2", "A3"):
        l2x = diff(l2, "x")
        p = simplify((diff(l2x, "x") + l2x * l1 + diff(l3, "x")) / l3)
        if case == "A1":
            q = simplify(l3 * (l2x + l3) / l5)
    elif case in ("B", "C"):
        p = simplify(diff(l0, "x") / (2 * l0))
        if case == "B":
            q = simplify((diff(l6, "y") * l0 - diff(l0, "y") * l6) / (l0 * l6))
    return p, q


_PARAM = "_c"

# Ansatz shapes for the open part of ln G, as multiples of a free constant.
_SHAPES: Sequence[Tuple[str, Expr]] = (
    ("y^c", ln(Var("y"))),
    ("exp(c*y)", Var("y")),
    ("exp(c*x*y)", Var("x") * Var("y")),
    ("exp(c*x)", Var("x")),
)


def _rationalize(v: float) -> Fraction:
    return Fraction(v).limit_denominator(64)


def _solve_constant(equations: List[Expr], cfg: ZeroTestConfig, seed) -> List[Fraction]:
    """Rational values of the free constant making every equation vanish.

    Each equation is a polynomial in the constant with coefficients in x, y.
    Roots are located numerically at a few box points and then confirmed
    exactly by the caller.
    """
    rng = np.random.default_rng(cfg.seed if seed is None else seed)
    polys = []
    for e in equations:
        try:
            coeffs = coefficients_in(simplify(e), (_PARAM,))
        except NotPolynomialError:
            return []
        coeffs = {k[0]: v for k, v in coeffs.items()}
        if coeffs:
            polys.append(coeffs)
    if not polys:
        return [Fraction(0)]
    candidates = None
    for coeffs in polys:
        deg = max(coeffs)
        if deg == 0:
            continue
        found = None
        for _ in range(4):
            pt = {"x": rng.uniform(*cfg.interval("x")), "y": rng.uniform(*cfg.interval("y"))}
            try:
                row = [eval_expr(coeffs.get(k, ZERO), pt) for k in range(deg, -1, -1)]
            except (DomainError, ValueError):
                continue
            while row and abs(row[0]) < 1e-14:
                row = row[1:]
            if len(row) < 2:
                continue
            here = {_rationalize(r.real) for r in np.roots(row) if abs(r.imag) < 1e-9}
            found = here if found is None else found & here
        if found is None:
            continue
        candidates = found if candidates is None else candidates & found
    if candidates is None:
        return []
    return sorted(candidates, key=lambda c: (abs(c), c))


def _normalize_ln(L: Expr) -> Expr:
    # drop additive constants from ln G so G carries no stray factor
    L = simplify(L)
    terms = L.terms if isinstance(L, Add) else (L,)
    kept = [t for t in terms if free_vars(t)]
    return simplify(Add(tuple(kept))) if kept else ZERO


def _accept(ode, inv, L: Expr, cfg, seed) -> bool:
    Lx, Ly = simplify(diff(L, "x")), simplify(diff(L, "y"))
    return all(is_zero(e, cfg, seed).is_zero for e in _g_equations(ode, inv, Lx, Ly).values())


@dataclass
class GDerivation:
    G: Optional[Expr]
    provenance: Optional[Provenance]
    method: str
    point_transformation: bool = False
    tried: List[str] = field(default_factory=list)


def derive_g_detailed(
    ode: QuadraticOde, inv: Invariants, case: str, cfg: ZeroTestConfig = DEFAULT_CONFIG, seed=None
) -> GDerivation:
    p, q = _log_derivatives(ode, inv, case)
    tried = []
    base = None
    if p is not None:
        base = antiderivative(p, "x")
        if base is None:
            tried.append("integrate G_x/G: no rule applies")
    if base is not None and q is not None:
        remainder = simplify(q - diff(base, "y"))
        compatible = is_zero(diff(remainder, "x"), cfg, seed).is_zero
        rest = antiderivative(remainder, "y") if compatible else None
        if not compatible:
            tried.append("G_x/G and G_y/G fail the cross-derivative test")
        if rest is not None:
            L = _normalize_ln(base + rest)
            tried.append("logarithmic-derivative integration")
            if _accept(ode, inv, L, cfg, seed):
                return _finish(L, Provenance.SYMBOLIC, "logarithmic-derivative integration", tried, cfg, seed)
    # ansatz: ln G = base + c*shape, or c*shape alone when G_x/G is unknown
    starts = [base] if base is not None else [ZERO]
    for start in starts:
        for label, shape in (("1", ZERO),) + tuple(_SHAPES):
            if shape == ZERO:
                L = start
                ok = _accept(ode, inv, L, cfg, seed)
                tried.append(f"ansatz {label}")
                if ok:
                    return _finish(_normalize_ln(L), Provenance.ANSATZ, f"ansatz {label}", tried, cfg, seed)
                continue
            c = Var(_PARAM)
            L = start + c * shape
            Lx, Ly = simplify(diff(L, "x")), simplify(diff(L, "y"))
            eqs = list(_g_equations(ode, inv, Lx, Ly).values())
            for val in _solve_constant(eqs, cfg, seed):
                if val == 0:
                    continue
                Lv = simplify(substitute(L, _PARAM, Const(val)))
                tried.append(f"ansatz {label} with c = {val}")
                if _accept(ode, inv, Lv, cfg, seed):
                    return _finish(_normalize_ln(Lv), Provenance.ANSATZ, f"ansatz {label}, c = {val}", tried, cfg, seed)
    return GDerivation(None, None, "no closed form found", tried=tried)


def _finish(L, prov, method, tried, cfg, seed) -> GDerivation:
    G = simplify(exp(L))
    point = is_zero(diff(G, "y"), cfg, seed).is_zero
    return GDerivation(G, prov, method, point, tried)


def derive_g(ode: QuadraticOde, inv: Invariants, case: str, cfg: ZeroTestConfig = DEFAULT_CONFIG, seed=None) -> Optional[Expr]:
    """A G solving the case's G-equations, or None when no rule or ansatz works."""
    return derive_g_detailed(ode, inv, case, cfg, seed).G


# ---------------------------------------------------------------- F


def _drop_free_factors(e: Expr) -> Expr:
    # constant transcendental factors such as exp(3/2) from G(x0, y)
    if isinstance(e, Mul):
        kept = [f for f in e.factors if free_vars(f) or isinstance(f, Const)]
        if len(kept) < len(e.factors):
            return simplify(Mul(tuple(kept))) if kept else Const(1)
    return e


def _strip_constant_factor(e: Expr) -> Expr:
    e = _drop_free_factors(simplify(e))
    if isinstance(e, Const):
        return e
    lead = None
    if isinstance(e, Mul) and isinstance(e.factors[0], Const):
        lead = e.factors[0].value
    elif isinstance(e, Add):
        t = e.terms[0]
        if isinstance(t, Mul) and isinstance(t.factors[0], Const):
            lead = t.factors[0].value
    if lead is None or lead == 0:
        return e
    return simplify(e / Const(lead))


def derive_f(ode: QuadraticOde, G: Expr, cfg: ZeroTestConfig = DEFAULT_CONFIG, seed=None, x0=None) -> Optional[Expr]:
    """F(y) with F_yy = (G_y + G*lambda2) F_y / G, or None.

    F_y is taken as G(x0, y)*exp(int lambda2(x0, y) dy) at the reference
    abscissa x0 (box center by default); the relation must then hold for all x.
    """
    if x0 is None:
        x0 = cfg.center(["x"])["x"]
    x0 = Const(x0)
    lam2 = simplify(substitute(ode.lambda2, "x", x0))
    I = antiderivative(lam2, "y")
    if I is None:
        return None
    Fy = _drop_free_factors(simplify(substitute(G, "x", x0) * exp(I)))
    if "x" in free_vars(Fy):
        return None
    Fyy = diff(Fy, "y")
    residual = Fyy * G - (diff(G, "y") + G * ode.lambda2) * Fy
    if not is_zero(residual, cfg, seed).is_zero:
        return None
    F = antiderivative(Fy, "y")
    if F is None:
        return None
    return _strip_constant_factor(F)


# ---------------------------------------------------------------- target


def _constant_or_raise(which: str, e: Expr, cfg, seed):
    v = is_constant(e, ("x", "y"), cfg, seed)
    if not v.constant:
        raise NonConstantTarget(which, e, v.derivative_verdicts)
    return v.value


def target_expressions(ode: QuadraticOde, T: SundmanTransform) -> Tuple[Expr, Expr, Expr]:
    """alpha, beta, gamma as expressions; alpha is formed first since gamma uses it."""
    l0, l1, l2 = ode.lambdas
    F, G = T.F, T.G
    Fy = diff(F, "y")
    Gx, Gy = diff(G, "x"), diff(G, "y")
    alpha = simplify((-Gy * l0 + G * (diff(l0, "y") + l0 * l2)) / (G * G * G))
    beta = simplify((Gx + G * l1) / (G * G))
    gamma = simplify((-Fy * l0 + alpha * F * G * G) / (G * G))
    return alpha, beta, gamma


def target_coeffs(ode: QuadraticOde, T: SundmanTransform, cfg: ZeroTestConfig = DEFAULT_CONFIG, seed=None) -> LinearTarget:
    """Constant (alpha, beta, gamma); raises NonConstantTarget otherwise."""
    l0 = ode.lambda0
    F, G = T.F, T.G
    alpha_e, beta_e, _ = target_expressions(ode, T)
    alpha = _constant_or_raise("alpha", alpha_e, cfg, seed)
    beta = _constant_or_raise("beta", beta_e, cfg, seed)
    a = Const(alpha) if isinstance(alpha, Fraction) else Const(float(alpha))
    gamma_e = simplify((-diff(F, "y") * l0 + a * F * G * G) / (G * G))
    gamma = _constant_or_raise("gamma", gamma_e, cfg, seed)
    return LinearTarget(alpha, beta, gamma)


# ---------------------------------------------------------------- verification


@dataclass
class CandidateReport:
    transform: SundmanTransform
    target: LinearTarget
    target_constant: bool
    residuals: Dict[str, Expr]
    verdicts: Dict[str, ZeroVerdict]
    nonvanishing: ZeroVerdict
    point_transformation: bool
    seed: int
    notes: List[str] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return self.target_constant and self.nonvanishing.is_nonzero and all(v.is_zero for v in self.verdicts.values())

    def to_dict(self) -> dict:
        return {
            "transform": self.transform.to_dict(),
            "target": self.target.to_dict(),
            "target_constant": self.target_constant,
            "residuals": {
                k: {"expr": format_expr(self.residuals[k]), **self.verdicts[k].to_dict()} for k in self.residuals
            },
            "FyG_nonzero": self.nonvanishing.to_dict(),
            "point_transformation": self.point_transformation,
            "ok": self.ok,
            "seed": self.seed,
            "notes": list(self.notes),
        }


def verify_candidate(ode: QuadraticOde, T: SundmanTransform, cfg: ZeroTestConfig = DEFAULT_CONFIG, seed=None) -> CandidateReport:
    """Check that (F, G) carries the ODE to u'' + beta u' + alpha u = gamma.

    If a target coefficient is not constant, its value at the box center is
    used provisionally and the report says so.
    """
    seed = cfg.seed if seed is None else seed
    l0, l1, l2 = ode.lambdas
    F, G = T.F, T.G
    notes = []
    try:
        target = target_coeffs(ode, T, cfg, seed)
        constant = True
    except NonConstantTarget as exc:
        constant = False
        notes.append(str(exc))
        center = {k: float(v) for k, v in cfg.center(["x", "y"]).items()}
        exprs = target_expressions(ode, T)
        vals = []
        for e in exprs:
            try:
                vals.append(eval_expr(e, center))
            except (DomainError, ValueError):
                vals.append(math.nan)
        target = LinearTarget(*vals)
    if not is_zero(diff(F, "x"), cfg, seed).is_zero:
        notes.append("F depends on x; target formulas assume F_x = 0")
    a, b, g = (Const(c) if isinstance(c, Fraction) else Const(float(c)) for c in (target.alpha, target.beta, target.gamma))
    Fx, Fy = diff(F, "x"), diff(F, "y")
    Gx, Gy = diff(G, "x"), diff(G, "y")
    K = G * Fy
    residuals = {
        "lambda2": simplify(l2 * K - (diff(Fy, "y") * G - Fy * Gy)),
        "lambda1": simplify(l1 * K - (2 * diff(Fx, "y") * G - Fx * Gy - Fy * Gx + Fy * b * G * G)),
        "lambda0": simplify(l0 * K - (diff(Fx, "x") * G - Fx * Gx + Fx * b * G * G + a * F * G ** 3 - G ** 3 * g)),
    }
    verdicts = {k: is_zero(e, cfg, seed) for k, e in residuals.items()}
    nonvanishing = is_zero(K, cfg, seed)
    point = is_zero(Gy, cfg, seed).is_zero
    if point:
        notes.append("G_y = 0: this is a point transformation")
    return CandidateReport(T, target, constant, residuals, verdicts, nonvanishing, point, seed, notes)


# ---------------------------------------------------------------- pipeline


@dataclass
class TransformResult:
    case: str
    transform: Optional[SundmanTransform]
    target: Optional[LinearTarget]
    report: Optional[CandidateReport]
    method: str
    notes: List[str] = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "case": self.case,
            "transform": self.transform.to_dict() if self.transform else None,
            "target": self.target.to_dict() if self.target else None,
            "verification": self.report.to_dict() if self.report else None,
            "method": self.method,
            "notes": list(self.notes),
        }


def find_transform(ode: QuadraticOde, case: str, cfg: ZeroTestConfig = DEFAULT_CONFIG, seed=None, x0=None) -> TransformResult:
    """derive_g, then derive_f, then the target and a full candidate check."""
    inv = derived_invariants(ode)
    gd = derive_g_detailed(ode, inv, case, cfg, seed)
    if gd.G is None:
        return TransformResult(case, None, None, None, gd.method, ["symbolic G not found; numeric checks only"])
    F = derive_f(ode, gd.G, cfg, seed, x0)
    if F is None:
        return TransformResult(case, None, None, None, gd.method, [f"G = {format_expr(gd.G)} found, F not integrable"])
    T = SundmanTransform(F, gd.G, gd.provenance, gd.method)
    report = verify_candidate(ode, T, cfg, seed)
    notes = list(report.notes)
    return TransformResult(case, T, report.target if report.target_constant else None, report, gd.method, notes)


# ---------------------------------------------------------------- linear solutions


T_VAR, C1, C2 = Var("t"), Var("c1"), Var("c2")


def _num(c) -> Expr:
    return Const(c) if isinstance(c, Fraction) else Const(float(c))


@dataclass(frozen=True)
class LinearSolution:
    """General solution u(t; c1, c2) of a constant-coefficient target."""

    target: LinearTarget
    kind: str  # "distinct", "double" or "complex"
    roots: Tuple  # ((re, im), (re, im)) as expressions
    particular: Expr
    u: Expr

    def residual(self) -> Expr:
        a, b, g = (_num(c) for c in (self.target.alpha, self.target.beta, self.target.gamma))
        u = self.u
        return simplify(diff(u, "t", 2) + b * diff(u, "t") + a * u - g)

    def evaluate(self, t: float, c1: float, c2: float) -> float:
        return compile_expr(self.u)({"t": t, "c1": c1, "c2": c2})

    def to_dict(self) -> dict:
        return {
            "kind": self.kind,
            "roots": [{"re": format_expr(re), "im": format_expr(im)} for re, im in self.roots],
            "particular": format_expr(self.particular),
            "u": format_expr(self.u),
        }


def _sqrt_const(d) -> Expr:
    """sqrt of a nonnegative constant, exact when d is rational."""
    if isinstance(d, Fraction):
        return simplify(Const(d) ** Const(Fraction(1, 2)))
    return Const(math.sqrt(float(d)))


def linear_general_solution(target: LinearTarget) -> LinearSolution:
    a, b, g = target.alpha, target.beta, target.gamma
    A, B, Gm = _num(a), _num(b), _num(g)
    t = T_VAR
    if a != 0:
        particular = simplify(Gm / A)
    elif b != 0:
        particular = simplify(Gm / B * t)
    else:
        particular = simplify(Gm / 2 * t * t)
    disc = b * b - 4 * a
    half = Fraction(1, 2) if isinstance(b, Fraction) else 0.5
    if disc > 0:
        s = _sqrt_const(disc)
        r1 = simplify(-B * half + s * half)
        r2 = simplify(-B * half - s * half)
        kind, roots = "distinct", ((r1, ZERO), (r2, ZERO))
        hom = C1 * exp(r1 * t) + C2 * exp(r2 * t)
    elif disc == 0:
        r = simplify(-B * half)
        kind, roots = "double", ((r, ZERO), (r, ZERO))
        hom = (C1 * t + C2) * exp(r * t)
    else:
        w = _sqrt_const(-disc)
        re, im = simplify(-B * half), simplify(w * half)
        kind, roots = "complex", ((re, im), (re, simplify(-im)))
        hom = exp(re * t) * (C1 * cos(im * t) + C2 * sin(im * t))
    return LinearSolution(target, kind, roots, particular, simplify(hom + particular))
