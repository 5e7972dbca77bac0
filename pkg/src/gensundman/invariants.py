"""Derived invariants lambda3..lambda6 and the three linearizability tests.

* :func:`check_sundman` -- generalized Sundman transformation with F_x = 0
  onto u'' + beta*u' + alpha*u = gamma (constant coefficients).
* :func:`check_dms` -- Sundman onto the Laguerre form u'' = 0.
* :func:`check_lie` -- point transformations.

Every condition is carried as ``lhs = rhs``; the tested residual is the
cleared form (denominators multiplied out), the raw ``lhs - rhs`` is kept
for reporting.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from typing import List, Optional

from .parser import QuadraticOde, format_expr
from .symcore import (
    ZERO,
    Add,
    Const,
    Expr,
    Mul,
    Pow,
    ZeroTestConfig,
    ZeroVerdict,
    diff,
    eval_expr,
    is_zero,
    simplify,
)
from .symcore.evaluate import DomainError
from .symcore.zerotest import DEFAULT_CONFIG


@dataclass(frozen=True)
class Invariants:
    lambda3: Expr
    lambda4: Expr
    lambda5: Expr
    lambda6: Expr


def _sub(a: Expr, b: Expr) -> Expr:
    return Add((a, Mul((Const(-1), b))))


def _D(e: Expr, *vs: str) -> Expr:
    for v in vs:
        e = diff(e, v)
    return e


def derived_invariants(ode: QuadraticOde) -> Invariants:
    l0, l1, l2 = ode.lambdas
    l3 = simplify(_D(l1, "y") - 2 * _D(l2, "x"))
    l4 = simplify(
        2 * _D(l0, "y", "y")
        - 2 * _D(l1, "x", "y")
        + 2 * l0 * _D(l2, "y")
        - _D(l1, "y") * l1
        + 2 * _D(l0, "y") * l2
        + 2 * _D(l2, "x", "x")
    )
    l5 = simplify(_D(l2, "x", "x") + _D(l2, "x") * l1 + _D(l3, "x") + l1 * l3)
    l6 = simplify(_D(l0, "x") + 2 * l0 * l1)
    return Invariants(l3, l4, l5, l6)


# ---------------------------------------------------------------- reports


class Verdict(enum.Enum):
    LINEARIZABLE = "Linearizable"
    NOT_LINEARIZABLE = "NotLinearizable"
    INDETERMINATE = "Indeterminate"


CASE_LABELS = {
    "A1": "lambda3 != 0, lambda5 != 0",
    "A2": "lambda3 != 0, lambda5 = 0, lambda0 != 0",
    "A3": "lambda3 != 0, lambda5 = 0, lambda0 = 0",
    "B": "lambda3 = 0, lambda4 != 0, lambda6 != 0",
    "C": "lambda3 = 0, lambda4 != 0, lambda6 = 0",
    "DMS0": "lambda3 = 0, lambda4 = 0",
    # outcomes that are not cases of the construction
    "B0": "lambda3 = 0, lambda4 != 0, lambda0 = 0",
    "DMS": "lambda3 != 0",
    "LIE": "point transformation",
}


@dataclass(frozen=True)
class ConditionRecord:
    """One tested condition.

    ``kind`` is ``"zero"`` when the residual must vanish and ``"nonzero"``
    for classification requirements such as ``lambda4 != 0``.
    """

    id: str
    description: str
    residual: Expr
    raw_residual: Expr
    verdict: ZeroVerdict
    kind: str = "zero"
    note: str = ""
    lhs: Optional[Expr] = None
    rhs: Optional[Expr] = None

    @property
    def holds(self) -> Optional[bool]:
        if self.verdict.is_indeterminate:
            return None
        return self.verdict.is_zero if self.kind == "zero" else self.verdict.is_nonzero

    def value_at_witness(self, e: Optional[Expr]) -> Optional[float]:
        if not self.verdict.witness or e is None:
            return None
        try:
            return eval_expr(e, self.verdict.witness)
        except (DomainError, ValueError):
            return None

    def raw_value_at_witness(self) -> Optional[float]:
        return self.value_at_witness(self.raw_residual)

    def to_dict(self) -> dict:
        d = {
            "id": self.id,
            "description": self.description,
            "kind": self.kind,
            "status": self.verdict.tag.value,
            "residual": format_expr(simplify(self.residual)),
            "raw_residual": format_expr(simplify(self.raw_residual)),
        }
        if self.verdict.witness is not None:
            d["witness"] = {k: float(v) for k, v in self.verdict.witness.items()}
            d["value"] = self.verdict.value
            for key, e in (("raw_value", self.raw_residual), ("lhs_value", self.lhs), ("rhs_value", self.rhs)):
                val = self.value_at_witness(e)
                if val is not None:
                    d[key] = val
        if self.lhs is not None:
            d["lhs"] = format_expr(simplify(self.lhs))
            d["rhs"] = format_expr(simplify(self.rhs))
        if self.note:
            d["note"] = self.note
        return d


@dataclass
class CheckReport:
    verdict: Verdict
    case: str
    conditions: List[ConditionRecord]
    classification: dict
    seed: int
    criterion: str
    notes: List[str] = field(default_factory=list)

    @property
    def linearizable(self) -> bool:
        return self.verdict is Verdict.LINEARIZABLE

    def condition(self, cid: str) -> ConditionRecord:
        for c in self.conditions:
            if c.id == cid:
                return c
        raise KeyError(cid)

    def to_dict(self) -> dict:
        return {
            "criterion": self.criterion,
            "verdict": self.verdict.value,
            "case": self.case,
            "case_label": CASE_LABELS.get(self.case, ""),
            "classification": {k: v.tag.value for k, v in self.classification.items()},
            "conditions": [c.to_dict() for c in self.conditions],
            "seed": self.seed,
            "notes": list(self.notes),
        }


def _verdict_of(conds: List[ConditionRecord]) -> Verdict:
    states = [c.holds for c in conds]
    if any(s is False for s in states):
        return Verdict.NOT_LINEARIZABLE
    if any(s is None for s in states):
        return Verdict.INDETERMINATE
    return Verdict.LINEARIZABLE


class _Tester:
    def __init__(self, cfg: ZeroTestConfig, seed: Optional[int]):
        self.cfg = cfg
        self.seed = cfg.seed if seed is None else seed
        self.conditions: List[ConditionRecord] = []
        self.classification: dict = {}

    def classify(self, name: str, e: Expr) -> ZeroVerdict:
        v = is_zero(e, self.cfg, self.seed)
        self.classification[name] = v
        return v

    def require(self, cid, description, residual, sides=None, kind="zero", note=""):
        """``residual`` is the cleared form; ``sides`` the uncleared (lhs, rhs)."""
        v = is_zero(residual, self.cfg, self.seed)
        lhs, rhs = sides if sides is not None else (residual, ZERO)
        rec = ConditionRecord(cid, description, residual, _sub(lhs, rhs), v, kind, note, lhs, rhs)
        self.conditions.append(rec)
        return rec

    def report(self, criterion, case, verdict=None, notes=()):
        verdict = verdict or _verdict_of(self.conditions)
        return CheckReport(verdict, case, self.conditions, self.classification, self.seed, criterion, list(notes))


def _undecided(t: _Tester, criterion: str, what: str) -> CheckReport:
    return t.report(criterion, "", Verdict.INDETERMINATE, [f"classification of {what} is indeterminate"])


# ---------------------------------------------------------------- Sundman, F_x = 0


def _conditions_case_a(ode, inv, t: _Tester, l5_zero: bool, l0_zero: bool):
    l0, l1, l2 = ode.lambdas
    l3, l4, l5 = inv.lambda3, inv.lambda4, inv.lambda5
    l0x, l0y = _D(l0, "x"), _D(l0, "y")
    l1x = _D(l1, "x")
    l2x, l2xx, l2xy = _D(l2, "x"), _D(l2, "x", "x"), _D(l2, "x", "y")
    l3x, l3y = _D(l3, "x"), _D(l3, "y")
    if not l5_zero:
        # lambda0_x = 2 lambda0 (lambda5 - lambda1 lambda3) / lambda3
        rhs = 2 * l0 * (l5 - l1 * l3)
        t.require(
            "lambda0x",
            "lambda0_x = 2*lambda0*(lambda5 - lambda1*lambda3)/lambda3",
            _sub(l3 * l0x, rhs),
            sides=(l0x, rhs / l3),
        )
        # lambda2_xxy relation
        lhs = _D(l2, "x", "x", "y")
        poly = (
            -l2xy * l1
            - _D(l3, "x", "y")
            - 2 * l2x * l2x
            - 2 * l2x * l3
            - l3y * l1
        )
        t.require(
            "lambda2xxy",
            "lambda2_xxy = -lambda2_xy*lambda1 - lambda3_xy - 2*lambda2_x^2 - 2*lambda2_x*lambda3"
            " - lambda3_y*lambda1 + lambda3_y*lambda5/lambda3",
            _sub(l3 * lhs, Add((l3 * poly, l3y * l5))),
            sides=(lhs, Add((poly, l3y * l5 / l3))),
        )
        # lambda2_xxx relation
        lhs = _D(l2, "x", "x", "x")
        poly = (
            -_D(l3, "x", "x")
            - l1x * l2x
            - l1x * l3
            + l2x * l1 * l1
            + l1 * l1 * l3
            - 2 * l1 * l5
        )
        tail = l5 * (l3x + l5)
        t.require(
            "lambda2xxx",
            "lambda2_xxx = -lambda3_xx - lambda1_x*lambda2_x - lambda1_x*lambda3 + lambda2_x*lambda1^2"
            " + lambda1^2*lambda3 - 2*lambda1*lambda5 + lambda5*(lambda3_x + lambda5)/lambda3",
            _sub(l3 * lhs, Add((l3 * poly, tail))),
            sides=(lhs, Add((poly, tail / l3))),
        )
        # compatibility of G_x and G_y
        first = l3 * l5 * (
            6 * l0y * l2x
            + 2 * l2xy * l0
            + 4 * l2x * l0 * l2
            + 2 * l3y * l0
            + 4 * l0 * l2 * l3
            + l1 * l5
        )
        second = l3 * l3 * (
            6 * l2x * l2x * l0 + 12 * l2x * l0 * l3 - 6 * l0y * l5 + 6 * l0 * l3 * l3
        )
        res = Add((first, Mul((Const(-1), second)), Mul((Const(-1), l4, l5, l5)), Mul((Const(-2), l5, l5, l5))))
        t.require("lambda4lambda5", "compatibility (G_x)_y = (G_y)_x: the lambda4*lambda5^2 condition", res)
        return
    if not l0_zero:
        t.require("lambda0x_reduced", "lambda0_x = -2*lambda0*lambda1", _sub(l0x, -2 * l0 * l1), sides=(l0x, -2 * l0 * l1))
    t.require(
        "lambda2x_reduced",
        "lambda2_x = -lambda3",
        _sub(l2x, -l3),
        sides=(l2x, -l3),
        note="" if not l0_zero else "lambda0 = 0: only this condition remains (remark-based reduction)",
    )


def _conditions_case_b(ode, inv, t: _Tester, l6_zero: bool):
    l0, l1, l2 = ode.lambdas
    l4, l6 = inv.lambda4, inv.lambda6
    l0y = _D(l0, "y")
    l2x = _D(l2, "x")
    l4x = _D(l4, "x")
    t.require("lambda2xx", "lambda2_xx = -lambda2_x*lambda1", _sub(_D(l2, "x", "x"), -l2x * l1), sides=(_D(l2, "x", "x"), -l2x * l1))
    if not l6_zero:
        rhs = l0y * l6 + 2 * l2x * l0 * l0
        t.require(
            "lambda6y",
            "lambda6_y = (lambda0_y*lambda6 + 2*lambda2_x*lambda0^2)/lambda0",
            _sub(l0 * _D(l6, "y"), rhs),
            sides=(_D(l6, "y"), rhs / l0),
        )
        rhs = 3 * l6 * (l6 - 2 * l0 * l1)
        t.require(
            "lambda6x",
            "lambda6_x = 3*lambda6*(lambda6 - 2*lambda0*lambda1)/(2*lambda0)",
            _sub(2 * l0 * _D(l6, "x"), rhs),
            sides=(_D(l6, "x"), rhs / (2 * l0)),
        )
        rhs = -24 * l2x * l2x * l0 * l0 * l0 - 4 * l0 * l1 * l4 * l6 + l4 * l6 * l6
        t.require(
            "lambda4x",
            "lambda4_x = (-24*lambda2_x^2*lambda0^3 - 4*lambda0*lambda1*lambda4*lambda6"
            " + lambda4*lambda6^2)/(2*lambda0*lambda6)",
            _sub(2 * l0 * l6 * l4x, rhs),
            sides=(l4x, rhs / (2 * l0 * l6)),
        )
        return
    t.require("lambda2x_zero", "lambda2_x = 0", l2x, note="lambda6 = 0 reduces the lambda6_y relation to this")
    t.require("lambda4x_reduced", "lambda4_x = -2*lambda1*lambda4", _sub(l4x, -2 * l1 * l4), sides=(l4x, -2 * l1 * l4))


def check_sundman(ode: QuadraticOde, cfg: ZeroTestConfig = DEFAULT_CONFIG, seed: Optional[int] = None) -> CheckReport:
    """Sufficient conditions for linearization by u = F(y), dt = G(x, y) dx."""
    crit = "sundman"
    inv = derived_invariants(ode)
    t = _Tester(cfg, seed)
    z3 = t.classify("lambda3", inv.lambda3)
    if z3.is_indeterminate:
        return _undecided(t, crit, "lambda3")
    if z3.is_nonzero:
        z5 = t.classify("lambda5", inv.lambda5)
        if z5.is_indeterminate:
            return _undecided(t, crit, "lambda5")
        if z5.is_nonzero:
            _conditions_case_a(ode, inv, t, l5_zero=False, l0_zero=False)
            return t.report(crit, "A1")
        z0 = t.classify("lambda0", ode.lambda0)
        if z0.is_indeterminate:
            return _undecided(t, crit, "lambda0")
        if z0.is_nonzero:
            _conditions_case_a(ode, inv, t, l5_zero=True, l0_zero=False)
            return t.report(crit, "A2")
        _conditions_case_a(ode, inv, t, l5_zero=True, l0_zero=True)
        return t.report(crit, "A3", notes=["lambda0 = 0: no conditions beyond lambda2_x = -lambda3"])
    z4 = t.classify("lambda4", inv.lambda4)
    if z4.is_indeterminate:
        return _undecided(t, crit, "lambda4")
    if z4.is_zero:
        return t.report(
            crit,
            "DMS0",
            Verdict.LINEARIZABLE,
            ["lambda3 = lambda4 = 0: linearizable to u'' = 0 (Laguerre form)"],
        )
    z0 = t.classify("lambda0", ode.lambda0)
    if z0.is_indeterminate:
        return _undecided(t, crit, "lambda0")
    if z0.is_zero:
        return t.report(
            crit,
            "B0",
            Verdict.NOT_LINEARIZABLE,
            ["lambda3 = 0 with lambda0 = 0 forces lambda4 = 0, contradicting lambda4 != 0"],
        )
    z6 = t.classify("lambda6", inv.lambda6)
    if z6.is_indeterminate:
        return _undecided(t, crit, "lambda6")
    if z6.is_nonzero:
        _conditions_case_b(ode, inv, t, l6_zero=False)
        return t.report(crit, "B")
    _conditions_case_b(ode, inv, t, l6_zero=True)
    return t.report(crit, "C")


_CASE_FLAGS = {
    "A1": (_conditions_case_a, {"l5_zero": False, "l0_zero": False}),
    "A2": (_conditions_case_a, {"l5_zero": True, "l0_zero": False}),
    "A3": (_conditions_case_a, {"l5_zero": True, "l0_zero": True}),
    "B": (_conditions_case_b, {"l6_zero": False}),
    "C": (_conditions_case_b, {"l6_zero": True}),
}


def case_conditions(ode: QuadraticOde, case: str, cfg: ZeroTestConfig = DEFAULT_CONFIG, seed: Optional[int] = None) -> CheckReport:
    """Test the conditions of ``case`` without classifying the invariants first.

    Useful to compare branches, e.g. the A1 conditions on an equation whose
    lambda5 vanishes must agree with the A2 ones.
    """
    if case not in _CASE_FLAGS:
        raise ValueError(f"no condition set for case {case!r}")
    fn, flags = _CASE_FLAGS[case]
    t = _Tester(cfg, seed)
    fn(ode, derived_invariants(ode), t, **flags)
    return t.report("sundman", case)


# ---------------------------------------------------------------- Laguerre form


def check_dms(ode: QuadraticOde, cfg: ZeroTestConfig = DEFAULT_CONFIG, seed: Optional[int] = None) -> CheckReport:
    """Conditions for a generalized Sundman map onto u'' = 0."""
    crit = "dms"
    l0, l1, l2 = ode.lambdas
    inv = derived_invariants(ode)
    l3, l4 = inv.lambda3, inv.lambda4
    t = _Tester(cfg, seed)
    z3 = t.classify("lambda3", l3)
    if z3.is_indeterminate:
        return _undecided(t, crit, "lambda3")
    if z3.is_zero:
        t.require("lambda4_zero", "lambda3 = 0 requires lambda4 = 0", l4)
        return t.report(crit, "DMS0")
    t.require("lambda4_nonzero", "lambda3 != 0 requires lambda4 != 0", l4, kind="nonzero")
    l3x = _D(l3, "x")
    first = Add(
        (
            l4 * l4,
            2 * l3x * l4,
            -2 * l3 * l3 * _D(l1, "x"),
            4 * l3 * l3 * _D(l0, "y"),
            4 * l3 * l3 * l0 * l2,
            -2 * l3 * _D(l4, "x"),
            -(l3 * l3 * l1 * l1),
        )
    )
    second = Add(
        (
            _D(l3, "y") * l4,
            l3 * l3 * _D(l1, "y"),
            -2 * l3 * l3 * _D(l2, "x"),
            -(l3 * _D(l4, "y")),
        )
    )
    t.require("dms_first", "lambda4^2 + 2*lambda3_x*lambda4 - ... - lambda3^2*lambda1^2 = 0", first)
    t.require("dms_second", "lambda3_y*lambda4 + lambda3^2*lambda1_y - 2*lambda3^2*lambda2_x - lambda3*lambda4_y = 0", second)
    return t.report(crit, "DMS")


# ---------------------------------------------------------------- Lie


def check_lie(ode: QuadraticOde, cfg: ZeroTestConfig = DEFAULT_CONFIG, seed: Optional[int] = None) -> CheckReport:
    """Lie's two conditions for linearization by a point transformation."""
    lf = ode.lie_form()
    a, b, c, d = lf.a, lf.b, lf.c, lf.d
    D = _D
    first = Add(
        (
            3 * D(a, "x", "x"),
            -2 * D(b, "x", "y"),
            D(c, "y", "y"),
            -3 * D(a, "x") * c,
            3 * D(a, "y") * d,
            2 * D(b, "x") * b,
            -3 * D(c, "x") * a,
            -(D(c, "y") * b),
            6 * D(d, "y") * a,
        )
    )
    second = Add(
        (
            D(b, "x", "x"),
            -2 * D(c, "x", "y"),
            3 * D(d, "y", "y"),
            -6 * D(a, "x") * d,
            D(b, "x") * c,
            3 * D(b, "y") * d,
            -2 * D(c, "y") * c,
            -3 * D(d, "x") * a,
            3 * D(d, "y") * b,
        )
    )
    t = _Tester(cfg, seed)
    t.require("lie_first", "3a_xx - 2b_xy + c_yy - 3a_x c + 3a_y d + 2b_x b - 3c_x a - c_y b + 6d_y a = 0", first)
    t.require("lie_second", "b_xx - 2c_xy + 3d_yy - 6a_x d + b_x c + 3b_y d - 2c_y c - 3d_x a + 3d_y b = 0", second)
    return t.report("lie", "LIE")
