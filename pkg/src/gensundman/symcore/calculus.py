"""Partial derivatives, substitution and a small rule-based antiderivative."""

from __future__ import annotations

from fractions import Fraction
from functools import lru_cache
from typing import Optional

from .canon import canonical, frac_of
from .expr import (
    HALF,
    MINUS_ONE,
    ONE,
    ZERO,
    Add,
    Const,
    Expr,
    Func,
    Mul,
    Pow,
    Var,
    as_expr,
    free_vars,
)


def simplify(e: Expr) -> Expr:
    """Canonical form of ``e``; idempotent and value preserving."""
    return canonical(as_expr(e))


def _d(e: Expr, v: str) -> Expr:
    if v not in free_vars(e):
        return ZERO
    if isinstance(e, Var):
        return ONE
    if isinstance(e, Add):
        return Add(tuple(_d(t, v) for t in e.terms))
    if isinstance(e, Mul):
        terms = []
        fs = e.factors
        for i, f in enumerate(fs):
            df = _d(f, v)
            if df == ZERO:
                continue
            terms.append(Mul(fs[:i] + (df,) + fs[i + 1 :]))
        return Add(terms) if terms else ZERO
    if isinstance(e, Pow):
        b, n = e.base, e.exp
        if v not in free_vars(n):
            # n * b^(n-1) * b'
            return Mul((n, Pow(b, Add((n, MINUS_ONE))), _d(b, v)))
        # b^n * (n' ln b + n b'/b)
        return Mul(
            (
                e,
                Add(
                    (
                        Mul((_d(n, v), Func("ln", b))),
                        Mul((n, _d(b, v), Pow(b, MINUS_ONE))),
                    )
                ),
            )
        )
    if isinstance(e, Func):
        a = e.arg
        da = _d(a, v)
        if e.name == "exp":
            return Mul((e, da))
        if e.name == "ln":
            return Mul((da, Pow(a, MINUS_ONE)))
        if e.name == "sin":
            return Mul((Func("cos", a), da))
        if e.name == "cos":
            return Mul((MINUS_ONE, Func("sin", a), da))
        if e.name == "sqrt":
            return Mul((HALF, da, Pow(a, Const(Fraction(-1, 2)))))
    raise TypeError(f"cannot differentiate {e!r}")


@lru_cache(maxsize=1 << 14)
def diff(e: Expr, v: str, n: int = 1) -> Expr:
    """``n``-th partial derivative of ``e`` with respect to variable ``v``, simplified."""
    out = as_expr(e)
    for _ in range(n):
        out = simplify(_d(simplify(out), v))
    return out


def _subst(e: Expr, v: str, r: Expr) -> Expr:
    if isinstance(e, Var):
        return r if e.name == v else e
    if isinstance(e, Const):
        return e
    if isinstance(e, Add):
        return Add(tuple(_subst(t, v, r) for t in e.terms))
    if isinstance(e, Mul):
        return Mul(tuple(_subst(f, v, r) for f in e.factors))
    if isinstance(e, Pow):
        return Pow(_subst(e.base, v, r), _subst(e.exp, v, r))
    return Func(e.name, _subst(e.arg, v, r))


def substitute(e: Expr, v: str, replacement) -> Expr:
    """Replace every occurrence of variable ``v`` and simplify."""
    return simplify(_subst(as_expr(e), v, as_expr(replacement)))


def substitute_many(e: Expr, mapping: dict) -> Expr:
    """Simultaneous substitution ``{name: replacement}``."""
    e = as_expr(e)
    tmp = {name: Var(f"\0{name}") for name in mapping}
    for name, t in tmp.items():
        e = _subst(e, name, t)
    for name, t in tmp.items():
        e = _subst(e, t.name, as_expr(mapping[name]))
    return simplify(e)


# ---------------------------------------------------------------- antiderivative


def _split_terms(e: Expr) -> list:
    """Additive terms of the canonical form, distributing a monomial denominator."""
    F = frac_of(e)
    if F.den.const_value() is None and not F.den.is_monomial():
        return [e]
    from .canon import Frac, Poly, to_expr

    out = []
    for m, c in F.num.terms.items():
        out.append(to_expr(Frac(Poly({m: c}), F.den)))
    return out


def _factors(t: Expr) -> list:
    return list(t.factors) if isinstance(t, Mul) else [t]


def _integrate_term(t: Expr, v: str) -> Optional[Expr]:
    if v not in free_vars(t):
        return Mul((t, Var(v)))
    fs = _factors(t)
    free = [f for f in fs if v not in free_vars(f)]
    dep = [f for f in fs if v in free_vars(f)]
    coef = Mul(tuple(free)) if free else ONE
    if len(dep) == 1:
        f = dep[0]
        if f == Var(v):
            return Mul((HALF, coef, Pow(f, Const(2))))
        if isinstance(f, Pow) and f.base == Var(v) and isinstance(f.exp, Const):
            k = f.exp.value
            if k == -1:
                return Mul((coef, Func("ln", f.base)))
            return Mul((coef, Pow(f.base, Const(k + 1)), Pow(Const(k + 1), MINUS_ONE)))
    # c * g * exp(E) with g proportional to dE/dv
    for i, f in enumerate(dep):
        if isinstance(f, Func) and f.name == "exp":
            rest = dep[:i] + dep[i + 1 :]
            dE = diff(f.arg, v)
            if dE == ZERO:
                continue
            ratio = simplify(Mul(tuple(rest) + (Pow(dE, MINUS_ONE),)) if rest else Pow(dE, MINUS_ONE))
            if v not in free_vars(ratio):
                return Mul((coef, ratio, f))
    # c * D'/D
    body = simplify(Mul(tuple(dep)))
    F = frac_of(body)
    from .canon import to_expr, frac_poly

    if F.den.const_value() is None:
        D = to_expr(frac_poly(F.den))
        ratio = simplify(Mul((body, D, Pow(diff(D, v), MINUS_ONE))))
        if v not in free_vars(ratio):
            return Mul((coef, ratio, Func("ln", D)))
    return None


def antiderivative(e: Expr, v: str) -> Optional[Expr]:
    """Rule-based antiderivative in ``v`` with zero integration constant.

    Covers sums of ``c*v^k``, ``c/v``, ``c*g*exp(E)`` with ``g`` a constant
    multiple of ``dE/dv``, and ``c*D'/D``, where ``c`` is free of ``v``.
    Returns ``None`` if some term matches no rule.  Any result is checked by
    differentiation before it is returned.
    """
    e = simplify(e)
    if e == ZERO:
        return ZERO
    parts = []
    for t in _split_terms(e):
        r = _integrate_term(t, v)
        if r is None:
            return None
        parts.append(r)
    result = simplify(Add(tuple(parts)))
    check = frac_of(Add((diff(result, v), Mul((MINUS_ONE, e)))))
    if not check.is_zero():
        return None
    return result
