"""Double-precision evaluation of expression trees."""

from __future__ import annotations

import math
from fractions import Fraction
from functools import lru_cache
from typing import Callable, Mapping

from .expr import Add, Const, Expr, Func, Mul, Pow, Var, as_expr


class DomainError(ArithmeticError):
    """The binding lies outside the domain of the expression (invalid sample point)."""


def _pow(b: float, e: float) -> float:
    if b == 0.0 and e < 0:
        raise DomainError("0 raised to a negative power")
    if b < 0 and e != int(e):
        raise DomainError("negative base with non-integer exponent")
    try:
        r = b**e
    except OverflowError as exc:
        raise DomainError("overflow") from exc
    return r


def _ln(a: float) -> float:
    if a <= 0:
        raise DomainError("ln of non-positive value")
    return math.log(a)


def _sqrt(a: float) -> float:
    if a < 0:
        raise DomainError("sqrt of negative value")
    return math.sqrt(a)


def _exp(a: float) -> float:
    try:
        return math.exp(a)
    except OverflowError as exc:
        raise DomainError("exp overflow") from exc


def _fn(name):
    return {"exp": _exp, "ln": _ln, "sin": math.sin, "cos": math.cos, "sqrt": _sqrt}[name]


def _build(e: Expr) -> Callable[[Mapping[str, float]], float]:
    if isinstance(e, Const):
        v = float(e.value)
        return lambda env: v
    if isinstance(e, Var):
        name = e.name
        return lambda env: env[name]
    if isinstance(e, Add):
        parts = [_build(t) for t in e.terms]
        return lambda env: math.fsum(p(env) for p in parts)
    if isinstance(e, Mul):
        parts = [_build(f) for f in e.factors]

        def mul(env):
            acc = 1.0
            for p in parts:
                acc *= p(env)
            return acc

        return mul
    if isinstance(e, Pow):
        base = _build(e.base)
        if isinstance(e.exp, Const) and isinstance(e.exp.value, Fraction) and e.exp.value.denominator == 1:
            n = int(e.exp.value)
            if n == -1:

                def inv(env):
                    b = base(env)
                    if b == 0.0:
                        raise DomainError("division by zero")
                    return 1.0 / b

                return inv
            return lambda env: _pow(base(env), n)
        ex = _build(e.exp)
        return lambda env: _pow(base(env), ex(env))
    if isinstance(e, Func):
        f = _fn(e.name)
        arg = _build(e.arg)
        return lambda env: f(arg(env))
    raise TypeError(f"cannot evaluate {e!r}")


@lru_cache(maxsize=4096)
def compile_expr(e: Expr) -> Callable[[Mapping[str, float]], float]:
    """Closure evaluating ``e`` on a binding; raises :class:`DomainError` off-domain.

    Non-finite results are reported as domain errors as well.
    """
    inner = _build(as_expr(e))

    def run(env):
        try:
            v = inner(env)
        except (ZeroDivisionError, OverflowError, ValueError) as exc:
            raise DomainError(str(exc)) from exc
        if isinstance(v, complex) or not math.isfinite(v):
            raise DomainError("non-finite value")
        return v

    return run


def eval_expr(e: Expr, binding: Mapping[str, float]) -> float:
    """Evaluate ``e`` in double precision at ``binding``."""
    try:
        return compile_expr(as_expr(e))(binding)
    except KeyError as exc:
        raise ValueError(f"binding lacks variable {exc.args[0]!r}") from None
