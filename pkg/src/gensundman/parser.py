"""Text <-> expression, and ODE text -> quadratic coefficient triple.

Grammar (no implicit multiplication)::

    equation := expr ['=' expr]
    expr     := term (('+' | '-') term)*
    term     := unary (('*' | '/') unary)*
    unary    := ('+' | '-') unary | power
    power    := primary ['^' unary]          (right associative)
    primary  := number | name '(' expr ')' | name | '(' expr ')'

Names are ``x``, ``y``, declared parameters and the functions
``exp ln sin cos sqrt``.  In ODE mode ``y'`` and ``y''`` are also accepted.
Integers are exact; decimals are real literals.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Mapping, Optional

from .symcore import (
    FUNCTIONS,
    Add,
    Const,
    Expr,
    Func,
    Mul,
    Pow,
    Var,
    ZeroTestConfig,
    as_expr,
    is_zero,
    simplify,
    substitute_many,
)
from .symcore.canon import NotPolynomialError, coefficient_ratios, coefficients_in
from .symcore.zerotest import DEFAULT_CONFIG

YP = "y'"
YPP = "y''"


class ExprSyntaxError(SyntaxError):
    """Malformed input; ``offset`` is a byte offset, ``expected`` the acceptable tokens."""

    def __init__(self, message: str, text: str, offset: int, expected: Iterable[str]):
        self.expected = frozenset(expected)
        self.byte_offset = len(text[:offset].encode("utf-8"))
        super().__init__(f"{message} at byte {self.byte_offset}; expected one of {sorted(self.expected)}")
        self.text = text
        self.offset = self.byte_offset


class OdeFormError(ValueError):
    pass


class NotQuadraticInDerivative(OdeFormError):
    """y' enters with power > 2, inside a function, or in a denominator."""


class NotSecondOrder(OdeFormError):
    """y'' is absent, enters nonlinearly, or its coefficient vanishes."""


# ---------------------------------------------------------------- tokens

_TOKEN = re.compile(
    r"""
    (?P<ws>\s+)
  | (?P<num>(?:\d+\.\d*|\.\d+|\d+)(?:[eE][+-]?\d+)?)
  | (?P<name>[A-Za-z_][A-Za-z_0-9]*)
  | (?P<op>[-+*/^()=])
  | (?P<prime>')
    """,
    re.VERBOSE,
)

_START = frozenset({"number", "name", "(", "+", "-"})
_AFTER_OPERAND = frozenset({"+", "-", "*", "/", "^"})


@dataclass(frozen=True)
class _Tok:
    kind: str  # number, name, op char, "'", or "end"
    text: str
    pos: int


def _tokenize(text: str) -> list:
    out = []
    i = 0
    while i < len(text):
        m = _TOKEN.match(text, i)
        if m is None:
            raise ExprSyntaxError(f"unexpected character {text[i]!r}", text, i, _START | _AFTER_OPERAND)
        kind = m.lastgroup
        if kind == "num":
            out.append(_Tok("number", m.group(), i))
        elif kind == "name":
            out.append(_Tok("name", m.group(), i))
        elif kind == "op":
            out.append(_Tok(m.group(), m.group(), i))
        elif kind == "prime":
            out.append(_Tok("'", "'", i))
        i = m.end()
    out.append(_Tok("end", "", len(text)))
    return out


class _Parser:
    def __init__(self, text: str, names: frozenset, ode: bool):
        self.text = text
        self.toks = _tokenize(text)
        self.i = 0
        self.names = names
        self.ode = ode

    def peek(self) -> _Tok:
        return self.toks[self.i]

    def take(self) -> _Tok:
        t = self.toks[self.i]
        self.i += 1
        return t

    def fail(self, expected, tok: Optional[_Tok] = None):
        tok = tok or self.peek()
        what = "end of input" if tok.kind == "end" else f"token {tok.text!r}"
        raise ExprSyntaxError(f"unexpected {what}", self.text, tok.pos, expected)

    def expect(self, kind: str):
        if self.peek().kind != kind:
            self.fail({kind})
        return self.take()

    def top(self) -> Expr:
        lhs = self.expr()
        if self.ode and self.peek().kind == "=":
            self.take()
            rhs = self.expr()
            lhs = Add((lhs, Mul((Const(-1), rhs))))
        if self.peek().kind != "end":
            follow = set(_AFTER_OPERAND) | {"end"}
            if self.ode:
                follow.add("=")
            self.fail(follow)
        return lhs

    def expr(self) -> Expr:
        terms = [self.term()]
        while self.peek().kind in ("+", "-"):
            op = self.take().kind
            t = self.term()
            terms.append(t if op == "+" else Mul((Const(-1), t)))
        return terms[0] if len(terms) == 1 else Add(terms)

    def term(self) -> Expr:
        factors = [self.unary()]
        while self.peek().kind in ("*", "/"):
            op = self.take().kind
            f = self.unary()
            factors.append(f if op == "*" else Pow(f, Const(-1)))
        return factors[0] if len(factors) == 1 else Mul(factors)

    def unary(self) -> Expr:
        k = self.peek().kind
        if k == "-":
            self.take()
            return Mul((Const(-1), self.unary()))
        if k == "+":
            self.take()
            return self.unary()
        return self.power()

    def power(self) -> Expr:
        base = self.primary()
        if self.peek().kind == "^":
            self.take()
            return Pow(base, self.unary())
        return base

    def primary(self) -> Expr:
        tok = self.peek()
        if tok.kind == "number":
            self.take()
            if re.fullmatch(r"\d+", tok.text):
                return Const(Fraction(int(tok.text)))
            return Const(float(tok.text))
        if tok.kind == "(":
            self.take()
            e = self.expr()
            self.expect(")")
            return e
        if tok.kind == "name":
            self.take()
            name = tok.text
            if name in FUNCTIONS:
                self.expect("(")
                arg = self.expr()
                self.expect(")")
                return Func(name, arg)
            if name == "y" and self.ode and self.peek().kind == "'":
                order = 0
                while self.peek().kind == "'":
                    self.take()
                    order += 1
                if order > 2:
                    raise ExprSyntaxError("derivatives above y'' are not supported", self.text, tok.pos, {"y", YP, YPP})
                return Var(YP if order == 1 else YPP)
            if name in self.names:
                return Var(name)
            raise ExprSyntaxError(f"unknown name {name!r}", self.text, tok.pos, {"x", "y"} | set(self.names) | set(FUNCTIONS))
        self.fail(_START)


def parse_expr(text: str, params: Iterable[str] = ()) -> Expr:
    """Parse an expression in ``x``, ``y`` and the declared parameter names.

    >>> str(parse_expr("exp(-2*x*y)"))
    'exp(-2*x*y)'
    """
    names = frozenset({"x", "y"}) | frozenset(params)
    return simplify(_Parser(text, names, ode=False).top())


# ---------------------------------------------------------------- ODEs


@dataclass(frozen=True)
class LieForm:
    """Coefficients of y'' + a y'^3 + b y'^2 + c y' + d = 0."""

    a: Expr
    b: Expr
    c: Expr
    d: Expr


@dataclass(frozen=True)
class QuadraticOde:
    """y'' + lambda2*y'^2 + lambda1*y' + lambda0 = 0 with coefficients in x, y."""

    lambda0: Expr
    lambda1: Expr
    lambda2: Expr
    source_text: str = ""

    @classmethod
    def from_coefficients(cls, lambda0, lambda1, lambda2, source_text: str = "") -> "QuadraticOde":
        l0, l1, l2 = (simplify(as_expr(v)) for v in (lambda0, lambda1, lambda2))
        return cls(l0, l1, l2, source_text or format_ode(l0, l1, l2))

    @property
    def lambdas(self) -> tuple:
        return (self.lambda0, self.lambda1, self.lambda2)

    def lie_form(self) -> LieForm:
        return LieForm(Const(0), self.lambda2, self.lambda1, self.lambda0)

    def rhs(self) -> Expr:
        """y'' as a function of x, y and y'."""
        yp = Var(YP)
        return simplify(
            Mul((Const(-1), Add((Mul((self.lambda2, yp, yp)), Mul((self.lambda1, yp)), self.lambda0))))
        )

    def to_text(self) -> str:
        return format_ode(*self.lambdas)


def format_ode(lambda0: Expr, lambda1: Expr, lambda2: Expr) -> str:
    parts = ["y''"]
    for coef, tail in ((lambda2, "*y'^2"), (lambda1, "*y'"), (lambda0, "")):
        if coef == Const(0):
            continue
        s = format_expr(coef)
        if tail:
            s = f"({s}){tail}"
        parts.append(s if not s.startswith("-") or tail else f"({s})")
    return " + ".join(parts) + " = 0"


def parse_ode(
    text: str,
    params: Optional[Mapping[str, object]] = None,
    cfg: ZeroTestConfig = DEFAULT_CONFIG,
) -> QuadraticOde:
    """Parse an ODE linear in y'' and at most quadratic in y'.

    ``params`` maps parameter names to numbers (or expression text) that
    are substituted before the coefficients are extracted.

    >>> ode = parse_ode("y'' + (1/y)*y'^2 + y*y' + 1/2 = 0")
    >>> [str(c) for c in (ode.lambda2, ode.lambda1, ode.lambda0)]
    ['1/y', 'y', '1/2']
    """
    params = dict(params or {})
    names = frozenset({"x", "y"}) | frozenset(params)
    tree = _Parser(text, names, ode=True).top()
    if params:
        tree = substitute_many(
            tree,
            {k: (parse_expr(v) if isinstance(v, str) else as_expr(v)) for k, v in params.items()},
        )
    try:
        coeffs = coefficients_in(tree, (YPP, YP))
    except NotPolynomialError as exc:
        if exc.name == YPP:
            raise NotSecondOrder("y'' must enter polynomially, outside functions and denominators") from None
        raise NotQuadraticInDerivative("y' must enter polynomially, outside functions and denominators") from None
    lead = {k: v for k, v in coeffs.items() if k[0] >= 1}
    if not lead:
        raise NotSecondOrder("y'' does not occur")
    if any(k[0] > 1 for k in lead):
        raise NotSecondOrder("y'' occurs nonlinearly")
    if set(lead) != {(1, 0)}:
        raise NotQuadraticInDerivative("the coefficient of y'' depends on y'")
    if any(k[1] > 2 for k in coeffs):
        raise NotQuadraticInDerivative("y' occurs with power above 2")
    A = lead[(1, 0)]
    if is_zero(A, cfg).is_zero:
        raise NotSecondOrder("the coefficient of y'' vanishes on the sampling box")
    ratios = coefficient_ratios(tree, (YPP, YP), (1, 0))
    lam = [ratios.get((0, k), Const(0)) for k in range(3)]
    return QuadraticOde(lam[0], lam[1], lam[2], text)


# ---------------------------------------------------------------- printing

_P_ADD, _P_MUL, _P_NEG, _P_POW, _P_ATOM = 1, 2, 3, 4, 5


def _is_negative(e: Expr) -> bool:
    if isinstance(e, Const):
        return e.value < 0
    if isinstance(e, Mul) and isinstance(e.factors[0], Const):
        return e.factors[0].value < 0
    return False


def _negate(e: Expr) -> Expr:
    if isinstance(e, Const):
        return Const(-e.value)
    first = e.factors[0]
    rest = e.factors[1:]
    if first.value == -1 and first.is_exact:
        return rest[0] if len(rest) == 1 else Mul(rest)
    return Mul((Const(-first.value),) + rest)


def _const_text(v) -> str:
    if isinstance(v, Fraction):
        return str(v.numerator) if v.denominator == 1 else f"{v.numerator}/{v.denominator}"
    return repr(float(v))


def _fmt(e: Expr):
    """(text, precedence) of ``e``."""
    if isinstance(e, Const):
        v = e.value
        if v < 0:
            return _const_text(v), _P_NEG
        if isinstance(v, Fraction) and v.denominator != 1:
            return _const_text(v), _P_MUL
        return _const_text(v), _P_ATOM
    if isinstance(e, Var):
        return e.name, _P_ATOM
    if isinstance(e, Func):
        return f"{e.name}({_fmt(e.arg)[0]})", _P_ATOM
    if isinstance(e, Add):
        out = []
        for i, t in enumerate(e.terms):
            if i and _is_negative(t):
                s, p = _fmt(_negate(t))
                out.append(" - " + (s if p > _P_ADD and p != _P_NEG else f"({s})"))
            else:
                s, p = _fmt(t)
                if i:
                    out.append(" + " + (s if p > _P_ADD and p != _P_NEG else f"({s})"))
                else:
                    out.append(s)
        return "".join(out), _P_ADD
    if _is_reciprocal(e):
        return _fmt(Mul((e,)))
    if isinstance(e, Pow):
        b, bp = _fmt(e.base)
        if bp <= _P_POW:
            b = f"({b})"
        x, xp = _fmt(e.exp)
        if xp < _P_ATOM:
            x = f"({x})"
        return f"{b}^{x}", _P_POW
    if isinstance(e, Mul):
        return _fmt_mul(e)
    raise TypeError(f"cannot format {e!r}")


def _is_reciprocal(e: Expr) -> bool:
    # 0^(-k) stays a literal power: moving it under a fraction bar would
    # let the printed denominator collapse to 0 before the division
    return (
        isinstance(e, Pow)
        and isinstance(e.exp, Const)
        and e.exp.value < 0
        and e.base != Const(0)
    )


def _factor_text(e: Expr) -> str:
    s, p = _fmt(e)
    return s if p > _P_MUL else f"({s})"


def _fmt_mul(e: Mul):
    sign = ""
    coef = None
    num, den = [], []
    for f in e.factors:
        if isinstance(f, Const) and coef is None and f is e.factors[0]:
            coef = f.value
            continue
        if _is_reciprocal(f):
            pos = -f.exp.value
            den.append(f.base if pos == 1 else Pow(f.base, Const(pos)))
        else:
            num.append(f)
    num_txt = [_factor_text(f) for f in num]
    den_txt = [_factor_text(f) for f in den]
    if coef is not None:
        if coef < 0:
            sign = "-"
            coef = -coef
        if isinstance(coef, Fraction):
            if coef.numerator != 1 or not num_txt:
                num_txt.insert(0, str(coef.numerator))
            if coef.denominator != 1:
                den_txt.insert(0, str(coef.denominator))
        else:
            num_txt.insert(0, repr(float(coef)))
    if not num_txt:
        num_txt = ["1"]
    text = "*".join(num_txt)
    if den_txt:
        d = den_txt[0] if len(den_txt) == 1 else "(" + "*".join(den_txt) + ")"
        text = f"{text}/{d}"
    return sign + text, (_P_NEG if sign else _P_MUL)


def format_expr(e: Expr) -> str:
    """Render ``e`` in the input grammar; ``parse_expr`` inverts it.

    >>> from gensundman.symcore import y, Const
    >>> format_expr(Const(-3) / 2), format_expr(y ** 3)
    ('-3/2', 'y^3')
    """
    return _fmt(as_expr(e))[0]
