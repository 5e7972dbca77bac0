"""Immutable expression trees.

Nodes are plain value objects: structural equality, cached hashes, no
simplification at construction time.  Arithmetic operators build raw trees;
call :func:`gensundman.symcore.simplify` to reach canonical form.
"""

from __future__ import annotations

from fractions import Fraction
from typing import Iterable, Union

FUNCTIONS = ("exp", "ln", "sin", "cos", "sqrt")

Number = Union[Fraction, float]


class Expr:
    __slots__ = ("_hash",)

    # subclasses define _key() -> tuple used for equality and hashing

    def __eq__(self, other):
        if self is other:
            return True
        if not isinstance(other, Expr) or type(self) is not type(other):
            return False
        if self._hash != other._hash:
            return False
        return self._key() == other._key()

    def __hash__(self):
        return self._hash

    def __setattr__(self, name, value):
        raise AttributeError("Expr nodes are immutable")

    def _init_hash(self):
        object.__setattr__(self, "_hash", hash((type(self).__name__,) + self._key()))

    # arithmetic builds raw trees
    def __add__(self, other):
        return Add((self, as_expr(other)))

    def __radd__(self, other):
        return Add((as_expr(other), self))

    def __sub__(self, other):
        return Add((self, Mul((MINUS_ONE, as_expr(other)))))

    def __rsub__(self, other):
        return Add((as_expr(other), Mul((MINUS_ONE, self))))

    def __neg__(self):
        return Mul((MINUS_ONE, self))

    def __mul__(self, other):
        return Mul((self, as_expr(other)))

    def __rmul__(self, other):
        return Mul((as_expr(other), self))

    def __truediv__(self, other):
        return Mul((self, Pow(as_expr(other), MINUS_ONE)))

    def __rtruediv__(self, other):
        return Mul((as_expr(other), Pow(self, MINUS_ONE)))

    def __pow__(self, other):
        return Pow(self, as_expr(other))

    def __rpow__(self, other):
        return Pow(as_expr(other), self)

    def __str__(self):
        from ..parser import format_expr

        return format_expr(self)

    @property
    def children(self) -> tuple:
        return ()


class Const(Expr):
    """Numeric literal: exact ``Fraction`` or a user-supplied real ``float``."""

    __slots__ = ("value",)

    def __init__(self, value):
        if isinstance(value, bool):
            raise TypeError("bool is not a numeric constant")
        if isinstance(value, int):
            value = Fraction(value)
        elif not isinstance(value, (Fraction, float)):
            raise TypeError(f"unsupported constant {value!r}")
        object.__setattr__(self, "value", value)
        self._init_hash()

    def _key(self):
        return (isinstance(self.value, float), self.value)

    @property
    def is_exact(self) -> bool:
        return isinstance(self.value, Fraction)

    def __repr__(self):
        return f"Const({self.value})"


class Var(Expr):
    __slots__ = ("name",)

    def __init__(self, name: str):
        object.__setattr__(self, "name", name)
        self._init_hash()

    def _key(self):
        return (self.name,)

    def __repr__(self):
        return f"Var({self.name!r})"


class Add(Expr):
    __slots__ = ("terms",)

    def __init__(self, terms: Iterable[Expr]):
        terms = tuple(terms)
        if not terms:
            raise ValueError("empty sum")
        object.__setattr__(self, "terms", terms)
        self._init_hash()

    def _key(self):
        return self.terms

    @property
    def children(self):
        return self.terms

    def __repr__(self):
        return f"Add({list(self.terms)!r})"


class Mul(Expr):
    __slots__ = ("factors",)

    def __init__(self, factors: Iterable[Expr]):
        factors = tuple(factors)
        if not factors:
            raise ValueError("empty product")
        object.__setattr__(self, "factors", factors)
        self._init_hash()

    def _key(self):
        return self.factors

    @property
    def children(self):
        return self.factors

    def __repr__(self):
        return f"Mul({list(self.factors)!r})"


class Pow(Expr):
    __slots__ = ("base", "exp")

    def __init__(self, base: Expr, exp: Expr):
        object.__setattr__(self, "base", base)
        object.__setattr__(self, "exp", exp)
        self._init_hash()

    def _key(self):
        return (self.base, self.exp)

    @property
    def children(self):
        return (self.base, self.exp)

    def __repr__(self):
        return f"Pow({self.base!r}, {self.exp!r})"


class Func(Expr):
    __slots__ = ("name", "arg")

    def __init__(self, name: str, arg: Expr):
        if name not in FUNCTIONS:
            raise ValueError(f"unknown function {name!r}")
        object.__setattr__(self, "name", name)
        object.__setattr__(self, "arg", arg)
        self._init_hash()

    def _key(self):
        return (self.name, self.arg)

    @property
    def children(self):
        return (self.arg,)

    def __repr__(self):
        return f"Func({self.name!r}, {self.arg!r})"


ZERO = Const(0)
ONE = Const(1)
MINUS_ONE = Const(-1)
HALF = Const(Fraction(1, 2))

x = Var("x")
y = Var("y")


def as_expr(value) -> Expr:
    if isinstance(value, Expr):
        return value
    if isinstance(value, str):
        return Var(value)
    return Const(value)


def exp(a) -> Expr:
    return Func("exp", as_expr(a))


def ln(a) -> Expr:
    return Func("ln", as_expr(a))


def sin(a) -> Expr:
    return Func("sin", as_expr(a))


def cos(a) -> Expr:
    return Func("cos", as_expr(a))


def sqrt(a) -> Expr:
    return Func("sqrt", as_expr(a))


def free_vars(e: Expr) -> frozenset:
    """Names of all variables occurring in ``e``."""
    out = set()
    stack = [e]
    while stack:
        node = stack.pop()
        if isinstance(node, Var):
            out.add(node.name)
        else:
            stack.extend(node.children)
    return frozenset(out)


def has_float(e: Expr) -> bool:
    stack = [e]
    while stack:
        node = stack.pop()
        if isinstance(node, Const) and not node.is_exact:
            return True
        stack.extend(node.children)
    return False


def sort_key(e: Expr) -> tuple:
    """Total order on expressions: kind first, then contents.

    ``x`` sorts before ``y`` before any other variable name.
    """
    if isinstance(e, Const):
        v = e.value
        return (0, float(v), 0 if isinstance(v, Fraction) else 1, str(v))
    if isinstance(e, Var):
        rank = {"x": 0, "y": 1}.get(e.name, 2)
        return (1, rank, e.name)
    if isinstance(e, Pow):
        return (2, sort_key(e.base), sort_key(e.exp))
    if isinstance(e, Func):
        return (3, e.name, sort_key(e.arg))
    if isinstance(e, Mul):
        return (4, tuple(sort_key(f) for f in e.factors))
    return (5, tuple(sort_key(t) for t in e.terms))
