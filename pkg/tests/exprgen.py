"""Random expression trees for property tests (depth <= 5)."""

import random
from fractions import Fraction

from hypothesis import strategies as st

from gensundman.symcore import Const, Var, cos, exp, ln, sin, sqrt

VARS = ("x", "y")
_UNARY = ("exp", "ln", "sin", "cos", "sqrt", "neg")
_BINARY = ("+", "-", "*", "/", "^")


def _leaf(r: random.Random):
    k = r.random()
    if k < 0.55:
        return Var(r.choice(VARS))
    if k < 0.9:
        return Const(Fraction(r.randint(-5, 5), r.choice((1, 1, 2, 3))))
    return Const(round(r.uniform(-3, 3), 2))


def _wrap(name, a):
    if name == "exp":
        return exp(a)
    if name == "ln":
        # keep the argument positive on the sampling box
        return ln(1 + a * a)
    if name == "sin":
        return sin(a)
    if name == "cos":
        return cos(a)
    if name == "sqrt":
        return sqrt(2 + a * a)
    return -a


def random_expr(r: random.Random, depth: int = 5):
    if depth <= 0 or r.random() < 0.25:
        return _leaf(r)
    if r.random() < 0.3:
        return _wrap(r.choice(_UNARY), random_expr(r, depth - 1))
    op = r.choice(_BINARY)
    a = random_expr(r, depth - 1)
    if op == "^":
        return a ** Const(r.choice((2, 3, -1, -2, Fraction(1, 2))))
    b = random_expr(r, depth - 1)
    if op == "+":
        return a + b
    if op == "-":
        return a - b
    if op == "*":
        return a * b
    return a / b


@st.composite
def expressions(draw, max_depth: int = 5):
    seed = draw(st.integers(min_value=0, max_value=2**32 - 1))
    depth = draw(st.integers(min_value=1, max_value=max_depth))
    return random_expr(random.Random(seed), depth)


def subtrees(e):
    yield e
    for c in e.children:
        yield from subtrees(c)


def scale_at(e, point) -> float:
    """Largest |value| over all subtrees at ``point``; inf when any is undefined.

    Samples with a large scale are ill-conditioned for floating point
    comparison (cancellation of huge terms), so property tests skip them.
    """
    from gensundman.symcore import DomainError, eval_expr

    worst = 0.0
    for s in subtrees(e):
        try:
            v = eval_expr(s, point)
        except DomainError:
            return float("inf")
        worst = max(worst, abs(v))
    return worst
