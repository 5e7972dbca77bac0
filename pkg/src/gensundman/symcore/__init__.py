"""Symbolic kernel: expressions in x, y (plus named parameters) over Q.

>>> from gensundman.symcore import x, y, exp, diff
>>> str(diff(exp(-2 * x * y), "x"))
'-2*y*exp(-2*x*y)'
"""

from .calculus import antiderivative, diff, simplify, substitute, substitute_many
from .canon import canonical
from .evaluate import DomainError, compile_expr, eval_expr
from .expr import (
    FUNCTIONS,
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
    cos,
    exp,
    free_vars,
    has_float,
    ln,
    sin,
    sqrt,
    x,
    y,
)
from .zerotest import (
    DEFAULT_CONFIG,
    ConstantVerdict,
    ZeroTag,
    ZeroTestConfig,
    ZeroVerdict,
    is_constant,
    is_zero,
)

__all__ = [
    "FUNCTIONS", "HALF", "MINUS_ONE", "ONE", "ZERO",
    "Add", "Const", "Expr", "Func", "Mul", "Pow", "Var",
    "as_expr", "cos", "exp", "free_vars", "has_float", "ln", "sin", "sqrt", "x", "y",
    "antiderivative", "canonical", "diff", "simplify", "substitute", "substitute_many",
    "DomainError", "compile_expr", "eval_expr",
    "DEFAULT_CONFIG", "ConstantVerdict", "ZeroTag", "ZeroTestConfig", "ZeroVerdict",
    "is_constant", "is_zero",
]
