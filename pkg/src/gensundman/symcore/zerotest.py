"""Zero-equivalence and constancy decisions.

Symbolic proof first (canonical form is the constant 0); otherwise the
expression is sampled at seeded random points of a box.  Accept and reject
thresholds are separated by a dead zone that yields ``INDETERMINATE``.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Mapping, Optional

import numpy as np

from .calculus import diff, simplify
from .expr import ZERO, Add, Const, Expr, as_expr, free_vars
from .evaluate import DomainError, compile_expr

DEFAULT_INTERVAL = (0.3, 2.7)


@dataclass(frozen=True)
class ZeroTestConfig:
    """Sampling box and tolerances for :func:`is_zero`.

    ``box`` maps variable names to closed intervals; variables not listed use
    ``default_interval``.
    """

    box: Mapping[str, tuple] = field(default_factory=lambda: {"x": DEFAULT_INTERVAL, "y": DEFAULT_INTERVAL})
    default_interval: tuple = DEFAULT_INTERVAL
    eps_abs: float = 1e-9
    eps_rel: float = 1e-9
    reject: float = 1e-6
    samples: int = 32
    min_valid: int = 8
    max_draws: int = 512
    seed: int = 20100615

    def interval(self, name: str) -> tuple:
        return tuple(self.box.get(name, self.default_interval))

    def center(self, names) -> dict:
        """Exact midpoint of the box for each variable name."""
        out = {}
        for n in names:
            lo, hi = self.interval(n)
            # decimal reading of float bounds, so 0.3 counts as 3/10
            out[n] = (Fraction(repr(lo)) + Fraction(repr(hi))) / 2
        return out

    def __post_init__(self):
        for name, (lo, hi) in dict(self.box).items():
            if not hi > lo:
                raise ValueError(f"empty sampling interval for {name}: ({lo}, {hi})")
        if self.eps_abs > self.reject:
            raise ValueError("eps_abs must not exceed the reject threshold")


DEFAULT_CONFIG = ZeroTestConfig()


class ZeroTag(enum.Enum):
    PROVED_ZERO = "ProvedZero"
    NUMERICALLY_ZERO = "NumericallyZero"
    NONZERO = "NonZero"
    INDETERMINATE = "Indeterminate"


@dataclass(frozen=True)
class ZeroVerdict:
    tag: ZeroTag
    samples: int = 0
    max_abs: float = 0.0
    witness: Optional[dict] = None
    value: Optional[float] = None
    seed: Optional[int] = None

    @property
    def is_zero(self) -> bool:
        return self.tag in (ZeroTag.PROVED_ZERO, ZeroTag.NUMERICALLY_ZERO)

    @property
    def is_nonzero(self) -> bool:
        return self.tag is ZeroTag.NONZERO

    @property
    def is_indeterminate(self) -> bool:
        return self.tag is ZeroTag.INDETERMINATE

    def to_dict(self) -> dict:
        d = {"status": self.tag.value, "samples": self.samples, "max_abs": self.max_abs, "seed": self.seed}
        if self.witness is not None:
            d["witness"] = {k: float(v) for k, v in self.witness.items()}
            d["value"] = self.value
        return d


def _magnitude_parts(e: Expr):
    """Closures whose absolute values sum to the local magnitude of ``e``."""
    terms = e.terms if isinstance(e, Add) else (e,)
    return [compile_expr(t) for t in terms]


def is_zero(e, cfg: ZeroTestConfig = DEFAULT_CONFIG, seed: Optional[int] = None) -> ZeroVerdict:
    """Decide whether ``e`` vanishes identically on the sampling box.

    A sample counts as nonzero when ``|value| > reject * max(1, magnitude)``,
    where the magnitude is the sum of absolute values of the top-level terms
    of ``e`` (the size of what cancels).  It counts as zero when
    ``|value| <= eps_abs + eps_rel * magnitude``.
    """
    e = as_expr(e)
    seed = cfg.seed if seed is None else seed
    if simplify(e) == ZERO:
        return ZeroVerdict(ZeroTag.PROVED_ZERO, seed=seed)
    names = sorted(free_vars(e))
    f = compile_expr(e)
    parts = _magnitude_parts(e)
    rng = np.random.default_rng(seed)
    lows = np.array([cfg.interval(n)[0] for n in names], dtype=float)
    highs = np.array([cfg.interval(n)[1] for n in names], dtype=float)
    valid = 0
    max_abs = 0.0
    undecided = False
    draws = 0
    while valid < cfg.samples and draws < cfg.max_draws:
        draws += 1
        point = rng.uniform(lows, highs) if names else np.zeros(0)
        env = {n: float(v) for n, v in zip(names, point)}
        try:
            v = f(env)
            mag = math.fsum(abs(p(env)) for p in parts)
        except DomainError:
            continue
        valid += 1
        a = abs(v)
        max_abs = max(max_abs, a)
        if a > cfg.reject * max(1.0, mag):
            return ZeroVerdict(ZeroTag.NONZERO, valid, max_abs, env, v, seed)
        if a > cfg.eps_abs + cfg.eps_rel * mag:
            undecided = True
        if not names:
            break
    if valid < cfg.min_valid and names:
        return ZeroVerdict(ZeroTag.INDETERMINATE, valid, max_abs, seed=seed)
    if undecided:
        return ZeroVerdict(ZeroTag.INDETERMINATE, valid, max_abs, seed=seed)
    return ZeroVerdict(ZeroTag.NUMERICALLY_ZERO, valid, max_abs, seed=seed)


@dataclass(frozen=True)
class ConstantVerdict:
    """Outcome of :func:`is_constant`; ``constant`` is None when undecided."""

    constant: Optional[bool]
    value: Optional[object] = None
    derivative_verdicts: dict = field(default_factory=dict)
    witness_var: Optional[str] = None

    @property
    def exact(self) -> bool:
        return isinstance(self.value, Fraction)


def is_constant(e, wrt=("x", "y"), cfg: ZeroTestConfig = DEFAULT_CONFIG, seed: Optional[int] = None) -> ConstantVerdict:
    """Decide whether ``e`` is constant in the variables ``wrt``.

    The value is exact when the canonical form is a rational constant,
    otherwise the expression evaluated at the box center.
    """
    e = simplify(e)
    verdicts = {}
    for v in wrt:
        verdicts[v] = is_zero(diff(e, v), cfg, seed)
    for v, z in verdicts.items():
        if z.is_nonzero:
            return ConstantVerdict(False, None, verdicts, v)
    if any(z.is_indeterminate for z in verdicts.values()):
        return ConstantVerdict(None, None, verdicts)
    if isinstance(e, Const):
        return ConstantVerdict(True, e.value, verdicts)
    center = {k: float(v) for k, v in cfg.center(free_vars(e)).items()}
    return ConstantVerdict(True, compile_expr(e)(center), verdicts)
