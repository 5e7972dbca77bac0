"""Canonical form: cancelled fractions of polynomials over transcendental atoms.

Every expression is mapped to ``num/den`` where both are polynomials whose
monomials are products of *atoms* (variables, ``ln``/``sin``/``cos``
applications, rational roots ``b^(1/q)``, opaque powers) times at most one
exponential ``exp(E)``.  Exponentials combine additively in their argument,
``exp(c*ln(u))`` releases ``u^c``, and ``root^q`` reduces to its base.  The
fraction is cancelled by a polynomial GCD in which every distinct
exponential is treated as an independent symbol.

The fraction is then rebuilt into a flat expression tree with a fixed order,
so that equal fractions give identical trees.
"""

from __future__ import annotations

import math
from fractions import Fraction
from functools import lru_cache
from typing import Optional

from . import _mpoly
from .expr import (
    ONE,
    ZERO,
    Add,
    Const,
    Expr,
    Func,
    Mul,
    Pow,
    Var,
    sort_key,
)

# A monomial is (atoms, exparg): atoms is a tuple of (atom, exponent>0) sorted
# by atom order, exparg is a canonical Expr or None.
UNIT = ((), None)


@lru_cache(maxsize=1 << 16)
def _skey(e: Expr) -> tuple:
    return sort_key(e)


def _mono_key(m) -> tuple:
    atoms, ea = m
    deg = sum(k for _, k in atoms)
    return (-deg, tuple((_skey(a), -k) for a, k in atoms), _skey(ea) if ea is not None else ())


def _is_exact(c) -> bool:
    return isinstance(c, Fraction)


class Poly:
    """Immutable sparse polynomial over atoms; ``terms`` maps monomial -> coefficient."""

    __slots__ = ("terms", "_hash")

    def __init__(self, terms: dict):
        object.__setattr__(self, "terms", {m: c for m, c in terms.items() if c != 0})
        object.__setattr__(self, "_hash", None)

    def __setattr__(self, name, value):
        raise AttributeError("Poly is immutable")

    def __eq__(self, other):
        return isinstance(other, Poly) and self.terms == other.terms

    def __hash__(self):
        h = self._hash
        if h is None:
            h = hash(frozenset(self.terms.items()))
            object.__setattr__(self, "_hash", h)
        return h

    @staticmethod
    def const(c) -> "Poly":
        return Poly({UNIT: c})

    @staticmethod
    def atom(a: Expr, k: int = 1) -> "Poly":
        return Poly({(((a, k),), None): Fraction(1)})

    @staticmethod
    def expo(arg: Expr) -> "Poly":
        return Poly({((), arg): Fraction(1)})

    def is_zero(self) -> bool:
        return not self.terms

    def const_value(self):
        """The coefficient if this is a constant polynomial, else None."""
        if not self.terms:
            return Fraction(0)
        if len(self.terms) == 1 and UNIT in self.terms:
            return self.terms[UNIT]
        return None

    def is_monomial(self) -> bool:
        return len(self.terms) == 1

    def sorted_terms(self):
        return sorted(self.terms.items(), key=lambda mc: _mono_key(mc[0]))

    def leading(self):
        return min(self.terms.items(), key=lambda mc: _mono_key(mc[0]))

    def exact(self) -> bool:
        return all(_is_exact(c) for c in self.terms.values())

    def __add__(self, other: "Poly") -> "Poly":
        out = dict(self.terms)
        for m, c in other.terms.items():
            out[m] = out.get(m, 0) + c
        return Poly(out)

    def __neg__(self) -> "Poly":
        return Poly({m: -c for m, c in self.terms.items()})

    def __sub__(self, other: "Poly") -> "Poly":
        return self + (-other)

    def scale(self, c) -> "Poly":
        return Poly({m: v * c for m, v in self.terms.items()})

    def __mul__(self, other: "Poly") -> "Poly":
        out: dict = {}
        for ma, ca in self.terms.items():
            for mb, cb in other.terms.items():
                m = _mono_mul(ma, mb)
                out[m] = out.get(m, 0) + ca * cb
        return Poly(out)

    def __pow__(self, n: int) -> "Poly":
        result = Poly.const(Fraction(1))
        base = self
        while n:
            if n & 1:
                result = result * base
            n >>= 1
            if n:
                base = base * base
        return result

    def atoms(self) -> set:
        return {a for m in self.terms for a, _ in m[0]}

    def expargs(self) -> set:
        return {m[1] for m in self.terms if m[1] is not None}


def _mono_mul(ma, mb):
    atoms_a, ea = ma
    atoms_b, eb = mb
    if not atoms_b:
        atoms = atoms_a
    elif not atoms_a:
        atoms = atoms_b
    else:
        d = dict(atoms_a)
        for a, k in atoms_b:
            d[a] = d.get(a, 0) + k
        atoms = tuple(sorted(((a, k) for a, k in d.items() if k), key=lambda ak: _skey(ak[0])))
    if ea is None:
        e = eb
    elif eb is None:
        e = ea
    else:
        e = _exp_sum(ea, eb)
    return (atoms, e)


@lru_cache(maxsize=1 << 14)
def _exp_sum(a: Expr, b: Expr):
    s = canonical(Add((a, b)))
    return None if s == ZERO else s


@lru_cache(maxsize=1 << 14)
def _exp_neg(a: Expr) -> Expr:
    return canonical(Mul((Const(-1), a)))


class Frac:
    """Normalized ``num/den``.  Build through :func:`make_frac`."""

    __slots__ = ("num", "den")

    def __init__(self, num: Poly, den: Poly):
        object.__setattr__(self, "num", num)
        object.__setattr__(self, "den", den)

    def __setattr__(self, name, value):
        raise AttributeError("Frac is immutable")

    def __eq__(self, other):
        return isinstance(other, Frac) and self.num == other.num and self.den == other.den

    def __hash__(self):
        return hash((self.num, self.den))

    def const_value(self):
        if self.den.const_value() is None:
            return None
        n = self.num.const_value()
        return None if n is None else n / self.den.const_value()

    def is_zero(self) -> bool:
        return self.num.is_zero()

    def __add__(self, other: "Frac") -> "Frac":
        if self.den == other.den:
            return make_frac(self.num + other.num, self.den)
        return make_frac(self.num * other.den + other.num * self.den, self.den * other.den)

    def __neg__(self) -> "Frac":
        return Frac(-self.num, self.den)

    def __mul__(self, other: "Frac") -> "Frac":
        return make_frac(self.num * other.num, self.den * other.den)

    def inverse(self) -> "Frac":
        if self.num.is_zero():
            raise ZeroDivisionError("inverse of zero")
        return make_frac(self.den, self.num)

    def __pow__(self, n: int) -> "Frac":
        if n < 0:
            return self.inverse() ** (-n)
        return make_frac(self.num**n, self.den**n)


def frac_const(c) -> Frac:
    return Frac(Poly.const(c), Poly.const(Fraction(1)))


def frac_poly(p: Poly) -> Frac:
    return make_frac(p, Poly.const(Fraction(1)))


# ---------------------------------------------------------------- normalization


def _is_root_atom(a: Expr) -> bool:
    return (
        isinstance(a, Pow)
        and isinstance(a.exp, Const)
        and a.exp.is_exact
        and a.exp.value.numerator == 1
        and a.exp.value.denominator > 1
    )


def _reduce_roots_poly(p: Poly):
    """Rewrite root^e with e >= q; returns None when nothing changes."""
    hit = False
    for m in p.terms:
        for a, k in m[0]:
            if _is_root_atom(a) and k >= a.exp.value.denominator:
                hit = True
                break
        if hit:
            break
    if not hit:
        return None
    total = frac_const(Fraction(0))
    for (atoms, ea), c in p.terms.items():
        kept = []
        extra = []
        for a, k in atoms:
            if _is_root_atom(a) and k >= a.exp.value.denominator:
                q = a.exp.value.denominator
                whole, rest = divmod(k, q)
                if rest:
                    kept.append((a, rest))
                extra.append(frac_of(a.base) ** whole)
            else:
                kept.append((a, k))
        term = Frac(Poly({(tuple(kept), ea): c}), Poly.const(Fraction(1)))
        for f in extra:
            term = term * f
        total = total + term
    return total


def _common_root_factor(den: Poly):
    """Root-atom monomial that clears the root factors shared by every term of ``den``."""
    common = None
    for atoms, _ in den.terms:
        here = {a: k for a, k in atoms if _is_root_atom(a)}
        common = here if common is None else {a: min(k, here[a]) for a, k in common.items() if a in here}
        if not common:
            return None
    out = Poly.const(Fraction(1))
    for a in sorted(common, key=_skey):
        rest = common[a] % a.exp.value.denominator
        if rest:
            out = out * Poly.atom(a, a.exp.value.denominator - rest)
    return None if out.const_value() == 1 else out


def _exp_shift_choice(den: Poly):
    """Exponential to divide out so the leading denominator monomial is exp-free.

    Ties between monomials with identical atoms are broken in a way that does
    not depend on a common exponential factor, keeping the result stable
    under re-normalization.
    """
    lead_m, _ = den.leading()
    lead_atoms = lead_m[0]
    group = [m[1] for m in den.terms if m[0] == lead_atoms]
    if all(e is None for e in group) or len(group) == 1:
        return group[0] if len(group) == 1 else None
    best = None
    best_key = None
    for cand in group:
        shifted = []
        for e in group:
            if e == cand:
                shifted.append(())
            elif cand is None:
                shifted.append(_skey(e))
            elif e is None:
                shifted.append(_skey(_exp_neg(cand)))
            else:
                s = _exp_sum(e, _exp_neg(cand))
                shifted.append(_skey(s) if s is not None else ())
        key = tuple(sorted(shifted))
        if best_key is None or key < best_key:
            best, best_key = cand, key
    return best


def _atom_content(num: Poly, den: Poly):
    mins: dict = {}
    first = True
    for p in (num, den):
        for m in p.terms:
            d = dict(m[0])
            if first:
                mins = d
                first = False
            else:
                mins = {a: min(k, d[a]) for a, k in mins.items() if a in d}
            if not mins:
                return num, den
    if not mins:
        return num, den

    def strip(p: Poly) -> Poly:
        out = {}
        for (atoms, ea), c in p.terms.items():
            new = tuple((a, k - mins.get(a, 0)) for a, k in atoms if k - mins.get(a, 0))
            out[(new, ea)] = c
        return Poly(out)

    return strip(num), strip(den)


def _to_mpoly(p: Poly, index: dict, n: int) -> dict:
    out = {}
    for (atoms, ea), c in p.terms.items():
        m = [0] * n
        for a, k in atoms:
            m[index[("a", a)]] = k
        if ea is not None:
            m[index[("e", ea)]] = 1
        out[tuple(m)] = c
    return out


def _from_mpoly(mp: dict, symbols: list) -> Poly:
    out: dict = {}
    for m, c in mp.items():
        atoms = []
        ea = None
        for (kind, obj), k in zip(symbols, m):
            if not k:
                continue
            if kind == "a":
                atoms.append((obj, k))
            else:
                for _ in range(k):
                    ea = obj if ea is None else _exp_sum(ea, obj)
        atoms.sort(key=lambda ak: _skey(ak[0]))
        key = (tuple(atoms), ea)
        out[key] = out.get(key, 0) + c
    return Poly(out)


def _cancel_gcd(num: Poly, den: Poly):
    symbols = [("a", a) for a in sorted(num.atoms() | den.atoms(), key=_skey)]
    symbols += [("e", e) for e in sorted(num.expargs() | den.expargs(), key=_skey)]
    if not symbols:
        return num, den
    index = {s: i for i, s in enumerate(symbols)}
    n = len(symbols)
    a = _to_mpoly(num, index, n)
    b = _to_mpoly(den, index, n)
    if _mpoly.coprime(a, b):
        return num, den
    try:
        g = _mpoly.gcd(a, b)
    except _mpoly.GcdTooLarge:
        return num, den
    if len(g) == 1 and not any(next(iter(g))):
        return num, den
    return _from_mpoly(_mpoly.divexact(a, g), symbols), _from_mpoly(_mpoly.divexact(b, g), symbols)


def _proportional(num: Poly, den: Poly):
    """``c`` with ``num == c * den`` term by term, or None (no gcd for floats)."""
    if num.terms.keys() != den.terms.keys():
        return None
    _, ln_ = num.leading()
    _, ld = den.leading()
    c = ln_ / ld
    if all(num.terms[m] == c * d for m, d in den.terms.items()):
        return c
    return None


def make_frac(num: Poly, den: Poly) -> Frac:
    if den.is_zero():
        raise ZeroDivisionError("zero denominator")
    if num.is_zero():
        return Frac(Poly({}), Poly.const(Fraction(1)))
    for _ in range(8):
        rn = _reduce_roots_poly(num)
        rd = _reduce_roots_poly(den)
        if rn is None and rd is None:
            # keep shared roots out of the denominator so that the printed
            # form a/b^(1/q) normalizes back to the same fraction
            clear = _common_root_factor(den)
            if clear is None:
                break
            num, den = num * clear, den * clear
            continue
        fn = rn if rn is not None else frac_poly_raw(num)
        fd = rd if rd is not None else frac_poly_raw(den)
        num = fn.num * fd.den
        den = fn.den * fd.num
        if den.is_zero():
            raise ZeroDivisionError("zero denominator")
        if num.is_zero():
            return Frac(Poly({}), Poly.const(Fraction(1)))
    shift = _exp_shift_choice(den)
    if shift is not None:
        u = Poly.expo(_exp_neg(shift))
        num, den = num * u, den * u
    num, den = _atom_content(num, den)
    dc = den.const_value()
    if dc is not None:
        return Frac(num.scale(1 / dc) if _is_exact(dc) else num.scale(1.0 / dc), Poly.const(Fraction(1)))
    if num.exact() and den.exact():
        num, den = _cancel_gcd(num, den)
        dc = den.const_value()
        if dc is not None:
            return Frac(num.scale(1 / dc), Poly.const(Fraction(1)))
    else:
        ratio = _proportional(num, den)
        if ratio is not None:
            return frac_const(ratio)
    _, lc = den.leading()
    inv = 1 / lc if _is_exact(lc) else 1.0 / lc
    return Frac(num.scale(inv), den.scale(inv))


def frac_poly_raw(p: Poly) -> Frac:
    return Frac(p, Poly.const(Fraction(1)))


# ---------------------------------------------------------------- Expr -> Frac


def _exact_root(c: Fraction, q: int):
    """``c**(1/q)`` when it is rational, else None."""
    if c < 0:
        return None
    out = []
    for part in (c.numerator, c.denominator):
        r = round(part ** (1.0 / q)) if part else 0
        for cand in (r - 1, r, r + 1):
            if cand >= 0 and cand**q == part:
                out.append(cand)
                break
        else:
            return None
    return Fraction(out[0], out[1])


def _opaque(base: Expr, ex: Expr) -> Frac:
    return frac_poly(Poly.atom(Pow(base, ex)))


def _as_root_power(B: Frac):
    """``(root, k)`` when ``B`` is exactly ``root**k`` for a single root atom."""
    if B.den.const_value() != 1 or not B.num.is_monomial():
        return None
    (atoms, ea), c = next(iter(B.num.terms.items()))
    if c != 1 or ea is not None or len(atoms) != 1 or not _is_root_atom(atoms[0][0]):
        return None
    return atoms[0]


def _frac_pow(base: Expr, ex: Expr) -> Frac:
    E = frac_of(ex)
    ev = E.const_value()
    B = frac_of(base)
    if ev is None or not _is_exact(ev):
        bexpr = to_expr(B)
        eexpr = to_expr(E)
        bv = B.const_value()
        if ev is not None and bv is not None and bv > 0:
            return frac_const(float(bv) ** ev)
        return _opaque(bexpr, eexpr)
    if ev.denominator == 1:
        n = int(ev)
        if n < 0 and B.is_zero():
            return _opaque(ZERO, Const(ev))
        if n == 0:
            return frac_const(Fraction(1))
        return B ** n
    p, q = ev.numerator, ev.denominator
    bv = B.const_value()
    if bv is not None:
        if bv == 0:
            return frac_const(Fraction(0)) if p > 0 else _opaque(ZERO, Const(ev))
        if not _is_exact(bv):
            if bv > 0:
                return frac_const(bv ** float(ev))
            return _opaque(Const(bv), Const(ev))
        r = _exact_root(bv, q)
        if r is not None:
            return frac_const(r**p) if p >= 0 else frac_const(1 / r ** (-p))
    nested = _as_root_power(B)
    if nested is not None:
        inner, k = nested
        return _frac_pow(inner.base, Const(ev * Fraction(k, inner.exp.value.denominator)))
    whole, rest = divmod(p, q)
    root = Pow(to_expr(B), Const(Fraction(1, q)))
    out = frac_poly(Poly.atom(root, rest))
    if whole:
        out = out * (B ** whole)
    return out


def _ln_coefficient_split(E: Frac):
    """Split an exp argument into ``{u: c}`` for terms ``c*ln(u)`` and the remainder."""
    if E.den.const_value() is None:
        return {}, E
    logs = {}
    rest = {}
    for m, c in E.num.terms.items():
        atoms, ea = m
        if (
            ea is None
            and len(atoms) == 1
            and atoms[0][1] == 1
            and isinstance(atoms[0][0], Func)
            and atoms[0][0].name == "ln"
            and _is_exact(c)
        ):
            logs[atoms[0][0].arg] = c
        else:
            rest[m] = c
    return logs, make_frac(Poly(rest), E.den) if rest else frac_const(Fraction(0))


def _frac_func(name: str, arg: Expr) -> Frac:
    A = frac_of(arg)
    if name == "sqrt":
        return _frac_pow(to_expr(A), Const(Fraction(1, 2)))
    av = A.const_value()
    if name == "exp":
        if av is not None and av == 0:
            return frac_const(Fraction(1))
        logs, rest = _ln_coefficient_split(A)
        out = frac_const(Fraction(1))
        for u in sorted(logs, key=_skey):
            out = out * _frac_pow(u, Const(logs[u]))
        if not rest.is_zero():
            if not _is_exact_frac(rest) and rest.const_value() is not None:
                out = out * frac_const(math.exp(rest.const_value()))
            else:
                out = out * frac_poly(Poly.expo(to_expr(rest)))
        return out
    if name == "ln":
        if av is not None and av == 1:
            return frac_const(Fraction(0))
        if av is not None and not _is_exact(av) and av > 0:
            return frac_const(math.log(av))
        if A.den.const_value() == 1 and A.num.is_monomial():
            (atoms, ea), c = next(iter(A.num.terms.items()))
            if not atoms and ea is not None and c == 1:
                return frac_of(ea)
        return frac_poly(Poly.atom(Func("ln", to_expr(A))))
    # sin / cos
    if av is not None and av == 0:
        return frac_const(Fraction(0) if name == "sin" else Fraction(1))
    if av is not None and not _is_exact(av):
        return frac_const(math.sin(av) if name == "sin" else math.cos(av))
    return frac_poly(Poly.atom(Func(name, to_expr(A))))


def _is_exact_frac(F: Frac) -> bool:
    return F.num.exact() and F.den.exact()


@lru_cache(maxsize=1 << 15)
def frac_of(e: Expr) -> Frac:
    """Normalized fraction for an arbitrary expression."""
    if isinstance(e, Const):
        return frac_const(e.value)
    if isinstance(e, Var):
        return frac_poly(Poly.atom(e))
    if isinstance(e, Add):
        acc = frac_of(e.terms[0])
        for t in e.terms[1:]:
            acc = acc + frac_of(t)
        return acc
    if isinstance(e, Mul):
        acc = frac_of(e.factors[0])
        for f in e.factors[1:]:
            if acc.is_zero():
                break
            acc = acc * frac_of(f)
        return acc
    if isinstance(e, Pow):
        return _frac_pow(e.base, e.exp)
    if isinstance(e, Func):
        return _frac_func(e.name, e.arg)
    raise TypeError(f"not an expression: {e!r}")


# ---------------------------------------------------------------- Frac -> Expr


def _atom_power(a: Expr, k) -> Expr:
    """``a**k`` for an atom, folding root atoms into a rational exponent."""
    if _is_root_atom(a):
        q = a.exp.value.denominator
        return Pow(a.base, Const(Fraction(k, q)))
    if k == 1:
        return a
    return Pow(a, Const(Fraction(k)))


def _signed_factors(atoms_num, atoms_den):
    """Factors for a monomial quotient, merging roots of variables with the variable."""
    expo: dict = {}
    order: list = []

    def put(a, k):
        if _is_root_atom(a) and isinstance(a.base, Var):
            key = a.base
            val = Fraction(k, a.exp.value.denominator)
        else:
            key = a
            val = None
        if key not in expo:
            expo[key] = [Fraction(0), None]
            order.append(key)
        if val is None:
            if isinstance(key, Var):
                expo[key][0] += k
            else:
                expo[key][1] = (expo[key][1] or 0) + k
        else:
            expo[key][0] += val

    for a, k in atoms_num:
        put(a, k)
    for a, k in atoms_den:
        put(a, -k)
    out = []
    for key in sorted(order, key=_skey):
        val, count = expo[key]
        if count is not None:
            if count:
                out.append(_atom_power(key, count) if count > 0 else _neg_atom_power(key, count))
            continue
        if val == 0:
            continue
        if isinstance(key, Var):
            out.append(key if val == 1 else Pow(key, Const(val)))
        else:
            out.append(_atom_power(key, val))
    return out


def _neg_atom_power(a: Expr, k: int) -> Expr:
    if _is_root_atom(a):
        return Pow(a.base, Const(Fraction(k, a.exp.value.denominator)))
    return Pow(a, Const(Fraction(k)))


def _term_expr(c, mono, den_atoms=()) -> Expr:
    atoms, ea = mono
    factors = _signed_factors(atoms, den_atoms)
    if ea is not None:
        factors.append(Func("exp", ea))
    if c != 1 or not factors:
        factors.insert(0, Const(c))
    return factors[0] if len(factors) == 1 else Mul(factors)


def _poly_expr(p: Poly) -> Expr:
    if p.is_zero():
        return ZERO
    terms = [_term_expr(c, m) for m, c in p.sorted_terms()]
    return terms[0] if len(terms) == 1 else Add(terms)


def to_expr(F: Frac) -> Expr:
    """Canonical expression tree for a normalized fraction."""
    dv = F.den.const_value()
    if dv is not None:
        if dv == 1:
            return _poly_expr(F.num)
        return _poly_expr(F.num.scale(1 / dv))
    if F.den.is_monomial():
        (den_atoms, _), _ = next(iter(F.den.terms.items()))
        if F.num.is_monomial():
            m, c = next(iter(F.num.terms.items()))
            return _term_expr(c, m, den_atoms)
        factors = [_poly_expr(F.num)] + _signed_factors((), den_atoms)
        return Mul(factors)
    inv = Pow(_poly_expr(F.den), Const(-1))
    if F.num.is_monomial():
        m, c = next(iter(F.num.terms.items()))
        t = _term_expr(c, m)
        factors = list(t.factors) if isinstance(t, Mul) else [t]
        if factors == [ONE]:
            return inv
        return Mul(factors + [inv])
    return Mul((_poly_expr(F.num), inv))


@lru_cache(maxsize=1 << 15)
def canonical(e: Expr) -> Expr:
    return to_expr(frac_of(e))


class NotPolynomialError(ValueError):
    """``name`` occurs inside a function, a denominator or a non-integer power."""

    def __init__(self, name: str):
        super().__init__(f"{name!r} does not enter polynomially")
        self.name = name


def _mentions(e: Expr, names) -> Optional[str]:
    from .expr import free_vars

    hit = free_vars(e) & set(names)
    return min(hit) if hit else None


def _coefficient_groups(e: Expr, names: tuple):
    F = frac_of(e)
    for atoms, ea in F.den.terms:
        for a, _ in atoms:
            bad = _mentions(a, names)
            if bad:
                raise NotPolynomialError(bad)
        if ea is not None and _mentions(ea, names):
            raise NotPolynomialError(_mentions(ea, names))
    groups: dict = {}
    for (atoms, ea), c in F.num.terms.items():
        key = [0] * len(names)
        rest = []
        for a, k in atoms:
            if isinstance(a, Var) and a.name in names:
                key[names.index(a.name)] = k
                continue
            bad = _mentions(a, names)
            if bad:
                raise NotPolynomialError(bad)
            rest.append((a, k))
        if ea is not None and _mentions(ea, names):
            raise NotPolynomialError(_mentions(ea, names))
        groups.setdefault(tuple(key), {})[(tuple(rest), ea)] = c
    return {k: Poly(v) for k, v in groups.items()}, F.den


def coefficients_in(e: Expr, names) -> dict:
    """Coefficients of ``e`` as a polynomial in the variables ``names``.

    Keys are exponent tuples aligned with ``names``; values are canonical
    expressions free of those variables.
    """
    groups, den = _coefficient_groups(e, tuple(names))
    return {k: to_expr(make_frac(v, den)) for k, v in groups.items()}


def _top_terms(e: Expr):
    if isinstance(e, Add):
        for t in e.terms:
            yield from _top_terms(t)
    else:
        yield e


def coefficient_ratios(e: Expr, names, lead: tuple) -> dict:
    """Coefficients as in :func:`coefficients_in`, each divided by the one at ``lead``.

    Coefficients are accumulated term by term rather than over the common
    denominator of all of ``e``: with float literals no gcd is taken, so a
    shared denominator would never cancel back out.
    """
    names = tuple(names)
    sums: dict = {}
    for t in _top_terms(e):
        groups, den = _coefficient_groups(t, names)
        for k, v in groups.items():
            f = make_frac(v, den)
            sums[k] = sums[k] + f if k in sums else f
    sums = {k: f for k, f in sums.items() if not f.is_zero()}
    if lead not in sums:
        raise ZeroDivisionError("leading coefficient is zero")
    inv = sums[lead].inverse()
    return {k: to_expr(f * inv) for k, f in sums.items()}
