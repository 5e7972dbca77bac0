"""Sparse multivariate polynomials over Q and their GCD.

A polynomial is a dict mapping exponent tuples (all of one length) to
nonzero ``Fraction`` coefficients.  The GCD uses the recursive primitive
polynomial remainder sequence; inputs here are small, so no modular tricks.
"""

from __future__ import annotations

from fractions import Fraction

MPoly = dict

# intermediate size past which the remainder sequence gives up
MAX_TERMS = 300
MAX_BITS = 4000


class GcdTooLarge(ArithmeticError):
    """The remainder sequence outgrew ``MAX_TERMS`` or ``MAX_BITS``."""


def _clean(p: MPoly) -> MPoly:
    return {m: c for m, c in p.items() if c != 0}


def add(a: MPoly, b: MPoly) -> MPoly:
    out = dict(a)
    for m, c in b.items():
        v = out.get(m, 0) + c
        if v == 0:
            out.pop(m, None)
        else:
            out[m] = v
    return out


def sub(a: MPoly, b: MPoly) -> MPoly:
    return add(a, {m: -c for m, c in b.items()})


def mul(a: MPoly, b: MPoly) -> MPoly:
    out: MPoly = {}
    for ma, ca in a.items():
        for mb, cb in b.items():
            m = tuple(i + j for i, j in zip(ma, mb))
            out[m] = out.get(m, 0) + ca * cb
    return _clean(out)


def scale(a: MPoly, c) -> MPoly:
    if c == 0:
        return {}
    return {m: v * c for m, v in a.items()}


def const(c, n: int) -> MPoly:
    return {(0,) * n: Fraction(c)} if c != 0 else {}


def leading(p: MPoly):
    """Lexicographically largest monomial and its coefficient."""
    m = max(p)
    return m, p[m]


def monic(p: MPoly) -> MPoly:
    if not p:
        return p
    _, c = leading(p)
    return scale(p, 1 / Fraction(c))


def divexact(a: MPoly, b: MPoly) -> MPoly:
    """Quotient ``a / b``; raises ``ArithmeticError`` when ``b`` does not divide ``a``."""
    if not b:
        raise ZeroDivisionError("polynomial division by zero")
    mb, cb = leading(b)
    q: MPoly = {}
    r = dict(a)
    while r:
        mr, cr = leading(r)
        if any(i < j for i, j in zip(mr, mb)):
            raise ArithmeticError("inexact polynomial division")
        mq = tuple(i - j for i, j in zip(mr, mb))
        cq = Fraction(cr) / cb
        q[mq] = q.get(mq, 0) + cq
        r = sub(r, mul({mq: cq}, b))
    return _clean(q)


def degree(p: MPoly, v: int) -> int:
    return max((m[v] for m in p), default=-1)


def coeffs_in(p: MPoly, v: int) -> dict:
    """Split ``p`` by powers of variable ``v``; coefficients have ``v``-exponent 0."""
    out: dict = {}
    for m, c in p.items():
        k = m[v]
        mm = m[:v] + (0,) + m[v + 1 :]
        out.setdefault(k, {})[mm] = c
    return out


def _var_power(v: int, k: int, n: int) -> MPoly:
    m = [0] * n
    m[v] = k
    return {tuple(m): Fraction(1)}


def _occurring(p: MPoly) -> set:
    return {i for m in p for i, e in enumerate(m) if e}


def content(p: MPoly, v: int) -> MPoly:
    g: MPoly = {}
    for c in coeffs_in(p, v).values():
        g = gcd(g, c)
        if len(g) == 1 and not any(next(iter(g))):
            break
    return g


def prem(a: MPoly, b: MPoly, v: int) -> MPoly:
    n = len(next(iter(b)))
    db = degree(b, v)
    lcb = coeffs_in(b, v)[db]
    r = a
    while r and degree(r, v) >= db:
        dr = degree(r, v)
        lcr = coeffs_in(r, v)[dr]
        r = sub(mul(lcb, r), mul(mul(lcr, _var_power(v, dr - db, n)), b))
        _check_size(r)
    return r


def _check_size(p: MPoly) -> None:
    if len(p) > MAX_TERMS:
        raise GcdTooLarge("too many terms")
    for c in p.values():
        c = Fraction(c)
        if c.numerator.bit_length() + c.denominator.bit_length() > MAX_BITS:
            raise GcdTooLarge("coefficients too large")


def _univariate_image(p: MPoly, v: int, point) -> dict:
    out: dict = {}
    for m, c in p.items():
        val = Fraction(c)
        for i, e in enumerate(m):
            if i != v and e:
                val *= point[i] ** e
        out[m[v]] = out.get(m[v], 0) + val
    return {k: c for k, c in out.items() if c != 0}


def _ugcd_degree(a: dict, b: dict) -> int:
    while b:
        db, lb = max(b.items())
        r = dict(a)
        while r and max(r) >= db:
            dr, lr = max(r.items())
            q = lr / lb
            for k, c in b.items():
                val = r.get(k + dr - db, 0) - q * c
                if val:
                    r[k + dr - db] = val
                else:
                    r.pop(k + dr - db, None)
        a, b = b, r
    return max(a)


_POINTS = ((3, 5, 7, 11, 13, 17, 19, 23, 29, 31), (-2, 9, -4, 15, 8, -6, 21, 10, -12, 25))


def coprime(a: MPoly, b: MPoly) -> bool:
    """True only when ``gcd(a, b)`` is certainly constant.

    For each variable the others are replaced by integers at which the
    leading coefficients survive; the degree of the image gcd then bounds
    the degree of the true gcd in that variable.
    """
    n = len(next(iter(a)))
    if n > len(_POINTS[0]):
        return False
    for v in sorted(_occurring(a) & _occurring(b)):
        da, db = degree(a, v), degree(b, v)
        for pts in _POINTS:
            ia, ib = _univariate_image(a, v, pts), _univariate_image(b, v, pts)
            if ia and ib and max(ia) == da and max(ib) == db:
                if _ugcd_degree(ia, ib) > 0:
                    return False
                break
        else:
            return False
    return True


def gcd(a: MPoly, b: MPoly) -> MPoly:
    """Monic greatest common divisor (``{}`` only when both inputs are zero)."""
    if not a:
        return monic(b)
    if not b:
        return monic(a)
    n = len(next(iter(a)))
    occ = _occurring(a) | _occurring(b)
    if not occ:
        return const(1, n)
    v = min(occ)
    if degree(a, v) == 0 or degree(b, v) == 0:
        # v cannot divide the gcd; gcd of b with all v-coefficients of a
        g = b if degree(b, v) == 0 else a
        other = a if g is b else b
        for c in coeffs_in(other, v).values():
            g = gcd(g, c)
            if len(g) == 1 and not any(next(iter(g))):
                break
        return monic(g)
    ca, cb = content(a, v), content(b, v)
    c = gcd(ca, cb)
    pa, pb = divexact(a, ca), divexact(b, cb)
    if degree(pa, v) < degree(pb, v):
        pa, pb = pb, pa
    while pb:
        r = prem(pa, pb, v)
        _check_size(r)
        pa = pb
        pb = monic(divexact(r, content(r, v))) if r else {}
    g = monic(divexact(pa, content(pa, v)))
    return monic(mul(c, g))
