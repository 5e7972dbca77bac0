"""
A family of power-law equations
===============================

y'' + m3 y^k3 y'^2 + m2 y^k2 y' + m1 y^k1 = 0.  With m3 = 0 and
m1 = m2 = 1 the test decides linearizability through the product
(2 k2 + 1 - k1)(k2 - k1); the script scans a grid of exponents and
prints the verdict next to that product, then shows the targets of a
few members.
"""

import argparse

from gensundman.parser import parse_ode
from gensundman.invariants import check_dms, check_lie, check_sundman
from gensundman.parser import format_expr
from gensundman.sundman import find_transform

FAMILY = "y'' + m3*y^k3*y'^2 + m2*y^k2*y' + m1*y^k1 = 0"


def member(m1, m2, m3, k1, k2, k3):
    return parse_ode(FAMILY, params=dict(m1=m1, m2=m2, m3=m3, k1=k1, k2=k2, k3=k3))


ap = argparse.ArgumentParser(description=__doc__.strip().splitlines()[0])
ap.add_argument("--kmax", type=int, default=4, help="largest exponent in the scan")
args = ap.parse_args()

print(" k2  k1   product   verdict")
for k2 in range(1, args.kmax):
    for k1 in range(0, args.kmax + 3):
        r = check_sundman(member(1, 1, 0, k1, k2, 0))
        prod = (2 * k2 + 1 - k1) * (k2 - k1)
        print(f"{k2:3d} {k1:3d} {prod:9d}   {r.verdict.value}")

print()
for label, ode in [
    ("y'' + y y'^2 + y y' = 0", member(0, 1, 1, 0, 1, 1)),
    ("y'' + y y' + y^3 = 0", member(1, 1, 0, 3, 1, 0)),
    ("y'' + 3 y y' + y^3 = 0", parse_ode("y'' + 3*y*y' + y^3 = 0")),
]:
    rep = check_sundman(ode)
    res = find_transform(ode, rep.case)
    print(label)
    print(f"  case {rep.case}: F = {format_expr(res.transform.F)}, G = {format_expr(res.transform.G)}, image {res.target}")
    print(f"  point-transformation test: {check_lie(ode).verdict.value}; u'' = 0 test: {check_dms(ode).verdict.value}")
