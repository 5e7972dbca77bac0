"""
An equation that is not linearizable
====================================

y'' + y'^2 + y' + y = 0 falls in the lambda3 = 0 branch.  The test
reports which condition breaks, where it was sampled and by how much.
"""

from gensundman.parser import parse_ode
from gensundman.invariants import check_sundman, derived_invariants
from gensundman.parser import format_expr
from gensundman.symcore import simplify

ode = parse_ode("y'' + y'^2 + y' + y = 0")
inv = derived_invariants(ode)
print("lambda3 =", format_expr(inv.lambda3), " lambda4 =", format_expr(inv.lambda4), " lambda6 =", format_expr(inv.lambda6))

rep = check_sundman(ode)
print(f"\nverdict: {rep.verdict.value}, case {rep.case}")
for c in rep.conditions:
    print(f"  [{c.verdict.tag.value}] {c.description}")
    if c.verdict.is_nonzero:
        print(f"      left side {format_expr(simplify(c.lhs))}, required {format_expr(simplify(c.rhs))}")
        print(f"      witness {c.verdict.witness}, residual there {c.raw_value_at_witness():g}")
print("seed:", rep.seed)
