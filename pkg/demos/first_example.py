"""
From a nonlinear equation to its linear image and back
=======================================================

y'' + y'^2/y + y y' + 1/2 = 0 is tested, a transformation is derived for
it, checked symbolically, and then checked again on numbers: a numerically
integrated solution is pushed through the map, and the general solution of
the linear image is carried back to y(x).
"""

import argparse

import numpy as np

from gensundman.parser import parse_ode
from gensundman.invariants import check_lie, check_sundman, derived_invariants
from gensundman.numverify import anchor_time, integrate_ode, residual_linear, sundman_map_trajectory, transport_solution
from gensundman.parser import format_expr
from gensundman.sundman import find_transform, linear_general_solution

ap = argparse.ArgumentParser(description=__doc__.strip().splitlines()[0])
ap.add_argument("--h", type=float, default=1e-3, help="integration step")
args = ap.parse_args()

ode = parse_ode("y'' + (1/y)*y'^2 + y*y' + 1/2 = 0")
print("equation:", ode.to_text())

inv = derived_invariants(ode)
for k in (3, 4, 5, 6):
    print(f"  lambda{k} = {format_expr(getattr(inv, f'lambda{k}'))}")

# the Sundman test succeeds where the point-transformation test does not
rep = check_sundman(ode)
print(f"\nSundman test: {rep.verdict.value}, case {rep.case}")
for c in rep.conditions:
    print(f"  [{c.verdict.tag.value}] {c.description}")
print("point-transformation test:", check_lie(ode).verdict.value)

res = find_transform(ode, rep.case)
T, target = res.transform, res.target
print(f"\nF = {format_expr(T.F)}, G = {format_expr(T.G)}")
print("linear image:", target)

# integrate y'' = ... from y(-4) = 2, y'(-4) = -1/4, i.e. along y = sqrt(-x)
traj = integrate_ode(ode, (-4.0, 2.0, -0.25), -0.25, h=args.h)
print(f"\nintegrated {len(traj.x) - 1} steps; max |y - sqrt(-x)| = {np.max(np.abs(traj.y - np.sqrt(-traj.x))):.2e}")
worst, i = residual_linear(sundman_map_trajectory(traj, T), target)
print(f"mapped residual of the linear image: {worst:.2e} (at x = {traj.x[i]:.3f})")

# and back: u0(t) with c1 = c2 = 0, anchored so that y(-4) = 2
sol = linear_general_solution(target)
print("\nu(t) =", format_expr(sol.u))
t0 = anchor_time(sol, T, (0.0, 0.0), -4.0, 2.0)
back = transport_solution(target, T, (0.0, 0.0), (-4.0, t0), -0.25, h=args.h, y_start=2.0, solution=sol)
print(f"anchor t0 = {t0:.12g}")
print(f"transported y vs sqrt(-x): max error {np.max(np.abs(back.y - np.sqrt(-back.x))):.2e}")
for j in range(0, len(back.x), len(back.x) // 6):
    print(f"  x = {back.x[j]: .4f}   y = {back.y[j]:.10f}   sqrt(-x) = {np.sqrt(-back.x[j]):.10f}")
