"""Linearization of y'' + l2*y'^2 + l1*y' + l0 = 0 by generalized Sundman transformations.

Decides linearizability (restricted to u = F(y), dt = G(x, y) dx), builds
the transformation and the constant-coefficient target u'' + b*u' + a*u = c,
and checks the result numerically.
"""

__version__ = "0.1.0"
