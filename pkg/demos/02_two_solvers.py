"""The same discrete solution, two ways.

``method="global"`` assembles the symmetric banded system and factors it.
``method="sweep"`` never forms a global matrix: it starts at the free end
x = 1 and solves one small block per element, moving left.
"""

import numpy as np

from weakfem1d import get_problem, solve, solve_sweep, uniform_mesh

p, m = get_problem("paper-5.6")

for k in (0, 1, 2, 3):
    mesh = uniform_mesh(0, 1, 32)
    g = solve(p, mesh, k, method="global")
    s = solve(p, mesh, k, method="sweep")
    diff = np.max(np.abs(g.u_h.to_vector() - s.u_h.to_vector()))
    print(f"k={k}  max dof difference {diff:.1e}   u(0) from sweep {s.diagnostics['emergent_u1']:+.1e}")

# The sweep never imposes u(0) = 0; it comes out of the computation.
# The last element leaves one free direction, and an integrated form of the
# ODE was the original way to fix it.  That closure holds for the exact
# solution but only approximately for the discrete one.  Its pivot also
# shrinks fast under refinement (about 64x per halving for k = 1), so the
# small inconsistency is blown up into a large error at x = 0.  The default
# sweep instead picks the free direction that makes u(0) vanish.
for n in (4, 8, 16, 32):
    mesh = uniform_mesh(0, 1, n)
    lit = solve_sweep(p, mesh, 1, closure="literal")
    d = lit.diagnostics
    print(f"n={n:3d}  pivot {d['closure_pivot']:.2e}  u(0) with literal closure {d['emergent_u1']:+.2e}")

# With a0 = 0 the pivot is exactly zero (up to rounding) and the literal
# closure cannot be used at all.
p0, _ = get_problem("paper-5.6-a0zero")
try:
    solve_sweep(p0, uniform_mesh(0, 1, 8), 1, closure="literal")
except np.linalg.LinAlgError as exc:
    print("a0 = 0, literal closure:", exc)
print("a0 = 0, default sweep u(0):", solve(p0, uniform_mesh(0, 1, 8), 1, method="sweep").diagnostics["emergent_u1"])
