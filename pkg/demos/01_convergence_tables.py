"""Convergence of the weak Galerkin solution for k = 0, 1, 2.

Test problem: -((1 + x^2) u')' + sin(pi x) u = f on (0, 1), u(0) = 0,
u'(1) = 0, with exact solution u = 2(1 - x) sin(pi x).
"""

from weakfem1d import convergence_study

levels = [4, 8, 16, 32, 64]

for k in (0, 1, 2):
    rep = convergence_study("paper-5.6", k, levels)
    print(f"k = {k}")
    print(rep.to_markdown())

# The H1 column drops like h^(k+1).  The L2 column measures u_h^0 against
# the elementwise projection of u, and it gains one more order (h^(k+2)).
# Nodal values are better still: 2, 4 and 6 for k = 0, 1, 2.
rep = convergence_study("paper-5.6", 1, levels)
print("k = 1 node rates:", [round(r, 3) for r in rep.rate_column(2) if r is not None])

# For k = 2 the nodal error hits roundoff before h = 1/64.  Rates below the
# floor are left out rather than reported as noise.
rep = convergence_study("paper-5.6", 2, levels)
print("k = 2 node errors:", rep.column("nodal_max"))
print("k = 2 node rates: ", rep.rate_column(2))
