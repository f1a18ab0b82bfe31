"""A first-order term, removed by an integrating factor.

-u'' + u' = 1 on (0, 1), u(0) = 0, u'(1) = 0.  Multiplying by
rho(x) = exp(-x) gives the self-adjoint form -(rho u')' = rho, which the
weak Galerkin solver handles directly.
"""

import numpy as np

from weakfem1d import GeneralProblem, gauss_rule, solve, to_self_adjoint, uniform_mesh
from weakfem1d.oracles import reference_solve

one = lambda x: np.ones_like(np.asarray(x, dtype=float))  # noqa: E731
zero = lambda x: np.zeros_like(np.asarray(x, dtype=float))  # noqa: E731

g = GeneralProblem(0.0, 1.0, a1=one, a2=one, a0=zero, f=one, a_min=1.0)
p, rho = to_self_adjoint(g)
print("rho(1) =", float(rho(np.array(1.0))), " exp(-1) =", np.exp(-1))

# closed form, for comparison: u = x - e^(x-1) ... shifted so u(0) = 0
exact = lambda x: x + np.exp(-1.0) - np.exp(x - 1.0)  # noqa: E731
ref = reference_solve(g)
xs = np.linspace(0, 1, 11)
print("collocation reference vs closed form:", np.max(np.abs(ref(xs) - exact(xs))))

for k in (0, 1, 2):
    errs = []
    for n in (4, 8, 16, 32):
        mesh = uniform_mesh(0, 1, n)
        u_h = solve(p, mesh, k).u_h
        tot = 0.0
        for piece, e in zip(u_h.interior_pieces(), mesh.elements()):
            x, w = gauss_rule(k + 6).mapped(*e)
            tot += w @ (exact(x) - piece(x)) ** 2
        errs.append(np.sqrt(tot))
    errs = np.array(errs)
    print(f"k={k}  L2 errors {errs}  rates {np.log2(errs[:-1] / errs[1:])}")
