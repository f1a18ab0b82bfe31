"""The three projections, and the a priori bound on the discrete solution."""

import numpy as np

from weakfem1d import Mesh1D, get_problem, project_Ph, project_Qh, solve, stability_check, uniform_mesh

p, m = get_problem("paper-5.6")
mesh = uniform_mesh(0, 1, 8)

# Q_h u: elementwise L2 projection of u into P_k, plus the exact node values.
qu = project_Qh(m.u, 1, mesh)
print("Q_h u node values match u:", np.allclose(qu.node_values, m.u(mesh.nodes)))

# The commuting property: d_w (Q_h u) is the projection of u' onto P_r.
x = np.linspace(0, 1, 801)[1:-1]
dqu = qu.weak_derivative()
vals = np.concatenate([dqu[i](x[(x > a) & (x <= b)]) for i, (a, b) in enumerate(mesh.elements())])
print("max |d_w Q_h u - u'| on a fine grid (approximation error, h = 1/8):", np.max(np.abs(vals - m.u_prime(x))))
ph = project_Ph(m.u_prime, 2, mesh)
print("P_h u' agrees with it:", np.allclose([c.coeffs for c in ph.pieces], [c.coeffs for c in dqu]))

# ||u_h^0|| + ||d_w u_h|| <= 2((b - a) + 1)^2 / a_min ||f||, on any mesh.
rng = np.random.default_rng(7)
for trial in range(5):
    nodes = np.sort(np.concatenate([[0.0, 1.0], rng.uniform(0, 1, 10)]))
    sol = solve(p, Mesh1D(nodes), 2)
    st = stability_check(sol, p)
    print(f"random mesh {trial}: lhs {st.lhs:.6f}  bound {st.rhs:.3f}  holds {st.holds}")
