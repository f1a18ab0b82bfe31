import numpy as np
import pytest

from weakfem1d.analysis import rate
from weakfem1d.mesh import Mesh1D, bisect, uniform_mesh
from weakfem1d.problem import get_problem
from weakfem1d.projections import project_Ph, project_pih, project_Qh
from weakfem1d.quadrature import ElementBasis, gauss_rule, project_onto_basis
from weakfem1d.weak_space import DofMap, GlobalWeakFunction

_, SOL = get_problem("paper-5.6")
U, DU = SOL.u, SOL.u_prime


def l2_error(fn, proj, mesh, n=12):
    tot = 0.0
    for e in mesh.elements():
        x, w = gauss_rule(n).mapped(*e)
        tot += float(w @ (fn(x) - proj(x)) ** 2)
    return np.sqrt(tot)


def test_Ph_examples():
    mesh = Mesh1D([0, 0.3, 1])
    p = np.polynomial.Polynomial([1, -2, 3])
    x = np.linspace(0, 1, 17)
    np.testing.assert_allclose(project_Ph(p, 2, mesh)(x), p(x), atol=1e-13)
    single = uniform_mesh(0, 1, 1)
    np.testing.assert_allclose(project_Ph(lambda x: x**2, 1, single)(x), x - 1 / 6, atol=1e-14)
    assert project_Ph(lambda x: x, 0, single)(np.array([0.3])) == pytest.approx(0.5, abs=1e-15)


def test_Ph_orthogonality():
    mesh = Mesh1D([0, 0.2, 0.7, 1])
    for l in range(4):
        proj = project_Ph(np.exp, l, mesh, n_q=12)
        for e in mesh.elements():
            x, w = gauss_rule(12).mapped(*e)
            V = ElementBasis(l, *e).values(x)
            assert np.max(np.abs(V @ (w * (np.exp(x) - proj(x))))) <= 1e-12


def test_Qh_examples():
    mesh = uniform_mesh(0, 1, 3)
    q = project_Qh(lambda x: x * (x - 2), 2, mesh)
    for i, e in enumerate(mesh.elements()):
        xs = np.linspace(*e, 4)
        np.testing.assert_allclose(q.local(i).interior(xs), xs * (xs - 2), atol=1e-13)
    np.testing.assert_allclose(q.node_values, mesh.nodes * (mesh.nodes - 2), atol=1e-15)
    q = project_Qh(lambda x: x**2, 0, uniform_mesh(0, 1, 2))
    np.testing.assert_allclose(q.node_values, [0, 0.25, 1], atol=1e-15)
    means = [piece(np.array([piece.basis.xl])) for piece in q.interior_pieces()]
    np.testing.assert_allclose(np.ravel(means), [1 / 12, 7 / 12], atol=1e-15)


def test_Qh_rejects_nonzero_left():
    with pytest.raises(ValueError):
        project_Qh(lambda x: x + 1, 1, uniform_mesh(0, 1, 2))


@pytest.mark.parametrize("k", [0, 1, 2])
def test_weak_derivative_of_Qh_is_projection_of_derivative(k):
    for mesh in (uniform_mesh(0, 1, 8), Mesh1D([0, 0.1, 0.45, 0.5, 1.0])):
        q = project_Qh(U, k, mesh, n_q=k + 10)
        for d, e in zip(q.weak_derivative(), mesh.elements()):
            ref = project_onto_basis(DU, ElementBasis(k + 1, *e), n_q=k + 10)
            assert np.max(np.abs(d.coeffs - ref.coeffs)) <= 1e-12


def test_pih_examples():
    mesh = uniform_mesh(0, 1, 1)
    x = np.linspace(0, 1, 9)
    np.testing.assert_allclose(project_pih(lambda x: x**3, 1, mesh)(x), 1.5 * x**2 - 0.5 * x, atol=1e-14)
    w = np.polynomial.Polynomial([0.2, 1, -1, 2])
    m4 = Mesh1D([0, 0.3, 0.5, 1])
    np.testing.assert_allclose(project_pih(w, 2, m4)(x), w(x), atol=1e-13)
    np.testing.assert_allclose(project_pih(w, 2, m4, w_prime=w.deriv())(x), w(x), atol=1e-13)


def test_pih_continuity():
    mesh = uniform_mesh(0, 1, 4)
    for k in range(3):
        pi = project_pih(np.sin, k, mesh)
        for i in range(1, mesh.n_nodes - 1):
            xi = mesh.nodes[i]
            left, right = pi.pieces[i - 1](np.array(xi)), pi.pieces[i](np.array(xi))
            assert abs(left - right) <= 1e-13
            assert abs(right - np.sin(xi)) <= 1e-13


@pytest.mark.parametrize("k", [0, 1, 2])
def test_projection_rates(k):
    meshes = [uniform_mesh(0, 1, 8)]
    for _ in range(2):
        meshes.append(bisect(meshes[-1]))
    e_ph, e_q, e_pi = [], [], []
    for mesh in meshes:
        e_ph.append(l2_error(U, project_Ph(U, k, mesh), mesh))
        q = project_Qh(U, k, mesh, n_q=k + 8)
        tot = 0.0
        for d, e in zip(q.weak_derivative(), mesh.elements()):
            x, w = gauss_rule(12).mapped(*e)
            tot += float(w @ (d(x) - DU(x)) ** 2)
        e_q.append(np.sqrt(tot))
        e_pi.append(l2_error(U, project_pih(U, k, mesh), mesh))
    for e, target in ((e_ph, k + 1), (e_q, k + 2), (e_pi, k + 2)):
        for a, b in zip(e, e[1:]):
            assert rate(a, b) >= target - 0.2


@pytest.mark.parametrize("k", [0, 1])
def test_exact_solution_discrete_identity(k):
    # (pi_h(a2 u'), d_w v)_h + (a0 u, v0) = (f, v0) for every basis v of S_h,
    # up to quadrature error in (a0 u, v0) and (f, v0)
    p, m = get_problem("paper-5.6")
    mesh = uniform_mesh(0, 1, 4)
    dm = DofMap(mesh, k)
    flux = lambda x: p.a2(x) * m.u_prime(x)  # noqa: E731
    flux_prime = lambda x: p.a2_prime(x) * m.u_prime(x) + p.a2(x) * m.u_double_prime(x)  # noqa: E731
    pi = project_pih(flux, k, mesh, n_q=k + 10, w_prime=flux_prime)
    worst = {}
    for n_q in (k + 4, k + 8):
        res = []
        for g in range(dm.dimension):
            z = np.zeros(dm.dimension)
            z[g] = 1.0
            v = GlobalWeakFunction.from_vector(dm, z)
            total = 0.0
            for i, (d, v0, e) in enumerate(zip(v.weak_derivative(), v.interior_pieces(), mesh.elements())):
                x, w = gauss_rule(n_q).mapped(*e)
                total += float(w @ (pi.pieces[i](x) * d(x) + p.a0(x) * m.u(x) * v0(x) - p.f(x) * v0(x)))
            res.append(total)
        worst[n_q] = np.max(np.abs(res))
    assert worst[k + 8] < worst[k + 4]
    assert worst[k + 8] <= 1e-10
