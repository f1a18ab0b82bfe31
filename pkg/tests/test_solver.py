from fractions import Fraction

import numpy as np
import pytest

from weakfem1d.analysis import errors
from weakfem1d.mesh import Mesh1D, uniform_mesh
from weakfem1d.problem import REGISTRY, Problem, get_problem
from weakfem1d.solver import (
    AssemblyError,
    _closure_row,
    assemble_global,
    galerkin_residual,
    solve,
    solve_global,
    solve_sweep,
    stability_check,
)
from weakfem1d.weak_space import broken_norm


def one(x):
    return np.ones_like(np.asarray(x, dtype=float))


def zero(x):
    return np.zeros_like(np.asarray(x, dtype=float))


def variable_problem(seed):
    rng = np.random.default_rng(seed)
    c = rng.uniform(0.2, 1.0, 3)
    return Problem(0.0, 1.0, lambda x: 1 + c[0] * np.sin(3 * x) ** 2, lambda x: c[1] * np.exp(x),
                   lambda x: np.cos(5 * c[2] * x), a_min=1.0)


def test_dimension_and_bandwidth():
    p, _ = get_problem("paper-5.6")
    sys = assemble_global(p, uniform_mesh(0, 1, 4), 1)
    assert sys.matrix().shape == (12, 12) and sys.rhs.shape == (12,)
    assert sys.bandwidth == 3
    K = sys.matrix()
    i, j = np.nonzero(K)
    assert np.max(np.abs(i - j)) <= sys.bandwidth


@pytest.mark.parametrize("seed", range(5))
def test_symmetry(seed):
    rng = np.random.default_rng(seed)
    nodes = np.concatenate([[0], np.sort(rng.uniform(0.05, 0.95, 5)), [1]])
    K = assemble_global(variable_problem(seed), Mesh1D(nodes), int(rng.integers(0, 3))).matrix()
    assert np.max(np.abs(K - K.T)) <= 1e-12


def test_single_element_hand_assembly():
    # a2 = 1, a0 = 0, k = 0, r = 1 on (0, 1); unknowns (c0, u_R), u_L = 0
    M = [[Fraction(1), Fraction(1, 2)], [Fraction(1, 2), Fraction(1, 3)]]
    Minv = [[Fraction(4), Fraction(-6)], [Fraction(-6), Fraction(12)]]
    AB = [[Fraction(0), Fraction(1)], [Fraction(-1), Fraction(1)]]  # columns: V0, v_R
    D = [[sum(Minv[i][l] * AB[l][j] for l in range(2)) for j in range(2)] for i in range(2)]
    K = [[sum(D[a][i] * M[a][b] * D[b][j] for a in range(2) for b in range(2)) for j in range(2)] for i in range(2)]
    p = Problem(0, 1, one, zero, one, 1.0)
    got = assemble_global(p, uniform_mesh(0, 1, 1), 0).matrix()
    # orthonormal c0 equals the monomial V0 on a unit element
    np.testing.assert_allclose(got, np.array(K, dtype=float), atol=1e-13)
    assert K == [[12, -6], [-6, 4]]


def test_zero_source_gives_zero():
    p = get_problem("paper-5.6")[0].with_source(zero)
    for method in ("global", "sweep"):
        sol = solve(p, uniform_mesh(0, 1, 6), 2, method=method)
        assert np.all(sol.u_h.to_vector() == 0)
        st = stability_check(sol, p)
        assert st.lhs == 0 and st.rhs == 0 and st.holds


@pytest.mark.parametrize("n", [1, 2, 3, 4, 7, 16])
def test_polynomial_exactness(n):
    p, m = get_problem("poisson-quadratic")
    for method in ("global", "sweep"):
        sol = solve(p, uniform_mesh(0, 1, n), 2, method=method)
        e = errors(sol, m)
        assert max(e.h1_broken, e.l2, e.nodal_max, e.l2_exact) <= 1e-11


def test_published_single_value():
    p, m = get_problem("paper-5.6")
    e = errors(solve(p, uniform_mesh(0, 1, 8), 0), m)
    assert e.l2 == pytest.approx(0.0131, abs=0.00005)


def test_relative_residual_and_diagnostics():
    p, _ = get_problem("paper-5.6")
    sol = solve(p, uniform_mesh(0, 1, 32), 2)
    d = sol.diagnostics
    assert d["factorization"] == "banded-cholesky" and d["bandwidth"] == 4
    assert d["relative_residual"] <= 1e-12
    assert sol.u_h.node_values[0] == 0.0


def test_dense_fallback_matches_banded():
    p = variable_problem(1)
    sys = assemble_global(p, uniform_mesh(0, 1, 6), 2)
    a = solve_global(sys).u_h.to_vector()
    b = solve_global(sys, dense=True).u_h.to_vector()
    np.testing.assert_allclose(a, b, atol=1e-13)


def test_non_spd_rejected():
    p = Problem(0, 1, lambda x: -one(x), zero, one, 1.0)
    with pytest.raises(AssemblyError):
        solve_global(assemble_global(p, uniform_mesh(0, 1, 4), 1))


def test_nonfinite_coefficient_rejected():
    p = Problem(0, 1, one, lambda x: 1 / (x - 0.5), one, 1.0)
    with pytest.raises(ValueError), np.errstate(divide="ignore"):
        assemble_global(p, uniform_mesh(0, 1, 1), 0, n_q=1)


@pytest.mark.parametrize("key", sorted(REGISTRY))
@pytest.mark.parametrize("k", [0, 1, 2, 3])
@pytest.mark.parametrize("n", [4, 8, 16])
def test_method_equivalence(key, k, n):
    p, _ = get_problem(key)
    mesh = uniform_mesh(0, 1, n)
    g = solve(p, mesh, k, method="global")
    s = solve(p, mesh, k, method="sweep")
    assert np.max(np.abs(g.u_h.to_vector() - s.u_h.to_vector())) <= 1e-10
    u1 = s.diagnostics["emergent_u1"]
    assert abs(u1) <= 1e-9 * broken_norm(s.u_h.interior_pieces())


@pytest.mark.parametrize("seed", range(3))
def test_method_equivalence_nonuniform(seed):
    rng = np.random.default_rng(seed)
    nodes = np.concatenate([[0], np.sort(rng.uniform(0.05, 0.95, 9)), [1]])
    p = variable_problem(seed)
    for k in range(3):
        g = solve(p, Mesh1D(nodes), k)
        s = solve(p, Mesh1D(nodes), k, method="sweep")
        assert np.max(np.abs(g.u_h.to_vector() - s.u_h.to_vector())) <= 1e-10


def test_closure_row_sanity():
    # -u'' = 2 on (0, 1): int_{0.5}^1 int_x^1 2 dy dx = 0.25 = u(1) - u(0.5)
    p = Problem(0, 1, one, zero, lambda x: 2 * one(x), 1.0)
    row, rhs = _closure_row(p, (0.5, 1.0), 1, 5)
    assert rhs == pytest.approx(0.25, abs=1e-15)
    np.testing.assert_allclose(row, [0, 0, -1, 1], atol=1e-15)
    _, m = get_problem("poisson-quadratic")
    assert m.u(np.array(1.0)) - m.u(np.array(0.5)) == 0.25


def test_literal_closure_mode():
    p, _ = get_problem("paper-5.6")
    mesh = uniform_mesh(0, 1, 4)
    lit = solve_sweep(p, mesh, 0, closure="literal")
    cor = solve_sweep(p, mesh, 0)
    assert lit.diagnostics["closure"] == "literal"
    # the literal mode sweeps the closure solution, so its u^1 is the defect
    assert lit.diagnostics["closure_defect"] == pytest.approx(lit.diagnostics["emergent_u1"], rel=1e-8)
    # the literal closure does not reproduce the Dirichlet value, the corrected one does
    assert abs(cor.diagnostics["emergent_u1"]) <= 1e-12
    assert abs(lit.diagnostics["closure_defect"]) > 1e-6
    with pytest.raises(np.linalg.LinAlgError):
        solve_sweep(get_problem("paper-5.6-a0zero")[0], mesh, 0, closure="literal")
    with pytest.raises(ValueError):
        solve_sweep(p, mesh, 0, closure="other")


def test_unknown_method():
    p, _ = get_problem("paper-5.6")
    with pytest.raises(ValueError):
        solve(p, uniform_mesh(0, 1, 2), 0, method="cg")


@pytest.mark.parametrize("key", sorted(REGISTRY))
@pytest.mark.parametrize("k", [0, 1, 2])
def test_galerkin_residual(key, k):
    p, _ = get_problem(key)
    sol = solve(p, uniform_mesh(0, 1, 16), k)
    res = galerkin_residual(sol, p).astype(float)
    sys = assemble_global(p, uniform_mesh(0, 1, 16), k)
    assert np.linalg.norm(res) <= 1e-11 * np.linalg.norm(sys.rhs)


@pytest.mark.parametrize("k", [0, 1, 2])
@pytest.mark.parametrize("n", [1, 4, 32])
def test_unpivoted_cholesky(k, n):
    K = assemble_global(variable_problem(k + n), uniform_mesh(0, 1, n), k).matrix()
    L = np.linalg.cholesky(K)
    assert np.all(np.diag(L) > 0)


def test_stability_factor_and_strictness():
    p, _ = get_problem("paper-5.6")
    st = stability_check(solve(p, uniform_mesh(0, 1, 16), 1), p)
    assert st.factor == 8.0
    assert st.lhs < st.rhs and st.holds
    q = Problem(-1.0, 2.0, one, zero, one, 0.5)
    assert stability_check(solve(q, uniform_mesh(-1, 2, 4), 0), q).factor == 2 * 16 / 0.5


def test_higher_r_behind_flag():
    p, m = get_problem("paper-5.6")
    mesh = uniform_mesh(0, 1, 8)
    with pytest.raises(ValueError):
        solve(p, mesh, 1, r=3)
    g = solve(p, mesh, 1, r=3, allow_higher_r=True)
    s = solve(p, mesh, 1, method="sweep", r=3, allow_higher_r=True)
    assert g.u_h.r == 3
    assert np.max(np.abs(g.u_h.to_vector() - s.u_h.to_vector())) <= 1e-10
