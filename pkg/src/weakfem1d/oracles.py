"""Independent reference computations used by the test suite.

Nothing here is used by the solvers themselves:

* exact rational weak derivatives in the monomial basis,
* a dense assembly that evaluates the bilinear form on pairs of global basis
  functions (no element matrices, no banded storage),
* a high-resolution collocation solve of the two-point boundary value problem.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

import numpy as np
from scipy.integrate import solve_bvp

from .mesh import Mesh1D
from .problem import GeneralProblem, Problem
from .quadrature import gauss_rule
from .weak_space import DofMap, GlobalWeakFunction


def _solve_rational(M: list[list[Fraction]], rhs: list[Fraction]) -> list[Fraction]:
    n = len(rhs)
    a = [row[:] + [rhs[i]] for i, row in enumerate(M)]
    for col in range(n):
        piv = next(r for r in range(col, n) if a[r][col] != 0)
        a[col], a[piv] = a[piv], a[col]
        for r in range(n):
            if r != col and a[r][col] != 0:
                fac = a[r][col] / a[col][col]
                a[r] = [x - fac * y for x, y in zip(a[r], a[col])]
    return [a[i][n] / a[i][i] for i in range(n)]


def weak_derivative_exact(interior, left_value, right_value, element, r: int) -> list[Fraction]:
    """Monomial coefficients of d_{w,r} v, solved in exact rational arithmetic.

    ``interior`` holds monomial coefficients of v0 (global x^0..x^k); all data
    must be rationals (ints or Fractions).
    """
    xl, xr = (Fraction(v) for v in element)
    c = [Fraction(v) for v in interior]
    vl, vr = Fraction(left_value), Fraction(right_value)
    k = len(c) - 1
    if r < k + 1:
        raise ValueError("r must exceed k")

    def mono_int(p):  # integral of x^p over the element
        return (xr ** (p + 1) - xl ** (p + 1)) / (p + 1)

    M = [[mono_int(s + t) for t in range(r + 1)] for s in range(r + 1)]
    rhs = []
    for s in range(r + 1):
        # -(v0, (x^s)') + v_R x_R^s - v_L x_L^s
        a = -sum(s * ct * mono_int(s - 1 + t) for t, ct in enumerate(c)) if s > 0 else Fraction(0)
        rhs.append(a + vr * xr**s - vl * xl**s)
    return _solve_rational(M, rhs)


def bilinear_form(p: Problem, u: GlobalWeakFunction, v: GlobalWeakFunction, n_q: int) -> float:
    """(a2 d_w u, d_w v)_h + (a0 u0, v0) by pointwise quadrature."""
    du, dv = u.weak_derivative(), v.weak_derivative()
    pu, pv = u.interior_pieces(), v.interior_pieces()
    total = 0.0
    for i, e in enumerate(u.mesh.elements()):
        x, w = gauss_rule(n_q).mapped(*e)
        total += float(w @ (p.a2(x) * du[i](x) * dv[i](x) + p.a0(x) * pu[i](x) * pv[i](x)))
    return total


def load(p: Problem, v: GlobalWeakFunction, n_q: int) -> float:
    total = 0.0
    for piece, e in zip(v.interior_pieces(), v.mesh.elements()):
        x, w = gauss_rule(n_q).mapped(*e)
        total += float(w @ (p.f(x) * piece(x)))
    return total


def node_first_order(dofmap: DofMap) -> np.ndarray:
    """Permutation listing node unknowns first, then interior coefficients."""
    nodes = [dofmap.node_index(j) for j in range(1, dofmap.mesh.n_nodes)]
    interior = [g for i in range(dofmap.n_elements) for g in dofmap.interior_indices(i)]
    return np.array(nodes + interior)


def dense_assembly(p: Problem, mesh: Mesh1D, k: int, n_q: int | None = None):
    """Brute-force (K, F) in node-first ordering, plus the permutation used.

    Entry (I, J) is the bilinear form applied to the I-th and J-th global basis
    functions of S_h, each built as a unit GlobalWeakFunction.
    """
    dm = DofMap(mesh, k)
    n_q = k + 4 if n_q is None else n_q
    perm = node_first_order(dm)
    basis = []
    for g in perm:
        e = np.zeros(dm.dimension)
        e[g] = 1.0
        basis.append(GlobalWeakFunction.from_vector(dm, e))
    n = len(basis)
    K = np.zeros((n, n))
    for a in range(n):
        for b in range(a, n):
            K[a, b] = K[b, a] = bilinear_form(p, basis[a], basis[b], n_q)
    F = np.array([load(p, v, n_q) for v in basis])
    return K, F, perm


@dataclass(frozen=True)
class ReferenceSolution:
    """Dense node table of a collocation solve with an interpolating accessor."""

    nodes: np.ndarray
    values: np.ndarray
    flux: np.ndarray
    _sol: object

    def __call__(self, x):
        return self._sol(np.asarray(x, dtype=float))[0]

    def derivative(self, x, a2):
        x = np.asarray(x, dtype=float)
        return self._sol(x)[1] / a2(x)


def reference_solve(p: Problem | GeneralProblem, resolution: int = 10_000, tol: float = 1e-10) -> ReferenceSolution:
    """Collocation solve of the problem as a first-order system in (u, a2 u').

    With s = a2 u':  u' = s / a2,  s' = a1 s / a2 + a0 u - f,  u(a) = 0, s(b) = 0.
    The first-order term a1 is handled directly, so this also checks the
    self-adjoint transformation.
    """
    if resolution < 100:
        raise ValueError("resolution must be at least 100")
    a1 = getattr(p, "a1", None)

    def rhs(x, y):
        u, s = y
        a2 = p.a2(x)
        ds = p.a0(x) * u - p.f(x)
        if a1 is not None:
            ds = ds + a1(x) * s / a2
        return np.vstack([s / a2, ds])

    def bc(ya, yb):
        return np.array([ya[0], yb[1]])

    x = np.linspace(p.a, p.b, resolution + 1)
    sol = solve_bvp(rhs, bc, x, np.zeros((2, x.size)), tol=tol, max_nodes=20 * (resolution + 1))
    if not sol.success:
        raise RuntimeError(f"reference collocation solve failed: {sol.message}")
    y = sol.sol(x)
    return ReferenceSolution(x, y[0], y[1], sol.sol)
