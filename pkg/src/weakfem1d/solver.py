"""Assembly and solution of the weak Galerkin system.

Two strategies are provided:

* :func:`assemble_global` + :func:`solve_global` build the symmetric banded
  matrix of the whole problem and factor it (banded Cholesky).
* :func:`solve_sweep` never forms the global matrix.  It solves a small
  system on the last element, closed by the integrated form of the ODE, and
  then sweeps element by element towards the left boundary.

On element i with local unknowns z = (c_0..c_k, u_L, u_R) the weak
derivative is D z (see :func:`~weakfem1d.weak_space.local_operator`) and the
element matrix is

    K_i = D^T W(a2) D + diag(M(a0), 0, 0),

where W and M are weighted mass matrices in the orthonormal basis.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg as sla

from .mesh import Mesh1D
from .problem import Problem
from .quadrature import ElementBasis, gauss_rule
from .weak_space import DofMap, GlobalWeakFunction, broken_norm, local_operator

log = logging.getLogger(__name__)


class AssemblyError(RuntimeError):
    """The assembled matrix is not symmetric positive definite."""


@dataclass(frozen=True)
class ElementSystem:
    D: np.ndarray  # (r+1, k+3) weak-derivative operator
    W: np.ndarray  # (r+1, r+1) a2-weighted mass
    M0: np.ndarray  # (k+1, k+1) a0-weighted mass
    F: np.ndarray  # (k+1,) load moments (f, phi_t)
    K: np.ndarray  # (k+3, k+3) element matrix

    def apply(self, z: np.ndarray, dtype=float) -> np.ndarray:
        """K z evaluated factor by factor (never through the product matrix)."""
        z = np.asarray(z, dtype=dtype)
        D = self.D.astype(dtype)
        out = D.T @ (self.W.astype(dtype) @ (D @ z))
        n = self.M0.shape[0]
        out[:n] += self.M0.astype(dtype) @ z[:n]
        return out


def _values(fn, x, what):
    v = np.broadcast_to(np.asarray(fn(x), dtype=float), x.shape)
    if not np.all(np.isfinite(v)):
        raise ValueError(f"{what} is not finite at a quadrature node in [{x.min()}, {x.max()}]")
    return v


def element_system(p: Problem, element: tuple[float, float], k: int, r: int, n_q: int) -> ElementSystem:
    xl, xr = element
    x, w = gauss_rule(n_q).mapped(xl, xr)
    Vr = ElementBasis(r, xl, xr).values(x)
    Vk = Vr[: k + 1]
    W = (Vr * (w * _values(p.a2, x, "a2"))) @ Vr.T
    M0 = (Vk * (w * _values(p.a0, x, "a0"))) @ Vk.T
    F = Vk @ (w * _values(p.f, x, "f"))
    D = local_operator(element, k, r)
    K = D.T @ W @ D
    K[: k + 1, : k + 1] += M0
    K = 0.5 * (K + K.T)
    return ElementSystem(D, W, M0, F, K)


def _element_matvec(elements, dofmap: DofMap, z: np.ndarray, dtype=float) -> np.ndarray:
    out = np.zeros(dofmap.dimension, dtype=dtype)
    zz = np.concatenate([np.asarray(z, dtype=dtype), np.zeros(1, dtype=dtype)])
    for i, es in enumerate(elements):
        g = dofmap.element_dofs(i)
        loc = es.apply(zz[g], dtype)  # index -1 hits the appended zero
        keep = g >= 0
        np.add.at(out, g[keep], loc[keep])
    return out


def _load_vector(elements, dofmap: DofMap) -> np.ndarray:
    rhs = np.zeros(dofmap.dimension)
    for i, es in enumerate(elements):
        rhs[dofmap.interior_indices(i)] += es.F
    return rhs


@dataclass(frozen=True)
class AssembledSystem:
    """Global system in LAPACK upper banded storage.

    ``banded[bandwidth + i - j, j] = K[i, j]`` for ``j - bandwidth <= i <= j``.
    """

    dofmap: DofMap
    banded: np.ndarray = field(repr=False)
    rhs: np.ndarray = field(repr=False)
    bandwidth: int
    elements: tuple[ElementSystem, ...] = field(repr=False)
    n_q: int = 0

    @property
    def dimension(self) -> int:
        return self.dofmap.dimension

    def matrix(self) -> np.ndarray:
        """Dense symmetric matrix (for small oracle checks)."""
        n, u = self.dimension, self.bandwidth
        K = np.zeros((n, n))
        for d in range(u + 1):
            diag = self.banded[u - d, d:]
            K[np.arange(n - d), np.arange(d, n)] = diag
            K[np.arange(d, n), np.arange(n - d)] = diag
        return K

    def matvec(self, z: np.ndarray, dtype=float) -> np.ndarray:
        """K z accumulated element by element in the requested precision."""
        return _element_matvec(self.elements, self.dofmap, z, dtype)

    def residual(self, z: np.ndarray, dtype=np.longdouble) -> np.ndarray:
        return np.asarray(self.rhs, dtype=dtype) - self.matvec(z, dtype)


def assemble_global(p: Problem, mesh: Mesh1D, k: int, n_q: int | None = None, r: int | None = None,
                    allow_higher_r: bool = False) -> AssembledSystem:
    """Assemble the symmetric banded system for u_h in S_h.

    Interior test functions give the element load (f, v0); the shared node
    functions couple neighbouring elements, and the last node has only its
    left element.  The half-bandwidth is k + 2.
    """
    dm = DofMap(mesh, k, r, allow_higher_r)
    n_q = k + 4 if n_q is None else n_q
    ubw = dm.half_bandwidth
    n = dm.dimension
    ab = np.zeros((ubw + 1, n))
    rhs = np.zeros(n)
    elements = []
    for i, e in enumerate(mesh.elements()):
        es = element_system(p, e, k, dm.r, n_q)
        elements.append(es)
        g = dm.element_dofs(i)
        keep = np.flatnonzero(g >= 0)
        for a in keep:
            for b in keep:
                if g[a] <= g[b]:
                    ab[ubw + g[a] - g[b], g[b]] += es.K[a, b]
        rhs[g[: k + 1]] += es.F
    return AssembledSystem(dm, ab, rhs, ubw, tuple(elements), n_q)


@dataclass(frozen=True)
class Solution:
    u_h: GlobalWeakFunction
    method: str
    diagnostics: dict = field(default_factory=dict)

    @property
    def dofmap(self) -> DofMap:
        return self.u_h.dofmap

    def weak_derivative(self):
        return self.u_h.weak_derivative()


def _relative_residual(sys: AssembledSystem, z: np.ndarray) -> float:
    res = sys.residual(z)
    scale = float(np.linalg.norm(sys.rhs))
    rn = float(np.linalg.norm(res.astype(float)))
    if scale == 0.0:
        return rn
    return rn / scale


def solve_global(sys: AssembledSystem, dense: bool = False, refine_steps: int = 3) -> Solution:
    """Factor and solve the assembled system.

    The banded Cholesky factor is reused for a few steps of iterative
    refinement whose residual is accumulated element by element in extended
    precision; this removes most of the rounding that the h^-2 condition
    number would otherwise put into the nodal values.  ``dense=True`` uses a
    dense Cholesky solve instead (small oracle problems).
    """
    if dense:
        try:
            cf = sla.cho_factor(sys.matrix(), lower=False)
        except np.linalg.LinAlgError as exc:
            raise AssemblyError(f"dense Cholesky failed: {exc}") from exc

        def solve(b):
            return sla.cho_solve(cf, b)
    else:
        try:
            cb = sla.cholesky_banded(sys.banded, lower=False)
        except np.linalg.LinAlgError as exc:
            raise AssemblyError(f"banded Cholesky failed, matrix not positive definite: {exc}") from exc

        def solve(b):
            return sla.cho_solve_banded((cb, False), b)

    z = solve(sys.rhs)
    steps = 0
    for _ in range(refine_steps):
        res = sys.residual(z)
        dz = solve(res.astype(float))
        z = (np.asarray(z, dtype=np.longdouble) + dz).astype(float)
        steps += 1
        if np.max(np.abs(dz)) <= 4 * np.finfo(float).eps * max(np.max(np.abs(z)), 1e-300):
            break
    diag = {
        "factorization": "dense-cholesky" if dense else "banded-cholesky",
        "bandwidth": sys.bandwidth,
        "refinement_steps": steps,
        "relative_residual": _relative_residual(sys, z),
        "n_q": sys.n_q,
    }
    return Solution(GlobalWeakFunction.from_vector(sys.dofmap, z), "global", diag)


# ---------------------------------------------------------------------------
# element-by-element sweep
# ---------------------------------------------------------------------------


def _closure_row(p: Problem, element: tuple[float, float], k: int, n_q: int) -> tuple[np.ndarray, float]:
    """Coefficients and right side of u_R - u_L + int (1/a2) U0 = int (1/a2) F~.

    U0(x) = int_x^{x_R} a0 u_h^0 and F~(x) = int_x^{x_R} f, both evaluated by an
    inner Gauss rule on (x, x_R) at every outer node x.
    """
    xl, xr = element
    rule = gauss_rule(n_q)
    xo, wo = rule.mapped(xl, xr)
    basis = ElementBasis(k, xl, xr)
    inv_a2 = 1.0 / _values(p.a2, xo, "a2")
    row_c = np.zeros(k + 1)
    rhs = 0.0
    for xq, wq, ia in zip(xo, wo, inv_a2):
        xi, wi = rule.mapped(xq, xr)
        a0f = wi * _values(p.a0, xi, "a0")
        row_c += wq * ia * (basis.values(xi) @ a0f)
        rhs += wq * ia * float(wi @ _values(p.f, xi, "f"))
    return np.concatenate([row_c, [-1.0, 1.0]]), rhs


def _sweep(elements, k, z_last, b):
    """Backward sweep from the last element; returns local vectors per element.

    ``b`` has shape (n_elements, k+2, m) in the global block layout: rows 0..k
    are the interior equations of element i, row k+1 the equation of its
    right node.  ``z_last`` holds m columns of local unknowns on the last
    element.
    """
    n_el = len(elements)
    m = z_last.shape[1]
    out = [None] * n_el
    out[-1] = z_last
    rows = list(range(k + 1)) + [k + 2]
    cols = list(range(k + 2))
    for i in range(n_el - 2, -1, -1):
        K = elements[i].K
        nxt = out[i + 1]
        u_right = nxt[k + 1]  # single-valued node x_{i+1}
        rhs = np.array(b[i], dtype=float)
        # the node equation is shared with the right neighbour, already known
        rhs[k + 1] -= elements[i + 1].K[k + 1] @ nxt
        rhs -= np.outer(K[rows, k + 2], u_right)
        sol = np.linalg.solve(K[np.ix_(rows, cols)], rhs)
        out[i] = np.vstack([sol, u_right[None, :]])
    return out


class _SweepSolver:
    """K z = b by backward sweeps, with z vanishing at the left boundary.

    The last element leaves one free direction.  A minimum-norm particular
    solution and the free direction are swept together; the combination
    whose left boundary value is zero seeds a final sweep.
    """

    def __init__(self, elements, k: int):
        self.elements, self.k = elements, k
        last = elements[-1]
        self.block = last.K[list(range(k + 1)) + [k + 2]]
        null = sla.null_space(self.block, rcond=1e-13)
        if null.shape[1] != 1:
            raise np.linalg.LinAlgError(f"last-element equations have nullity {null.shape[1]}, expected 1")
        self.null = null[:, 0]
        self.pinv = np.linalg.pinv(self.block)

    def particular(self, b: np.ndarray) -> np.ndarray:
        return self.pinv @ b[-1]

    def both(self, b: np.ndarray, z_min: np.ndarray):
        """Left boundary values of the swept particular solution and free direction."""
        bb = np.zeros(b.shape + (2,))
        bb[..., 0] = b
        out = _sweep(self.elements, self.k, np.column_stack([z_min, self.null]), bb)
        return out[0][self.k + 1]

    def final(self, b: np.ndarray, seed: np.ndarray) -> np.ndarray:
        zs = _sweep(self.elements, self.k, seed[:, None], b[..., None])
        k = self.k
        return np.array([np.concatenate([z[: k + 1, 0], z[k + 2 :, 0]]) for z in zs]), float(zs[0][k + 1, 0])

    def solve(self, b: np.ndarray):
        """Return (blocks of z, emergent left boundary value)."""
        z_min = self.particular(b)
        u1_min, u1_null = self.both(b, z_min)
        if u1_null == 0.0:
            raise np.linalg.LinAlgError("homogeneous sweep does not reach the left boundary")
        return self.final(b, z_min - (u1_min / u1_null) * self.null)


def solve_sweep(p: Problem, mesh: Mesh1D, k: int, n_q: int | None = None, r: int | None = None,
                closure: str = "corrected", allow_higher_r: bool = False, refine_steps: int = 3) -> Solution:
    """Solve element by element, last element first.

    On the last element the k+1 interior equations and the right-node
    equation leave exactly one free direction in the k+3 local unknowns.
    The integrated ODE

        u(x_N) - u(x_{N-1}) + int (1/a2) U0 = int (1/a2) F~,
        U0(x) = int_x^{x_N} a0 u,   F~(x) = int_x^{x_N} f,

    closes the system.  Every further element, right to left, needs one
    (k+2) x (k+2) solve: its right node value comes from continuity and its
    node equation takes the flux already computed on the right neighbour.
    The value at the left boundary comes out of the sweep; it is not imposed.

    The closure holds for the exact solution but the discrete solution
    satisfies it only up to discretisation error, and its component along the
    free direction shrinks quickly under refinement (roughly like h^(3k+3);
    it is zero when a0 = 0).  So by default (``closure="corrected"``) the
    free direction is swept alongside a minimum-norm particular solution and
    the combination vanishing at x = a seeds a final sweep.  Sweeps accumulate
    rounding from one element to the next, so the result is then improved by
    a few refinement sweeps on the residual, accumulated element by element
    in extended precision; no global matrix is formed.  ``closure="literal"``
    sweeps the closure solution once, as is.  In both modes
    ``diagnostics["closure_defect"]`` is the left boundary value the pure
    closure solution produces (None when the closure is numerically
    dependent on the local equations).
    """
    if closure not in ("corrected", "literal"):
        raise ValueError(f"closure must be 'corrected' or 'literal', got {closure!r}")
    dm = DofMap(mesh, k, r, allow_higher_r)
    n_q = k + 4 if n_q is None else n_q
    elements = [element_system(p, e, k, dm.r, n_q) for e in mesh.elements()]
    solver = _SweepSolver(elements, k)
    load = _load_vector(elements, dm)
    b = load.reshape(dm.n_elements, dm.block)

    c_row, c_rhs = _closure_row(p, mesh.element(mesh.n_elements - 1), k, n_q)
    z_min = solver.particular(b)
    pivot = float(c_row @ solver.null)
    pivot_rel = abs(pivot) / np.linalg.norm(c_row)
    # below this the pivot is indistinguishable from rounding in the row
    s = (c_rhs - c_row @ z_min) / pivot if pivot_rel > 1e-12 else np.nan
    diag = {"n_q": n_q, "closure": closure, "closure_pivot": pivot_rel}
    u1_min, u1_null = solver.both(b, z_min)
    diag["closure_defect"] = float(u1_min + s * u1_null) if np.isfinite(s) else None

    steps = 0
    if closure == "literal":
        if not np.isfinite(s):
            raise np.linalg.LinAlgError("closure equation is numerically dependent on the local equations "
                                        "(a0 vanishes on the last element, or the mesh is too fine for this closure)")
        blocks, emergent = solver.final(b, z_min + s * solver.null)
        z = blocks.reshape(-1)
    else:
        if u1_null == 0.0:
            raise np.linalg.LinAlgError("homogeneous sweep does not reach the left boundary")
        blocks, emergent = solver.final(b, z_min - (u1_min / u1_null) * solver.null)
        z = blocks.reshape(-1)
        for _ in range(refine_steps):
            res = np.asarray(load, dtype=np.longdouble) - _element_matvec(elements, dm, z, np.longdouble)
            dblocks, du1 = solver.solve(res.astype(float).reshape(b.shape))
            dz = dblocks.reshape(-1)
            z = (np.asarray(z, dtype=np.longdouble) + dz).astype(float)
            emergent += du1
            steps += 1
            if np.max(np.abs(dz)) <= 4 * np.finfo(float).eps * max(np.max(np.abs(z)), 1e-300):
                break

    u_h = GlobalWeakFunction.from_vector(dm, z)
    diag["refinement_steps"] = steps
    diag["emergent_u1"] = float(emergent)
    diag["interior_l2"] = broken_norm(u_h.interior_pieces())
    return Solution(u_h, "sweep", diag)


def solve(p: Problem, mesh: Mesh1D, k: int, n_q: int | None = None, method: str = "global",
          r: int | None = None, allow_higher_r: bool = False) -> Solution:
    if method == "global":
        return solve_global(assemble_global(p, mesh, k, n_q, r, allow_higher_r))
    if method == "sweep":
        return solve_sweep(p, mesh, k, n_q, r, allow_higher_r=allow_higher_r)
    raise ValueError(f"unknown method {method!r}")


# ---------------------------------------------------------------------------
# checks
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class StabilityReport:
    lhs: float
    rhs: float
    factor: float
    f_norm: float

    @property
    def holds(self) -> bool:
        return self.lhs <= self.rhs * (1.0 + 1e-12) + 1e-300


def stability_check(sol: Solution, p: Problem, n_q: int | None = None) -> StabilityReport:
    """||u_h^0|| + ||d_w u_h||_h against 2((b-a)+1)^2 / a_min * ||f||."""
    u_h = sol.u_h
    n_q = (u_h.k + 6) if n_q is None else n_q
    f_sq = 0.0
    for e in u_h.mesh.elements():
        x, w = gauss_rule(n_q).mapped(*e)
        f_sq += float(w @ _values(p.f, x, "f") ** 2)
    f_norm = np.sqrt(f_sq)
    lhs = broken_norm(u_h.interior_pieces()) + broken_norm(u_h.weak_derivative())
    factor = 2.0 * (p.length + 1.0) ** 2 / p.a_min
    return StabilityReport(float(lhs), float(factor * f_norm), float(factor), float(f_norm))


def galerkin_residual(sol: Solution, p: Problem, n_q: int | None = None) -> np.ndarray:
    """F - K z for the solution's own vector, computed in extended precision."""
    n_q = sol.diagnostics.get("n_q") if n_q is None else n_q
    sys = assemble_global(p, sol.u_h.mesh, sol.u_h.k, n_q, sol.u_h.r, allow_higher_r=sol.u_h.r > sol.u_h.k + 1)
    return sys.residual(sol.u_h.to_vector())
