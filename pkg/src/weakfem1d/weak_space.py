"""Weak functions, the constrained space S_h and the discrete weak derivative.

A local weak function on (x_i, x_{i+1}) is a triple {v0, v_L, v_R}: an interior
polynomial of degree <= k plus two endpoint values that need not be traces of
v0.  Its discrete weak derivative of degree r is the polynomial p in P_r with

    (p, q) = -(v0, q') + v_R q(x_{i+1}) - v_L q(x_i)    for all q in P_r.

Globally, node values are stored once and shared by both neighbouring
elements, so functions in S_h are single valued by construction.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .mesh import Mesh1D
from .quadrature import ElementBasis, ElementPolynomial, mass_matrix


def check_degrees(k: int, r: int | None = None, allow_higher_r: bool = False) -> int:
    """Validate (k, r) and return r; r defaults to k + 1."""
    if int(k) != k or k < 0:
        raise ValueError(f"k must be a nonnegative integer, got {k!r}")
    if r is None:
        return int(k) + 1
    if int(r) != r or r < k + 1:
        raise ValueError(f"weak-derivative degree r must exceed k={k}, got r={r!r}")
    if r > k + 1 and not allow_higher_r:
        raise ValueError(f"r={r} > k+1 requires allow_higher_r=True")
    return int(r)


@dataclass(frozen=True)
class LocalWeakFunction:
    interior: ElementPolynomial
    left_value: float
    right_value: float

    @property
    def basis(self) -> ElementBasis:
        return self.interior.basis

    @property
    def k(self) -> int:
        return self.interior.degree

    def as_vector(self) -> np.ndarray:
        """(c_0, ..., c_k, v_L, v_R)."""
        return np.concatenate([self.interior.coeffs, [self.left_value, self.right_value]])


def local_operator(element: tuple[float, float], k: int, r: int) -> np.ndarray:
    """Matrix D of shape (r+1, k+3) mapping (c, v_L, v_R) to d_{w,r} v.

    Both sides use the orthonormal basis, where the mass matrix is the
    identity, so D = [A | B] with entries in closed form.
    """
    if r < k + 1:
        raise ValueError(f"r={r} must be at least k+1={k + 1}")
    br = ElementBasis(r, *element)
    # A[s, t] = -(phi_s', phi_t) = -G[t, s]
    A = -br.derivative_matrix().T[:, : k + 1]
    B = np.column_stack([-br.left_values(), br.right_values()])
    return np.hstack([A, B])


def weak_derivative_matrices(element: tuple[float, float], k: int, r: int, basis_kind: str = "orthonormal"):
    """(M, A, B) with M d = A V0 + B (v_L, v_R)^T.

    For ``"monomial"`` these are built from the global monomials x^{s-1}:
    m_st = (x^{s-1}, x^{t-1}), a_st = -((x^{s-1})', x^{t-1}),
    b_s1 = -x_L^{s-1}, b_s2 = x_R^{s-1}.
    """
    xl, xr = element
    if r < k + 1:
        raise ValueError(f"r={r} must be at least k+1={k + 1}")
    M = mass_matrix(r, element, basis_kind)
    if basis_kind == "orthonormal":
        D = local_operator(element, k, r)
        return M, D[:, : k + 1], D[:, k + 1 :]
    s = np.arange(r + 1)[:, None]
    t = np.arange(k + 1)[None, :]
    # (x^s)' x^t integrates to s (xr^{s+t} - xl^{s+t}) / (s+t); zero when s = 0
    p = np.maximum(s + t, 1)
    A = -np.where(s > 0, s * (xr ** (s + t) - xl ** (s + t)) / p, 0.0)
    B = np.column_stack([-(xl ** np.arange(r + 1)), xr ** np.arange(r + 1)])
    return M, A, B


def weak_derivative(v: LocalWeakFunction, r: int | None = None) -> ElementPolynomial:
    """Discrete weak derivative of ``v`` in P_r (default r = k + 1)."""
    k = v.k
    r = k + 1 if r is None else r
    if r < k + 1:
        raise ValueError(f"r={r} must be at least k+1={k + 1}")
    D = local_operator(v.basis.element, k, r)
    return ElementPolynomial(v.basis.with_degree(r), D @ v.as_vector())


def jump(v_left: LocalWeakFunction, v_right: LocalWeakFunction) -> float:
    """[v] at the shared node: right element's left value minus left element's right value."""
    if not np.isclose(v_left.basis.xr, v_right.basis.xl, rtol=0.0, atol=1e-14 * max(1.0, abs(v_left.basis.xr))):
        raise ValueError("jump is defined only for adjacent elements")
    return v_right.left_value - v_left.right_value


def discrete_inner(u: Sequence[ElementPolynomial], v: Sequence[ElementPolynomial]) -> float:
    """(u, v)_h = sum over elements of (u, v) on the element."""
    if len(u) != len(v):
        raise ValueError("piece counts differ")
    total = 0.0
    for p, q in zip(u, v):
        if p.basis.element != q.basis.element:
            raise ValueError("pieces live on different elements")
        n = min(p.coeffs.size, q.coeffs.size)
        total += float(p.coeffs[:n] @ q.coeffs[:n])
    return total


def broken_norm(pieces: Sequence[ElementPolynomial]) -> float:
    return float(np.sqrt(sum(float(p.coeffs @ p.coeffs) for p in pieces)))


@dataclass(frozen=True)
class DofMap:
    """Global numbering for S_h.

    Element i owns the block ``[i*(k+2), (i+1)*(k+2))``: its k+1 interior
    coefficients followed by the unknown at its right node x_{i+1}.  The left
    boundary node carries the Dirichlet value and has no unknown.
    """

    mesh: Mesh1D
    k: int
    r: int | None = None
    allow_higher_r: bool = False

    def __post_init__(self):
        object.__setattr__(self, "r", check_degrees(self.k, self.r, self.allow_higher_r))

    @property
    def block(self) -> int:
        return self.k + 2

    @property
    def n_elements(self) -> int:
        return self.mesh.n_elements

    @property
    def dimension(self) -> int:
        return self.block * self.n_elements

    @property
    def half_bandwidth(self) -> int:
        return self.k + 2

    def interior_indices(self, i: int) -> np.ndarray:
        start = i * self.block
        return np.arange(start, start + self.k + 1)

    def node_index(self, j: int) -> int:
        """Global index of node j (0-based); -1 for the Dirichlet node."""
        if not 0 <= j < self.mesh.n_nodes:
            raise IndexError(j)
        return -1 if j == 0 else (j - 1) * self.block + self.k + 1

    def element_dofs(self, i: int) -> np.ndarray:
        """Indices of (c_0..c_k, v_L, v_R) on element i, -1 marking the Dirichlet node."""
        return np.concatenate([self.interior_indices(i), [self.node_index(i), self.node_index(i + 1)]])

    def locate(self, g: int) -> tuple[str, int, int]:
        """Inverse map: ("interior", element, slot) or ("node", node, 0)."""
        if not 0 <= g < self.dimension:
            raise IndexError(g)
        i, slot = divmod(g, self.block)
        if slot <= self.k:
            return ("interior", i, slot)
        return ("node", i + 1, 0)


@dataclass(frozen=True)
class GlobalWeakFunction:
    """A member of S_h: interior coefficients per element and one value per node."""

    dofmap: DofMap
    interior: np.ndarray = field(repr=False)
    node_values: np.ndarray = field(repr=False)

    def __post_init__(self):
        dm = self.dofmap
        c = np.array(self.interior, dtype=float).reshape(dm.n_elements, dm.k + 1)
        u = np.array(self.node_values, dtype=float).reshape(dm.mesh.n_nodes)
        if u[0] != 0.0:
            raise ValueError("S_h functions vanish at the left boundary node")
        c.setflags(write=False)
        u.setflags(write=False)
        object.__setattr__(self, "interior", c)
        object.__setattr__(self, "node_values", u)

    @property
    def mesh(self) -> Mesh1D:
        return self.dofmap.mesh

    @property
    def k(self) -> int:
        return self.dofmap.k

    @property
    def r(self) -> int:
        return self.dofmap.r

    @classmethod
    def from_vector(cls, dofmap: DofMap, z: np.ndarray) -> "GlobalWeakFunction":
        z = np.asarray(z, dtype=float)
        if z.shape != (dofmap.dimension,):
            raise ValueError(f"expected vector of length {dofmap.dimension}")
        blocks = z.reshape(dofmap.n_elements, dofmap.block)
        nodes = np.concatenate([[0.0], blocks[:, -1]])
        return cls(dofmap, blocks[:, :-1], nodes)

    def to_vector(self) -> np.ndarray:
        return np.column_stack([self.interior, self.node_values[1:]]).reshape(-1)

    def local(self, i: int) -> LocalWeakFunction:
        b = ElementBasis(self.k, *self.mesh.element(i))
        return LocalWeakFunction(ElementPolynomial(b, self.interior[i]), self.node_values[i], self.node_values[i + 1])

    def local_vector(self, i: int) -> np.ndarray:
        return np.concatenate([self.interior[i], self.node_values[i : i + 2]])

    def interior_pieces(self) -> list[ElementPolynomial]:
        return [self.local(i).interior for i in range(self.dofmap.n_elements)]

    def weak_derivative(self) -> list[ElementPolynomial]:
        return [weak_derivative(self.local(i), self.r) for i in range(self.dofmap.n_elements)]


def random_weak_function(dofmap: DofMap, rng: np.random.Generator) -> GlobalWeakFunction:
    """Coefficients and node values uniform on [-1, 1]; the Dirichlet node set to 0."""
    c = rng.uniform(-1.0, 1.0, size=(dofmap.n_elements, dofmap.k + 1))
    u = rng.uniform(-1.0, 1.0, size=dofmap.mesh.n_nodes)
    u[0] = 0.0
    return GlobalWeakFunction(dofmap, c, u)
