"""Polynomial spaces on intervals and Gauss-Legendre quadrature.

Every element polynomial is stored in the affine-mapped orthonormal Legendre
basis

    phi_j(x) = sqrt((2j + 1) / h) * P_j(t),   t = 2 (x - x_L) / h - 1,

so the element mass matrix is the identity.  The monomial mass matrix is kept
only as a cross-check.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache
from typing import Callable

import numpy as np
from numpy.polynomial import legendre as leg

#: Relative slack allowed when evaluating exactly at an element endpoint.
_ENDPOINT_TOL = 1e-12

MAX_GAUSS_POINTS = 64


@dataclass(frozen=True)
class QuadRule:
    """Gauss-Legendre rule on the reference interval [-1, 1]."""

    order: int
    points: np.ndarray
    weights: np.ndarray

    def mapped(self, xl: float, xr: float) -> tuple[np.ndarray, np.ndarray]:
        """Nodes and weights affinely mapped onto (xl, xr)."""
        half = 0.5 * (xr - xl)
        return xl + half * (self.points + 1.0), half * self.weights


@lru_cache(maxsize=None)
def gauss_rule(n: int) -> QuadRule:
    """Return the ``n``-point Gauss-Legendre rule, exact to degree 2n - 1."""
    if not isinstance(n, (int, np.integer)) or not 1 <= n <= MAX_GAUSS_POINTS:
        raise ValueError(f"quadrature order must be an integer in [1, {MAX_GAUSS_POINTS}], got {n!r}")
    t, w = leg.leggauss(int(n))
    t.setflags(write=False)
    w.setflags(write=False)
    return QuadRule(int(n), t, w)


def _check_interval(xl: float, xr: float) -> None:
    if not (np.isfinite(xl) and np.isfinite(xr)) or xl >= xr:
        raise ValueError(f"degenerate element ({xl}, {xr})")


def integrate(f: Callable, element: tuple[float, float], n: int) -> float:
    """Integrate ``f`` over ``element`` with the mapped ``n``-point Gauss rule.

    ``f`` is called once with the array of mapped nodes.
    """
    xl, xr = element
    _check_interval(xl, xr)
    x, w = gauss_rule(n).mapped(xl, xr)
    vals = np.broadcast_to(np.asarray(f(x), dtype=float), x.shape)
    if not np.all(np.isfinite(vals)):
        raise ValueError(f"non-finite integrand value on element ({xl}, {xr})")
    return float(vals @ w)


@dataclass(frozen=True)
class ElementBasis:
    """Orthonormal Legendre basis of P_degree on the element (xl, xr)."""

    degree: int
    xl: float
    xr: float

    def __post_init__(self):
        if self.degree < 0:
            raise ValueError("degree must be nonnegative")
        _check_interval(self.xl, self.xr)

    @property
    def h(self) -> float:
        return self.xr - self.xl

    @property
    def element(self) -> tuple[float, float]:
        return (self.xl, self.xr)

    @property
    def dim(self) -> int:
        return self.degree + 1

    def scale(self) -> np.ndarray:
        """Normalisation factors sqrt((2j+1)/h), j = 0..degree."""
        return np.sqrt((2.0 * np.arange(self.dim) + 1.0) / self.h)

    def to_reference(self, x, check: bool = True) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        t = 2.0 * (x - self.xl) / self.h - 1.0
        if check:
            if np.any(np.abs(t) > 1.0 + _ENDPOINT_TOL):
                raise ValueError(f"evaluation point outside element ({self.xl}, {self.xr})")
            t = np.clip(t, -1.0, 1.0)
        return t

    def values(self, x, check: bool = True) -> np.ndarray:
        """Basis values, shape ``(degree + 1,) + x.shape``."""
        t = self.to_reference(x, check)
        out = leg.legvander(t, self.degree) * self.scale()
        return np.moveaxis(out, -1, 0)

    def derivatives(self, x, check: bool = True) -> np.ndarray:
        """Basis x-derivatives, same layout as :meth:`values`."""
        t = self.to_reference(x, check)
        s = self.scale()
        out = np.zeros((self.dim,) + t.shape)
        for j in range(1, self.dim):
            c = np.zeros(j + 1)
            c[j] = 1.0
            out[j] = leg.legval(t, leg.legder(c)) * (2.0 / self.h) * s[j]
        return out

    def left_values(self) -> np.ndarray:
        return self.scale() * (-1.0) ** np.arange(self.dim)

    def right_values(self) -> np.ndarray:
        return self.scale()

    def derivative_matrix(self) -> np.ndarray:
        """Matrix G with phi_s' = sum_t G[t, s] phi_t (closed form).

        G[t, s] = 2 sqrt((2s+1)(2t+1)) / h when t < s and s - t is odd.
        """
        j = np.arange(self.dim)
        t, s = np.meshgrid(j, j, indexing="ij")
        mask = (t < s) & ((s - t) % 2 == 1)
        return np.where(mask, 2.0 * np.sqrt((2.0 * s + 1.0) * (2.0 * t + 1.0)) / self.h, 0.0)

    def with_degree(self, degree: int) -> "ElementBasis":
        return ElementBasis(degree, self.xl, self.xr)


@dataclass(frozen=True)
class ElementPolynomial:
    """A polynomial on one element, held as orthonormal-basis coefficients."""

    basis: ElementBasis
    coeffs: np.ndarray = field(repr=False)

    def __post_init__(self):
        c = np.array(self.coeffs, dtype=float).reshape(-1)
        if c.size != self.basis.dim:
            raise ValueError(f"expected {self.basis.dim} coefficients, got {c.size}")
        c.setflags(write=False)
        object.__setattr__(self, "coeffs", c)

    @property
    def degree(self) -> int:
        return self.basis.degree

    def __call__(self, x):
        return eval_poly(self, x)

    def derivative(self) -> "ElementPolynomial":
        return diff_poly(self)

    def antiderivative(self, left_value: float = 0.0) -> "ElementPolynomial":
        """Degree-raising antiderivative taking ``left_value`` at xl."""
        b = self.basis
        a = self.coeffs * b.scale()
        ai = leg.legint(a, lbnd=-1.0, k=0.0) * (0.5 * b.h)
        ai[0] += left_value
        nb = b.with_degree(b.degree + 1)
        return ElementPolynomial(nb, ai / nb.scale())

    def raised(self, degree: int) -> "ElementPolynomial":
        """Same polynomial expressed in a basis of higher degree."""
        if degree < self.degree:
            raise ValueError("cannot lower degree without projection")
        c = np.zeros(degree + 1)
        c[: self.coeffs.size] = self.coeffs
        return ElementPolynomial(self.basis.with_degree(degree), c)

    def to_monomial(self) -> np.ndarray:
        """Coefficients in global monomials x^0 .. x^degree."""
        b = self.basis
        a = self.coeffs * b.scale()
        # t = alpha * x + beta
        alpha = 2.0 / b.h
        beta = -2.0 * b.xl / b.h - 1.0
        pt = leg.leg2poly(a)
        out = np.zeros(b.dim)
        lin = np.polynomial.Polynomial([beta, alpha])
        acc = np.polynomial.Polynomial([1.0])
        for j, cj in enumerate(pt):
            if j:
                acc = acc * lin
            out[: j + 1] += cj * acc.coef[: j + 1]
        return out


def eval_poly(p: ElementPolynomial, x):
    """Evaluate ``p`` at points of the closed element (scalar in, scalar out)."""
    vals = np.tensordot(p.coeffs, p.basis.values(x), axes=1)
    return float(vals) if np.ndim(vals) == 0 else vals


def diff_poly(p: ElementPolynomial) -> ElementPolynomial:
    """Exact derivative; the result has degree max(l - 1, 0)."""
    d = p.basis.derivative_matrix() @ p.coeffs
    lower = max(p.degree - 1, 0)
    return ElementPolynomial(p.basis.with_degree(lower), d[: lower + 1])


def project_onto_basis(f: Callable, basis: ElementBasis, n_q: int | None = None) -> ElementPolynomial:
    """L2-orthogonal projection of ``f`` onto the span of ``basis``.

    A polynomial already expanded on the same element is projected exactly by
    truncating (or zero-padding) its orthonormal coefficients.
    """
    if isinstance(f, ElementPolynomial) and f.basis.element == basis.element:
        c = np.zeros(basis.dim)
        m = min(basis.dim, f.basis.dim)
        c[:m] = f.coeffs[:m]
        return ElementPolynomial(basis, c)
    n_q = basis.degree + 4 if n_q is None else n_q
    x, w = gauss_rule(n_q).mapped(basis.xl, basis.xr)
    vals = np.broadcast_to(np.asarray(f(x), dtype=float), x.shape)
    if not np.all(np.isfinite(vals)):
        raise ValueError(f"non-finite function value on element {basis.element}")
    return ElementPolynomial(basis, basis.values(x) @ (w * vals))


def mass_matrix(l: int, element: tuple[float, float], basis_kind: str = "orthonormal") -> np.ndarray:
    """Element mass matrix of P_l.

    ``"orthonormal"`` gives the identity; ``"monomial"`` gives the entries
    (x^s, x^t) over the element for global monomials, integrated exactly.
    """
    xl, xr = element
    _check_interval(xl, xr)
    if l < 0:
        raise ValueError("degree must be nonnegative")
    if basis_kind == "orthonormal":
        return np.eye(l + 1)
    if basis_kind == "monomial":
        p = np.add.outer(np.arange(l + 1), np.arange(l + 1)) + 1.0
        return (xr**p - xl**p) / p
    raise ValueError(f"unknown basis kind {basis_kind!r}")


def monomial_to_orthonormal(basis: ElementBasis) -> np.ndarray:
    """Matrix T with monomial coefficients = T @ orthonormal coefficients."""
    cols = []
    for j in range(basis.dim):
        e = np.zeros(basis.dim)
        e[j] = 1.0
        cols.append(ElementPolynomial(basis, e).to_monomial())
    return np.column_stack(cols)
