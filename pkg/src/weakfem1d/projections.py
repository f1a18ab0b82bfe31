"""Elementwise projections: local L2 (P_h^l), the weak interpolant Q_h and pi_h."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from .mesh import Mesh1D
from .quadrature import ElementBasis, ElementPolynomial, gauss_rule, project_onto_basis
from .weak_space import DofMap, GlobalWeakFunction


@dataclass(frozen=True)
class ProjectionResult:
    mesh: Mesh1D
    pieces: tuple[ElementPolynomial, ...]
    node_values: np.ndarray | None = None

    def __call__(self, x):
        """Evaluate the piecewise polynomial; element i owns [x_i, x_{i+1})."""
        x = np.asarray(x, dtype=float)
        idx = np.clip(np.searchsorted(self.mesh.nodes, x, side="right") - 1, 0, self.mesh.n_elements - 1)
        out = np.empty(x.shape)
        for i in np.unique(idx):
            m = idx == i
            out[m] = self.pieces[i](x[m])
        return out


def project_Ph(u: Callable, l: int, mesh: Mesh1D, n_q: int | None = None) -> ProjectionResult:
    """Local L2 projection onto piecewise P_l."""
    n_q = l + 4 if n_q is None else n_q
    pieces = tuple(project_onto_basis(u, ElementBasis(l, *e), n_q) for e in mesh.elements())
    return ProjectionResult(mesh, pieces)


def project_Qh(u: Callable, k: int, mesh: Mesh1D, n_q: int | None = None, tol: float = 1e-12) -> GlobalWeakFunction:
    """{P_h^k u, u(x_i), u(x_{i+1})} on every element, as a member of S_h.

    The node values are exact point values of ``u``; u(a) must vanish.
    """
    ua = float(u(np.array(mesh.a)))
    if abs(ua) > tol:
        raise ValueError(f"Q_h u lies in S_h only if u(a) = 0; got u(a) = {ua:.3e}")
    p = project_Ph(u, k, mesh, n_q)
    nodes = np.asarray(u(mesh.nodes), dtype=float).copy()
    nodes[0] = 0.0
    return GlobalWeakFunction(DofMap(mesh, k), np.array([q.coeffs for q in p.pieces]), nodes)


def project_pih(
    w: Callable, k: int, mesh: Mesh1D, n_q: int | None = None, w_prime: Callable | None = None
) -> ProjectionResult:
    """Continuous piecewise P_{k+1} function with (pi w)' = P_h^k w' and pi w(x_i) = w(x_i).

    Each piece is the exact antiderivative of the projected derivative.  With
    ``w_prime`` omitted, the moments (w', phi) are obtained by integrating by
    parts, (w', phi) = [w phi] - (w, phi'), so no numerical differentiation
    is needed.
    """
    n_q = k + 4 if n_q is None else n_q
    rule = gauss_rule(n_q)
    pieces = []
    for xl, xr in mesh.elements():
        b = ElementBasis(k, xl, xr)
        if w_prime is not None:
            dw = project_onto_basis(w_prime, b, n_q)
        else:
            x, wt = rule.mapped(xl, xr)
            wl, wr = (float(v) for v in w(np.array([xl, xr])))
            mom = wr * b.right_values() - wl * b.left_values() - b.derivatives(x) @ (wt * w(x))
            dw = ElementPolynomial(b, mom)
        pieces.append(dw.antiderivative(left_value=float(w(np.array(xl)))))
    return ProjectionResult(mesh, tuple(pieces), np.asarray(w(mesh.nodes), dtype=float))
