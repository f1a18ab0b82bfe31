"""Two-point boundary value problems and manufactured solutions.

The self-adjoint model problem is

    -(a2 u')' + a0 u = f  on (a, b),   u(a) = 0,  u'(b) = 0,

with a2 >= a_min > 0 and a0 >= 0.  A first-order term a1 u' is removed by
multiplying through by rho(x) = exp(-int_a^x a1/a2), see :func:`to_self_adjoint`.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from typing import Callable

import numpy as np
from scipy.interpolate import CubicHermiteSpline

from .quadrature import gauss_rule

Fn = Callable[[np.ndarray], np.ndarray]


def _zero(x):
    return np.zeros_like(np.asarray(x, dtype=float))


def _one(x):
    return np.ones_like(np.asarray(x, dtype=float))


@dataclass(frozen=True)
class Problem:
    """Self-adjoint problem data.  ``a_min`` is a certified lower bound of a2."""

    a: float
    b: float
    a2: Fn
    a0: Fn
    f: Fn
    a_min: float
    a2_prime: Fn | None = None
    name: str = ""

    def __post_init__(self):
        if not self.a < self.b:
            raise ValueError(f"need a < b, got ({self.a}, {self.b})")
        if not self.a_min > 0:
            raise ValueError("a_min must be positive")

    @property
    def length(self) -> float:
        return self.b - self.a

    def with_source(self, f: Fn) -> "Problem":
        return replace(self, f=f)


@dataclass(frozen=True)
class GeneralProblem:
    """-(a2 u')' + a1 u' + a0 u = f with the same boundary conditions."""

    a: float
    b: float
    a1: Fn
    a2: Fn
    a0: Fn
    f: Fn
    a_min: float
    a2_prime: Fn | None = None
    name: str = ""

    def __post_init__(self):
        if not self.a < self.b:
            raise ValueError(f"need a < b, got ({self.a}, {self.b})")
        if not self.a_min > 0:
            raise ValueError("a_min must be positive")


@dataclass(frozen=True)
class ManufacturedSolution:
    u: Fn
    u_prime: Fn
    u_double_prime: Fn

    def check_boundary(self, a: float, b: float, tol: float = 1e-12) -> None:
        ua, dub = float(self.u(np.array(a))), float(self.u_prime(np.array(b)))
        if abs(ua) > tol or abs(dub) > tol:
            raise ValueError(f"manufactured solution violates u(a)=0, u'(b)=0: u(a)={ua:.3e}, u'(b)={dub:.3e}")


def manufactured_source(a2: Fn, a2_prime: Fn, a0: Fn, m: ManufacturedSolution) -> Fn:
    """f = -(a2' u' + a2 u'') + a0 u."""

    def f(x):
        x = np.asarray(x, dtype=float)
        return -(a2_prime(x) * m.u_prime(x) + a2(x) * m.u_double_prime(x)) + a0(x) * m.u(x)

    return f


class Rho:
    """rho(x) = exp(-int_a^x a1/a2), cached on a fine grid.

    Values at the cache points come from cumulative composite Gauss
    quadrature; in between, a cubic Hermite interpolant uses the exact slope
    rho' = -(a1/a2) rho.
    """

    def __init__(self, a1: Fn, a2: Fn, a: float, b: float, n_q: int = 8, n_cells: int = 2048):
        self.a, self.b = a, b
        grid = np.linspace(a, b, n_cells + 1)
        rule = gauss_rule(n_q)
        half = 0.5 * np.diff(grid)
        x = grid[:-1, None] + half[:, None] * (rule.points[None, :] + 1.0)
        with np.errstate(divide="ignore", invalid="ignore"):
            ratio = np.asarray(a1(x), dtype=float) / np.asarray(a2(x), dtype=float)
        if not np.all(np.isfinite(ratio)):
            raise ValueError("a1/a2 is not finite at some quadrature node")
        cell = (ratio * rule.weights[None, :]).sum(axis=1) * half
        log_rho = -np.concatenate([[0.0], np.cumsum(cell)])
        vals = np.exp(log_rho)
        with np.errstate(divide="ignore", invalid="ignore"):
            r_end = np.asarray(a1(grid), dtype=float) / np.asarray(a2(grid), dtype=float)
        if not np.all(np.isfinite(r_end)):
            raise ValueError("a1/a2 is not finite on the cache grid")
        self._a1, self._a2 = a1, a2
        self._spline = CubicHermiteSpline(grid, vals, -r_end * vals)
        self.grid_values = vals
        self.minimum = float(vals.min())

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        out = self._spline(x)
        return np.where(x == self.a, 1.0, out)

    def derivative(self, x):
        x = np.asarray(x, dtype=float)
        return -self._a1(x) / self._a2(x) * self(x)


def to_self_adjoint(g: GeneralProblem, n_q: int = 8, n_cells: int = 2048) -> tuple[Problem, Rho]:
    """Multiply by rho to drop the first-order term.

    Returns the self-adjoint problem (rho a2, rho a0, rho f) and rho itself.
    The lower bound becomes a_min * min(rho) over the cache grid.
    """
    rho = Rho(g.a1, g.a2, g.a, g.b, n_q=n_q, n_cells=n_cells)

    def a2(x):
        return rho(x) * g.a2(x)

    def a0(x):
        return rho(x) * g.a0(x)

    def f(x):
        return rho(x) * g.f(x)

    a2_prime = None
    if g.a2_prime is not None:

        def a2_prime(x):
            x = np.asarray(x, dtype=float)
            return rho(x) * (g.a2_prime(x) - g.a1(x))

    p = Problem(g.a, g.b, a2, a0, f, g.a_min * rho.minimum, a2_prime=a2_prime, name=g.name)
    return p, rho


# ---------------------------------------------------------------------------
# registry
# ---------------------------------------------------------------------------


def _sine_solution() -> ManufacturedSolution:
    pi = np.pi
    return ManufacturedSolution(
        u=lambda x: 2.0 * (1.0 - x) * np.sin(pi * x),
        u_prime=lambda x: -2.0 * np.sin(pi * x) + 2.0 * pi * (1.0 - x) * np.cos(pi * x),
        u_double_prime=lambda x: -4.0 * pi * np.cos(pi * x) - 2.0 * pi**2 * (1.0 - x) * np.sin(pi * x),
    )


def _quadratic_solution() -> ManufacturedSolution:
    return ManufacturedSolution(
        u=lambda x: 2.0 * x - x**2,
        u_prime=lambda x: 2.0 - 2.0 * x,
        u_double_prime=lambda x: -2.0 * np.ones_like(np.asarray(x, dtype=float)),
    )


@dataclass(frozen=True)
class RegistryEntry:
    problem: Problem
    solution: ManufacturedSolution


def _make(name, a2, a2_prime, a0, a_min, sol, a=0.0, b=1.0) -> RegistryEntry:
    sol.check_boundary(a, b)
    f = manufactured_source(a2, a2_prime, a0, sol)
    return RegistryEntry(Problem(a, b, a2, a0, f, a_min, a2_prime=a2_prime, name=name), sol)


def _build_registry() -> dict[str, RegistryEntry]:
    sine = _sine_solution()
    return {
        # u = 2(1-x) sin(pi x), a2 = 1 + x^2, a0 = sin(pi x)
        "paper-5.6": _make(
            "paper-5.6", lambda x: 1.0 + x**2, lambda x: 2.0 * x, lambda x: np.sin(np.pi * x), 1.0, sine
        ),
        "paper-5.6-a0zero": _make("paper-5.6-a0zero", lambda x: 1.0 + x**2, lambda x: 2.0 * x, _zero, 1.0, sine),
        "poisson-quadratic": _make("poisson-quadratic", _one, _zero, _zero, 1.0, _quadratic_solution()),
    }


REGISTRY: dict[str, RegistryEntry] = _build_registry()


def get_problem(key: str) -> tuple[Problem, ManufacturedSolution]:
    try:
        entry = REGISTRY[key]
    except KeyError:
        raise KeyError(f"unknown problem {key!r}; known: {sorted(REGISTRY)}") from None
    return entry.problem, entry.solution
