"""Error measurement and convergence studies against manufactured solutions."""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import asdict, dataclass, field

import numpy as np

from .mesh import uniform_mesh
from .problem import ManufacturedSolution, get_problem
from .quadrature import ElementBasis, gauss_rule
from .solver import Solution, solve

#: Errors at or below this are roundoff dominated; no rate is reported.
ROUNDOFF_FLOOR = 1e-13


@dataclass(frozen=True)
class ErrorTriple:
    """Errors of one discrete solution.

    h1_broken
        ||d_w u_h - u'||_h.
    l2
        ||P_k u - u_h^0||: distance of the interior part to the elementwise
        L2 projection of u.  This is the L2 column of the standard tables.
    nodal_max
        max_i |u_h(x_i) - u(x_i)|.
    l2_exact
        ||u - u_h^0||, limited to order k+1 by the approximation power of P_k.
    linf
        max |u - u_h^0| over the error quadrature points (only if requested).
    """

    h1_broken: float
    l2: float
    nodal_max: float
    l2_exact: float
    linf: float | None = None


def errors(sol: Solution, m: ManufacturedSolution, n_q: int | None = None, with_linf: bool = False) -> ErrorTriple:
    """Measure ``sol`` against the manufactured solution.

    Integrals use ``n_q + 2`` Gauss points per element (``n_q`` defaults to the
    order used for the solve).
    """
    u_h = sol.u_h
    k, r = u_h.k, u_h.r
    if n_q is None:
        n_q = sol.diagnostics.get("n_q", k + 4)
    rule = gauss_rule(n_q + 2)
    h1 = l2 = l2x = 0.0
    linf = 0.0
    derivs = u_h.weak_derivative()
    for i, (xl, xr) in enumerate(u_h.mesh.elements()):
        x, w = rule.mapped(xl, xr)
        Vr = ElementBasis(r, xl, xr).values(x)
        Vk = Vr[: k + 1]
        ux = m.u(x)
        c = u_h.interior[i]
        dh = derivs[i].coeffs @ Vr - m.u_prime(x)
        h1 += float(w @ dh**2)
        e0 = ux - c @ Vk
        l2x += float(w @ e0**2)
        l2 += float(np.sum((Vk @ (w * ux) - c) ** 2))
        if with_linf:
            linf = max(linf, float(np.abs(e0).max()))
    nodal = float(np.abs(u_h.node_values - m.u(u_h.mesh.nodes)).max())
    return ErrorTriple(math.sqrt(h1), math.sqrt(l2), nodal, math.sqrt(l2x), linf if with_linf else None)


def rate(e_coarse: float, e_fine: float, ratio: float = 2.0) -> float | None:
    """Observed order log(e_coarse / e_fine) / log(ratio), ratio = h_coarse / h_fine.

    ``None`` marks an undefined rate (an error that is not positive).
    """
    if not (e_coarse > 0 and e_fine > 0):
        return None
    return math.log(e_coarse / e_fine) / math.log(ratio)


def _floored_rate(e_coarse, e_fine, ratio, floor):
    if e_coarse <= floor or e_fine <= floor:
        return None
    return rate(e_coarse, e_fine, ratio)


@dataclass(frozen=True)
class Level:
    n_elements: int
    h: float
    errors: ErrorTriple
    rates: tuple[float | None, float | None, float | None]
    extra: dict = field(default_factory=dict)


@dataclass(frozen=True)
class ConvergenceReport:
    k: int
    levels: tuple[Level, ...]
    metadata: dict

    def column(self, name: str) -> np.ndarray:
        return np.array([getattr(lv.errors, name) for lv in self.levels])

    def rate_column(self, j: int) -> list[float | None]:
        return [lv.rates[j] for lv in self.levels]

    def as_dict(self) -> dict:
        return {
            "metadata": self.metadata,
            "k": self.k,
            "levels": [
                {"n_elements": lv.n_elements, "h": lv.h, "errors": asdict(lv.errors),
                 "rates": {"h1_broken": lv.rates[0], "l2": lv.rates[1], "nodal_max": lv.rates[2]}, **lv.extra}
                for lv in self.levels
            ],
        }

    def to_json(self) -> str:
        return json.dumps(self.as_dict(), indent=2, sort_keys=True) + "\n"

    def _rows(self, number, rate_fmt, h_fmt):
        for lv in self.levels:
            e = lv.errors
            yield [h_fmt(lv), number(e.h1_broken), rate_fmt(lv.rates[0]), number(e.l2), rate_fmt(lv.rates[1]),
                   number(e.nodal_max), rate_fmt(lv.rates[2])]

    def to_csv(self) -> str:
        buf = io.StringIO()
        wr = csv.writer(buf, lineterminator="\n")
        wr.writerow(["h", "e_H1", "rate", "e_L2", "rate", "e_node", "rate"])

        def sci(v):
            return f"{v:.5e}"

        def rt(v):
            return "-" if v is None else f"{v:.5f}"

        wr.writerows(self._rows(sci, rt, lambda lv: sci(lv.h)))
        return buf.getvalue()

    def to_markdown(self) -> str:
        length = self.metadata.get("length", 1.0)

        def h_fmt(lv):
            return f"1/{lv.n_elements}" if length == 1.0 else f"{lv.h:.4g}"

        def num(v):
            return f"{v:.4e}"

        def rt(v):
            return "-" if v is None else f"{v:.4f}"

        head = ["h", "e_H1", "rate", "e_L2", "rate", "e_node", "rate"]
        rows = [head] + list(self._rows(num, rt, h_fmt))
        widths = [max(len(r[j]) for r in rows) for j in range(len(head))]

        def line(r):
            return "| " + " | ".join(c.rjust(wd) for c, wd in zip(r, widths)) + " |"

        out = [line(head), "|" + "|".join("-" * (wd + 1) + ":" for wd in widths) + "|"]
        out += [line(r) for r in rows[1:]]
        return "\n".join(out) + "\n"


def convergence_study(problem, k: int, levels, method: str = "global", n_q: int | None = None,
                      with_linf: bool = False, floor: float = ROUNDOFF_FLOOR, r: int | None = None,
                      allow_higher_r: bool = False) -> ConvergenceReport:
    """Solve on uniform meshes with the given element counts.

    ``problem`` is a registry key or a ``(Problem, ManufacturedSolution)`` pair.
    """
    levels = [int(n) for n in levels]
    if not levels:
        raise ValueError("at least one level is required")
    if any(n < 1 for n in levels):
        raise ValueError(f"element counts must be positive, got {levels}")
    if isinstance(problem, str):
        p, m = get_problem(problem)
        key = problem
    else:
        p, m = problem
        key = p.name or "inline"
    n_q = k + 4 if n_q is None else n_q
    out = []
    prev = prev_h = None
    for n in levels:
        mesh = uniform_mesh(p.a, p.b, n)
        sol = solve(p, mesh, k, n_q=n_q, method=method, r=r, allow_higher_r=allow_higher_r)
        e = errors(sol, m, n_q, with_linf=with_linf)
        if prev is None:
            rates = (None, None, None)
        else:
            rates = tuple(_floored_rate(getattr(prev, f), getattr(e, f), prev_h / mesh.h, floor)
                          for f in ("h1_broken", "l2", "nodal_max"))
        out.append(Level(n, mesh.h, e, rates))
        prev, prev_h = e, mesh.h
    meta = {"problem": key, "k": k, "r": k + 1 if r is None else r, "n_q": n_q, "error_n_q": n_q + 2, "method": method,
            "length": p.length, "roundoff_floor": floor}
    return ConvergenceReport(k, tuple(out), meta)
