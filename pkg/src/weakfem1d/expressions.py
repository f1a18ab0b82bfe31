"""Coefficient functions built from a small closed set of JSON-described terms.

A coefficient is a number, one term, or a list of terms that are summed::

    {"poly": [c0, c1, c2]}                      c0 + c1 x + c2 x^2
    {"sin": {"amp": A, "freq": w, "shift": s}}  A sin(w x + s)
    {"cos": {...}}, {"exp": {...}}              likewise

A term may carry ``"times": [p0, p1, ...]`` to multiply it by a polynomial, so
2(1-x) sin(pi x) is ``{"sin": {"freq": "pi"}, "times": [2, -2]}``.  Numbers
may be written as ``"pi"`` or ``{"pi": m}`` (m times pi).

Every expression is closed under differentiation, which is what lets a
manufactured solution given this way produce its own source term.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Any

import numpy as np
from numpy.polynomial import Polynomial

_KINDS = ("one", "sin", "cos", "exp")


def _number(v: Any) -> float:
    if isinstance(v, (int, float)) and not isinstance(v, bool):
        return float(v)
    if v == "pi":
        return float(np.pi)
    if isinstance(v, dict) and set(v) == {"pi"}:
        return _number(v["pi"]) * np.pi
    raise ValueError(f"not a number: {v!r}")


def _poly(coefs: Any) -> Polynomial:
    if isinstance(coefs, dict) and set(coefs) == {"poly"}:
        coefs = coefs["poly"]
    if not isinstance(coefs, list) or not coefs:
        raise ValueError(f"polynomial needs a nonempty coefficient list, got {coefs!r}")
    return Polynomial([_number(c) for c in coefs])


@dataclass(frozen=True)
class _Term:
    poly: Polynomial
    kind: str = "one"
    freq: float = 0.0
    shift: float = 0.0

    def __call__(self, x):
        p = self.poly(x)
        if self.kind == "one":
            return p
        arg = self.freq * x + self.shift
        return p * {"sin": np.sin, "cos": np.cos, "exp": np.exp}[self.kind](arg)

    def derivative(self) -> list["_Term"]:
        p, dp, w = self.poly, self.poly.deriv(), self.freq
        if self.kind == "one":
            return [_Term(dp)]
        if self.kind == "exp":
            return [_Term(dp + w * p, "exp", w, self.shift)]
        other = "cos" if self.kind == "sin" else "sin"
        sign = 1.0 if self.kind == "sin" else -1.0
        return [_Term(dp, self.kind, w, self.shift), _Term(sign * w * p, other, w, self.shift)]


class Expr:
    """Vectorised sum of terms poly(x) * g(w x + s) with g in {1, sin, cos, exp}."""

    def __init__(self, terms: list[_Term]):
        self.terms = tuple(terms)

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        out = np.zeros_like(x)
        for t in self.terms:
            out = out + t(x)
        return out

    def derivative(self) -> "Expr":
        return Expr([d for t in self.terms for d in t.derivative()])

    def __repr__(self):
        return f"Expr({len(self.terms)} terms)"


def _parse_term(t: Any) -> _Term:
    if not isinstance(t, dict):
        raise ValueError(f"term must be an object, got {t!r}")
    t = dict(t)
    mult = _poly(t.pop("times")) if "times" in t else Polynomial([1.0])
    if len(t) != 1:
        raise ValueError(f"term must have exactly one primitive, got {sorted(t)}")
    ((kind, arg),) = t.items()
    if kind == "poly":
        return _Term(_poly(arg) * mult)
    if kind not in _KINDS[1:]:
        raise ValueError(f"unknown primitive {kind!r}; allowed: poly, sin, cos, exp")
    if not isinstance(arg, dict):
        raise ValueError(f"{kind!r} takes an object with amp, freq, shift")
    arg = dict(arg)
    amp = _number(arg.pop("amp", 1.0))
    freq = _number(arg.pop("freq", 1.0))
    shift = _number(arg.pop("shift", 0.0))
    if arg:
        raise ValueError(f"unexpected keys {sorted(arg)} in {kind!r}")
    return _Term(amp * mult, kind, freq, shift)


def parse_expression(spec: Any) -> Expr:
    """Build an :class:`Expr` from a number, a term, or a list of terms."""
    if isinstance(spec, (int, float)) and not isinstance(spec, bool):
        return Expr([_Term(Polynomial([float(spec)]))])
    if isinstance(spec, dict):
        spec = [spec]
    if not isinstance(spec, list) or not spec:
        raise ValueError(f"coefficient must be a number, a term or a list of terms, got {spec!r}")
    return Expr([_parse_term(t) for t in spec])
