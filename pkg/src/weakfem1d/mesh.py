"""Partitions of an interval and their refinement."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterator, Mapping, Sequence

import numpy as np


@dataclass(frozen=True, eq=False)
class Mesh1D:
    """Strictly increasing nodes a = x_1 < ... < x_N = b.

    Meshes are immutable; refinement returns a new object.
    """

    nodes: np.ndarray

    def __post_init__(self):
        x = np.array(self.nodes, dtype=float).reshape(-1)
        if x.size < 2:
            raise ValueError("a mesh needs at least two nodes")
        if not np.all(np.isfinite(x)):
            raise ValueError("mesh nodes must be finite")
        if np.any(np.diff(x) <= 0):
            raise ValueError("mesh nodes must be strictly increasing")
        x.setflags(write=False)
        object.__setattr__(self, "nodes", x)

    def __eq__(self, other):
        return isinstance(other, Mesh1D) and np.array_equal(self.nodes, other.nodes)

    def __hash__(self):
        return hash(self.nodes.tobytes())

    @property
    def a(self) -> float:
        return float(self.nodes[0])

    @property
    def b(self) -> float:
        return float(self.nodes[-1])

    @property
    def n_nodes(self) -> int:
        return self.nodes.size

    @property
    def n_elements(self) -> int:
        return self.nodes.size - 1

    @property
    def sizes(self) -> np.ndarray:
        return np.diff(self.nodes)

    @property
    def h(self) -> float:
        return float(self.sizes.max())

    def element(self, i: int) -> tuple[float, float]:
        return float(self.nodes[i]), float(self.nodes[i + 1])

    def elements(self) -> Iterator[tuple[float, float]]:
        for i in range(self.n_elements):
            yield self.element(i)

    def __repr__(self):
        return f"Mesh1D(a={self.a}, b={self.b}, n_elements={self.n_elements})"


def uniform_mesh(a: float, b: float, n_elements: int) -> Mesh1D:
    if not a < b:
        raise ValueError(f"need a < b, got ({a}, {b})")
    if int(n_elements) != n_elements or n_elements < 1:
        raise ValueError("n_elements must be a positive integer")
    nodes = np.linspace(a, b, int(n_elements) + 1)
    nodes[0], nodes[-1] = a, b
    return Mesh1D(nodes)


def quasi_uniformity(mesh: Mesh1D) -> float:
    """max_i h / h_i, equal to 1 exactly for a uniform mesh."""
    s = mesh.sizes
    return float(s.max() / s.min())


def bisect(mesh: Mesh1D) -> Mesh1D:
    """Split every element at its midpoint."""
    x = mesh.nodes
    out = np.empty(2 * x.size - 1)
    out[0::2] = x
    out[1::2] = 0.5 * (x[:-1] + x[1:])
    return Mesh1D(out)


def mesh_from_config(spec: Mapping | Sequence[float], a: float = 0.0, b: float = 1.0) -> Mesh1D:
    """Build a mesh from ``{"uniform": n}`` or an explicit node list."""
    if isinstance(spec, Mapping):
        if set(spec) != {"uniform"}:
            raise ValueError(f"mesh mapping must be {{'uniform': n}}, got {dict(spec)!r}")
        return uniform_mesh(a, b, spec["uniform"])
    mesh = Mesh1D(spec)
    if not (np.isclose(mesh.a, a) and np.isclose(mesh.b, b)):
        raise ValueError(f"mesh nodes must span ({a}, {b}), got ({mesh.a}, {mesh.b})")
    return mesh
