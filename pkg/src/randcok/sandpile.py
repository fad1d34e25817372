"""Sandpile groups: chip-firing moves, divisor classes and spanning trees."""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass
from functools import lru_cache

from .abelian import AbelianGroup
from .linalg import cokernel, determinant, snf
from .models import GraphSample


@dataclass(frozen=True)
class Divisor:
    """Integer chip count on each vertex of an undirected graph."""

    graph: GraphSample
    values: tuple[int, ...]

    def __post_init__(self):
        vals = tuple(int(x) for x in self.values)
        if len(vals) != self.graph.vertices:
            raise ValueError("one value per vertex required")
        if self.graph.directed:
            raise ValueError("chip firing here is for undirected graphs")
        object.__setattr__(self, "values", vals)

    @property
    def degree(self) -> int:
        return sum(self.values)

    def _move(self, v: int, sign: int) -> "Divisor":
        if not 0 <= v < self.graph.vertices:
            raise ValueError(f"vertex {v} out of range")
        adj = self.graph.adjacency[v]
        vals = list(self.values)
        vals[v] -= sign * sum(adj)
        for u, e in enumerate(adj):
            if e:
                vals[u] += sign
        return Divisor(self.graph, tuple(vals))


def fire(d: Divisor, v: int) -> Divisor:
    """Vertex ``v`` sends one chip along each incident edge."""
    return d._move(v, 1)


def borrow(d: Divisor, v: int) -> Divisor:
    """Vertex ``v`` takes one chip along each incident edge (inverse of firing)."""
    return d._move(v, -1)


def sandpile_group(g: GraphSample, drop: int | None = None) -> AbelianGroup:
    """Cokernel of the reduced Laplacian (last vertex deleted by default)."""
    if g.directed:
        raise ValueError("use the reduced directed Laplacian via cokernel() for digraphs")
    if g.vertices <= 1:
        return AbelianGroup()
    return cokernel(g.reduced_laplacian(drop))


def spanning_tree_count(g: GraphSample) -> int:
    """Kirchhoff: absolute determinant of a reduced Laplacian."""
    if g.vertices <= 1:
        return 1
    return abs(determinant(g.reduced_laplacian()))


def spanning_tree_count_contraction(g: GraphSample) -> int:
    """Deletion-contraction count on the underlying multigraph (independent oracle)."""
    edges = Counter(tuple(sorted(e)) for e in g.edges())
    return _dc(g.vertices, frozenset(edges.items()))


@lru_cache(maxsize=None)
def _dc(nv: int, edges: frozenset) -> int:
    if nv == 1:
        return 1
    ed = dict(edges)
    if not ed:
        return 0
    (u, v), mult = min(ed.items())
    # delete all parallel copies of uv
    rest = {e: m for e, m in ed.items() if e != (u, v)}
    deleted = _dc(nv, frozenset(rest.items()))
    # contract uv: merge v into u, drop loops, relabel to keep vertices 0..nv-2
    merged: Counter = Counter()
    for (a, b), m in rest.items():
        a = u if a == v else a
        b = u if b == v else b
        if a == b:
            continue
        a = a - 1 if a > v else a
        b = b - 1 if b > v else b
        merged[tuple(sorted((a, b)))] += m
    contracted = _dc(nv - 1, frozenset(merged.items()))
    return deleted + mult * contracted


def divisor_equivalent(d1: Divisor, d2: Divisor) -> bool:
    """Whether ``d1`` and ``d2`` differ by chip-firing, i.e. ``d1 - d2`` is in ``L Z^n``."""
    if d1.graph != d2.graph:
        raise ValueError("divisors live on different graphs")
    if d1.degree != d2.degree:
        raise ValueError("divisors of different degree are never equivalent")
    b = [x - y for x, y in zip(d1.values, d2.values)]
    L = d1.graph.laplacian()
    sf = snf(L, want_transforms=True)
    Ub = [sum(u * x for u, x in zip(row, b)) for row in sf.U]
    for i, c in enumerate(Ub):
        d = sf.invariant_factors[i] if i < sf.rank else 0
        if (d == 0 and c != 0) or (d and c % d):
            return False
    return True
