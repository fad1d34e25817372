"""Random integer matrix models, graph shuffles and exact enumerators.

Vertices and matrix indices are 0-based.  A graph on ``n + 1`` vertices gives
the ``n x n`` reduced Laplacian by deleting the row and column of the last
vertex.  The Laplacian follows the convention ``L = A - D``: off-diagonal
entries are the edge indicators and each diagonal entry is minus the column
sum of the off-diagonal part, so columns of the full Laplacian sum to zero.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import combinations, product
from typing import Iterator, Sequence

import numpy as np

from .linalg import IntegerMatrix

MAX_ENUMERATION = 2**24
KINDS = ("symmetric", "skew", "iid", "laplacian_er", "laplacian_digraph")
GRAPH_KINDS = ("laplacian_er", "laplacian_digraph")


def trial_rng(seed: int, trial: int) -> np.random.Generator:
    """Independent counter-based stream for one trial, keyed by ``(seed, trial)``."""
    return np.random.Generator(np.random.Philox(np.random.SeedSequence([int(seed), int(trial)])))


def _fraction(x) -> Fraction:
    if isinstance(x, Fraction):
        return x
    if isinstance(x, float):
        return Fraction(str(x))
    return Fraction(x)


@dataclass(frozen=True)
class EntryDistribution:
    """Finitely supported integer law with exact rational probabilities."""

    support: tuple[tuple[int, Fraction], ...]
    degenerate: bool = False

    def __post_init__(self):
        merged: dict[int, Fraction] = {}
        for v, pr in self.support:
            pr = _fraction(pr)
            if pr <= 0:
                raise ValueError("probabilities must be positive")
            merged[int(v)] = merged.get(int(v), Fraction(0)) + pr
        if sum(merged.values()) != 1:
            raise ValueError(f"probabilities sum to {sum(merged.values())}, not 1")
        vals = sorted(merged)
        if not self.degenerate:
            g = 0
            for v in vals[1:]:
                g = math.gcd(g, v - vals[0])
            # all values agree mod p exactly when p divides every difference
            if g != 1:
                raise ValueError(
                    "law puts all mass on one residue class mod some prime; pass degenerate=True to allow"
                )
        object.__setattr__(self, "support", tuple((v, merged[v]) for v in vals))

    @classmethod
    def uniform(cls, values: Sequence[int]) -> "EntryDistribution":
        values = list(values)
        return cls(tuple((v, Fraction(1, len(values))) for v in values))

    @classmethod
    def from_json(cls, data) -> "EntryDistribution":
        if isinstance(data, str):
            data = json.loads(data)
        return cls(tuple((int(v), Fraction(str(pr))) for v, pr in data))

    def to_json(self) -> list:
        return [[v, f"{pr.numerator}/{pr.denominator}"] for v, pr in self.support]

    @property
    def values(self) -> tuple[int, ...]:
        return tuple(v for v, _ in self.support)

    @property
    def probs(self) -> tuple[Fraction, ...]:
        return tuple(pr for _, pr in self.support)

    def residue_masses(self, p: int) -> dict[int, Fraction]:
        out: dict[int, Fraction] = {}
        for v, pr in self.support:
            out[v % p] = out.get(v % p, Fraction(0)) + pr
        return out

    def sample(self, rng: np.random.Generator, size) -> np.ndarray:
        vals = np.array(self.values, dtype=np.int64)
        if len(vals) == 1:
            return np.full(size, vals[0], dtype=np.int64)
        probs = [float(pr) for pr in self.probs]
        if all(pr == self.probs[0] for pr in self.probs):
            return vals[rng.integers(0, len(vals), size=size)]
        return rng.choice(vals, size=size, p=probs)


def alpha_for_prime(d: EntryDistribution, p: int) -> Fraction:
    """``1 - max_r P(xi = r mod p)``."""
    return 1 - max(d.residue_masses(p).values())


UNIFORM_01 = EntryDistribution.uniform([0, 1])
UNIFORM_PM1 = EntryDistribution.uniform([-1, 0, 1])


@dataclass(frozen=True)
class ModelSpec:
    """A random matrix model of size ``n``.

    For the graph kinds the matrix is the reduced Laplacian of a graph on
    ``n + 1`` vertices with edge probability ``q``.
    """

    kind: str
    n: int
    dist: EntryDistribution | None = None
    q: Fraction | None = None

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown model kind {self.kind!r}; expected one of {KINDS}")
        if int(self.n) < 1:
            raise ValueError("n must be at least 1")
        object.__setattr__(self, "n", int(self.n))
        if self.kind in GRAPH_KINDS:
            q = _fraction(self.q if self.q is not None else Fraction(1, 2))
            if not 0 < q < 1:
                raise ValueError("edge probability must lie in (0, 1)")
            object.__setattr__(self, "q", q)
            object.__setattr__(self, "dist", None)
        else:
            if self.q is not None:
                raise ValueError(f"q applies only to graph kinds, not {self.kind}")
            if self.dist is None:
                object.__setattr__(self, "dist", UNIFORM_01)

    @classmethod
    def from_json(cls, data) -> "ModelSpec":
        if isinstance(data, str):
            data = json.loads(data)
        dist = data.get("dist")
        return cls(
            data["kind"],
            int(data["n"]),
            EntryDistribution.from_json(dist) if dist is not None else None,
            _fraction(data["q"]) if data.get("q") is not None else None,
        )

    def to_json(self) -> dict:
        out = {"kind": self.kind, "n": self.n}
        if self.q is not None:
            out["q"] = float(self.q)
        if self.dist is not None:
            out["dist"] = self.dist.to_json()
        return out

    @property
    def vertices(self) -> int:
        return self.n + 1


# ---------------------------------------------------------------------------
# graphs


@dataclass(frozen=True)
class GraphSample:
    """Simple graph (or digraph) on ``vertices`` vertices as a 0/1 adjacency matrix."""

    vertices: int
    adjacency: tuple[tuple[int, ...], ...]
    directed: bool = False

    def __post_init__(self):
        adj = tuple(tuple(int(x) for x in r) for r in self.adjacency)
        n = self.vertices
        if len(adj) != n or any(len(r) != n for r in adj):
            raise ValueError("adjacency must be vertices x vertices")
        for i in range(n):
            if adj[i][i]:
                raise ValueError("loops are not allowed")
            for j in range(n):
                if adj[i][j] not in (0, 1):
                    raise ValueError("adjacency entries must be 0 or 1")
                if not self.directed and adj[i][j] != adj[j][i]:
                    raise ValueError("undirected adjacency must be symmetric")
        object.__setattr__(self, "adjacency", adj)

    @classmethod
    def from_edges(cls, vertices: int | None, edges: Sequence[tuple[int, int]], directed=False):
        edges = [(int(u), int(v)) for u, v in edges]
        if vertices is None:
            vertices = 1 + max((max(e) for e in edges), default=-1)
        adj = [[0] * vertices for _ in range(vertices)]
        for u, v in edges:
            if not (0 <= u < vertices and 0 <= v < vertices):
                raise ValueError(f"edge ({u}, {v}) out of range")
            if u == v:
                raise ValueError("loops are not allowed")
            adj[u][v] = 1
            if not directed:
                adj[v][u] = 1
        return cls(vertices, tuple(map(tuple, adj)), directed)

    @classmethod
    def parse_edges(cls, text: str, vertices: int | None = None, directed=False):
        """Edge list: ``"u v"`` pairs separated by newlines or commas."""
        edges = []
        for chunk in text.replace(",", "\n").splitlines():
            chunk = chunk.split("#")[0].strip()
            if not chunk:
                continue
            u, v = chunk.split()
            edges.append((int(u), int(v)))
        return cls.from_edges(vertices, edges, directed)

    @classmethod
    def from_adjacency_json(cls, text: str, directed=False):
        adj = json.loads(text)
        return cls(len(adj), tuple(map(tuple, adj)), directed)

    def edges(self) -> list[tuple[int, int]]:
        n = self.vertices
        if self.directed:
            return [(i, j) for i in range(n) for j in range(n) if self.adjacency[i][j]]
        return [(i, j) for i in range(n) for j in range(i + 1, n) if self.adjacency[i][j]]

    def degrees(self) -> list[int]:
        return [sum(r) for r in self.adjacency]

    def laplacian(self) -> list[list[int]]:
        """Full Laplacian ``A - D`` with ``D`` the column sums of ``A``."""
        n = self.vertices
        L = [list(r) for r in self.adjacency]
        for i in range(n):
            L[i][i] = -sum(self.adjacency[k][i] for k in range(n) if k != i)
        return L

    def reduced_laplacian(self, drop: int | None = None) -> IntegerMatrix:
        n = self.vertices
        drop = n - 1 if drop is None else drop
        if not 0 <= drop < n:
            raise ValueError(f"vertex {drop} out of range")
        L = self.laplacian()
        keep = [i for i in range(n) if i != drop]
        return IntegerMatrix(tuple(tuple(L[i][j] for j in keep) for i in keep), cols=n - 1)

    def is_connected(self) -> bool:
        n = self.vertices
        if n == 0:
            return True
        seen = {0}
        stack = [0]
        while stack:
            u = stack.pop()
            for v in range(n):
                if (self.adjacency[u][v] or self.adjacency[v][u]) and v not in seen:
                    seen.add(v)
                    stack.append(v)
        return len(seen) == n

    def with_adjacency(self, adj) -> "GraphSample":
        return GraphSample(self.vertices, tuple(map(tuple, adj)), self.directed)


def sample_graph(vertices: int, q, rng: np.random.Generator, directed=False) -> GraphSample:
    adj = _sample_adjacency(vertices, float(q), rng, directed)
    return GraphSample(vertices, tuple(map(tuple, adj.tolist())), directed)


def _sample_adjacency(m: int, q: float, rng: np.random.Generator, directed: bool) -> np.ndarray:
    if directed:
        X = (rng.random((m, m)) < q).astype(np.int64)
        np.fill_diagonal(X, 0)
        return X
    iu = np.triu_indices(m, 1)
    X = np.zeros((m, m), dtype=np.int64)
    X[iu] = rng.random(len(iu[0])) < q
    return X + X.T


def laplacian_from_adjacency(X: np.ndarray) -> np.ndarray:
    L = X.copy()
    np.fill_diagonal(L, 0)
    L[np.diag_indices_from(L)] = -L.sum(axis=0)
    return L


def sample_array(spec: ModelSpec, rng: np.random.Generator) -> np.ndarray:
    """One draw from ``spec`` as an int64 array."""
    n = spec.n
    if spec.kind == "iid":
        return spec.dist.sample(rng, (n, n))
    if spec.kind == "symmetric":
        iu = np.triu_indices(n)
        M = np.zeros((n, n), dtype=np.int64)
        M[iu] = spec.dist.sample(rng, len(iu[0]))
        return M + np.triu(M, 1).T
    if spec.kind == "skew":
        iu = np.triu_indices(n, 1)
        M = np.zeros((n, n), dtype=np.int64)
        M[iu] = spec.dist.sample(rng, len(iu[0]))
        return M - M.T
    X = _sample_adjacency(n + 1, float(spec.q), rng, spec.kind == "laplacian_digraph")
    return laplacian_from_adjacency(X)[:n, :n]


def sample(spec: ModelSpec, rng: np.random.Generator) -> IntegerMatrix:
    return IntegerMatrix(tuple(map(tuple, sample_array(spec, rng).tolist())), cols=spec.n)


# ---------------------------------------------------------------------------
# shuffles


def _check_involution(B: Sequence[int], involution: dict[int, int]) -> dict[int, int]:
    bar = {b: involution.get(b, b) for b in B}
    for b, c in bar.items():
        if c not in bar or bar[c] != b:
            raise ValueError("involution must map B to itself and square to the identity")
    return bar


def _orbits(bar: dict[int, int]) -> list[tuple[int, ...]]:
    seen, out = set(), []
    for b in sorted(bar):
        if b not in seen:
            orb = tuple(sorted({b, bar[b]}))
            seen.update(orb)
            out.append(orb)
    return out


def _ab_apply(adj, A, bar, chosen: dict[int, set[int]]) -> list[list[int]]:
    """Apply the shuffle given each ``B_i`` (``chosen[i]``) for ``i`` in ``A``."""
    m = len(adj)
    new = [list(r) for r in adj]
    for i in range(m):
        for j in range(m):
            if i == j:
                continue
            if i in chosen and j in chosen[i]:
                new[i][j] = adj[i][bar[j]]
            elif j in chosen and i in chosen[j]:
                new[i][j] = adj[bar[i]][j]
    return new


def _ab_validate(g: GraphSample, A, B, involution):
    A, B = set(A), set(B)
    if A & B:
        raise ValueError("A and B must be disjoint")
    if any(not 0 <= v < g.vertices for v in A | B):
        raise ValueError("A and B must be vertex subsets")
    return sorted(A), sorted(B), _check_involution(sorted(B), dict(involution))


def ab_shuffle_graph(g: GraphSample, A, B, involution: dict[int, int], rng) -> GraphSample:
    A, B, bar = _ab_validate(g, A, B, involution)
    orbits = _orbits(bar)
    chosen = {}
    for i in A:
        flips = rng.integers(0, 2, size=len(orbits))
        chosen[i] = {b for orb, f in zip(orbits, flips) if f for b in orb}
    return g.with_adjacency(_ab_apply(g.adjacency, A, bar, chosen))


def ab_shuffle(g: GraphSample, A, B, involution: dict[int, int], rng) -> IntegerMatrix:
    """Reduced Laplacian of the AB-shuffled graph."""
    return ab_shuffle_graph(g, A, B, involution, rng).reduced_laplacian()


def ab_shuffle_pushforward(dist: dict[GraphSample, Fraction], A, B, involution) -> dict[GraphSample, Fraction]:
    """Exact law of the AB-shuffle applied to a graph drawn from ``dist``."""
    out: dict[GraphSample, Fraction] = {}
    for g, pr in dist.items():
        A_, B_, bar = _ab_validate(g, A, B, involution)
        orbits = _orbits(bar)
        outcomes = list(product((0, 1), repeat=len(orbits) * len(A_)))
        w = pr / len(outcomes)
        for bits in outcomes:
            chosen = {}
            for a_idx, i in enumerate(A_):
                sel = bits[a_idx * len(orbits):(a_idx + 1) * len(orbits)]
                chosen[i] = {b for orb, f in zip(orbits, sel) if f for b in orb}
            h = g.with_adjacency(_ab_apply(g.adjacency, A_, bar, chosen))
            out[h] = out.get(h, Fraction(0)) + w
    return out


def _check_ordering(g: GraphSample, ordering: Sequence[int]) -> list[int]:
    o = [int(v) for v in ordering]
    if sorted(o) != list(range(g.vertices)) or o[-1] != g.vertices - 1:
        raise ValueError("ordering must be a permutation of the vertices ending with the last vertex")
    return o


def reshuffle_sets(g_adj, o: Sequence[int], N: int) -> list[int]:
    """``I_N``: earlier vertices adjacent to exactly one of ``o[N]``, ``o[N+1]``."""
    a, b = o[N], o[N + 1]
    return [o[j] for j in range(N) if g_adj[o[j]][a] != g_adj[o[j]][b]]


def _swap(adj, j, a, b):
    adj[j][a], adj[j][b] = adj[j][b], adj[j][a]
    adj[a][j], adj[b][j] = adj[j][a], adj[j][b]


def neighbor_reshuffle(g: GraphSample, ordering: Sequence[int], rng, record: list | None = None) -> GraphSample:
    """Coin-flip reshuffle of the neighbours of consecutive vertex pairs along ``ordering``.

    If ``record`` is a list, the sizes ``|I_N|`` are appended to it.
    """
    o = _check_ordering(g, ordering)
    adj = [list(r) for r in g.adjacency]
    for N in range(len(o) - 1):
        I = reshuffle_sets(adj, o, N)
        if record is not None:
            record.append(len(I))
        if not I:
            continue
        flips = rng.integers(0, 2, size=len(I))
        for j, f in zip(I, flips):
            if f:
                _swap(adj, j, o[N], o[N + 1])
    return g.with_adjacency(adj)


def neighbor_reshuffle_pushforward(dist: dict[GraphSample, Fraction], ordering) -> dict[GraphSample, Fraction]:
    """Exact law of :func:`neighbor_reshuffle` applied to a graph drawn from ``dist``."""
    cur = dict(dist)
    some = next(iter(cur))
    o = _check_ordering(some, ordering)
    for N in range(len(o) - 1):
        nxt: dict[GraphSample, Fraction] = {}
        for g, pr in cur.items():
            I = reshuffle_sets(g.adjacency, o, N)
            w = pr / 2 ** len(I)
            for bits in product((0, 1), repeat=len(I)):
                adj = [list(r) for r in g.adjacency]
                for j, f in zip(I, bits):
                    if f:
                        _swap(adj, j, o[N], o[N + 1])
                h = g.with_adjacency(adj)
                nxt[h] = nxt.get(h, Fraction(0)) + w
        cur = nxt
    return cur


# ---------------------------------------------------------------------------
# exact enumeration


def enumerate_graphs(vertices: int, q=Fraction(1, 2), directed=False) -> Iterator[tuple[GraphSample, Fraction]]:
    q = _fraction(q)
    if directed:
        slots = [(i, j) for i in range(vertices) for j in range(vertices) if i != j]
    else:
        slots = list(combinations(range(vertices), 2))
    if 2 ** len(slots) > MAX_ENUMERATION:
        raise ValueError(f"{2 ** len(slots)} graphs exceed the enumeration bound")
    for bits in product((0, 1), repeat=len(slots)):
        adj = [[0] * vertices for _ in range(vertices)]
        e = 0
        for (i, j), b in zip(slots, bits):
            if b:
                e += 1
                adj[i][j] = 1
                if not directed:
                    adj[j][i] = 1
        pr = q**e * (1 - q) ** (len(slots) - e)
        yield GraphSample(vertices, tuple(map(tuple, adj)), directed), pr


def graph_law(vertices: int, q=Fraction(1, 2), directed=False) -> dict[GraphSample, Fraction]:
    return dict(enumerate_graphs(vertices, q, directed))


def outcome_count(spec: ModelSpec) -> int:
    n = spec.n
    if spec.kind in GRAPH_KINDS:
        m = n + 1
        return 2 ** (m * (m - 1) if spec.kind == "laplacian_digraph" else m * (m - 1) // 2)
    free = {"symmetric": n * (n + 1) // 2, "skew": n * (n - 1) // 2, "iid": n * n}[spec.kind]
    return len(spec.dist.support) ** free


def enumerate_all(spec: ModelSpec) -> Iterator[tuple[IntegerMatrix, Fraction]]:
    """Every realisation of ``spec`` with its exact probability."""
    total = outcome_count(spec)
    if total > MAX_ENUMERATION:
        raise ValueError(f"{total} outcomes exceed the enumeration bound {MAX_ENUMERATION}")
    n = spec.n
    if spec.kind in GRAPH_KINDS:
        for g, pr in enumerate_graphs(n + 1, spec.q, spec.kind == "laplacian_digraph"):
            yield g.reduced_laplacian(), pr
        return
    if spec.kind == "iid":
        slots = [(i, j) for i in range(n) for j in range(n)]
    elif spec.kind == "symmetric":
        slots = [(i, j) for i in range(n) for j in range(i, n)]
    else:
        slots = [(i, j) for i in range(n) for j in range(i + 1, n)]
    for choice in product(spec.dist.support, repeat=len(slots)):
        M = [[0] * n for _ in range(n)]
        pr = Fraction(1)
        for (i, j), (v, w) in zip(slots, choice):
            pr *= w
            M[i][j] = v
            if spec.kind == "symmetric":
                M[j][i] = v
            elif spec.kind == "skew":
                M[j][i] = -v
        yield IntegerMatrix(tuple(map(tuple, M)), cols=n), pr
