"""Finitely generated abelian groups and the counting functions built on them.

A group is stored in invariant-factor form ``Z^f x Z/d1 x ... x Z/dk`` with
``d1 | d2 | ... | dk`` and every ``di >= 2``.  Most counts (automorphisms,
symplectic automorphisms, perfect pairings, subgroups) factor over Sylow
subgroups, so the brute-force routines work one prime at a time on a
``p``-group given by its type.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from itertools import product
from typing import Iterable, Iterator, Sequence

import numpy as np
from sympy import factorint

from .linalg import _chain, invariant_factors

# brute-force guards (group order, and number of generator-image candidates)
AUT_BRUTE_MAX_ORDER = 2**12
PAIRING_MAX_ORDER = 2**10
SUBGROUP_MAX_ORDER = 10**4
MAX_CANDIDATES = 2**22


@dataclass(frozen=True, order=True)
class AbelianGroup:
    """``Z^free_rank x Z/torsion[0] x ...`` in canonical invariant-factor form.

    Any list of cyclic orders is accepted and normalised: 0 means a copy of Z,
    1 is dropped, the rest is rearranged into a divisibility chain.
    """

    free_rank: int = 0
    torsion: tuple[int, ...] = ()

    def __post_init__(self):
        free = int(self.free_rank)
        if free < 0:
            raise ValueError("negative free rank")
        orders = [abs(int(d)) for d in self.torsion]
        free += sum(1 for d in orders if d == 0)
        chain = _chain([d for d in orders if d > 1])
        object.__setattr__(self, "free_rank", free)
        object.__setattr__(self, "torsion", tuple(d for d in chain if d > 1))

    @classmethod
    def cyclic(cls, n: int) -> "AbelianGroup":
        return cls(0, (n,))

    @classmethod
    def trivial(cls) -> "AbelianGroup":
        return cls(0, ())

    @classmethod
    def parse(cls, text: str) -> "AbelianGroup":
        """Parse ``"Z^f x Z/d1 x Z/d2 ..."``; ``0``, ``1`` and ``trivial`` mean the trivial group."""
        text = text.strip()
        if text in ("0", "1", "trivial", ""):
            return cls()
        free, tors = 0, []
        for tok in re.split(r"\s*[x×*]\s*", text):
            m = re.fullmatch(r"Z(?:\^(\d+))?", tok)
            if m:
                free += int(m.group(1) or 1)
                continue
            m = re.fullmatch(r"Z/(\d+)(?:Z)?(?:\^(\d+))?", tok) or re.fullmatch(
                r"\(Z/(\d+)(?:Z)?\)\^(\d+)", tok
            )
            if not m:
                raise ValueError(f"cannot parse group factor {tok!r}")
            d, e = int(m.group(1)), int(m.group(2) or 1)
            if d == 0:
                raise ValueError("Z/0 is ambiguous; write Z")
            tors += [d] * e
        return cls(free, tuple(tors))

    def __str__(self) -> str:
        parts = []
        if self.free_rank == 1:
            parts.append("Z")
        elif self.free_rank > 1:
            parts.append(f"Z^{self.free_rank}")
        parts += [f"Z/{d}" for d in self.torsion]
        return " x ".join(parts) if parts else "0"

    @property
    def is_finite(self) -> bool:
        return self.free_rank == 0

    @property
    def torsion_order(self) -> int:
        return math.prod(self.torsion)

    @property
    def order(self) -> int:
        if self.free_rank:
            raise ValueError(f"{self} is infinite")
        return self.torsion_order

    @property
    def exponent(self) -> int:
        if self.free_rank:
            raise ValueError(f"{self} is infinite")
        return self.torsion[-1] if self.torsion else 1

    @property
    def torsion_part(self) -> "AbelianGroup":
        return AbelianGroup(0, self.torsion)

    def primes(self) -> list[int]:
        return sorted(factorint(self.torsion_order)) if self.torsion else []

    def sylow(self, p: int) -> "PartitionType":
        return sylow(self, p)

    def __add__(self, other: "AbelianGroup") -> "AbelianGroup":
        """Direct sum."""
        return AbelianGroup(self.free_rank + other.free_rank, self.torsion + other.torsion)

    def tensor_cyclic(self, a: int) -> "AbelianGroup":
        """``G (x) Z/a``."""
        return AbelianGroup(0, (a,) * self.free_rank + tuple(math.gcd(d, a) for d in self.torsion))


@dataclass(frozen=True)
class PartitionType:
    """Type ``lambda_1 >= lambda_2 >= ...`` of the abelian ``p``-group ``+ Z/p^lambda_i``."""

    p: int
    parts: tuple[int, ...] = ()

    def __post_init__(self):
        parts = tuple(sorted((int(x) for x in self.parts if x), reverse=True))
        if any(x < 0 for x in parts):
            raise ValueError("partition parts must be positive")
        object.__setattr__(self, "parts", parts)

    def conjugate(self) -> tuple[int, ...]:
        if not self.parts:
            return ()
        return tuple(sum(1 for x in self.parts if x >= i) for i in range(1, self.parts[0] + 1))

    @property
    def rank(self) -> int:
        return len(self.parts)

    @property
    def order(self) -> int:
        return self.p ** sum(self.parts)

    def group(self) -> AbelianGroup:
        return AbelianGroup(0, tuple(self.p**x for x in self.parts))

    def __str__(self) -> str:
        return f"{self.p}:{self.parts}"


def _valuation(n: int, p: int) -> int:
    v = 0
    while n % p == 0:
        n //= p
        v += 1
    return v


def sylow(G: AbelianGroup, p: int) -> PartitionType:
    return PartitionType(p, tuple(_valuation(d, p) for d in G.torsion))


def sylow_decomposition(G: AbelianGroup) -> dict[int, PartitionType]:
    return {p: sylow(G, p) for p in G.primes()}


def _parts_of_group(G: AbelianGroup, p: int) -> tuple[int, ...]:
    return sylow(G, p).parts


# ---------------------------------------------------------------------------
# predicates


def is_cyclic(G: AbelianGroup) -> bool:
    k = len(G.torsion)
    return k + G.free_rank <= 1


def torsion_is_square(G: AbelianGroup) -> bool:
    t = G.torsion
    return len(t) % 2 == 0 and all(t[i] == t[i + 1] for i in range(0, len(t), 2))


def is_square_of_cyclic_torsion(G: AbelianGroup) -> bool:
    t = G.torsion
    return len(t) == 0 or (len(t) == 2 and t[0] == t[1])


def square_root(B: AbelianGroup) -> AbelianGroup:
    """``H`` with ``B = H x H`` (torsion only)."""
    if B.free_rank or not torsion_is_square(B):
        raise ValueError(f"{B} is not of the form H x H")
    return AbelianGroup(0, B.torsion[::2])


# ---------------------------------------------------------------------------
# Hom and Sur


def _torsion_count(G: AbelianGroup, d: int) -> int:
    """``|G[d]|`` for finite ``G``."""
    return math.prod(math.gcd(d, e) for e in G.torsion)


def hom_count(A: AbelianGroup, G: AbelianGroup) -> int:
    if G.free_rank:
        raise ValueError("target group must be finite")
    out = G.order ** A.free_rank
    for d in A.torsion:
        out *= _torsion_count(G, d)
    return out


def _lattices(p: int, bounds: Sequence[int]) -> Iterator[list[list[int]]]:
    """Lower-triangular Hermite bases of lattices ``L`` with ``diag(p^bounds) Z^r <= L <= Z^r``."""
    r = len(bounds)
    rows: list[list[int]] = []

    def contains_axis(i: int) -> bool:
        v = [0] * r
        v[i] = p ** bounds[i]
        for k in range(i, -1, -1):
            q, rem = divmod(v[k], rows[k][k])
            if rem:
                return False
            if q:
                rk = rows[k]
                for j in range(k + 1):
                    v[j] -= q * rk[j]
        return True

    def rec(i: int):
        if i == r:
            yield [row[:] for row in rows]
            return
        for a in range(bounds[i] + 1):
            for offs in product(*(range(rows[j][j]) for j in range(i))):
                rows.append(list(offs) + [p**a] + [0] * (r - i - 1))
                if contains_axis(i):
                    yield from rec(i + 1)
                rows.pop()

    yield from rec(0)


def _sub_and_quotient(p: int, lam: Sequence[int], L: list[list[int]]) -> tuple[AbelianGroup, AbelianGroup]:
    """Types of ``H = L/K`` and ``G/H = Z^r/L`` for ``K = diag(p^lam)``."""
    r = len(lam)
    # K = X L with L lower triangular: solve row by row
    X = []
    for i in range(r):
        target = [0] * r
        target[i] = p ** lam[i]
        x = [0] * r
        for k in range(r - 1, -1, -1):
            s = target[k] - sum(x[j] * L[j][k] for j in range(k + 1, r))
            q, rem = divmod(s, L[k][k])
            assert rem == 0
            x[k] = q
        X.append(x)
    fx, rx, mx = invariant_factors(X)
    fl, rl, ml = invariant_factors(L)
    return AbelianGroup(mx - rx, tuple(fx)), AbelianGroup(ml - rl, tuple(fl))


def _check_subgroup_bound(G: AbelianGroup, bound: int = SUBGROUP_MAX_ORDER):
    if G.free_rank:
        raise ValueError("group must be finite")
    if G.order > bound:
        raise ValueError(f"|G| = {G.order} exceeds the enumeration bound {bound}")


@lru_cache(maxsize=None)
def _p_subgroups(p: int, lam: tuple[int, ...]) -> tuple[tuple[AbelianGroup, AbelianGroup], ...]:
    return tuple(_sub_and_quotient(p, lam, L) for L in _lattices(p, lam))


def subgroup_lattice(G: AbelianGroup) -> list[tuple[AbelianGroup, AbelianGroup]]:
    """Every subgroup ``H <= G`` as the pair of types ``(H, G/H)``, with repetition."""
    _check_subgroup_bound(G)
    out = [(AbelianGroup(), AbelianGroup())]
    for p in G.primes():
        local = _p_subgroups(p, _parts_of_group(G, p))
        out = [(h + hp, q + qp) for h, q in out for hp, qp in local]
    return out


def subgroups(G: AbelianGroup) -> list[AbelianGroup]:
    """Isomorphism types of all subgroups, one entry per subgroup."""
    return sorted(h for h, _ in subgroup_lattice(G))


@lru_cache(maxsize=None)
def _frattini_cover(p: int, lam: tuple[int, ...]) -> tuple[tuple[AbelianGroup, int], ...]:
    """Subgroups ``H`` with ``pG <= H`` and the rank of the elementary quotient ``G/H``."""
    out = []
    for L in _lattices(p, (1,) * len(lam)):
        h, _ = _sub_and_quotient(p, lam, L)
        k = sum(_valuation(L[i][i], p) for i in range(len(lam)))
        out.append((h, k))
    return tuple(out)


@lru_cache(maxsize=4096)
def sur_count(A: AbelianGroup, G: AbelianGroup) -> int:
    """Number of surjections ``A -> G`` by Moebius inversion over subgroups of ``G``.

    The Moebius function of the subgroup lattice vanishes unless ``G/H`` is
    elementary abelian, where it equals ``(-1)^k p^(k choose 2)``; both sides
    factor over the Sylow subgroups of ``G``.
    """
    _check_subgroup_bound(G)
    total = 1
    for p in G.primes():
        s = 0
        for h, k in _frattini_cover(p, _parts_of_group(G, p)):
            s += (-1) ** k * p ** (k * (k - 1) // 2) * hom_count(A, h)
        total *= s
        if total == 0:
            break
    return total


# ---------------------------------------------------------------------------
# automorphisms


def _p_elements_killed_by(p: int, lam: Sequence[int], e: int) -> list[tuple[int, ...]]:
    """Elements ``x`` of ``+ Z/p^lam_j`` with ``p^e x = 0``."""
    axes = []
    for l in lam:
        step = p ** max(0, l - e)
        axes.append(range(0, p**l, step))
    return list(product(*axes))


class _SpanModP:
    """Incremental row echelon form over F_p, for independence tests."""

    def __init__(self, p: int, dim: int):
        self.p = p
        self.rows: list[tuple[int, list[int]]] = []

    def reduce(self, v: Sequence[int]) -> list[int]:
        p = self.p
        v = [x % p for x in v]
        for piv, row in self.rows:
            f = v[piv]
            if f:
                v = [(x - f * y) % p for x, y in zip(v, row)]
        return v

    def try_add(self, v: Sequence[int]) -> bool:
        v = self.reduce(v)
        piv = next((i for i, x in enumerate(v) if x), None)
        if piv is None:
            return False
        inv = pow(v[piv], -1, self.p)
        self.rows.append((piv, [x * inv % self.p for x in v]))
        return True

    def pop(self):
        self.rows.pop()


def _frattini_coords(p: int, lam: Sequence[int], x: Sequence[int]) -> list[int]:
    # G/pG has basis the images of the generators; coordinate j is x_j mod p
    return [xj % p for xj in x]


def _candidate_count(p: int, lam: Sequence[int]) -> int:
    return math.prod(len(_p_elements_killed_by(p, lam, l)) for l in lam)


def _aut_p_brute(p: int, lam: tuple[int, ...]) -> int:
    r = len(lam)
    images = [_p_elements_killed_by(p, lam, l) for l in lam]
    span = _SpanModP(p, r)

    def rec(i: int) -> int:
        if i == r:
            return 1
        total = 0
        for x in images[i]:
            if span.try_add(_frattini_coords(p, lam, x)):
                total += rec(i + 1)
                span.pop()
        return total

    return rec(0)


def aut_order_formula(G: AbelianGroup) -> int:
    """Closed-form ``|Aut G|`` (Hillar-Rhea), as a product over Sylow subgroups."""
    if G.free_rank:
        raise ValueError("group must be finite")
    total = 1
    for p in G.primes():
        e = sorted(_parts_of_group(G, p))
        r = len(e)
        d = [max(l for l in range(1, r + 1) if e[l - 1] == e[k - 1]) for k in range(1, r + 1)]
        c = [min(l for l in range(1, r + 1) if e[l - 1] == e[k - 1]) for k in range(1, r + 1)]
        a = 1
        for k in range(1, r + 1):
            a *= p ** d[k - 1] - p ** (k - 1)
        for j in range(1, r + 1):
            a *= p ** (e[j - 1] * (r - d[j - 1]))
        for i in range(1, r + 1):
            a *= p ** ((e[i - 1] - 1) * (r - c[i - 1] + 1))
        total *= a
    return total


@lru_cache(maxsize=None)
def aut_order(G: AbelianGroup, method: str = "brute") -> int:
    """``|Aut G|``.

    ``method="brute"`` enumerates generator images (per Sylow subgroup) and
    keeps those that generate; it rejects ``|G| > 2^12``.  ``method="auto"``
    falls back to the closed form when brute force is out of range.
    """
    if G.free_rank:
        raise ValueError("group must be finite")
    brute_ok = G.order <= AUT_BRUTE_MAX_ORDER and all(
        _candidate_count(p, _parts_of_group(G, p)) <= MAX_CANDIDATES for p in G.primes()
    )
    if method == "formula" or (method == "auto" and not brute_ok):
        return aut_order_formula(G)
    if method not in ("brute", "auto"):
        raise ValueError(f"unknown method {method!r}")
    if not brute_ok:
        raise ValueError(f"|G| = {G.order} is beyond the brute-force bound")
    return math.prod(_aut_p_brute(p, _parts_of_group(G, p)) for p in G.primes())


# ---------------------------------------------------------------------------
# symplectic automorphisms


def _sp_p_brute(p: int, h: tuple[int, ...]) -> int:
    """Automorphisms of ``H x H`` (``H`` of type ``h``) preserving the hyperbolic pairing."""
    s = len(h)
    lam = tuple(h) + tuple(h)
    E = p ** max(h)
    weights = [E // p**x for x in h]

    def omega(u, v):
        return sum(w * (u[i] * v[s + i] - v[i] * u[s + i]) for i, w in enumerate(weights)) % E

    gens = [tuple(int(i == j) for j in range(2 * s)) for i in range(2 * s)]
    target = [[omega(gens[a], gens[b]) for b in range(2 * s)] for a in range(2 * s)]
    images = [_p_elements_killed_by(p, lam, l) for l in lam]
    span = _SpanModP(p, 2 * s)
    chosen: list[tuple[int, ...]] = []

    def rec(i: int) -> int:
        if i == 2 * s:
            return 1
        total = 0
        for x in images[i]:
            if any(omega(chosen[b], x) != target[b][i] for b in range(i)):
                continue
            if span.try_add(x):
                chosen.append(x)
                total += rec(i + 1)
                chosen.pop()
                span.pop()
        return total

    return rec(0)


@lru_cache(maxsize=None)
def sp_order(B: AbelianGroup) -> int:
    """``|Sp(B)|`` for ``B = H x H`` by brute force over generator images."""
    if B.free_rank:
        raise ValueError("Sp needs a finite group")
    if not torsion_is_square(B):
        raise ValueError(f"{B} is not of the form H x H")
    if B.order > AUT_BRUTE_MAX_ORDER:
        raise ValueError(f"|B| = {B.order} is beyond the brute-force bound")
    H = square_root(B)
    total = 1
    for p in B.primes():
        h = _parts_of_group(H, p)
        if _candidate_count(p, h + h) > MAX_CANDIDATES:
            raise ValueError(f"too many candidates for Sp of {B}")
        total *= _sp_p_brute(p, h)
    return total


# ---------------------------------------------------------------------------
# pairings


def _p_pairing_count(p: int, lam: tuple[int, ...], kind: str) -> int:
    r = len(lam)
    q = [p**l for l in lam]
    E = max(q)
    slots = [(i, j) for i in range(r) for j in range(i, r) if not (kind == "alternating" and i == j)]
    choices = [range(0, E, E // math.gcd(q[i], q[j])) for i, j in slots]
    if math.prod(len(c) for c in choices) > MAX_CANDIDATES:
        raise ValueError("too many candidate pairings")
    elems = np.array(list(product(*(range(x) for x in q))), dtype=np.int64).reshape(-1, r)
    count = 0
    C = np.zeros((r, r), dtype=np.int64)
    for vals in product(*choices):
        for (i, j), v in zip(slots, vals):
            C[i, j] = v
            C[j, i] = v if kind == "symmetric" else -v
        # perfect iff x -> phi(x, -) has trivial kernel
        img = elems @ C % E
        if int((~img.any(axis=1)).sum()) == 1:
            count += 1
    return count


@lru_cache(maxsize=None)
def perfect_pairing_count(B: AbelianGroup, kind: str) -> int:
    """Perfect bilinear pairings ``B x B -> Q/Z`` that are symmetric or alternating."""
    if kind not in ("symmetric", "alternating"):
        raise ValueError("kind must be 'symmetric' or 'alternating'")
    if B.free_rank:
        raise ValueError("pairings need a finite group")
    if B.order > PAIRING_MAX_ORDER:
        raise ValueError(f"|B| = {B.order} exceeds the pairing bound {PAIRING_MAX_ORDER}")
    return math.prod(_p_pairing_count(p, _parts_of_group(B, p), kind) for p in B.primes())


def sym_pairing_ratio_closed_form(lam: PartitionType) -> Fraction:
    """Closed form of ``#{symmetric perfect pairings} / (|B| |Aut B|)`` for a ``p``-group.

    ``p^(-sum_i c_i (c_i + 1)/2) prod_i prod_{j <= (c_i - c_{i+1})/2} (1 - p^(-2j))^(-1)``
    with ``c`` the conjugate partition.  Kept as a cross-check of the brute-force count.
    """
    p = lam.p
    c = list(lam.conjugate()) + [0]
    out = Fraction(1, p ** sum(x * (x + 1) // 2 for x in c))
    for i in range(len(c) - 1):
        for j in range(1, (c[i] - c[i + 1]) // 2 + 1):
            out /= 1 - Fraction(1, p ** (2 * j))
    return out


# ---------------------------------------------------------------------------
# tensor squares


def sym2_order(x) -> int:
    """``|Sym^2 G|``: ``p^(sum_j j lambda_j)`` per Sylow type."""
    if isinstance(x, AbelianGroup):
        return math.prod(sym2_order(sylow(x, p)) for p in x.primes())
    return x.p ** sum(j * l for j, l in enumerate(x.parts, start=1))


def wedge2_order(x) -> int:
    """``|wedge^2 G|``: ``p^(sum_i (i-1) lambda_i)`` per Sylow type."""
    if isinstance(x, AbelianGroup):
        return math.prod(wedge2_order(sylow(x, p)) for p in x.primes())
    return x.p ** sum((i - 1) * l for i, l in enumerate(x.parts, start=1))


def _square_presentation(G: AbelianGroup, extra) -> AbelianGroup:
    if G.free_rank:
        raise ValueError("group must be finite")
    e = G.torsion
    k = len(e)
    idx = {(i, j): i * k + j for i in range(k) for j in range(k)}
    rels = []
    for i in range(k):
        for j in range(k):
            col = [0] * (k * k)
            col[idx[i, j]] = math.gcd(e[i], e[j])
            rels.append(col)
    rels += extra(k, idx)
    if not rels:
        return AbelianGroup()
    # generators index rows, relations are columns
    M = [list(r) for r in zip(*rels)]
    f, r, m = invariant_factors(M)
    return AbelianGroup(m - r, tuple(f))


def tensor_square(G: AbelianGroup) -> AbelianGroup:
    return _square_presentation(G, lambda k, idx: [])


def symmetric_square(G: AbelianGroup) -> AbelianGroup:
    """``Sym^2 G`` computed from its presentation as a quotient of ``G (x) G``."""

    def extra(k, idx):
        out = []
        for i in range(k):
            for j in range(i + 1, k):
                col = [0] * (k * k)
                col[idx[i, j]], col[idx[j, i]] = 1, -1
                out.append(col)
        return out

    return _square_presentation(G, extra)


def exterior_square(G: AbelianGroup) -> AbelianGroup:
    """``wedge^2 G`` computed from its presentation as a quotient of ``G (x) G``."""

    def extra(k, idx):
        out = []
        for i in range(k):
            col = [0] * (k * k)
            col[idx[i, i]] = 1
            out.append(col)
            for j in range(i + 1, k):
                col = [0] * (k * k)
                col[idx[i, j]], col[idx[j, i]] = 1, 1
                out.append(col)
        return out

    return _square_presentation(G, extra)


def groups_of_order_dividing(p: int, max_exp: int) -> Iterable[PartitionType]:
    """All ``p``-group types with ``sum(parts) <= max_exp``."""

    def parts(n, cap):
        if n == 0:
            yield ()
            return
        for first in range(min(n, cap), 0, -1):
            for rest in parts(n - first, first):
                yield (first,) + rest

    for total in range(max_exp + 1):
        for lam in parts(total, total):
            yield PartitionType(p, lam)
