"""Exact integer and mod-p linear algebra.

Matrices are carried as nested lists of Python ints (arbitrary precision).
Anything that looks like a 2-D integer array is accepted on input: lists of
lists, tuples, numpy integer arrays, or :class:`IntegerMatrix`.

The Smith normal form without transforms never works over Z directly.  A
fraction-free elimination first finds the rank ``r`` and a nonzero ``r x r``
minor ``delta``; every nonzero invariant factor divides ``delta`` so the
diagonalisation is then carried out in ``Z/delta``, where entries cannot grow.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from itertools import combinations
from typing import Iterable, Sequence

import numpy as np
from sympy import isprime

MAX_WORD_PRIME = 2**61


@dataclass(frozen=True)
class IntegerMatrix:
    """Dense integer matrix, row-major, immutable."""

    entries: tuple[tuple[int, ...], ...]
    cols: int = 0

    def __post_init__(self):
        rows = tuple(tuple(int(x) for x in r) for r in self.entries)
        width = len(rows[0]) if rows else self.cols
        if any(len(r) != width for r in rows):
            raise ValueError("ragged matrix rows")
        object.__setattr__(self, "entries", rows)
        object.__setattr__(self, "cols", width)

    @property
    def rows(self) -> int:
        return len(self.entries)

    @property
    def shape(self) -> tuple[int, int]:
        return (self.rows, self.cols)

    def to_list(self) -> list[list[int]]:
        return [list(r) for r in self.entries]

    def transpose(self) -> "IntegerMatrix":
        return IntegerMatrix(tuple(zip(*self.entries)), cols=self.rows)

    def __getitem__(self, ij):
        i, j = ij
        return self.entries[i][j]

    @classmethod
    def zeros(cls, rows: int, cols: int) -> "IntegerMatrix":
        return cls(tuple((0,) * cols for _ in range(rows)), cols=cols)

    @classmethod
    def identity(cls, n: int) -> "IntegerMatrix":
        return cls(tuple(tuple(int(i == j) for j in range(n)) for i in range(n)), cols=n)

    @classmethod
    def parse(cls, text: str) -> "IntegerMatrix":
        """Parse either the ``rows cols`` text format or a JSON array of arrays."""
        text = text.strip()
        if text.startswith("["):
            data = json.loads(text)
            if not isinstance(data, list) or any(not isinstance(r, list) for r in data):
                raise ValueError("JSON matrix must be an array of arrays")
            return cls(tuple(tuple(r) for r in data))
        tokens = text.split()
        if len(tokens) < 2:
            raise ValueError("matrix text must start with 'rows cols'")
        m, n = int(tokens[0]), int(tokens[1])
        if m < 0 or n < 0:
            raise ValueError("negative matrix dimensions")
        body = [int(t) for t in tokens[2:]]
        if len(body) != m * n:
            raise ValueError(f"expected {m * n} entries, found {len(body)}")
        return cls(tuple(tuple(body[i * n:(i + 1) * n]) for i in range(m)), cols=n)

    def format_text(self) -> str:
        lines = [f"{self.rows} {self.cols}"]
        lines += [" ".join(str(x) for x in r) for r in self.entries]
        return "\n".join(lines) + "\n"


def as_rows(M) -> list[list[int]]:
    """Fresh nested-list copy of ``M`` with Python int entries."""
    if isinstance(M, IntegerMatrix):
        return M.to_list()
    if isinstance(M, PrimeFieldMatrix):
        return [list(r) for r in M.entries]
    if isinstance(M, np.ndarray):
        if M.ndim != 2:
            raise ValueError("expected a 2-D array")
        return [[int(x) for x in r] for r in M.tolist()]
    rows = [[int(x) for x in r] for r in M]
    if rows and any(len(r) != len(rows[0]) for r in rows):
        raise ValueError("ragged matrix rows")
    return rows


def _shape(M) -> tuple[int, int]:
    if isinstance(M, (IntegerMatrix, PrimeFieldMatrix)):
        return M.shape
    if isinstance(M, np.ndarray):
        return M.shape
    rows = list(M)
    return (len(rows), len(rows[0]) if rows else 0)


@dataclass(frozen=True)
class SmithForm:
    """Invariant factors ``d_1 | d_2 | ... | d_r`` (all >= 1) of an ``rows x cols`` matrix.

    When transforms were requested, ``U @ M @ V`` equals :meth:`diagonal`.
    """

    invariant_factors: tuple[int, ...]
    shape: tuple[int, int]
    U: tuple[tuple[int, ...], ...] | None = None
    V: tuple[tuple[int, ...], ...] | None = None

    @property
    def rank(self) -> int:
        return len(self.invariant_factors)

    def diagonal(self) -> list[list[int]]:
        m, n = self.shape
        D = [[0] * n for _ in range(m)]
        for i, d in enumerate(self.invariant_factors):
            D[i][i] = d
        return D


@dataclass(frozen=True)
class PrimeFieldMatrix:
    """Matrix over F_p with entries stored in ``[0, p)``."""

    p: int
    entries: tuple[tuple[int, ...], ...]

    def __post_init__(self):
        check_prime(self.p)
        object.__setattr__(
            self, "entries", tuple(tuple(int(x) % self.p for x in r) for r in self.entries)
        )

    @property
    def shape(self) -> tuple[int, int]:
        return (len(self.entries), len(self.entries[0]) if self.entries else 0)

    @classmethod
    def reduce(cls, M, p: int) -> "PrimeFieldMatrix":
        return cls(p, tuple(tuple(r) for r in as_rows(M)))


def check_prime(p: int) -> None:
    if not isinstance(p, (int, np.integer)) or p < 2 or p >= MAX_WORD_PRIME or not isprime(int(p)):
        raise ValueError(f"{p!r} is not a prime below 2**61")


# ---------------------------------------------------------------------------
# fraction-free elimination


def _bareiss(a: list[list[int]], ncols: int | None = None) -> tuple[int, int, int]:
    """In-place Bareiss elimination with full pivoting.

    Returns ``(rank, minor, sign)`` where ``minor`` is the leading ``rank x rank``
    minor of the permuted matrix and ``sign`` the parity of the permutations.
    Pivots are taken from the first ``ncols`` columns only; any further columns
    are carried along as right-hand sides.
    """
    m = len(a)
    n = (len(a[0]) if m else 0) if ncols is None else ncols
    prev = 1
    sign = 1
    r = 0
    for k in range(min(m, n)):
        piv_i = piv_j = -1
        for j in range(k, n):
            for i in range(k, m):
                if a[i][j]:
                    piv_i, piv_j = i, j
                    break
            if piv_i >= 0:
                break
        if piv_i < 0:
            break
        if piv_i != k:
            a[k], a[piv_i] = a[piv_i], a[k]
            sign = -sign
        if piv_j != k:
            for row in a:
                row[k], row[piv_j] = row[piv_j], row[k]
            sign = -sign
        rk = a[k]
        piv = rk[k]
        tail = rk[k + 1:]
        for i in range(k + 1, m):
            ri = a[i]
            f = ri[k]
            if f:
                ri[k + 1:] = [(x * piv - f * y) // prev for x, y in zip(ri[k + 1:], tail)]
            elif piv != prev:
                ri[k + 1:] = [x * piv // prev for x in ri[k + 1:]]
            ri[k] = 0
        prev = piv
        r = k + 1
    return r, (prev if r else 0), sign


def determinant(M) -> int:
    """Exact determinant by Bareiss fraction-free elimination."""
    a = as_rows(M)
    m, n = len(a), len(a[0]) if a else 0
    if m != n and not (m == 0):
        raise ValueError(f"determinant needs a square matrix, got {m}x{n}")
    if m == 0:
        return 1
    r, minor, sign = _bareiss(a)
    return sign * minor if r == n else 0


def rank_over_q(M) -> int:
    a = as_rows(M)
    if not a or not a[0]:
        return 0
    return _bareiss(a)[0]


# ---------------------------------------------------------------------------
# diagonalisation


def _xgcd(a: int, b: int) -> tuple[int, int, int]:
    """``(g, s, t)`` with ``s*a + t*b == g == gcd(a, b) >= 0``."""
    s0, s1, t0, t1 = 1, 0, 0, 1
    while b:
        q, r = divmod(a, b)
        a, b = b, r
        s0, s1 = s1, s0 - q * s1
        t0, t1 = t1, t0 - q * t1
    if a < 0:
        return -a, -s0, -t0
    return a, s0, t0


def _clearing_move(piv: int, b: int) -> tuple[int, int, int, int]:
    """Unimodular ``[[s, u], [c, d]]`` sending ``(piv, b)`` to ``(g, 0)``."""
    if b % piv == 0:
        return 1, 0, -(b // piv), 1
    g, s, u = _xgcd(piv, b)
    return s, u, -(b // g), piv // g


def _diagonal_mod(a: list[list[int]], D: int) -> list[int]:
    """Diagonalise ``a`` over ``Z/D`` by unimodular row/column operations.

    ``a`` is modified in place and must hold residues in ``[0, D)``.  Returns the
    diagonal residues (length ``min(rows, cols)``).
    """
    m = len(a)
    n = len(a[0]) if m else 0
    gcd = math.gcd
    diag: list[int] = []
    for t in range(min(m, n)):
        # prefer a unit pivot: it clears its row and column in one pass
        pi = pj = -1
        for j in range(t, n):
            for i in range(t, m):
                v = a[i][j]
                if v and gcd(v, D) == 1:
                    pi, pj = i, j
                    break
            if pi >= 0:
                break
        if pi >= 0:
            if pi != t:
                a[t], a[pi] = a[pi], a[t]
            if pj != t:
                for row in a[t:]:
                    row[t], row[pj] = row[pj], row[t]
            rt = a[t]
            inv = pow(rt[t], -1, D)
            tail = [x * inv % D for x in rt[t + 1:]]
            for i in range(t + 1, m):
                ri = a[i]
                f = ri[t]
                if f:
                    ri[t + 1:] = [(x - f * y) % D for x, y in zip(ri[t + 1:], tail)]
                    ri[t] = 0
            diag.append(1)
            continue
        # no unit left: Euclid on the smallest nonzero residue
        best = None
        for i in range(t, m):
            for j in range(t, n):
                v = a[i][j]
                if v and (best is None or v < best[0]):
                    best = (v, i, j)
        if best is None:
            diag.extend([0] * (min(m, n) - t))
            break
        _, pi, pj = best
        if pi != t:
            a[t], a[pi] = a[pi], a[t]
        if pj != t:
            for row in a[t:]:
                row[t], row[pj] = row[pj], row[t]
        while True:
            for i in range(t + 1, m):
                b = a[i][t]
                if not b:
                    continue
                piv = a[t][t]
                if b % piv == 0:
                    q = b // piv
                    a[i][t:] = [(x - q * y) % D for x, y in zip(a[i][t:], a[t][t:])]
                else:
                    g, s, u = _xgcd(piv, b)
                    ap, bp = piv // g, b // g
                    rt, ri = a[t][t:], a[i][t:]
                    a[t][t:] = [(s * x + u * y) % D for x, y in zip(rt, ri)]
                    a[i][t:] = [(ap * y - bp * x) % D for x, y in zip(rt, ri)]
            dirty = False
            for j in range(t + 1, n):
                b = a[t][j]
                if not b:
                    continue
                piv = a[t][t]
                if b % piv == 0:
                    q = b // piv
                    for row in a[t:]:
                        row[j] = (row[j] - q * row[t]) % D
                else:
                    g, s, u = _xgcd(piv, b)
                    ap, bp = piv // g, b // g
                    for row in a[t:]:
                        x, y = row[t], row[j]
                        row[t] = (s * x + u * y) % D
                        row[j] = (ap * y - bp * x) % D
                    dirty = True
            if not dirty or all(a[i][t] == 0 for i in range(t + 1, m)):
                break
        diag.append(a[t][t])
    return diag


def _chain(values: Iterable[int]) -> list[int]:
    """Normalise a list of cyclic orders (0 = infinite) to a divisibility chain."""
    vals = [abs(v) for v in values]
    k = len(vals)
    for i in range(k):
        for j in range(i + 1, k):
            a, b = vals[i], vals[j]
            if a == 0 and b == 0:
                continue
            if a == 0:
                vals[i], vals[j] = b, 0
                continue
            if b % a == 0:
                continue
            g = math.gcd(a, b)
            vals[i], vals[j] = g, a // g * b
    return vals


def invariant_factors(M) -> tuple[list[int], int, int]:
    """Return ``(factors, rank, rows)``: nonzero invariant factors of ``M``."""
    a = as_rows(M)
    m = len(a)
    n = len(a[0]) if m else _shape(M)[1]
    if m == 0 or n == 0:
        return [], 0, m
    r, minor, _ = _bareiss([row[:] for row in a])
    if r == 0:
        return [], 0, m
    delta = abs(minor)
    if delta == 1:
        return [1] * r, r, m
    red = [[x % delta for x in row] for row in a]
    diag = _diagonal_mod(red, delta)
    vals = [math.gcd(s, delta) if s else delta for s in diag]
    vals += [delta] * max(0, m - n)
    chain = _chain(vals)
    # the top m - r entries are the free part (each equal to delta)
    return chain[: r], r, m


def _snf_with_transforms(M) -> SmithForm:
    a = as_rows(M)
    m = len(a)
    n = len(a[0]) if m else _shape(M)[1]
    U = [[int(i == j) for j in range(m)] for i in range(m)]
    V = [[int(i == j) for j in range(n)] for i in range(n)]

    def swap_rows(i, k):
        a[i], a[k] = a[k], a[i]
        U[i], U[k] = U[k], U[i]

    def swap_cols(j, k):
        for row in a:
            row[j], row[k] = row[k], row[j]
        for row in V:
            row[j], row[k] = row[k], row[j]

    def row_combo(i, k, s, u, c, d):
        # row_i, row_k <- s*row_i + u*row_k, c*row_i + d*row_k
        for X in (a, U):
            ri, rk = X[i], X[k]
            X[i] = [s * x + u * y for x, y in zip(ri, rk)]
            X[k] = [c * x + d * y for x, y in zip(ri, rk)]

    def col_combo(j, k, s, u, c, d):
        # col_j, col_k <- s*col_j + u*col_k, c*col_j + d*col_k
        for X in (a, V):
            for row in X:
                x, y = row[j], row[k]
                row[j] = s * x + u * y
                row[k] = c * x + d * y

    for t in range(min(m, n)):
        best = None
        for i in range(t, m):
            for j in range(t, n):
                v = abs(a[i][j])
                if v and (best is None or v < best[0]):
                    best = (v, i, j)
        if best is None:
            break
        _, pi, pj = best
        if pi != t:
            swap_rows(t, pi)
        if pj != t:
            swap_cols(t, pj)
        while True:
            for i in range(t + 1, m):
                b = a[i][t]
                if b:
                    row_combo(t, i, *_clearing_move(a[t][t], b))
            clean = True
            for j in range(t + 1, n):
                b = a[t][j]
                if b:
                    col_combo(t, j, *_clearing_move(a[t][t], b))
                    clean = False
            if clean or all(a[i][t] == 0 for i in range(t + 1, m)):
                break

    k = min(m, n)
    # divisibility chain on the diagonal via 2x2 unimodular gcd/lcm moves
    for i in range(k):
        for j in range(i + 1, k):
            x, y = a[i][i], a[j][j]
            if y == 0:
                continue
            if x == 0:
                swap_rows(i, j)
                swap_cols(i, j)
                continue
            if y % x == 0:
                continue
            g, s, u = _xgcd(x, y)
            row_combo(i, j, s, u, -y // g, x // g)
            # columns: col_i <- col_i + col_j ; col_j <- -(u*y/g) col_i + (s*x/g) col_j
            col_combo(i, j, 1, 1, -u * y // g, s * x // g)
    for i in range(k):
        if a[i][i] < 0:
            a[i] = [-x for x in a[i]]
            U[i] = [-x for x in U[i]]
    factors = tuple(a[i][i] for i in range(k) if a[i][i] != 0)
    return SmithForm(factors, (m, n), tuple(map(tuple, U)), tuple(map(tuple, V)))


def snf(M, want_transforms: bool = False) -> SmithForm:
    """Smith normal form of an integer matrix.

    Without transforms the modular-determinant route is used and works for
    matrices of dimension a few hundred with small entries.  With transforms
    the elimination runs over Z and is meant for small matrices.
    """
    if want_transforms:
        return _snf_with_transforms(M)
    factors, _, _ = invariant_factors(M)
    return SmithForm(tuple(factors), _shape(M))


def cokernel(M):
    """``Z^rows / M Z^cols`` as an :class:`~randcok.abelian.AbelianGroup`."""
    from .abelian import AbelianGroup

    factors, r, m = invariant_factors(M)
    return AbelianGroup(m - r, tuple(d for d in factors if d > 1))


def gcd_minors(M, k: int) -> int:
    """gcd of all ``k x k`` minors, by enumeration (brute-force oracle)."""
    a = as_rows(M)
    m, n = len(a), len(a[0]) if a else 0
    if k < 0 or k > min(m, n):
        raise ValueError(f"minor size {k} exceeds matrix dimensions {m}x{n}")
    if k == 0:
        return 1
    g = 0
    for rows in combinations(range(m), k):
        for cols in combinations(range(n), k):
            g = math.gcd(g, determinant([[a[i][j] for j in cols] for i in rows]))
            if g == 1:
                return 1
    return g


# ---------------------------------------------------------------------------
# rank over F_p


def rank_mod_p(M, p: int | None = None) -> int:
    """Rank over F_p.  Accepts a :class:`PrimeFieldMatrix` or ``(matrix, p)``."""
    if isinstance(M, PrimeFieldMatrix):
        p = M.p
        a = [list(r) for r in M.entries]
    else:
        if p is None:
            raise ValueError("prime p required")
        check_prime(p)
        a = [[x % p for x in r] for r in as_rows(M)]
    m = len(a)
    n = len(a[0]) if m else 0
    r = 0
    for j in range(n):
        piv = next((i for i in range(r, m) if a[i][j]), None)
        if piv is None:
            continue
        a[r], a[piv] = a[piv], a[r]
        rr = a[r]
        inv = pow(rr[j], -1, p)
        tail = [x * inv % p for x in rr[j:]]
        for i in range(r + 1, m):
            f = a[i][j]
            if f:
                a[i][j:] = [(x - f * y) % p for x, y in zip(a[i][j:], tail)]
        r += 1
        if r == m:
            break
    return r


def _inverse_table(p: int) -> np.ndarray:
    inv = np.zeros(p, dtype=np.int64)
    for x in range(1, p):
        inv[x] = pow(x, -1, p)
    return inv


def _vec_pow(x: np.ndarray, e: int, p: int) -> np.ndarray:
    out = np.ones_like(x)
    base = x % p
    while e:
        if e & 1:
            out = out * base % p
        base = base * base % p
        e >>= 1
    return out


def batch_rank_mod_p(arr, p: int) -> np.ndarray:
    """Ranks over F_p of a stack of matrices, shape ``(T, m, n)`` -> ``(T,)``.

    Vectorised Gauss-Jordan; needs ``p < 2**31`` so products fit in int64.
    """
    check_prime(p)
    if p >= 2**31:
        raise ValueError("batched rank needs p < 2**31")
    A = np.asarray(arr, dtype=np.int64) % p
    if A.ndim == 2:
        A = A[None]
    T, m, n = A.shape
    A = A.copy()
    used = np.zeros((T, m), dtype=bool)
    rank = np.zeros(T, dtype=np.int64)
    idx = np.arange(T)
    table = _inverse_table(p) if p < 2**16 else None
    for k in range(n):
        col = A[:, :, k]
        cand = (col != 0) & ~used
        has = cand.any(axis=1)
        if not has.any():
            continue
        piv = cand.argmax(axis=1)
        prow = A[idx, piv, k:]
        pv = prow[:, 0]
        inv = table[pv] if table is not None else _vec_pow(pv, p - 2, p)
        prow = prow * inv[:, None] % p
        factor = col.copy()
        factor[idx, piv] = 0
        factor[~has] = 0
        A[:, :, k:] = (A[:, :, k:] - factor[:, :, None] * prow[:, None, :]) % p
        A[idx[has], piv[has], k:] = prow[has]
        used[idx[has], piv[has]] = True
        rank += has
    return rank


_WORD_PRIMES: list[int] = []


def word_primes(k: int) -> list[int]:
    """The ``k`` largest primes below ``2**31``."""
    from sympy import prevprime

    while len(_WORD_PRIMES) < k:
        _WORD_PRIMES.append(prevprime(_WORD_PRIMES[-1] if _WORD_PRIMES else 2**31))
    return _WORD_PRIMES[:k]


def _batch_solve_mod_p(A: np.ndarray, R: np.ndarray, p: int):
    """For each square ``A[t]``: ``det mod p`` and ``A^{-1} R mod p``.

    Returns ``(det, X, ok)``; ``ok`` is False where ``A[t]`` is singular mod p.
    """
    T, n, _ = A.shape
    s = R.shape[1]
    W = np.concatenate([A % p, np.broadcast_to(R % p, (T, n, s))], axis=2)
    used = np.zeros((T, n), dtype=bool)
    ok = np.ones(T, dtype=bool)
    det = np.ones(T, dtype=np.int64)
    pivrow = np.zeros((T, n), dtype=np.int64)
    idx = np.arange(T)
    for k in range(n):
        col = W[:, :, k]
        cand = (col != 0) & ~used
        has = cand.any(axis=1)
        ok &= has
        piv = cand.argmax(axis=1)
        pv = np.where(has, col[idx, piv], 1)
        det = det * pv % p
        prow = W[idx, piv, k:] * _vec_pow(pv, p - 2, p)[:, None] % p
        factor = col.copy()
        factor[idx, piv] = 0
        factor[~has] = 0
        W[:, :, k:] = (W[:, :, k:] - factor[:, :, None] * prow[:, None, :]) % p
        W[idx, piv, k:] = prow
        used[idx, piv] |= has
        pivrow[:, k] = piv
    # the reduced matrix is the permutation k -> pivrow[k]; fold its sign into det
    inv = (pivrow[:, :, None] > pivrow[:, None, :]) & np.triu(np.ones((n, n), dtype=bool), 1)
    odd = inv.sum(axis=(1, 2)) % 2 == 1
    det = np.where(odd, (p - det) % p, det)
    X = W[idx[:, None], pivrow, n:]
    return det, X, ok


def batch_det_adjugate(arr, R) -> tuple[list[int], list[list[int] | None]]:
    """Exact ``det A`` and ``adj(A) R`` for a stack of square integer matrices.

    Works modulo enough word-size primes to cover a Hadamard bound and
    recombines by CRT.  Where ``det A == 0`` (or some prime divides it) the
    adjugate entry is ``None`` and the determinant is recomputed exactly.
    """
    A = np.asarray(arr, dtype=np.int64)
    if A.ndim == 2:
        A = A[None]
    T, n, n2 = A.shape
    if n != n2:
        raise ValueError("square matrices required")
    R = np.asarray(R, dtype=np.int64).reshape(n, -1)
    norms = (A.astype(np.float64) ** 2).sum(axis=2)
    safe = norms.min(axis=1) > 0
    had = 0.5 * np.log2(np.where(norms > 0, norms, 1)).sum(axis=1)
    rmax = float(np.abs(R).sum(axis=0).max()) if R.size else 1.0
    bits = float(had.max()) + math.log2(max(rmax, 1.0)) + 3
    primes = word_primes(max(1, math.ceil(bits / 30.9)))
    ok = safe.copy()
    res_d, res_y = [], []
    for p in primes:
        d, X, good = _batch_solve_mod_p(A, R, p)
        ok &= good
        res_d.append(d)
        res_y.append(X.reshape(T, -1) * d[:, None] % p)
    mod = math.prod(primes)
    coef = [mod // p * pow(mod // p, -1, p) for p in primes]
    half = mod // 2
    stacked = np.stack([np.concatenate([d[:, None], y], axis=1) for d, y in zip(res_d, res_y)])
    combined = np.tensordot(np.array(coef, dtype=object), stacked.astype(object), axes=1)
    dets: list[int] = []
    adj: list[list[int] | None] = []
    for t in range(T):
        if not ok[t]:
            dets.append(determinant(A[t].tolist()))
            adj.append(None)
            continue
        row = [int(v) % mod for v in combined[t]]
        row = [v - mod if v > half else v for v in row]
        dets.append(row[0])
        adj.append(row[1:])
    return dets, adj
