"""Concentration of random sums over F_p: the Fourier-side discrepancy rho,
exact atom laws, signed-sum counts R_k and rank-one progression extraction.

Throughout, ``||x/p||`` is the distance of ``x/p`` to the nearest integer, kept
as the integer ``min(r, p - r)`` until the final division by ``p``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import product
from typing import Sequence

import numpy as np

from .linalg import check_prime
from .models import EntryDistribution, UNIFORM_01, alpha_for_prime

EXACT_MAX_P = 2**24
RHO_L_MAX_P = 2**12
GAP_EXACT_MAX_P = 2**20
GAP_RANDOM_SCAN = 10**6
GAP_ENUM_MAX = 2**20
RK_MAX_OUTCOMES = 2**28
ENUM_MAX = 2**24
FORM_EXACT_MAX = 2**20
_CHUNK = 2**22


@dataclass(frozen=True)
class FpVector:
    p: int
    coords: tuple[int, ...]

    def __post_init__(self):
        check_prime(self.p)
        object.__setattr__(self, "coords", tuple(int(c) % self.p for c in self.coords))

    @classmethod
    def of(cls, w, p: int | None = None) -> "FpVector":
        if isinstance(w, FpVector):
            if p is not None and p != w.p:
                raise ValueError("prime mismatch")
            return w
        if p is None:
            raise ValueError("prime required")
        return cls(p, tuple(w))

    def __len__(self):
        return len(self.coords)

    def shift(self, s: int) -> "FpVector":
        return FpVector(self.p, tuple(c - s for c in self.coords))

    def scale(self, c: int) -> "FpVector":
        return FpVector(self.p, tuple(c * x for x in self.coords))

    def support_size(self) -> int:
        return sum(1 for c in self.coords if c)

    def array(self) -> np.ndarray:
        return np.array(self.coords, dtype=np.int64)


def _alpha(alpha) -> float:
    a = float(alpha)
    if not 0 < a <= 1:
        raise ValueError("alpha must lie in (0, 1]")
    return a


def _dist_sq(t: np.ndarray, w: np.ndarray, p: int) -> np.ndarray:
    """Row j holds sum_i min(r, p - r)^2 for r = t_j w_i mod p, as exact integers."""
    r = np.outer(t, w) % p
    d = np.minimum(r, p - r)
    if p < 2**31:
        return (d * d).sum(axis=1)
    # squares would overflow int64; use Python integers
    return np.array([sum(int(x) ** 2 for x in row) for row in d], dtype=object)


def _t_chunks(p: int, n: int):
    step = max(1, _CHUNK // max(n, 1))
    for a in range(1, p, step):
        yield np.arange(a, min(p, a + step), dtype=np.int64)


def level_sums(w: FpVector) -> np.ndarray:
    """``sum_i ||t w_i / p||^2 * p^2`` for every t = 1 .. p-1 (exact integers)."""
    w = FpVector.of(w)
    if w.p > EXACT_MAX_P:
        raise ValueError(f"exact scan needs p <= 2^24, got {w.p}")
    arr = w.array()
    if len(arr) == 0:
        return np.zeros(w.p - 1, dtype=np.int64)
    return np.concatenate([_dist_sq(t, arr, w.p) for t in _t_chunks(w.p, len(arr))])


def rho(w, alpha, p: int | None = None) -> float:
    """Concentration discrepancy ``(1/p) sum_{t != 0} exp(-alpha sum_i ||t w_i/p||^2)``."""
    w = FpVector.of(w, p)
    a = _alpha(alpha)
    if w.p > EXACT_MAX_P:
        raise ValueError("p > 2^24: use rho_sampled")
    S = level_sums(w).astype(np.float64)
    # np.sum reduces pairwise, so the result does not depend on chunking
    return float(np.sum(np.exp(-a * S / (w.p * w.p)))) / w.p


def rho_sampled(w, alpha, samples: int = 10**5, rng=None, p: int | None = None) -> tuple[float, float]:
    """Monte Carlo estimate of rho over random t, with its standard error."""
    w = FpVector.of(w, p)
    a = _alpha(alpha)
    rng = rng if rng is not None else np.random.default_rng(0)
    arr = w.array()
    vals = []
    left = samples
    while left > 0:
        m = min(left, max(1, _CHUNK // max(len(arr), 1)))
        t = rng.integers(1, w.p, size=m, dtype=np.int64)
        S = _dist_sq(t, arr, w.p).astype(np.float64) if len(arr) else np.zeros(m)
        vals.append(np.exp(-a * S / float(w.p) ** 2))
        left -= m
    v = np.concatenate(vals)
    scale = (w.p - 1) / w.p
    err = scale * float(v.std(ddof=1)) / math.sqrt(len(v)) if len(v) > 1 else float("inf")
    return scale * float(v.mean()), err


def rho_L(w, alpha, p: int | None = None) -> float:
    """Laplacian variant: the largest rho over all shifts ``w - s 1``."""
    w = FpVector.of(w, p)
    if w.p > RHO_L_MAX_P:
        raise ValueError(f"rho_L scans all shifts; needs p <= {RHO_L_MAX_P}")
    return max(rho(w.shift(s), alpha) for s in range(w.p))


def _convolve(dist: list[Fraction], masses: dict[int, Fraction], c: int, p: int) -> list[Fraction]:
    out = [Fraction(0)] * p
    for r, pr in masses.items():
        sh = (r * c) % p
        for a, q in enumerate(dist):
            if q:
                out[(a + sh) % p] += q * pr
    return out


def atom_distribution(w, d: EntryDistribution = UNIFORM_01, affine: bool = False,
                      p: int | None = None) -> list[Fraction]:
    """Exact law of ``X . w`` over F_p, indexed by residue.

    In affine mode the last coordinate is ``x_N = -(x_1 + ... + x_{N-1})`` so the
    sum becomes ``sum_{i<N} x_i (w_i - w_N)``.  Computed by convolution.
    """
    w = FpVector.of(w, p)
    coeffs = list(w.coords)
    if affine and coeffs:
        last = coeffs.pop()
        coeffs = [c - last for c in coeffs]
    masses = d.residue_masses(w.p)
    dist = [Fraction(0)] * w.p
    dist[0] = Fraction(1)
    for c in coeffs:
        dist = _convolve(dist, masses, c, w.p)
    return dist


def atom_distribution_enum(w, d: EntryDistribution = UNIFORM_01, affine: bool = False,
                           p: int | None = None) -> list[Fraction]:
    """Same law by enumerating every outcome of X (oracle for small cases)."""
    w = FpVector.of(w, p)
    N = len(w)
    free = N - 1 if affine and N else N
    if len(d.support) ** free > ENUM_MAX:
        raise ValueError("enumeration too large")
    dist = [Fraction(0)] * w.p
    for xs in product(d.support, repeat=free):
        x = [v for v, _ in xs]
        pr = Fraction(1)
        for _, q in xs:
            pr *= q
        if affine and N:
            x.append(-sum(x))
        dist[sum(a * b for a, b in zip(x, w.coords)) % w.p] += pr
    return dist


@dataclass(frozen=True)
class FourierReport:
    lhs: float
    rhs: float
    affine: bool

    @property
    def slack(self) -> float:
        return self.rhs - self.lhs

    @property
    def holds(self) -> bool:
        return self.slack >= -1e-12

    def as_dict(self) -> dict:
        return {"lhs": self.lhs, "rhs": self.rhs, "slack": self.slack, "holds": self.holds}


def check_fourier_bound(w, d: EntryDistribution = UNIFORM_01, alpha=None, affine: bool = False,
                        p: int | None = None) -> FourierReport:
    """Compare ``sup_a |P(X.w = a) - 1/p|`` with rho (or rho_L in affine mode)."""
    w = FpVector.of(w, p)
    if w.p < 3:
        raise ValueError("the Fourier bound needs p >= 3")
    if alpha is None:
        alpha = alpha_for_prime(d, w.p)
    dist = atom_distribution(w, d, affine)
    inv = Fraction(1, w.p)
    lhs = max(abs(q - inv) for q in dist)
    rhs = rho_L(w, alpha) if affine else rho(w, alpha)
    return FourierReport(float(lhs), rhs, affine)


def support_fraction(w, shifted: bool = False, p: int | None = None) -> Fraction:
    """``|supp(w)| / N``, or its minimum over all shifts ``w - s 1``."""
    w = FpVector.of(w, p)
    N = len(w)
    if N == 0:
        return Fraction(0)
    if not shifted:
        return Fraction(w.support_size(), N)
    counts: dict[int, int] = {}
    for c in w.coords:
        counts[c] = counts.get(c, 0) + 1
    # the shift s = most common value leaves the fewest nonzero entries
    return Fraction(N - max(counts.values()), N)


def sparse_decay_bound(N: int, p: int, alpha, c) -> float:
    """``exp(-alpha c N / p^2)``: every nonzero term has ||t w_i/p|| >= 1/p."""
    return math.exp(-_alpha(alpha) * float(c) * N / (p * p))


# ---------------------------------------------------------------- R_k counts


def _signed_counts(w: FpVector) -> list[int]:
    c = [0] * w.p
    for x in w.coords:
        c[x] += 1
        c[(-x) % w.p] += 1
    return c


def _cyclic_mul(a: list[int], b: list[int], p: int) -> list[int]:
    out = [0] * p
    nz = [(j, y) for j, y in enumerate(b) if y]
    for i, x in enumerate(a):
        if x:
            for j, y in nz:
                out[(i + j) % p] += x * y
    return out


def r_k(w, k: int, p: int | None = None) -> int:
    """Number of ``(signs, indices)`` in ``{+-}^{2k} x [N]^{2k}`` with a vanishing signed sum.

    Computed as the zero coefficient of the ``2k``-fold cyclic self-convolution
    of the signed value counts, in exact integers.
    """
    w = FpVector.of(w, p)
    if k < 1:
        raise ValueError("k >= 1 required")
    base = _signed_counts(w)
    acc = [0] * w.p
    acc[0] = 1
    e = 2 * k
    while e:
        if e & 1:
            acc = _cyclic_mul(acc, base, w.p)
        e >>= 1
        if e:
            base = _cyclic_mul(base, base, w.p)
    return acc[0]


def _rk_enumerate(w: FpVector, k: int, min_distinct: int) -> int:
    N = len(w)
    L = 2 * k
    if (2 * N) ** L > RK_MAX_OUTCOMES:
        raise ValueError(f"(2N)^(2k) = {(2 * N) ** L} exceeds 2^28")
    if N == 0:
        return 0
    arr = w.array()
    signs = np.array(list(product((1, -1), repeat=L)), dtype=np.int64)
    powers = N ** np.arange(L, dtype=np.int64)
    total_tuples = N**L
    step = max(1, _CHUNK // len(signs))
    count = 0
    for start in range(0, total_tuples, step):
        codes = np.arange(start, min(total_tuples, start + step), dtype=np.int64)
        idx = (codes[:, None] // powers) % N
        if min_distinct > 1:
            srt = np.sort(idx, axis=1)
            distinct = 1 + (np.diff(srt, axis=1) != 0).sum(axis=1)
            idx = idx[distinct >= min_distinct]
            if len(idx) == 0:
                continue
        sums = (arr[idx] @ signs.T) % w.p
        count += int((sums == 0).sum())
    return count


def r_k_brute(w, k: int, p: int | None = None) -> int:
    """R_k by direct enumeration of sign patterns and index tuples."""
    return _rk_enumerate(FpVector.of(w, p), k, 0)


def r_k_delta(w, k: int, delta: float, p: int | None = None) -> int:
    """Solutions counted by R_k whose index tuple has at least ``(1 + delta) k`` distinct entries."""
    if k < 1:
        raise ValueError("k >= 1 required")
    return _rk_enumerate(FpVector.of(w, p), k, math.ceil((1 + delta) * k - 1e-12))


def fjls_bound(N: int, k: int, delta: float) -> float:
    """``(40 k^(1-delta) N^(1+delta))^k``, the allowance for tuples with few distinct indices."""
    return (40 * k ** (1 - delta) * N ** (1 + delta)) ** k


def halasz_diagnostic(w, alpha, k: int, f: float | None = None, p: int | None = None) -> dict:
    """Empirical constant in the Halasz-type bound; reported, never asserted.

    The bound reads ``rho <= C R_k / (4^k N^(2k) sqrt f) + exp(-f/2)`` with an
    unspecified C; ``ratio`` is the smallest C that would make it hold here.
    """
    w = FpVector.of(w, p)
    N = len(w)
    s = w.support_size()
    if f is None:
        f = max(1.0, s / k)
    r = rho(w, alpha)
    rk = r_k(w, k)
    denom = rk / (4**k * N ** (2 * k) * math.sqrt(f))
    excess = r - math.exp(-f / 2)
    return {"rho": r, "R_k": rk, "f": f, "k": k,
            "ratio": (excess / denom) if denom > 0 else float("inf") if excess > 0 else 0.0}


# ------------------------------------------------------------ homogenization


def homogenize(w, p: int | None = None) -> FpVector:
    """Pairwise differences ``(w_1 - w_2, w_3 - w_4, ...)`` of length ``floor((N-1)/2)``."""
    w = FpVector.of(w, p)
    K = (len(w) - 1) // 2 if len(w) else 0
    c = w.coords
    return FpVector(w.p, tuple(c[2 * j] - c[2 * j + 1] for j in range(K)))


def check_homogenized(w, alpha, p: int | None = None) -> tuple[float, float]:
    """``(rho_L(w, alpha), rho(w', alpha/2))``; the first never exceeds the second."""
    w = FpVector.of(w, p)
    return rho_L(w, alpha), rho(homogenize(w), _alpha(alpha) / 2)


# ------------------------------------------------------------- progressions


@dataclass(frozen=True)
class Gap:
    """``{base + sum x_i g_i : lower_i <= x_i <= upper_i}`` in Z (modulus None) or Z/modulus."""

    modulus: int | None
    base: int
    generators: tuple[int, ...]
    lower: tuple[int, ...]
    upper: tuple[int, ...]
    proper: bool = False

    def __post_init__(self):
        if not len(self.generators) == len(self.lower) == len(self.upper):
            raise ValueError("one bound pair per generator")
        if any(a > b for a, b in zip(self.lower, self.upper)):
            raise ValueError("empty dimension")

    @property
    def rank(self) -> int:
        return len(self.generators)

    @property
    def volume(self) -> int:
        return math.prod(b - a + 1 for a, b in zip(self.lower, self.upper))

    @property
    def symmetric(self) -> bool:
        return self.base == 0 and all(a == -b for a, b in zip(self.lower, self.upper))

    def _reduce(self, x: int) -> int:
        return x % self.modulus if self.modulus else x

    def elements(self) -> list[int]:
        """Image of the box, with multiplicity, in box order."""
        if self.volume > GAP_ENUM_MAX:
            raise ValueError("volume too large to enumerate")
        out = []
        ranges = [range(a, b + 1) for a, b in zip(self.lower, self.upper)]
        for xs in product(*ranges):
            out.append(self._reduce(self.base + sum(x * g for x, g in zip(xs, self.generators))))
        return out

    def image(self) -> set[int]:
        return set(self.elements())

    def is_injective(self) -> bool:
        """Enumerate the box and look for collisions."""
        return len(self.image()) == self.volume

    def contains(self, x: int) -> bool:
        if self.rank == 1 and self.modulus:
            q = self.modulus
            g = self.generators[0] % q
            if g == 0:
                return (x - self.base) % q == 0
            j0 = (x - self.base) * pow(g, -1, q) % q
            lo, hi = self.lower[0], self.upper[0]
            return lo + (j0 - lo) % q <= hi
        return self._reduce(x) in self.image()


@dataclass(frozen=True)
class GapExtraction:
    gap: Gap
    covered: tuple[int, ...]
    dilation: int
    level: int
    size_bound: float
    n_prime: int
    rho: float
    complete: bool

    @property
    def size(self) -> int:
        return self.gap.volume

    @property
    def within_bound(self) -> bool:
        return self.size <= self.size_bound

    def verify(self, w) -> dict:
        """Replay the postconditions against the input vector."""
        w = FpVector.of(w, self.gap.modulus)
        coverage = len(self.covered) >= len(w) - self.n_prime
        inside = all(self.gap.contains(w.coords[i]) for i in self.covered)
        proper = self.gap.is_injective() if self.size <= GAP_ENUM_MAX else None
        return {"coverage": coverage, "inside": inside, "within_bound": self.within_bound,
                "proper": proper, "ok": coverage and inside and self.within_bound}

    def as_dict(self) -> dict:
        g = self.gap
        return {"structure": True, "modulus": g.modulus, "base": g.base, "step": g.generators[0],
                "lower": g.lower[0], "upper": g.upper[0], "size": self.size,
                "size_bound": self.size_bound, "covered": list(self.covered),
                "dilation": self.dilation, "level": self.level, "complete": self.complete}


@dataclass(frozen=True)
class NoStructure:
    rho: float
    threshold: float
    complete: bool
    reason: str = "rho below threshold"

    def as_dict(self) -> dict:
        return {"structure": False, "rho": self.rho, "threshold": self.threshold,
                "complete": self.complete, "reason": self.reason if self.complete else "not found"}


def qsize_bound(p: int, alpha, N: int, n_prime: int, delta: float) -> float:
    """``2 alpha^-1 p sqrt(ceil(N^delta + 1) / N')``."""
    return 2 / _alpha(alpha) * p * math.sqrt(math.ceil(N**delta + 1) / n_prime)


def gap_extract(w, alpha, n_prime: int, delta: float = 0.5, p: int | None = None,
                rng=None) -> GapExtraction | NoStructure:
    """Rank-one progression holding all but ``n_prime`` coordinates, when rho is large.

    Finds the dilation x0 minimising ``alpha sum ||x0 w_i/p||^2``, takes
    ``m`` as that value rounded up (at least 1), keeps the coordinates with
    ``alpha ||x0 w_i/p||^2 <= m / N'`` and returns the tightest progression with
    step ``x0^-1`` around them.  Above ``p = 2^20`` the scan is randomised and a
    negative answer is only "not found".
    """
    w = FpVector.of(w, p)
    a = _alpha(alpha)
    N = len(w)
    if not 1 <= n_prime <= N:
        raise ValueError("need 1 <= N' <= N")
    if not 0 < delta < 1:
        raise ValueError("delta must lie in (0, 1)")
    P = w.p
    arr = w.array()
    threshold = math.exp(-(N**delta))
    complete = P <= GAP_EXACT_MAX_P
    if complete:
        t = np.arange(1, P, dtype=np.int64)
        S = level_sums(w)
        r = float(np.sum(np.exp(-a * S.astype(np.float64) / (P * P)))) / P
    else:
        rng = rng if rng is not None else np.random.default_rng(0)
        t = rng.integers(1, P, size=GAP_RANDOM_SCAN, dtype=np.int64)
        S = np.concatenate([_dist_sq(t[i:i + 2**16], arr, P) for i in range(0, len(t), 2**16)])
        r = (P - 1) / P * float(np.mean(np.exp(-a * S.astype(np.float64) / float(P) ** 2)))
    if r < threshold:
        return NoStructure(r, threshold, complete)
    j = int(np.argmin(S))
    x0 = int(t[j])
    level = a * float(S[j]) / float(P) ** 2
    m = max(1, math.ceil(level - 1e-12))
    rs = (x0 * arr) % P
    cen = np.where(rs > P // 2, rs - P, rs)
    dist = np.minimum(rs, P - rs).astype(np.float64) / P
    keep = np.nonzero(a * dist * dist * n_prime <= m * (1 + 1e-12))[0]
    js = cen[keep]
    step = pow(x0, -1, P)
    gap = Gap(P, 0, (step,), (int(js.min()),), (int(js.max()),), proper=True)
    return GapExtraction(gap, tuple(int(i) for i in keep), x0, m,
                         qsize_bound(P, a, N, n_prime, delta), n_prime, r, complete)


# ---------------------------------------------------------- bilinear forms


@dataclass(frozen=True)
class FormConcentration:
    value: float
    stderr: float
    exact: Fraction | None = None
    counts: dict = field(default_factory=dict, compare=False)

    def as_dict(self) -> dict:
        return {"value": self.value, "stderr": self.stderr,
                "exact": None if self.exact is None else str(self.exact)}


def _integer_weights(d: EntryDistribution) -> tuple[np.ndarray, np.ndarray, int]:
    D = math.lcm(*(q.denominator for q in d.probs))
    return (np.array(d.values, dtype=np.int64),
            np.array([int(q * D) for q in d.probs], dtype=np.int64), D)


def _all_vectors(d: EntryDistribution, n: int) -> tuple[np.ndarray, np.ndarray]:
    vals, wts, _ = _integer_weights(d)
    idx = np.array(list(product(range(len(vals)), repeat=n)), dtype=np.int64).reshape(-1, n)
    return vals[idx], np.prod(wts[idx], axis=1) if n else np.ones(1, dtype=np.int64)


def _form_matrix(B, p: int) -> np.ndarray:
    check_prime(p)
    M = np.array(B, dtype=object)
    if M.ndim != 2:
        raise ValueError("matrix expected")
    return (M % p).astype(np.int64)


def _exact_sup(values: np.ndarray, weights: np.ndarray, p: int, total: int) -> FormConcentration:
    hist = np.zeros(p, dtype=np.int64)
    np.add.at(hist, values % p, weights)
    ex = Fraction(int(hist.max()), total)
    return FormConcentration(float(ex), 0.0, ex)


def _mc_sup(values: np.ndarray, p: int) -> FormConcentration:
    hist = np.bincount(values % p, minlength=p)
    n = len(values)
    v = hist.max() / n
    # the max of empirical frequencies is biased upward by at most a few stderr
    return FormConcentration(float(v), math.sqrt(v * (1 - v) / n))


def rho_bilinear(B, d: EntryDistribution = UNIFORM_01, p: int = 3, trials: int = 10**5,
                 seed: int = 0) -> FormConcentration:
    """``sup_a P(sum b_ij x_i y_j = a)`` for independent X, Y with i.i.d. entries of law d."""
    M = _form_matrix(B, p)
    n, m = M.shape
    s = len(d.support)
    D = _integer_weights(d)[2]
    if s ** (n + m) <= FORM_EXACT_MAX and D ** (n + m) < 2**62:
        X, wx = _all_vectors(d, n)
        Y, wy = _all_vectors(d, m)
        vals = ((X % p) @ M % p) @ (Y % p).T
        weights = np.outer(wx, wy)
        return _exact_sup(vals.ravel(), weights.ravel(), p, D ** (n + m))
    rng = np.random.default_rng(seed)
    X = d.sample(rng, (trials, n)) % p
    Y = d.sample(rng, (trials, m)) % p
    vals = np.einsum("ti,ti->t", (X @ M) % p, Y)
    return _mc_sup(vals, p)


def rho_quadratic(B, d: EntryDistribution = UNIFORM_01, p: int = 3, trials: int = 10**5,
                  seed: int = 0) -> FormConcentration:
    """``sup_a P(sum b_ij x_i x_j = a)`` for a square matrix B and i.i.d. entries."""
    M = _form_matrix(B, p)
    n, m = M.shape
    if n != m:
        raise ValueError("quadratic form needs a square matrix")
    s = len(d.support)
    D = _integer_weights(d)[2]
    if s**n <= FORM_EXACT_MAX and D**n < 2**62:
        X, wx = _all_vectors(d, n)
        X = X % p
        vals = np.einsum("ti,ti->t", (X @ M) % p, X)
        return _exact_sup(vals, wx, p, D**n)
    rng = np.random.default_rng(seed)
    X = d.sample(rng, (trials, n)) % p
    vals = np.einsum("ti,ti->t", (X @ M) % p, X)
    return _mc_sup(vals, p)


def _law(d: EntryDistribution) -> list[tuple[int, Fraction]]:
    return list(d.support)


def _difference_law(d: EntryDistribution) -> list[tuple[int, Fraction]]:
    out: dict[int, Fraction] = {}
    for u, a in d.support:
        for v, b in d.support:
            out[u - v] = out.get(u - v, Fraction(0)) + a * b
    return sorted(out.items())


def decoupling_check(a, b, I: Sequence[int], p: int, d: EntryDistribution = UNIFORM_01) -> tuple[Fraction, Fraction]:
    """Both sides of the fourth-moment decoupling inequality, exactly.

    Left: ``sup_r |P(sum a_ij x_i x_j + sum b_i x_i = r) - 1/p|^4``.
    Right: ``|P(sum_{i in I, j not in I} a_ij y_i y_j = 0) - 1/p|`` with
    ``y = xi - xi'``.  The left side never exceeds the right.
    """
    check_prime(p)
    n = len(a)
    if any(len(row) != n for row in a) or any(a[i][j] % p != a[j][i] % p for i in range(n) for j in range(n)):
        raise ValueError("a must be a symmetric square matrix")
    if len(b) != n:
        raise ValueError("b has the wrong length")
    Iset = set(I)
    if not Iset <= set(range(n)):
        raise ValueError("I must index rows of a")
    inv = Fraction(1, p)
    dist = [Fraction(0)] * p
    for xs in product(_law(d), repeat=n):
        x = [v for v, _ in xs]
        pr = math.prod((q for _, q in xs), start=Fraction(1))
        f = sum(a[i][j] * x[i] * x[j] for i in range(n) for j in range(n)) + sum(bi * xi for bi, xi in zip(b, x))
        dist[f % p] += pr
    lhs = max(abs(q - inv) for q in dist) ** 4
    zero = Fraction(0)
    for ys in product(_difference_law(d), repeat=n):
        y = [v for v, _ in ys]
        pr = math.prod((q for _, q in ys), start=Fraction(1))
        g = sum(a[i][j] * y[i] * y[j] for i in Iset for j in range(n) if j not in Iset)
        if g % p == 0:
            zero += pr
    return lhs, abs(zero - inv)
