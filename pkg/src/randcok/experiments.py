"""Monte Carlo and exhaustive experiments on cokernels of random matrices.

Every trial draws from its own counter-based stream keyed by ``(seed, trial)``,
so results do not depend on how trials are split across workers.
"""

from __future__ import annotations

import math
import time
from collections import Counter
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from fractions import Fraction
from functools import lru_cache

import numpy as np
from sympy import factorint

from .abelian import AbelianGroup, is_square_of_cyclic_torsion, sur_count, sym2_order, wedge2_order, sylow
from .linalg import (
    _vec_pow,
    batch_det_adjugate,
    batch_rank_mod_p,
    check_prime,
    invariant_factors,
    rank_mod_p,
    rank_over_q,
)
from .models import (
    GRAPH_KINDS,
    ModelSpec,
    _sample_adjacency,
    enumerate_all,
    enumerate_graphs,
    laplacian_from_adjacency,
    sample_array,
    trial_rng,
)
from .theory import CorankDistribution, TruncatedReal, tv_distance

STATISTICS = (
    "is_cyclic",
    "is_square_cyclic_torsion",
    "corank_mod_p",
    "sylow_type",
    "sur_count_mod_a",
    "det_is_zero",
    "cokernel_class",
)
BOOLEAN_STATS = ("is_cyclic", "is_square_cyclic_torsion", "det_is_zero", "cokernel_class")
Z95 = 1.959963984540054
BLOCK = 256
_DET_PRIME = 2**31 - 1

# Cyclicity of Jacobians of connected G(n, q), 10^6 graphs per cell.
TABLE1 = {
    (15, 0.3): 0.784255, (15, 0.5): 0.792895, (15, 0.7): 0.775746,
    (30, 0.3): 0.793807, (30, 0.5): 0.793570, (30, 0.7): 0.793375,
    (45, 0.3): 0.793308, (45, 0.5): 0.793962, (45, 0.7): 0.793637,
    (60, 0.3): 0.793436, (60, 0.5): 0.793694, (60, 0.7): 0.79354,
}


@dataclass(frozen=True)
class ExperimentSpec:
    model: ModelSpec
    statistic: str
    trials: int = 1000
    seed: int = 0
    primes: tuple[int, ...] = ()
    group: AbelianGroup | None = None
    modulus: int | None = None
    connected: bool = False

    def __post_init__(self):
        st = self.statistic
        if st not in STATISTICS:
            raise ValueError(f"unknown statistic {st!r}; expected one of {STATISTICS}")
        if int(self.trials) < 1:
            raise ValueError("trials must be at least 1")
        object.__setattr__(self, "trials", int(self.trials))
        object.__setattr__(self, "primes", tuple(int(p) for p in self.primes))
        for p in self.primes:
            check_prime(p)
        kind = self.model.kind
        if st == "is_square_cyclic_torsion" and (kind != "skew" or self.model.n % 2):
            raise ValueError("is_square_cyclic_torsion needs the skew model with even n")
        if st == "corank_mod_p" and len(self.primes) != 1:
            raise ValueError("corank_mod_p needs exactly one prime")
        if st in ("sylow_type", "cokernel_class") and not self.primes:
            raise ValueError(f"{st} needs a prime set")
        if st in ("sur_count_mod_a", "cokernel_class"):
            if self.group is None or not self.group.is_finite:
                raise ValueError(f"{st} needs a finite group")
        if st == "sur_count_mod_a":
            if self.modulus is None or self.modulus < 1 or self.modulus % self.group.exponent:
                raise ValueError("sur_count_mod_a needs a modulus a with aG = 0")
        if st == "cokernel_class" and not set(self.group.primes()) <= set(self.primes):
            raise ValueError("group has primes outside the prime set")
        if self.connected and kind != "laplacian_er":
            raise ValueError("connectedness conditioning applies to laplacian_er only")

    def to_json(self) -> dict:
        out = {"model": self.model.to_json(), "statistic": self.statistic,
               "trials": self.trials, "seed": self.seed}
        if self.primes:
            out["primes"] = list(self.primes)
        if self.group is not None:
            out["group"] = str(self.group)
        if self.modulus is not None:
            out["modulus"] = self.modulus
        if self.connected:
            out["connected"] = True
        return out

    @classmethod
    def from_json(cls, data: dict) -> "ExperimentSpec":
        return cls(
            ModelSpec.from_json(data["model"]),
            data["statistic"],
            int(data.get("trials", 1000)),
            int(data.get("seed", 0)),
            tuple(data.get("primes", ())),
            AbelianGroup.parse(data["group"]) if data.get("group") is not None else None,
            data.get("modulus"),
            bool(data.get("connected", False)),
        )


# ---------------------------------------------------------------- intervals


def wilson(k: int, n: int, z: float = Z95) -> tuple[float, float]:
    if n == 0:
        return 0.0, 1.0
    ph = k / n
    den = 1 + z * z / n
    centre = (ph + z * z / (2 * n)) / den
    half = z * math.sqrt(ph * (1 - ph) / n + z * z / (4 * n * n)) / den
    lo = 0.0 if k == 0 else max(0.0, centre - half)
    hi = 1.0 if k == n else min(1.0, centre + half)
    return lo, hi


@dataclass(frozen=True)
class Verdict:
    kind: str
    value: float
    threshold: float
    passed: bool

    @property
    def label(self) -> str:
        return "PASS" if self.passed else "FAIL"


@dataclass(frozen=True)
class EmpiricalResult:
    spec: ExperimentSpec
    counts: dict
    trials: int
    estimate: float
    ci: tuple[float, float]
    ci_kind: str
    seed: int
    elapsed_ms: float
    rejected: int = 0
    target: float | None = None
    z: float | None = None
    tv: float | None = None
    verdict: str | None = None

    @property
    def stderr(self) -> float:
        return (self.ci[1] - self.ci[0]) / (2 * Z95)

    def mean(self) -> float:
        return sum(float(k) * c for k, c in self.counts.items()) / self.trials

    def distribution(self) -> dict:
        return {k: c / self.trials for k, c in self.counts.items()}

    def with_verdict(self, v: Verdict, target: float | None = None) -> "EmpiricalResult":
        kw = {"verdict": v.label}
        if v.kind == "z":
            kw.update(z=v.value, target=target)
        else:
            kw["tv"] = v.value
        return replace(self, **kw)

    def as_dict(self, timing: bool = True) -> dict:
        out = {
            "spec": self.spec.to_json(),
            "counts": {_key_str(k): c for k, c in sorted(self.counts.items(), key=lambda kv: _sort_key(kv[0]))},
            "estimate": self.estimate,
            "wilson_ci" if self.ci_kind == "wilson" else "normal_ci": list(self.ci),
            "seed": self.seed,
        }
        if self.rejected:
            out["rejected"] = self.rejected
        for name in ("target", "z", "tv", "verdict"):
            if getattr(self, name) is not None:
                out[name] = getattr(self, name)
        if timing:
            out["elapsed_ms"] = self.elapsed_ms
        return out


def _key_str(k) -> str:
    if isinstance(k, bool):
        return "true" if k else "false"
    return str(k)


def _sort_key(k):
    return (0, k, "") if isinstance(k, (int, bool)) else (1, 0, str(k))


# -------------------------------------------------------------- statistics


def _connected(X: np.ndarray) -> bool:
    m = len(X)
    seen = np.zeros(m, dtype=bool)
    seen[0] = True
    frontier = seen.copy()
    while frontier.any():
        nxt = (X[frontier].sum(axis=0) > 0) & ~seen
        seen |= nxt
        frontier = nxt
    return bool(seen.all())


def draw(spec: ExperimentSpec, trial: int) -> tuple[np.ndarray, int]:
    """The matrix for one trial and the number of rejected draws before it."""
    rng = trial_rng(spec.seed, trial)
    m = spec.model
    if not spec.connected:
        return sample_array(m, rng), 0
    rejected = 0
    while True:
        X = _sample_adjacency(m.vertices, float(m.q), rng, False)
        if _connected(X):
            return laplacian_from_adjacency(X)[: m.n, : m.n], rejected
        rejected += 1


@lru_cache(maxsize=None)
def _sur_elementary(k: int, a: int, G: AbelianGroup) -> int:
    return sur_count(AbelianGroup(0, (a,) * k), G)


def _cokernel_from_factors(factors, rank, n) -> AbelianGroup:
    return AbelianGroup(n - rank, tuple(factors))


def _p_part(G: AbelianGroup, primes) -> AbelianGroup:
    parts = []
    for p in primes:
        parts.extend(p**e for e in sylow(G, p).parts if e)
    return AbelianGroup(0, tuple(parts))


def corank_from_snf(M, p: int) -> int:
    """``n - rank_p(M)`` read off the Smith form: free rank plus factors divisible by p."""
    factors, r, m = invariant_factors(M)
    return (m - r) + sum(1 for d in factors if d % p == 0)


def _evaluate(spec: ExperimentSpec, mats: np.ndarray) -> list:
    st = spec.statistic
    n = spec.model.n
    if st == "corank_mod_p":
        p = spec.primes[0]
        if p < 2**31:
            return (n - batch_rank_mod_p(mats, p)).tolist()
        return [n - rank_mod_p(M.tolist(), p) for M in mats]
    if st == "det_is_zero":
        full = batch_rank_mod_p(mats, _DET_PRIME) == n
        # full rank mod a prime certifies det != 0; otherwise decide over Q
        return [False if f else rank_over_q(M.tolist()) < n for f, M in zip(full, mats)]
    if st == "sur_count_mod_a" and spec.modulus > 1 and _is_prime(spec.modulus):
        a = spec.modulus
        ks = n - batch_rank_mod_p(mats, a) if a < 2**31 else [n - rank_mod_p(M.tolist(), a) for M in mats]
        return [_sur_elementary(int(k), a, spec.group) for k in ks]
    if st == "is_cyclic" and mats.shape[1] == mats.shape[2]:
        return _cyclic_batch(mats)
    if st == "is_square_cyclic_torsion":
        return _square_cyclic_batch(mats)
    out = []
    for M in mats:
        factors, r, m = invariant_factors(M.tolist())
        if st == "is_cyclic":
            out.append((m - r) + sum(1 for d in factors if d > 1) <= 1)
            continue
        G = _cokernel_from_factors(factors, r, m)
        if st == "is_square_cyclic_torsion":
            out.append(G.free_rank == 0 and is_square_of_cyclic_torsion(G))
        elif st == "sylow_type":
            out.append(f"free={G.free_rank};" + ";".join(f"{p}:{sylow(G, p).parts}" for p in spec.primes))
        elif st == "sur_count_mod_a":
            out.append(sur_count(G.tensor_cyclic(spec.modulus), spec.group))
        elif st == "cokernel_class":
            out.append(G.free_rank == 0 and _p_part(G, spec.primes) == spec.group)
    return out


# two fixed probe columns; any choice is exact, these just keep gcds small
def _probe(n: int) -> np.ndarray:
    i = np.arange(n)
    return np.stack([(37 * i + 5) % 97 - 48, (53 * i + 16) % 89 - 44], axis=1)


def _cyclic_batch(mats: np.ndarray) -> list[bool]:
    """Cyclicity of square cokernels without a full Smith form per matrix.

    For nonsingular ``M`` every prime with corank at least 2 divides the whole
    adjugate, hence ``h = gcd(det M, adj(M) R)``.  ``h == 1`` settles the
    common case; otherwise only the primes of ``h`` need a rank check.
    """
    return _adjugate_screen(mats, 1, lambda D: 1, _cyclic_exact)


def _square_cyclic_batch(mats: np.ndarray) -> list[bool]:
    """Skew case: the cokernel is ``H x H`` and the adjugate gcd equals
    ``|H|^2 / exp(H)``, which is ``|Pf| = |H|`` exactly when ``H`` is cyclic."""

    def pfaffian(D: int) -> int | None:
        r = math.isqrt(abs(D))
        return r if r * r == abs(D) else None

    return _adjugate_screen(mats, 2, pfaffian, _square_cyclic_exact)


def _cyclic_exact(M: np.ndarray) -> bool:
    factors, r, m = invariant_factors(M.tolist())
    return (m - r) + sum(1 for d in factors if d > 1) <= 1


def _square_cyclic_exact(M: np.ndarray) -> bool:
    factors, r, m = invariant_factors(M.tolist())
    G = _cokernel_from_factors(factors, r, m)
    return G.free_rank == 0 and is_square_of_cyclic_torsion(G)


def _adjugate_screen(mats: np.ndarray, allowed: int, base, exact) -> list[bool]:
    """True where no prime has corank above ``allowed``, for nonsingular
    square ``mats``; the rest are handed to ``exact``.

    ``base(D)`` is the adjugate gcd expected when the answer is True.  Any
    prime exceeding ``allowed`` divides ``gcd(D, adj(M) R) / base(D)``, so
    only the primes of that quotient need a rank check.
    """
    n = mats.shape[1]
    dets, adj = batch_det_adjugate(mats, _probe(n))
    out: list[bool] = []
    pending: dict[int, list[int]] = {}
    for t, (M, D, y) in enumerate(zip(mats, dets, adj)):
        b = base(D) if y is not None else None
        h = math.gcd(D, *y) // b if b and y is not None else 0
        if h == 1:
            out.append(True)
        elif h == 0 or h.bit_length() > 64:
            out.append(exact(M))
        else:
            out.append(True)
            for q in factorint(h):
                pending.setdefault(q, []).append(t)
    for q, ts in pending.items():
        if q < 2**31:
            ranks = batch_rank_mod_p(mats[ts], q).tolist()
        else:
            ranks = [rank_mod_p(mats[t].tolist(), q) for t in ts]
        for t, r in zip(ts, ranks):
            if n - r > allowed:
                out[t] = False
    return out


def _is_prime(a: int) -> bool:
    try:
        check_prime(a)
        return True
    except ValueError:
        return False


def _run_block(args) -> tuple[Counter, int]:
    spec, start, stop = args
    rejected = 0
    mats = []
    for t in range(start, stop):
        M, r = draw(spec, t)
        mats.append(M)
        rejected += r
    return Counter(_evaluate(spec, np.array(mats, dtype=np.int64))), rejected


def _summarise(spec: ExperimentSpec, counts: Counter, rejected: int, elapsed: float) -> EmpiricalResult:
    n = spec.trials
    st = spec.statistic
    if st in BOOLEAN_STATS:
        k = counts.get(True, 0)
        est, ci, kind = k / n, wilson(k, n), "wilson"
    elif st == "corank_mod_p":
        k = counts.get(0, 0)
        est, ci, kind = k / n, wilson(k, n), "wilson"
    elif st == "sylow_type":
        triv = f"free=0;" + ";".join(f"{p}:()" for p in spec.primes)
        k = counts.get(triv, 0)
        est, ci, kind = k / n, wilson(k, n), "wilson"
    else:
        mean = sum(v * c for v, c in counts.items()) / n
        var = sum(c * (v - mean) ** 2 for v, c in counts.items()) / max(1, n - 1)
        half = Z95 * math.sqrt(var / n)
        est, ci, kind = mean, (mean - half, mean + half), "normal"
    return EmpiricalResult(spec, dict(counts), n, est, ci, kind, spec.seed, elapsed, rejected)


def run_monte_carlo(spec: ExperimentSpec, threads: int = 1) -> EmpiricalResult:
    """Independent trials of ``spec``; output depends only on ``(spec, seed)``.

    The point estimate is the frequency of True for predicates, of corank 0
    for ``corank_mod_p``, of the trivial type for ``sylow_type`` and the
    sample mean for ``sur_count_mod_a``.
    """
    t0 = time.perf_counter()
    blocks = [(spec, s, min(spec.trials, s + BLOCK)) for s in range(0, spec.trials, BLOCK)]
    if threads > 1 and len(blocks) > 1:
        with ProcessPoolExecutor(max_workers=threads) as ex:
            parts = list(ex.map(_run_block, blocks))
    else:
        parts = [_run_block(b) for b in blocks]
    counts: Counter = Counter()
    rejected = 0
    for c, r in parts:
        counts.update(c)
        rejected += r
    return _summarise(spec, counts, rejected, (time.perf_counter() - t0) * 1000)


# ----------------------------------------------------------- exact oracle


@dataclass(frozen=True)
class ExactLaw:
    spec: ExperimentSpec
    dist: dict

    def prob(self, outcome) -> Fraction:
        return self.dist.get(outcome, Fraction(0))

    def mean(self) -> Fraction:
        return sum((Fraction(int(k)) * v for k, v in self.dist.items()), Fraction(0))

    def total(self) -> Fraction:
        return sum(self.dist.values(), Fraction(0))

    def as_dict(self) -> dict:
        return {"spec": self.spec.to_json(),
                "law": {_key_str(k): str(v) for k, v in sorted(self.dist.items(), key=lambda kv: _sort_key(kv[0]))}}


def run_exhaustive(spec: ExperimentSpec) -> ExactLaw:
    """Exact law of the statistic over every realisation of the model."""
    m = spec.model
    dist: dict = {}
    if spec.connected:
        items = []
        for g, pr in enumerate_graphs(m.vertices, m.q):
            if g.is_connected():
                items.append((np.array(g.reduced_laplacian().to_list(), dtype=np.int64).reshape(m.n, m.n), pr))
        mass = sum(pr for _, pr in items)
        items = [(M, pr / mass) for M, pr in items]
    else:
        items = [(np.array(M.to_list(), dtype=np.int64).reshape(m.n, m.n), pr) for M, pr in enumerate_all(m)]
    for start in range(0, len(items), BLOCK):
        chunk = items[start:start + BLOCK]
        outs = _evaluate(spec, np.array([M for M, _ in chunk], dtype=np.int64))
        for o, (_, pr) in zip(outs, chunk):
            dist[o] = dist.get(o, Fraction(0)) + pr
    return ExactLaw(spec, dist)


# ------------------------------------------------------------------ moments


def moment_target(kind: str, G: AbelianGroup) -> float | None:
    """Limiting ``E #Sur(cok, G)``: ``|Sym^2 G|`` (skew), ``|Wedge^2 G|`` (symmetric), 1 (iid)."""
    if kind == "skew":
        return float(sym2_order(G))
    if kind == "symmetric":
        return float(wedge2_order(G))
    if kind == "iid":
        return 1.0
    return None


def run_moment(model: ModelSpec, G: AbelianGroup, a: int, trials: int, seed: int = 0,
               threads: int = 1) -> EmpiricalResult:
    """Estimate ``E #Sur(cok(M) (x) Z/a, G)``; requires ``aG = 0``."""
    spec = ExperimentSpec(model, "sur_count_mod_a", trials, seed, group=G, modulus=a)
    res = run_monte_carlo(spec, threads)
    target = moment_target(model.kind, G)
    return replace(res, target=target) if target is not None else res


# ---------------------------------------------------------------- compare


def compare(e: EmpiricalResult, t, threshold: float | None = None) -> Verdict:
    """z-score against a scalar target, TV distance against a corank law."""
    if isinstance(t, CorankDistribution):
        if e.spec.statistic != "corank_mod_p":
            raise ValueError("a corank law compares only with corank_mod_p results")
        thr = 0.02 if threshold is None else threshold
        tv = tv_distance(e.distribution(), t)
        return Verdict("tv", tv, thr, tv < thr)
    if isinstance(t, dict):
        thr = 0.02 if threshold is None else threshold
        tv = tv_distance(e.distribution(), t)
        return Verdict("tv", tv, thr, tv < thr)
    if isinstance(t, TruncatedReal):
        target, slack = t.value, t.abs_error_bound
    elif isinstance(t, (int, float, Fraction)):
        target, slack = float(t), 0.0
    else:
        raise ValueError(f"cannot compare with {type(t).__name__}")
    thr = 3.0 if threshold is None else threshold
    diff = abs(e.estimate - target)
    diff = max(0.0, diff - slack)
    se = e.stderr
    if diff == 0:
        z = 0.0
    elif se == 0:
        z = math.inf
    else:
        z = math.copysign(diff / se, e.estimate - target)
    return Verdict("z", z, thr, abs(z) <= thr)


# ---------------------------------------------------------- rank evolution


def _inverse(x: np.ndarray, p: int) -> np.ndarray:
    if x.dtype == object:
        return np.array([pow(int(v), -1, p) for v in x], dtype=object)
    return _vec_pow(x, p - 2, p)


def leading_ranks(A: np.ndarray, p: int) -> np.ndarray:
    """Ranks over F_p of all leading principal submatrices, shape ``(C, n+1)``.

    Keeps ``P M_N Q`` equal to a partial permutation matrix with unit entries.
    Each new row/column pair is reduced against the existing pivots, leaving a
    vector ``b`` in the new column, ``a`` in the new row and a corner ``c``; the
    rank grows by 2 if both ``a`` and ``b`` are nonzero, by 1 if one of them is
    or if only ``c`` is, and by 0 otherwise.  Cost ``O(n^2)`` per step.
    """
    check_prime(p)
    A = np.asarray(A)
    if A.ndim == 2:
        A = A[None]
    C, n, _ = A.shape
    dt = object if p * p * max(n, 1) >= 2**62 else np.int64
    A = A.astype(dt) % p
    P = np.zeros((C, n, n), dtype=dt)
    P[:, np.arange(n), np.arange(n)] = 1
    Q = P.copy()
    rowpiv = np.full((C, n), -1, dtype=np.int64)
    colpiv = np.full((C, n), -1, dtype=np.int64)
    rank = np.zeros(C, dtype=np.int64)
    out = np.zeros((C, n + 1), dtype=np.int64)
    for N in range(n):
        c = A[:, N, N].copy()
        if N:
            vp = (P[:, :N, :N] @ A[:, :N, N][..., None])[..., 0] % p
            up = (A[:, N, :N][:, None, :] @ Q[:, :N, :N])[:, 0, :] % p
            rp, cp = rowpiv[:, :N], colpiv[:, :N]
            x = np.where(cp >= 0, np.take_along_axis(vp, np.maximum(cp, 0), 1), 0).astype(dt)
            Q[:, :N, N] = (Q[:, :N, N] - (Q[:, :N, :N] @ x[..., None])[..., 0]) % p
            c = (c - (up * x).sum(axis=1)) % p
            y = np.where(rp >= 0, np.take_along_axis(up, np.maximum(rp, 0), 1), 0).astype(dt)
            P[:, N, :N] = (P[:, N, :N] - (y[:, None, :] @ P[:, :N, :N])[:, 0, :]) % p
            b = np.where(rp < 0, vp, 0).astype(dt)
            a = np.where(cp < 0, up, 0).astype(dt)
            hb = (b != 0).any(axis=1)
            ha = (a != 0).any(axis=1)
            istar = (b != 0).argmax(axis=1)
            jstar = (a != 0).argmax(axis=1)
        else:
            hb = ha = np.zeros(C, dtype=bool)
        if hb.any():
            s = np.nonzero(hb)[0]
            i = istar[s]
            inv = _inverse(b[s, i], p)
            k = b[s] * inv[:, None] % p
            k[np.arange(len(s)), i] = 0
            prow = P[s, i, :]
            P[s, :N, :] = (P[s, :N, :] - k[:, :, None] * prow[:, None, :]) % p
            P[s, N, :] = (P[s, N, :] - (c[s] * inv % p)[:, None] * prow) % p
            c[s] = 0
            P[s, i, :] = prow * inv[:, None] % p
            rowpiv[s, i] = N
            colpiv[s, N] = i
            rank[s] += 1
        if ha.any():
            s = np.nonzero(ha)[0]
            j = jstar[s]
            inv = _inverse(a[s, j], p)
            k = a[s] * inv[:, None] % p
            k[np.arange(len(s)), j] = 0
            qcol = Q[s, :, j]
            Q[s, :, :N] = (Q[s, :, :N] - qcol[:, :, None] * k[:, None, :]) % p
            Q[s, :, N] = (Q[s, :, N] - (c[s] * inv % p)[:, None] * qcol) % p
            c[s] = 0
            Q[s, :, j] = qcol * inv[:, None] % p
            rowpiv[s, N] = j
            colpiv[s, j] = N
            rank[s] += 1
        d = ~hb & ~ha & (c != 0)
        if d.any():
            s = np.nonzero(d)[0]
            P[s, N, :] = P[s, N, :] * _inverse(c[s], p)[:, None] % p
            rowpiv[s, N] = N
            colpiv[s, N] = N
            rank[s] += 1
        out[:, N + 1] = rank
    return out


@dataclass
class RankChainRecord:
    p: int
    kind: str
    n0: int
    n: int
    coranks: np.ndarray  # (chains, n - n0 + 1)
    transitions: Counter = field(default_factory=Counter)  # (corank, rank increment) -> count

    @property
    def chains(self) -> int:
        return len(self.coranks)

    def visits(self, k: int) -> int:
        return sum(c for (kk, _), c in self.transitions.items() if kk == k)

    def conditional(self, k: int, pred) -> tuple[float, tuple[float, float], int]:
        """Frequency of rank increments ``d`` with ``pred(d)`` given corank ``k``."""
        n = self.visits(k)
        hits = sum(c for (kk, d), c in self.transitions.items() if kk == k and pred(d))
        return (hits / n if n else float("nan")), wilson(hits, n), n

    def stay(self, k: int):
        return self.conditional(k, lambda d: d == 0)

    def at_most_one(self, k: int):
        return self.conditional(k, lambda d: d <= 1)

    def terminal(self) -> dict[int, float]:
        vals, cnt = np.unique(self.coranks[:, -1], return_counts=True)
        return {int(v): int(c) / self.chains for v, c in zip(vals, cnt)}

    def as_dict(self) -> dict:
        return {
            "p": self.p, "kind": self.kind, "n0": self.n0, "n": self.n, "chains": self.chains,
            "sequence": self.coranks[0].tolist(),
            "terminal": {str(k): v for k, v in self.terminal().items()},
            "transitions": [[k, d, c] for (k, d), c in sorted(self.transitions.items())],
        }


def run_rank_chain(model: ModelSpec, p: int, n0: int, seed: int = 0, chains: int = 1,
                   block: int = 500) -> RankChainRecord:
    """Corank mod p of the leading ``N x N`` minors for ``N = n0 .. model.n``.

    Growing a symmetric or skew matrix by a fresh row and column has the same
    law as reading off leading minors of one full sample; for the Laplacian
    model these are the principal minors ``L_N`` of one sampled ``L_n``.
    """
    check_prime(p)
    n = model.n
    if not 0 <= n0 <= n:
        raise ValueError("need 0 <= n0 <= n")
    seqs = []
    trans: Counter = Counter()
    sizes = np.arange(n0, n + 1)
    for start in range(0, chains, block):
        mats = np.array([sample_array(model, trial_rng(seed, c)) for c in range(start, min(chains, start + block))])
        ranks = leading_ranks(mats, p)[:, n0:]
        cor = sizes[None, :] - ranks
        seqs.append(cor)
        inc = np.diff(ranks, axis=1)
        keys = cor[:, :-1] * 4 + inc
        vals, cnt = np.unique(keys, return_counts=True)
        for v, c_ in zip(vals.tolist(), cnt.tolist()):
            trans[(v // 4, v % 4)] += c_
    return RankChainRecord(p, model.kind, n0, n, np.concatenate(seqs), trans)


# ---------------------------------------------------------- cyclicity table


@dataclass(frozen=True)
class Table1Row:
    n: int
    q: float
    trials: int
    estimate: float
    lo: float
    hi: float
    rejected: int
    reference: float | None

    def as_dict(self) -> dict:
        return {"n": self.n, "q": self.q, "trials": self.trials, "estimate": self.estimate,
                "lo": self.lo, "hi": self.hi, "rejected": self.rejected, "reference": self.reference}


def reproduce_table1(n_list=(15, 30, 45, 60), q_list=(0.3, 0.5, 0.7), trials: int = 2000,
                     seed: int = 0, connected: bool = True, threads: int = 1) -> list[Table1Row]:
    """Cyclicity rate of the sandpile group of G(n, q), conditioned on connectedness by default."""
    rows = []
    for n in n_list:
        for q in q_list:
            model = ModelSpec("laplacian_er", n - 1, q=Fraction(str(q)))
            spec = ExperimentSpec(model, "is_cyclic", trials, seed, connected=connected)
            r = run_monte_carlo(spec, threads)
            rows.append(Table1Row(n, q, trials, r.estimate, r.ci[0], r.ci[1], r.rejected,
                                  TABLE1.get((n, q))))
    return rows
