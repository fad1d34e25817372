"""Limiting constants, local probabilities and corank laws, with error bounds.

Every real-valued quantity is returned as a :class:`TruncatedReal` whose
``abs_error_bound`` covers truncation of infinite sums and products plus a
floating-point allowance.  Products over all primes are reduced to a finite
product over ``p <= PRIME_CUTOFF`` and a tail that is bounded analytically.
"""

from __future__ import annotations

import math
import threading
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from typing import Iterable, Mapping

import numpy as np
from sympy import isprime

from .abelian import (
    AbelianGroup,
    aut_order,
    perfect_pairing_count,
    sp_order,
    sylow,
    sym_pairing_ratio_closed_form,
    torsion_is_square,
    PAIRING_MAX_ORDER,
)

PRIME_CUTOFF = 10**6
ZETA_TERMS = 10**6
EPS = 2.3e-16
TERM_FLOOR = 1e-18  # factors (1 - x) with x below this are dropped


@dataclass(frozen=True)
class TruncatedReal:
    value: float
    abs_error_bound: float = 0.0

    def __post_init__(self):
        if not self.abs_error_bound >= 0:
            raise ValueError("error bound must be nonnegative")

    def __float__(self) -> float:
        return self.value

    def __mul__(self, other) -> "TruncatedReal":
        if not isinstance(other, TruncatedReal):
            other = TruncatedReal(float(other), 0.0)
        a, b = self.value, other.value
        ea, eb = self.abs_error_bound, other.abs_error_bound
        v = a * b
        return TruncatedReal(v, abs(a) * eb + abs(b) * ea + ea * eb + EPS * abs(v))

    __rmul__ = __mul__

    def __truediv__(self, other) -> "TruncatedReal":
        if not isinstance(other, TruncatedReal):
            other = TruncatedReal(float(other), 0.0)
        b, eb = other.value, other.abs_error_bound
        if abs(b) <= eb:
            raise ZeroDivisionError("divisor interval contains zero")
        v = self.value / b
        err = (self.abs_error_bound + abs(v) * eb) / (abs(b) - eb)
        return TruncatedReal(v, err + EPS * abs(v))

    def inverse(self) -> "TruncatedReal":
        return TruncatedReal(1.0) / self

    def contains(self, x: float, slack: float = 0.0) -> bool:
        return abs(x - self.value) <= self.abs_error_bound + slack

    def as_dict(self, name: str | None = None) -> dict:
        d = {"value": self.value, "abs_error_bound": self.abs_error_bound}
        return {"name": name, **d} if name else d


@dataclass
class CorankDistribution:
    """Law of a corank ``k >= 0``; mass outside ``probs`` is at most ``tail_bound``."""

    p: int
    probs: dict[int, float | Fraction] = field(default_factory=dict)
    tail_bound: float = 0.0

    def prob(self, k: int):
        return self.probs.get(k, 0)

    def support(self) -> list[int]:
        return sorted(k for k, v in self.probs.items() if v)

    def total(self):
        return sum(self.probs.values())

    def as_dict(self) -> dict:
        return {
            "p": self.p,
            "probs": {str(k): float(v) for k, v in sorted(self.probs.items())},
            "tail_bound": self.tail_bound,
        }


# ---------------------------------------------------------------------------
# primes and elementary products

_prime_lock = threading.Lock()


@lru_cache(maxsize=4)
def _primes_upto_cached(n: int) -> np.ndarray:
    sieve = np.ones(n + 1, dtype=bool)
    sieve[:2] = False
    for i in range(2, int(n**0.5) + 1):
        if sieve[i]:
            sieve[i * i :: i] = False
    return np.flatnonzero(sieve)


def primes_upto(n: int) -> np.ndarray:
    with _prime_lock:
        return _primes_upto_cached(n)


def _log_product(terms: np.ndarray) -> TruncatedReal:
    """``prod(1 + terms)`` via a pairwise-summed sum of ``log1p``."""
    logs = np.log1p(terms)
    s = float(np.sum(logs))
    v = math.exp(s)
    return TruncatedReal(v, v * (len(terms) + 4) * EPS)


def q_product(x: float, first: int, step: int = 1) -> TruncatedReal:
    """``prod_{i >= 0} (1 - x^(first + step*i))`` for ``0 < x < 1``."""
    if first == 0:
        return TruncatedReal(0.0, 0.0)
    v = 1.0
    e = first
    n = 0
    while True:
        t = x**e
        if t < TERM_FLOOR:
            break
        v *= 1.0 - t
        e += step
        n += 1
    # omitted factors lie in [exp(-tail/(1-t)), 1]
    tail = t / (1.0 - x**step)
    err = v * (-math.expm1(-tail / (1.0 - tail))) + v * (n + 2) * EPS
    return TruncatedReal(v, err)


def finite_product(factors: Iterable[float]) -> TruncatedReal:
    v = 1.0
    n = 0
    for f in factors:
        v *= f
        n += 1
    return TruncatedReal(v, abs(v) * (n + 1) * EPS)


# ---------------------------------------------------------------------------
# zeta and the named constants


@lru_cache(maxsize=None)
def zeta(s: float) -> TruncatedReal:
    """``sum n^-s`` for real ``s >= 2``: direct sum plus an integral-bracketed tail."""
    if s < 2:
        raise ValueError("zeta is evaluated only for s >= 2")
    N = ZETA_TERMS if s < 8 else 2000
    n = np.arange(N, 0, -1, dtype=np.float64)  # small terms first
    head = float(np.sum(n ** (-float(s))))
    # sum_{n > N} n^-s lies between the integrals from N+1 and from N
    lo = (N + 1) ** (1 - s) / (s - 1)
    hi = N ** (1 - s) / (s - 1)
    value = head + (lo + hi) / 2
    return TruncatedReal(value, (hi - lo) / 2 + 64 * EPS * value)


def _prod_zeta_inv(start: int, step: int) -> TruncatedReal:
    """``prod_{i >= 0} zeta(start + step*i)^-1``, truncated once ``zeta - 1 < 1e-17``."""
    out = TruncatedReal(1.0)
    s = start
    while True:
        bound = 2.0**-s * (1 + 2 / (s - 1))  # zeta(s) - 1 <= 2^-s + int_2^inf x^-s
        if bound < 1e-17:
            break
        out = out / zeta(s)
        s += step
    # remaining factors each in [1 - bound_s, 1]
    tail = sum(2.0**-t * (1 + 2 / (t - 1)) for t in range(s, s + 200 * step, step))
    return TruncatedReal(out.value, out.abs_error_bound + out.value * tail)


@lru_cache(maxsize=None)
def cyclic_const_sym_lap() -> TruncatedReal:
    """``prod_{i >= 1} zeta(2i+1)^-1``."""
    return _prod_zeta_inv(3, 2)


@lru_cache(maxsize=None)
def prod_zeta_inv_from_two() -> TruncatedReal:
    """``prod_{k >= 2} zeta(k)^-1``."""
    return _prod_zeta_inv(2, 1)


def _cube_tail_bound(P: int) -> float:
    # sum_{n > P} 1/(n^3 - n) <= int_P^inf dx/(x^3 - x)
    return -0.5 * math.log1p(-1.0 / P**2)


@lru_cache(maxsize=None)
def _tail_inv_one_minus_p2(P: int) -> TruncatedReal:
    """``prod_{p > P} (1 - p^-2)^-1 = zeta(2) prod_{p <= P} (1 - p^-2)``."""
    ps = primes_upto(P).astype(np.float64)
    return zeta(2) * _log_product(-(ps**-2))


@lru_cache(maxsize=None)
def euler_iid() -> TruncatedReal:
    """``prod_p (1 + 1/(p(p-1)))``.

    Each factor is ``(1 + p^-3)/(1 - p^-2)``; the tail over ``p > P`` is
    ``prod (1 - p^-2)^-1`` (exact via zeta(2)) times ``prod (1 + p^-3)`` in ``[1, e^t]``.
    """
    P = PRIME_CUTOFF
    ps = primes_upto(P).astype(np.float64)
    head = _log_product(1.0 / (ps * (ps - 1)))
    t = _cube_tail_bound(P)
    cube = TruncatedReal(math.exp(t / 2), math.expm1(t) / 2 + EPS)
    return head * _tail_inv_one_minus_p2(P) * cube


def euler_alt_shifted(k0: int = 2) -> TruncatedReal:
    """``prod_{p >= k0} (1 - p^-2)^-1 (1 - p^-2 + p^-3) = prod_{p >= k0} (1 + 1/(p^3 - p))``."""
    P = max(PRIME_CUTOFF, k0)
    ps = primes_upto(P).astype(np.float64)
    ps = ps[ps >= k0]
    head = _log_product(1.0 / (ps**3 - ps))
    t = _cube_tail_bound(P)
    return head * TruncatedReal(math.exp(t / 2), math.expm1(t) / 2 + EPS)


@lru_cache(maxsize=None)
def euler_alt() -> TruncatedReal:
    """``prod_p (1 - p^-2 + p^-3)``.

    Finite product over ``p <= P``; the tail factors as
    ``prod_{p>P} (1 - p^-2) * prod_{p>P} (1 + 1/(p^3 - p))``.
    """
    P = PRIME_CUTOFF
    ps = primes_upto(P).astype(np.float64)
    head = _log_product(-(ps**-2) + ps**-3)
    t = _cube_tail_bound(P)
    cube = TruncatedReal(math.exp(t / 2), math.expm1(t) / 2 + EPS)
    return head / _tail_inv_one_minus_p2(P) * cube


@lru_cache(maxsize=None)
def cyclic_const_iid() -> TruncatedReal:
    return euler_iid() * prod_zeta_inv_from_two()


@lru_cache(maxsize=None)
def square_cyclic_const_alt_even() -> TruncatedReal:
    """``zeta(2) prod zeta(2i+1)^-1 prod_p (1 - p^-2 + p^-3)``."""
    return zeta(2) * cyclic_const_sym_lap() * euler_alt()


# ---------------------------------------------------------------------------
# local probabilities


def _check_primes(B: AbelianGroup, P: Iterable[int]) -> list[int]:
    P = sorted(set(int(p) for p in P))
    if any(not isprime(p) for p in P):
        raise ValueError(f"{P} contains a non-prime")
    if B.free_rank:
        raise ValueError("B must be finite")
    missing = [p for p in B.primes() if p not in P]
    if missing:
        raise ValueError(f"P must contain every prime dividing |B|; missing {missing}")
    return P


def sym_pairing_ratio(B: AbelianGroup) -> Fraction:
    """``#{symmetric perfect pairings on B} / (|B| |Aut B|)``.

    Brute force within the pairing bound; beyond it the closed form (validated
    against brute force in the tests) is used per Sylow subgroup.
    """
    if B.order <= PAIRING_MAX_ORDER:
        return Fraction(perfect_pairing_count(B, "symmetric"), B.order * aut_order(B, "auto"))
    out = Fraction(1)
    for p in B.primes():
        out *= sym_pairing_ratio_closed_form(sylow(B, p))
    return out


def local_prob_iid(B: AbelianGroup, P) -> TruncatedReal:
    P = _check_primes(B, P)
    out = TruncatedReal(1.0 / aut_order(B, "auto"))
    for p in P:
        out = out * q_product(1.0 / p, 1)
    return out


def local_prob_sym(B: AbelianGroup, P) -> TruncatedReal:
    P = _check_primes(B, P)
    out = TruncatedReal(float(sym_pairing_ratio(B)))
    for p in P:
        out = out * q_product(1.0 / p, 1, 2)
    return out


def local_prob_lap(B: AbelianGroup, P) -> TruncatedReal:
    return local_prob_sym(B, P)


def local_prob_alt_even(B: AbelianGroup, P) -> TruncatedReal:
    P = _check_primes(B, P)
    if not torsion_is_square(B):
        return TruncatedReal(0.0)
    out = TruncatedReal(B.order / sp_order(B))
    for p in P:
        out = out * q_product(1.0 / p, 1, 2)
    return out


def local_prob_alt_odd_torsion(B: AbelianGroup, P) -> TruncatedReal:
    P = _check_primes(B, P)
    if not torsion_is_square(B):
        return TruncatedReal(0.0)
    out = TruncatedReal(1.0 / sp_order(B))
    for p in P:
        out = out * q_product(1.0 / p, 3, 2)
    return out


def local_prob_digraph(B: AbelianGroup) -> TruncatedReal:
    if B.free_rank:
        raise ValueError("B must be finite")
    return prod_zeta_inv_from_two() / (B.order * aut_order(B, "auto"))


def odd_alt_class_prob(B: AbelianGroup) -> TruncatedReal:
    """Limit of ``P(cok(A_{2n+1}) = Z x B)``."""
    if B.free_rank or not torsion_is_square(B):
        return TruncatedReal(0.0)
    return cyclic_const_sym_lap() / sp_order(B)


def prodcyc_prob(model: str, B: AbelianGroup, k0: int) -> TruncatedReal:
    """Limit of ``P(cok in C_B)``, ``C_B`` = ``B`` times a cyclic group (squared for ``alt``)
    whose order has no prime factor below ``k0``."""
    if B.free_rank:
        raise ValueError("B must be finite")
    if any(p >= k0 for p in B.primes()):
        raise ValueError("k0 must exceed every prime dividing |B|")
    small = finite_product(1.0 - 1.0 / p for p in range(2, k0) if isprime(p))
    if model == "iid":
        ps = [p for p in range(2, k0) if isprime(p)]
        large = euler_iid() / finite_product(1 + 1 / (p * (p - 1)) for p in ps)
        return large * small * prod_zeta_inv_from_two() / aut_order(B, "auto")
    if model in ("sym", "lap"):
        return cyclic_const_sym_lap() * small * float(sym_pairing_ratio(B))
    if model == "alt":
        if not torsion_is_square(B):
            return TruncatedReal(0.0)
        return cyclic_const_sym_lap() * small * euler_alt_shifted(k0) * (B.order / sp_order(B))
    raise ValueError(f"unknown model {model!r}")


# ---------------------------------------------------------------------------
# corank laws


def corank_limit_sym(p: int, r: int) -> TruncatedReal:
    """Limit of ``P(rank(M_n/p) = n - r)``."""
    x = 1.0 / p
    return q_product(x, r + 1) / q_product(x * x, 1) * x ** (r * (r + 1) // 2)


def corank_limit_alt_even(p: int, r: int) -> TruncatedReal:
    """Limit of ``P(rank(A_2n/p) = 2n - 2r)``."""
    x = 1.0 / p
    den = finite_product(1 - x ** (2 * k) for k in range(1, r + 1))
    return q_product(x, 2 * r + 1, 2) / den * x ** (r * (2 * r - 1))


def corank_limit_alt_odd(p: int, r: int) -> TruncatedReal:
    """Limit of ``P(rank(A_{2n+1}/p) = 2n - 2r)``, i.e. corank ``2r + 1``."""
    x = 1.0 / p
    den = finite_product(1 - x ** (2 * k) for k in range(1, r + 1))
    return q_product(x, 2 * r + 3, 2) / den * x ** (r * (2 * r + 1))


def _limit_law(p: int, weight, parity: int | None) -> CorankDistribution:
    c = q_product(1.0 / p, 1, 2)
    probs: dict[int, float] = {}
    k = 0
    while True:
        if parity is None or k % 2 == parity:
            v = c.value * weight(k)
            probs[k] = v
            if v < 1e-17 and k > 2:
                break
        k += 1
    # successive ratios are at most p^k/(p^(k+1) - 1) < 1, summed geometrically
    last = max(probs)
    tail = probs[last] * 2.0 / (p - 1)
    err = sum(probs.values()) * (c.abs_error_bound / c.value + 8 * EPS)
    return CorankDistribution(p, probs, tail + err)


def _inv_pochhammer(p: int, k: int) -> float:
    return 1.0 / math.prod(p**i - 1 for i in range(1, k + 1))


def mu_sym(p: int) -> CorankDistribution:
    return _limit_law(p, lambda k: _inv_pochhammer(p, k), None)


def mu_alt_even(p: int) -> CorankDistribution:
    return _limit_law(p, lambda k: p**k * _inv_pochhammer(p, k), 0)


def mu_alt_odd(p: int) -> CorankDistribution:
    return _limit_law(p, lambda k: p**k * _inv_pochhammer(p, k), 1)


def _count_sym_rank(n: int, rho: int, p: int) -> Fraction:
    h = rho // 2
    out = Fraction(1)
    for i in range(1, h + 1):
        out *= Fraction(p ** (2 * i), p ** (2 * i) - 1)
    for i in range(rho):
        out *= p ** (n - i) - 1
    return out


def _count_alt_rank(n: int, rho: int, p: int) -> Fraction:
    if rho % 2:
        return Fraction(0)
    h = rho // 2
    out = Fraction(1)
    for i in range(1, h + 1):
        out *= Fraction(p ** (2 * i - 2), p ** (2 * i) - 1)
    for i in range(rho):
        out *= p ** (n - i) - 1
    return out


def _finite_law(n: int, p: int, count, total_exp: int) -> CorankDistribution:
    if n < 1:
        raise ValueError("n must be positive")
    if not isprime(p):
        raise ValueError(f"{p} is not prime")
    total = p**total_exp
    probs = {}
    for k in range(n + 1):
        v = count(n, n - k, p) / total
        probs[k] = v if n <= 12 else float(v)
    return CorankDistribution(p, probs, 0.0)


def mu_sym_finite(n: int, p: int) -> CorankDistribution:
    """Corank law of a uniform symmetric ``n x n`` matrix over F_p (exact for ``n <= 12``)."""
    return _finite_law(n, p, _count_sym_rank, n * (n + 1) // 2)


def mu_alt_finite(n: int, p: int) -> CorankDistribution:
    """Corank law of a uniform skew-symmetric ``n x n`` matrix over F_p."""
    return _finite_law(n, p, _count_alt_rank, n * (n - 1) // 2)


def _as_probs(d) -> dict[int, float]:
    if isinstance(d, CorankDistribution):
        return {k: float(v) for k, v in d.probs.items()}
    if hasattr(d, "counts") and hasattr(d, "trials"):
        return {int(k): v / d.trials for k, v in d.counts.items()}
    if isinstance(d, Mapping):
        return {int(k): float(v) for k, v in d.items()}
    raise TypeError(f"cannot read a distribution from {type(d).__name__}")


def tv_distance(d1, d2) -> float:
    """Total variation distance over the union of the listed supports."""
    a, b = _as_probs(d1), _as_probs(d2)
    keys = set(a) | set(b)
    return 0.5 * sum(abs(a.get(k, 0.0) - b.get(k, 0.0)) for k in keys)


def tv_distance_bound(d1, d2) -> float:
    """:func:`tv_distance` plus half the declared tail masses."""
    tails = sum(getattr(d, "tail_bound", 0.0) for d in (d1, d2))
    return tv_distance(d1, d2) + 0.5 * tails


NAMED_CONSTANTS = {
    "cyclic-sym": ("prod_zeta_odd_inv", cyclic_const_sym_lap),
    "cyclic-lap": ("prod_zeta_odd_inv", cyclic_const_sym_lap),
    "cyclic-iid": ("cyclic_const_iid", cyclic_const_iid),
    "square-cyclic-alt": ("square_cyclic_const_alt_even", square_cyclic_const_alt_even),
    "zeta-inv-from-2": ("prod_zeta_inv_from_two", prod_zeta_inv_from_two),
}

NAMED_LAWS = {
    "mu-sym": mu_sym,
    "mu-alt-even": mu_alt_even,
    "mu-alt-odd": mu_alt_odd,
}
