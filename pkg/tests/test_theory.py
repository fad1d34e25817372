import itertools
import math
from fractions import Fraction

import mpmath
import pytest
import sympy
from hypothesis import given, settings, strategies as st

from randcok.abelian import AbelianGroup
from randcok.linalg import rank_mod_p
from randcok.theory import (
    TruncatedReal,
    corank_limit_alt_even,
    corank_limit_alt_odd,
    corank_limit_sym,
    cyclic_const_iid,
    cyclic_const_sym_lap,
    local_prob_alt_even,
    local_prob_iid,
    local_prob_sym,
    mu_alt_even,
    mu_alt_finite,
    mu_alt_odd,
    mu_sym,
    mu_sym_finite,
    odd_alt_class_prob,
    prod_zeta_inv_from_two,
    prodcyc_prob,
    q_product,
    square_cyclic_const_alt_even,
    tv_distance,
    zeta,
)

mpmath.mp.dps = 30


def mp_prod_zeta(start, step):
    return float(mpmath.fprod(1 / mpmath.zeta(s) for s in range(start, 200, step)))


def mp_euler(f, c2, limit=10**5):
    """Euler product of ``f(p) = 1 + c2 p^-2 + O(p^-3)`` over all primes.

    Exact up to ``limit``; the tail is ``exp(c2 sum_{p > limit} p^-2)`` using the
    prime zeta function, leaving an error of order ``limit^-2``.
    """
    ps = list(sympy.primerange(2, limit))
    head = mpmath.fprod(f(mpmath.mpf(p)) for p in ps)
    tail = mpmath.primezeta(2) - mpmath.fsum(mpmath.mpf(p) ** -2 for p in ps)
    return float(head * mpmath.exp(c2 * tail))


def test_zeta():
    assert zeta(2).contains(math.pi**2 / 6)
    assert abs(zeta(2).value - math.pi**2 / 6) < 1e-10
    assert zeta(3).contains(float(mpmath.zeta(3)))
    assert 1 < zeta(20).value < 1 + 2 * 2**-20
    with pytest.raises(ValueError):
        zeta(1.5)


def test_cyclic_constant_value():
    c = cyclic_const_sym_lap()
    assert round(c.value, 4) == 0.7935
    assert c.abs_error_bound <= 1e-10
    assert c.contains(mp_prod_zeta(3, 2), slack=1e-12)


def test_iid_constants():
    assert 0.43 < prod_zeta_inv_from_two().value < 0.44
    assert prod_zeta_inv_from_two().contains(mp_prod_zeta(2, 1), slack=1e-12)
    c = cyclic_const_iid()
    assert 0.8 < c.value < 0.9
    oracle = mp_euler(lambda p: 1 + 1 / (p * (p - 1)), 1) * mp_prod_zeta(2, 1)
    assert abs(c.value - oracle) < 1e-9


def test_square_cyclic_constant():
    c = square_cyclic_const_alt_even()
    assert 0 < c.value < 1
    oracle = float(mpmath.zeta(2)) * mp_prod_zeta(3, 2) * mp_euler(lambda p: 1 - p**-2 + p**-3, -1)
    assert abs(c.value - oracle) < 1e-9


def test_prodcyc_small_k0():
    assert abs(prodcyc_prob("sym", AbelianGroup(), 2).value - cyclic_const_sym_lap().value) < 1e-12
    assert abs(prodcyc_prob("iid", AbelianGroup(), 2).value - cyclic_const_iid().value) < 1e-12
    assert abs(prodcyc_prob("alt", AbelianGroup(), 2).value - square_cyclic_const_alt_even().value) < 1e-8
    with pytest.raises(ValueError):
        prodcyc_prob("sym", AbelianGroup.cyclic(3), 3)


def test_odd_alt_class():
    c = cyclic_const_sym_lap().value
    assert abs(odd_alt_class_prob(AbelianGroup()).value - c) < 1e-12
    assert abs(odd_alt_class_prob(AbelianGroup(0, (2, 2))).value - c / 6) < 1e-12
    assert odd_alt_class_prob(AbelianGroup.cyclic(2)).value == 0


def test_local_probabilities_trivial_group():
    iid = local_prob_iid(AbelianGroup(), {2})
    assert iid.contains(float(mpmath.qp(mpmath.mpf(1) / 2)), slack=1e-14)
    sym = local_prob_sym(AbelianGroup(), {2})
    oracle = float(mpmath.fprod(1 - mpmath.mpf(2) ** (-2 * k - 1) for k in range(200)))
    assert sym.contains(oracle, slack=1e-14)
    assert local_prob_alt_even(AbelianGroup.cyclic(2), {2}).value == 0
    with pytest.raises(ValueError):
        local_prob_sym(AbelianGroup.cyclic(3), {2})
    with pytest.raises(ValueError):
        local_prob_sym(AbelianGroup(), {4})


@pytest.mark.parametrize("p", [2, 3])
def test_local_sym_sums_over_cyclic_groups(p):
    groups = [AbelianGroup()] + [AbelianGroup.cyclic(p**j) for j in range(1, 41)]
    total = sum(local_prob_sym(B, {p}).value for B in groups)
    oracle = float(mpmath.fprod(1 - mpmath.mpf(p) ** (-2 * i - 1) for i in range(1, 200)))
    assert abs(total - oracle) < 1e-8


def test_corank_limit_examples():
    r0 = corank_limit_sym(2, 0)
    q2 = mpmath.qp(mpmath.mpf(1) / 2)
    q4 = mpmath.qp(mpmath.mpf(1) / 4)
    assert r0.contains(float(q2 / q4), slack=1e-14)
    alt0 = corank_limit_alt_even(3, 0)
    oracle = float(mpmath.fprod(1 - mpmath.mpf(3) ** (-2 * i - 1) for i in range(200)))
    assert alt0.contains(oracle, slack=1e-14)
    assert abs(sum(corank_limit_sym(2, r).value for r in range(30)) - 1) < 1e-8


@pytest.mark.parametrize("p", [2, 3, 5])
def test_laws_agree_with_limits(p):
    for k in range(6):
        assert abs(mu_sym(p).prob(k) - corank_limit_sym(p, k).value) < 1e-10
        even = mu_alt_even(p).prob(k)
        odd = mu_alt_odd(p).prob(k)
        if k % 2:
            assert even == 0
            assert abs(odd - corank_limit_alt_odd(p, k // 2).value) < 1e-10
        else:
            assert odd == 0
            assert abs(even - corank_limit_alt_even(p, k // 2).value) < 1e-10


@pytest.mark.parametrize("law", [mu_sym, mu_alt_even, mu_alt_odd])
@pytest.mark.parametrize("p", [2, 3, 7])
def test_law_mass(law, p):
    d = law(p)
    assert all(v >= 0 for v in d.probs.values())
    assert abs(1 - d.total()) <= d.tail_bound + 1e-12


def exhaustive_corank(n, p, skew):
    counts = {}
    idx = [(i, j) for i in range(n) for j in range(i if not skew else i + 1, n)]
    for vals in itertools.product(range(p), repeat=len(idx)):
        M = [[0] * n for _ in range(n)]
        for (i, j), v in zip(idx, vals):
            M[i][j] = v
            M[j][i] = -v if skew else v
        k = n - rank_mod_p(M, p)
        counts[k] = counts.get(k, 0) + 1
    total = p ** len(idx)
    return {k: Fraction(c, total) for k, c in counts.items()}


def nonzero(d):
    return {k: v for k, v in d.probs.items() if v}


@pytest.mark.parametrize("n,p", [(1, 2), (2, 2), (3, 2), (2, 3), (3, 3)])
def test_finite_laws_exhaustive(n, p):
    assert nonzero(mu_sym_finite(n, p)) == exhaustive_corank(n, p, skew=False)
    assert nonzero(mu_alt_finite(n, p)) == exhaustive_corank(n, p, skew=True)


def test_finite_law_examples():
    assert mu_sym_finite(1, 2).prob(0) == Fraction(1, 2)
    assert mu_alt_finite(2, 2).prob(2) == Fraction(1, 2)
    for n in range(1, 5):
        for p in (2, 3):
            assert mu_sym_finite(n, p).total() == 1
            assert mu_alt_finite(n, p).total() == 1


def test_tv_distance():
    d = mu_sym(2)
    assert tv_distance(d, d) == 0
    assert tv_distance({0: 1.0}, {1: 1.0}) == 1
    assert tv_distance(mu_sym_finite(8, 2), mu_sym(2)) < 0.01


def test_truncated_real_arithmetic():
    a = TruncatedReal(2.0, 0.1)
    b = TruncatedReal(4.0, 0.2)
    c = a * b
    for x, y in itertools.product([1.9, 2.1], [3.8, 4.2]):
        assert c.contains(x * y)
    d = a / b
    for x, y in itertools.product([1.9, 2.1], [3.8, 4.2]):
        assert d.contains(x / y)
    with pytest.raises(ZeroDivisionError):
        a / TruncatedReal(0.1, 0.2)
    with pytest.raises(ValueError):
        TruncatedReal(1.0, -1.0)


@settings(max_examples=40, deadline=None)
@given(st.sampled_from([2, 3, 5, 7, 11]), st.integers(1, 4), st.integers(1, 3))
def test_q_product_bound_honoured(p, first, step):
    x = 1.0 / p
    v = q_product(x, first, step)
    exact = mpmath.fprod(1 - mpmath.mpf(x) ** (first + step * i) for i in range(400))
    assert v.contains(float(exact), slack=1e-15)
