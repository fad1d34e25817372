import itertools
import math
from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from randcok.abelian import (
    AbelianGroup,
    PartitionType,
    aut_order,
    aut_order_formula,
    exterior_square,
    groups_of_order_dividing,
    hom_count,
    is_cyclic,
    is_square_of_cyclic_torsion,
    perfect_pairing_count,
    sp_order,
    square_root,
    subgroups,
    sur_count,
    sym2_order,
    sym_pairing_ratio_closed_form,
    symmetric_square,
    sylow,
    tensor_square,
    wedge2_order,
)

small_groups = st.lists(st.integers(2, 8), max_size=2).map(lambda t: AbelianGroup(0, tuple(t)))


def elements(G):
    return list(itertools.product(*(range(d) for d in G.torsion)))


def add(G, x, y):
    return tuple((a + b) % d for a, b, d in zip(x, y, G.torsion))


def generated(G, gens):
    seen = {tuple(0 for _ in G.torsion)}
    frontier = list(seen)
    while frontier:
        x = frontier.pop()
        for g in gens:
            y = add(G, x, g)
            if y not in seen:
                seen.add(y)
                frontier.append(y)
    return seen


def order_of(G, x):
    return math.lcm(*(d // math.gcd(d, a) for a, d in zip(x, G.torsion))) if x else 1


def brute_homs(A, G):
    """Hom(A, G) as tuples of generator images, A finite."""
    per_gen = [[x for x in elements(G) if order_of(G, x) and d % order_of(G, x) == 0] for d in A.torsion]
    return itertools.product(*per_gen)


def test_normalisation_and_parse():
    assert AbelianGroup(0, (6, 4)).torsion == (2, 12)
    assert AbelianGroup(0, (0, 1, 3)).free_rank == 1
    assert AbelianGroup.parse("Z^2 x Z/2 x (Z/3)^2") == AbelianGroup(2, (3, 6))
    assert str(AbelianGroup.parse("0")) == "0"
    with pytest.raises(ValueError):
        AbelianGroup.parse("Z/0")
    with pytest.raises(ValueError):
        AbelianGroup(1).order
    assert AbelianGroup(0, (2,)) + AbelianGroup(1) == AbelianGroup(1, (2,))


@given(st.integers(0, 3), st.lists(st.integers(0, 40), max_size=4))
def test_str_roundtrip(f, t):
    G = AbelianGroup(f, tuple(t))
    assert AbelianGroup.parse(str(G)) == G
    assert all(b % a == 0 for a, b in zip(G.torsion, G.torsion[1:]))


@settings(max_examples=60, deadline=None)
@given(small_groups, small_groups)
def test_hom_and_sur_brute(A, G):
    homs = list(brute_homs(A, G))
    assert hom_count(A, G) == len(homs)
    surj = sum(1 for h in homs if len(generated(G, h)) == G.order)
    assert sur_count(A, G) == surj


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 2), small_groups)
def test_sur_from_free_part(f, G):
    # Sur(Z^f, G) counts generating f-tuples
    A = AbelianGroup(f)
    tuples = itertools.product(elements(G), repeat=f)
    assert sur_count(A, G) == sum(1 for t in tuples if len(generated(G, t)) == G.order)


@pytest.mark.parametrize(
    "G,expected",
    [("Z/2 x Z/2", 6), ("Z/2 x Z/4", 8), ("Z/8", 4), ("Z/3 x Z/3", 48), ("Z/2 x Z/2 x Z/2", 168), ("Z/12", 4)],
)
def test_aut_known(G, expected):
    G = AbelianGroup.parse(G)
    assert aut_order(G) == expected == aut_order_formula(G)


@pytest.mark.parametrize("p,e", [(2, 4), (3, 3), (5, 2), (7, 2)])
def test_aut_brute_matches_formula(p, e):
    for lam in groups_of_order_dividing(p, e):
        G = lam.group()
        assert aut_order(G) == aut_order_formula(G)


def test_aut_brute_matches_automorphism_enumeration():
    for G in [AbelianGroup(0, (2, 4)), AbelianGroup(0, (6,)), AbelianGroup(0, (2, 2))]:
        n = sum(1 for h in brute_homs(G, G) if len(generated(G, h)) == G.order)
        assert aut_order(G) == n


def test_aut_range():
    G = AbelianGroup(0, (2,) * 13)
    with pytest.raises(ValueError):
        aut_order(G)
    assert aut_order(G, method="auto") == aut_order_formula(G)


@pytest.mark.parametrize("p", [2, 3, 5])
def test_sp_order_elementary(p):
    # Sp_2(F_p) = SL_2(F_p)
    assert sp_order(AbelianGroup(0, (p, p))) == p * (p * p - 1)


def test_sp_order_rank_four():
    p = 2
    assert sp_order(AbelianGroup(0, (p,) * 4)) == p**4 * (p**2 - 1) * (p**4 - 1)


def test_sp_order_rejects_non_square():
    with pytest.raises(ValueError):
        sp_order(AbelianGroup(0, (2, 4)))


def test_square_root():
    assert square_root(AbelianGroup(0, (2, 2, 6, 6))) == AbelianGroup(0, (2, 6))
    with pytest.raises(ValueError):
        square_root(AbelianGroup(0, (2,)))


def test_predicates():
    assert is_cyclic(AbelianGroup(0, (6,))) and is_cyclic(AbelianGroup(1))
    assert not is_cyclic(AbelianGroup(1, (2,)))
    assert is_square_of_cyclic_torsion(AbelianGroup(0, (6, 6)))
    assert not is_square_of_cyclic_torsion(AbelianGroup(0, (2, 2, 2, 2)))


@settings(max_examples=40, deadline=None)
@given(st.sampled_from([2, 3]), st.integers(0, 3))
def test_pairing_count_closed_form(p, e):
    for lam in groups_of_order_dividing(p, e):
        B = lam.group()
        ratio = Fraction(perfect_pairing_count(B, "symmetric"), B.order * aut_order(B))
        assert ratio == sym_pairing_ratio_closed_form(lam)


def test_alternating_pairings_need_square():
    assert perfect_pairing_count(AbelianGroup(0, (2,)), "alternating") == 0
    assert perfect_pairing_count(AbelianGroup(0, (2, 2)), "alternating") == 1
    # Z/p x Z/p has p - 1 alternating perfect pairings
    assert perfect_pairing_count(AbelianGroup(0, (3, 3)), "alternating") == 2


@settings(max_examples=50, deadline=None)
@given(st.lists(st.integers(2, 12), max_size=3))
def test_square_orders(t):
    G = AbelianGroup(0, tuple(t))
    assert symmetric_square(G).order == sym2_order(G)
    assert exterior_square(G).order == wedge2_order(G)
    assert tensor_square(G).order == sym2_order(G) * wedge2_order(G)


def test_sylow():
    G = AbelianGroup(0, (4, 12, 9))
    assert sylow(G, 2) == PartitionType(2, (2, 2))
    assert sylow(G, 3).parts == (2, 1)
    assert sylow(G, 5).parts == ()
    assert PartitionType(2, (3, 1)).conjugate() == (2, 1, 1)


@settings(max_examples=30, deadline=None)
@given(small_groups)
def test_subgroups_brute(G):
    subs = set()
    els = elements(G)
    for x in els:
        for y in els:
            subs.add(frozenset(generated(G, [x, y])))
    assert len(subgroups(G)) == len(subs)
    assert sorted(len(s) for s in subs) == sorted(H.order for H in subgroups(G))


def test_tensor_cyclic():
    G = AbelianGroup(2, (4, 6))
    assert G.tensor_cyclic(2) == AbelianGroup(0, (2, 2, 2, 2))
