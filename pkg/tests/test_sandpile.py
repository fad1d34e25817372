import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from randcok.abelian import AbelianGroup
from randcok.models import GraphSample, enumerate_graphs, sample_graph
from randcok.sandpile import (
    Divisor,
    borrow,
    divisor_equivalent,
    fire,
    sandpile_group,
    spanning_tree_count,
    spanning_tree_count_contraction,
)


def cycle(n):
    return GraphSample.from_edges(n, [(i, (i + 1) % n) for i in range(n)])


def complete(n):
    return GraphSample.from_edges(n, [(i, j) for i in range(n) for j in range(i + 1, n)])


def test_small_groups():
    assert sandpile_group(cycle(4)) == AbelianGroup.cyclic(4)
    assert sandpile_group(complete(3)) == AbelianGroup.cyclic(3)
    # K_4: Z/4 x Z/4
    assert sandpile_group(complete(4)) == AbelianGroup(0, (4, 4))
    assert spanning_tree_count(complete(3)) == 3
    assert spanning_tree_count_contraction(cycle(5)) == 5


@pytest.mark.parametrize("n", range(2, 8))
def test_cayley(n):
    assert spanning_tree_count(complete(n)) == n ** (n - 2)
    assert sandpile_group(complete(n)).order == n ** (n - 2)


def random_graphs(max_v=7):
    return st.tuples(st.integers(2, max_v), st.integers(0, 2**32)).map(
        lambda t: sample_graph(t[0], 0.5, np.random.default_rng(t[1]))
    )


@settings(max_examples=80, deadline=None)
@given(random_graphs())
def test_order_is_tree_count(g):
    t = spanning_tree_count(g)
    assert spanning_tree_count_contraction(g) == t
    G = sandpile_group(g)
    if t:
        assert G.free_rank == 0 and G.order == t
    else:
        assert not g.is_connected() and G.free_rank >= 1


@settings(max_examples=40, deadline=None)
@given(random_graphs(6), st.data())
def test_group_independent_of_dropped_vertex(g, data):
    v = data.draw(st.integers(0, g.vertices - 1))
    assert sandpile_group(g, v) == sandpile_group(g)


def test_exhaustive_five_vertices():
    for g, _ in enumerate_graphs(5):
        if g.is_connected():
            assert sandpile_group(g).order == spanning_tree_count_contraction(g)


def test_divisor_equivalence():
    K3 = complete(3)
    assert not divisor_equivalent(Divisor(K3, (1, -1, 0)), Divisor(K3, (0, 0, 0)))
    d = Divisor(K3, (3, 0, -3))
    assert divisor_equivalent(d, Divisor(K3, (0, 0, 0)))
    with pytest.raises(ValueError):
        divisor_equivalent(Divisor(K3, (1, 0, 0)), Divisor(K3, (0, 0, 0)))


@settings(max_examples=40, deadline=None)
@given(random_graphs(6), st.data())
def test_firing_moves(g, data):
    n = g.vertices
    vals = tuple(data.draw(st.lists(st.integers(-3, 3), min_size=n, max_size=n)))
    d = Divisor(g, vals)
    v = data.draw(st.integers(0, n - 1))
    f = fire(d, v)
    assert f.degree == d.degree
    assert borrow(f, v) == d
    assert divisor_equivalent(f, d)


def test_divisor_classes_count_group_order():
    # degree-zero divisors supported on C_4 with entries in a box hit every class
    g = cycle(4)
    reps = []
    for a in range(-2, 3):
        for b in range(-2, 3):
            d = Divisor(g, (a, b, 0, -a - b))
            if not any(divisor_equivalent(d, r) for r in reps):
                reps.append(d)
    assert len(reps) == 4


def test_rejects_directed():
    g = GraphSample.from_edges(3, [(0, 1), (1, 2)], directed=True)
    with pytest.raises(ValueError):
        sandpile_group(g)
    with pytest.raises(ValueError):
        Divisor(g, (0, 0, 0))
