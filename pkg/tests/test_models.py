import json
import math
from collections import Counter
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from randcok.models import (
    KINDS,
    UNIFORM_01,
    UNIFORM_PM1,
    EntryDistribution,
    GraphSample,
    ModelSpec,
    ab_shuffle,
    ab_shuffle_graph,
    ab_shuffle_pushforward,
    alpha_for_prime,
    enumerate_all,
    graph_law,
    neighbor_reshuffle,
    neighbor_reshuffle_pushforward,
    outcome_count,
    sample,
    sample_array,
    sample_graph,
    trial_rng,
)


def test_alpha_examples():
    assert alpha_for_prime(UNIFORM_01, 3) == Fraction(1, 2)
    assert alpha_for_prime(UNIFORM_PM1, 3) == Fraction(2, 3)
    assert alpha_for_prime(UNIFORM_PM1, 2) == Fraction(1, 3)


def test_distribution_validation():
    with pytest.raises(ValueError):
        EntryDistribution(((0, Fraction(1, 2)), (1, Fraction(1, 3))))
    with pytest.raises(ValueError):
        EntryDistribution.uniform([0, 2])
    d = EntryDistribution(((0, Fraction(1, 2)), (2, Fraction(1, 2))), degenerate=True)
    assert d.residue_masses(2) == {0: 1}
    assert EntryDistribution.from_json(json.dumps(UNIFORM_PM1.to_json())) == UNIFORM_PM1


def test_spec_validation():
    with pytest.raises(ValueError):
        ModelSpec("hermitian", 3)
    with pytest.raises(ValueError):
        ModelSpec("symmetric", 0)
    with pytest.raises(ValueError):
        ModelSpec("symmetric", 3, q=Fraction(1, 2))
    with pytest.raises(ValueError):
        ModelSpec("laplacian_er", 3, q=1)
    spec = ModelSpec("laplacian_er", 4, q=0.3)
    assert spec.q == Fraction(3, 10) and spec.vertices == 5
    assert ModelSpec.from_json(spec.to_json()) == spec
    s2 = ModelSpec("skew", 4, UNIFORM_PM1)
    assert ModelSpec.from_json(json.dumps(s2.to_json())) == s2


@settings(max_examples=40, deadline=None)
@given(st.sampled_from(KINDS), st.integers(1, 7), st.integers(0, 2**32))
def test_sample_structure(kind, n, seed):
    spec = ModelSpec(kind, n)
    M = sample_array(spec, np.random.default_rng(seed))
    assert M.shape == (n, n)
    if kind == "symmetric":
        assert (M == M.T).all()
    if kind == "skew":
        assert (M == -M.T).all()
    if kind == "laplacian_er":
        assert (M == M.T).all()
        # off-diagonal 0/1 adjacency, diagonal minus degree (degree counts the dropped vertex)
        off = M - np.diag(np.diag(M))
        assert set(np.unique(off)) <= {0, 1}
        assert (-np.diag(M) >= off.sum(axis=1)).all()
    if kind in ("iid", "symmetric", "skew"):
        assert set(np.unique(np.abs(M))) <= {0, 1}


def test_trial_streams_reproducible():
    a = trial_rng(7, 3).integers(0, 2**62, size=4)
    b = trial_rng(7, 3).integers(0, 2**62, size=4)
    c = trial_rng(7, 4).integers(0, 2**62, size=4)
    assert (a == b).all() and not (a == c).all()


def test_symmetric_entry_frequency():
    spec = ModelSpec("symmetric", 1)
    rng = np.random.default_rng(0)
    zeros = sum(int(sample_array(spec, rng)[0, 0] == 0) for _ in range(10**5))
    assert abs(zeros / 10**5 - 0.5) < 0.01


def test_non_uniform_sampler():
    d = EntryDistribution(((0, Fraction(3, 4)), (1, Fraction(1, 4))))
    x = d.sample(np.random.default_rng(1), 40000)
    assert abs(x.mean() - 0.25) < 0.01


def chi_square_ok(counts, probs, trials, crit):
    stat = sum((counts.get(k, 0) - trials * float(p)) ** 2 / (trials * float(p)) for k, p in probs.items())
    return stat < crit


def test_sampler_matches_enumeration():
    # skew 3x3 with entries in {-1,0,1}: 27 outcomes; chi-square with 26 dof, 0.999 quantile ~ 54
    spec = ModelSpec("skew", 3, UNIFORM_PM1)
    law = {M.entries: pr for M, pr in enumerate_all(spec)}
    assert sum(law.values()) == 1 and len(law) == outcome_count(spec)
    rng = np.random.default_rng(11)
    trials = 27000
    counts = Counter(sample(spec, rng).entries for _ in range(trials))
    assert chi_square_ok(counts, law, trials, 54)


def test_graph_sampler_matches_enumeration():
    law = graph_law(4, Fraction(3, 10))
    assert sum(law.values()) == 1
    rng = np.random.default_rng(3)
    trials = 20000
    counts = Counter(sample_graph(4, 0.3, rng) for _ in range(trials))
    # 64 outcomes, 63 dof, 0.999 quantile ~ 104
    assert chi_square_ok(counts, law, trials, 104)


def test_enumerate_all_counts():
    spec = ModelSpec("symmetric", 2)
    outs = list(enumerate_all(spec))
    assert len(outs) == 8 and sum(pr for _, pr in outs) == 1
    assert len(list(enumerate_all(ModelSpec("laplacian_er", 2)))) == 8
    with pytest.raises(ValueError):
        list(enumerate_all(ModelSpec("iid", 5)))


def test_graph_basics():
    g = GraphSample.parse_edges("0 1, 1 2\n2 0  # triangle")
    assert g.vertices == 3 and g.degrees() == [2, 2, 2]
    assert g.reduced_laplacian().entries == ((-2, 1), (1, -2))
    assert g.is_connected()
    assert not GraphSample.from_edges(4, [(0, 1)]).is_connected()
    with pytest.raises(ValueError):
        GraphSample.from_edges(2, [(0, 0)])
    with pytest.raises(ValueError):
        GraphSample(2, ((0, 1), (0, 0)))
    h = GraphSample.from_adjacency_json("[[0,1],[1,0]]")
    assert h.edges() == [(0, 1)]


def test_ab_shuffle_pushforward_preserves_law():
    base = graph_law(4)
    out = ab_shuffle_pushforward(base, A={1}, B={2, 3}, involution={2: 3, 3: 2})
    assert out == base


@pytest.mark.parametrize("q", [Fraction(1, 3), Fraction(1, 2)])
def test_ab_shuffle_pushforward_other_choices(q):
    base = graph_law(5, q)
    out = ab_shuffle_pushforward(base, A={0, 4}, B={1, 2, 3}, involution={1: 2, 2: 1})
    assert out == base


def test_ab_shuffle_fixed_points_and_validation():
    g = GraphSample.from_edges(4, [(0, 1), (1, 2), (2, 3)])
    rng = np.random.default_rng(0)
    # identity involution changes nothing
    assert ab_shuffle_graph(g, {1}, {2, 3}, {}, rng) == g
    assert ab_shuffle(g, {1}, {2, 3}, {}, rng) == g.reduced_laplacian()
    with pytest.raises(ValueError):
        ab_shuffle_graph(g, {1}, {1, 2}, {}, rng)
    with pytest.raises(ValueError):
        ab_shuffle_graph(g, {0}, {2, 3}, {2: 3}, rng)


@pytest.mark.parametrize("ordering", [[0, 1, 2, 3], [2, 0, 1, 3]])
def test_neighbor_reshuffle_pushforward_preserves_law(ordering):
    base = graph_law(4)
    assert neighbor_reshuffle_pushforward(base, ordering) == base


def test_neighbor_reshuffle_biased_edges():
    base = graph_law(4, Fraction(1, 5))
    assert neighbor_reshuffle_pushforward(base, [0, 1, 2, 3]) == base


def test_neighbor_reshuffle_preserves_edge_count():
    rng = np.random.default_rng(4)
    for _ in range(50):
        g = sample_graph(7, 0.5, rng)
        h = neighbor_reshuffle(g, list(range(7)), rng)
        assert len(h.edges()) == len(g.edges())
    with pytest.raises(ValueError):
        neighbor_reshuffle(g, [6, 0, 1, 2, 3, 4, 5], rng)


def test_reshuffle_sets_concentrate():
    rng = np.random.default_rng(9)
    N = 40
    sizes = []
    for _ in range(200):
        g = sample_graph(N + 2, 0.5, rng)
        rec = []
        neighbor_reshuffle(g, list(range(N + 2)), rng, record=rec)
        sizes.append(rec[N])
    mean = np.mean(sizes)
    # |I_N| ~ Bin(N, 1/2): mean N/2, sd sqrt(N)/2, averaged over 200 graphs
    assert abs(mean - N / 2) < 4 * math.sqrt(N) / 2 / math.sqrt(200)
