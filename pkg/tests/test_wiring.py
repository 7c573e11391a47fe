import itertools
from collections import Counter

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy import stats

from mlnbench.core import LayerGraph
from mlnbench.sampling import RngStream
from mlnbench.wiring import (LayerMultigraph, build_multigraph, configuration_model,
                             grouped_configuration_model, rewire_to_simple, split_degrees)


def test_split_without_noise():
    deg = np.array([4, 4, 6, 2, 0])
    part = np.array([1, 1, 2, 2, 0])
    sp = split_degrees(deg, part, 0.0, RngStream(0))
    assert np.array_equal(sp.Y, deg) and not sp.Z.any()


def test_split_expectation():
    deg = np.full(100_000, 10)
    sp = split_degrees(deg, np.zeros_like(deg), 0.25, RngStream(1))
    assert set(np.unique(sp.Y)) == {7, 8}
    assert abs(sp.Y.mean() - 7.5) < 0.01


def test_split_parity_goes_to_max_degree_member():
    deg = np.array([5, 5, 4])
    part = np.array([1, 1, 1])
    hits = 0
    for seed in range(200):
        sp = split_degrees(deg, part, 0.2, RngStream(seed))
        raw = np.floor(0.8 * deg)
        if sp.Y[2] == 3:
            # realised Y = [4, 4, 3] before the fix
            assert sp.Y.tolist() == [5, 4, 3]
            assert sp.Z.tolist() == [0, 1, 1]
            hits += 1
        assert sp.Y.sum() % 2 == 0
    assert hits > 0


def test_split_parity_falls_back_to_member_with_background_units():
    # max-degree actor has Z = 0 once rounded; actor 1 is the next donor
    deg = np.array([1, 3, 1])
    part = np.array([1, 1, 1])
    for seed in range(50):
        sp = split_degrees(deg, part, 0.5, RngStream(seed))
        assert np.all(sp.Y >= 0) and np.all(sp.Z >= 0)
        assert sp.Y.sum() % 2 == 0


def test_split_parity_moves_down_when_nobody_has_background_units():
    deg = np.array([3, 2, 2])
    sp = split_degrees(deg, np.array([1, 1, 1]), 0.0, RngStream(0))
    # sum 7 is odd and Z = 0 everywhere, so the top actor hands one unit over
    assert sp.Y.tolist() == [2, 2, 2] and sp.Z.tolist() == [1, 0, 0]


@settings(max_examples=80, deadline=None)
@given(st.lists(st.tuples(st.integers(1, 30), st.integers(0, 5)), min_size=1, max_size=60),
       st.floats(0.0, 0.99), st.integers(0, 2**32))
def test_split_invariants(actors, xi, seed):
    deg = np.array([d for d, _ in actors])
    part = np.array([c for _, c in actors])
    deg[part == 0] = 0
    if deg.sum() % 2:
        i = int(np.argmax(deg))
        deg[i] += 1
    sp = split_degrees(deg, part, xi, RngStream(seed))
    assert np.array_equal(sp.Y + sp.Z, deg)
    assert sp.Y.min() >= 0 and sp.Z.min() >= 0
    ysum = np.bincount(part, weights=sp.Y)
    assert np.all(ysum[1:] % 2 == 0)
    assert sp.Z.sum() % 2 == 0


def test_configuration_single_edge():
    assert configuration_model([1, 1], RngStream(0)).tolist() in ([[0, 1]], [[1, 0]])


def test_configuration_forced_loop():
    assert configuration_model([2], RngStream(0)).tolist() == [[0, 0]]


def test_configuration_rejects_odd_sum():
    with pytest.raises(ValueError):
        configuration_model([1, 2], RngStream(0))


def _matchings(stubs):
    if not stubs:
        yield []
        return
    first, rest = stubs[0], stubs[1:]
    for i in range(len(rest)):
        pair = tuple(sorted((first, rest[i])))
        for tail in _matchings(rest[:i] + rest[i + 1:]):
            yield [pair] + tail


def enumerate_outcomes(degrees):
    """Exact law of the multigraph produced by a uniform perfect matching."""
    stubs = [a for a, d in enumerate(degrees) for _ in range(d)]
    law = Counter(tuple(sorted(m)) for m in _matchings(stubs))
    total = sum(law.values())
    return {k: v / total for k, v in law.items()}


def outcome(edges):
    return tuple(sorted(tuple(sorted(e)) for e in edges.tolist()))


@pytest.mark.parametrize("degrees", [[3, 2, 1], [2, 2, 2], [1, 1, 1, 1], [4, 2, 2], [2, 2, 2, 2],
                                     [3, 3, 1, 1]])
def test_configuration_matches_enumeration(degrees):
    law = enumerate_outcomes(degrees)
    rng = RngStream(99, "cm").child(*degrees)
    draws = 20_000
    seen = Counter(outcome(configuration_model(degrees, rng)) for _ in range(draws))
    assert set(seen) <= set(law)
    keys = sorted(law)
    obs = np.array([seen.get(k, 0) for k in keys])
    exp = np.array([law[k] * draws for k in keys])
    assert stats.chisquare(obs, exp).pvalue > 0.001


def test_probability_of_simple_outcome_321():
    law = enumerate_outcomes([3, 2, 1])
    simple = sum(p for g, p in law.items() if len(set(g)) == len(g) and all(u != v for u, v in g))
    assert simple == 0.0  # actor 0 would need three distinct neighbours among two


def test_grouped_configuration_keeps_groups_apart():
    deg = np.array([2, 2, 2, 1, 1, 3, 3])
    grp = np.array([1, 1, 1, 2, 2, 0, 0])
    edges, g = grouped_configuration_model(deg, grp, RngStream(0))
    assert len(edges) == 4
    assert np.all(grp[edges[:, 0]] == g) and np.all(grp[edges[:, 1]] == g)
    assert np.array_equal(np.bincount(edges.ravel(), minlength=7), np.where(grp > 0, deg, 0))


def _degrees(edges, n):
    return np.bincount(np.asarray(edges).ravel(), minlength=n)


def test_simple_multigraph_unchanged():
    mg = LayerMultigraph(5, np.array([[0, 1], [1, 2]]), np.array([1, 1]), np.array([[3, 4]]))
    res = rewire_to_simple(mg, RngStream(0))
    assert res.community_rewires == res.background_rewires == res.transferred == 0
    assert res.edges.tolist() == [[0, 1], [1, 2], [3, 4]]


def test_unfixable_community_hands_edge_to_background():
    mg = LayerMultigraph(8, np.array([[0, 1], [0, 1]]), np.array([1, 1]),
                         np.array([[2, 3], [4, 5], [6, 7]]))
    res = rewire_to_simple(mg, RngStream(0))
    assert res.transferred == 1
    assert LayerGraph(8, res.edges).is_simple()
    assert _degrees(res.edges, 8).tolist() == [2, 2, 1, 1, 1, 1, 1, 1]
    assert res.community_edge_count == 1


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 2**32))
def test_rewire_yields_simple_graph_with_same_degrees(seed):
    rng = RngStream(seed)
    n = 300
    part = np.repeat(np.arange(1, 11), 30)
    deg = np.clip(rng.gen.zipf(2.2, n), 3, 25)
    if deg.sum() % 2:
        deg[0] += 1
    sp = split_degrees(deg, part, 0.3, rng.child("split"))
    mg = build_multigraph(sp, part, rng.child("cm"))
    res = rewire_to_simple(mg, rng.child("rw"))
    assert LayerGraph(n, res.edges).is_simple()
    assert np.array_equal(_degrees(res.edges, n), deg)
    comm = res.edges[:res.community_edge_count]
    assert np.all(part[comm[:, 0]] == part[comm[:, 1]])
    # community degree equals Y except for units handed to the background
    within = _degrees(comm, n)
    assert np.all(within <= sp.Y)
    assert int((sp.Y - within).sum()) == 2 * res.transferred


def test_many_duplicates_in_background_resolve():
    bg = np.array([[0, 1]] * 3 + [[2, 3], [4, 5], [6, 7], [8, 9], [10, 11], [12, 13]])
    mg = LayerMultigraph(14, np.zeros((0, 2), np.int64), np.zeros(0, np.int64), bg)
    res = rewire_to_simple(mg, RngStream(4))
    assert LayerGraph(14, res.edges).is_simple()
    assert np.array_equal(_degrees(res.edges, 14), _degrees(bg, 14))
