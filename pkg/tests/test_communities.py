import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from mlnbench.communities import (ReferenceLayer, _adjust_overshoot, apply_correlation_strength,
                                  assign_geometric, build_reference_layer,
                                  generate_community_sizes, plan_communities)
from mlnbench.core import GenerationInfeasible
from mlnbench.measures import ami
from mlnbench.sampling import RngStream


def test_overshoot_increment_branch():
    sizes, exceeded = _adjust_overshoot(np.array([4, 4, 5]), 10, 3, 5, RngStream(0).gen)
    assert sizes.tolist() == [5, 5] and not exceeded


def test_overshoot_reduce_branch():
    sizes, _ = _adjust_overshoot(np.array([4, 4, 5]), 10, 2, 5, RngStream(0).gen)
    assert sizes.tolist() == [4, 4, 2]


def test_overshoot_prefers_communities_below_max():
    for seed in range(10):
        # x=2, last=4 < x+s -> delete it and grow the two entries still below S
        sizes, exceeded = _adjust_overshoot(np.array([5, 3, 3, 5, 4]), 18, 3, 5, RngStream(seed).gen)
        assert sizes.tolist() == [5, 4, 4, 5] and not exceeded


def test_overshoot_exceeds_max_only_when_all_full():
    sizes, exceeded = _adjust_overshoot(np.array([5, 5, 5, 4]), 17, 3, 5, RngStream(0).gen)
    assert sizes.sum() == 17 and sizes.max() == 6 and exceeded


def test_overshoot_unresolvable_returns_none():
    assert _adjust_overshoot(np.array([3, 6]), 5, 3, 9, RngStream(0).gen) is None


def test_too_few_active_actors():
    with pytest.raises(GenerationInfeasible, match="n too small for minimum community size"):
        generate_community_sizes(5, 1.5, 8, 32, RngStream(0))


def test_zero_active_actors():
    sizes, _ = generate_community_sizes(0, 1.5, 8, 32, RngStream(0))
    assert len(sizes) == 0


@settings(max_examples=60, deadline=None)
@given(st.integers(1, 5000), st.floats(1.05, 1.95), st.integers(2, 40), st.integers(0, 200),
       st.integers(0, 2**32))
def test_sizes_sum_and_bounds(N, beta, s, extra, seed):
    S = s + extra
    if N < s:
        return
    try:
        sizes, exceeded = generate_community_sizes(N, beta, s, S, RngStream(seed), max_iters=50)
    except GenerationInfeasible:
        return
    assert sizes.sum() == N
    assert sizes.min() >= s
    assert sizes.max() <= S + 1
    assert exceeded == bool(sizes.max() > S)


def test_reference_layer():
    ref = build_reference_layer(1000, 2, RngStream(3))
    assert ref.points.shape == (1000, 2) and ref.d == 2
    assert np.all(np.linalg.norm(ref.points, axis=1) <= 1)
    assert np.array_equal(ref.points, build_reference_layer(1000, 2, RngStream(3)).points)


def test_single_community_takes_all_active():
    ref = build_reference_layer(50, 2, RngStream(0))
    act = np.ones(50, bool)
    act[::5] = False
    out = assign_geometric(ref, act, [40], RngStream(1))
    assert np.array_equal(out != 0, act) and set(out[act]) == {1}


def test_hand_traced_one_dimensional_case():
    ref = ReferenceLayer(np.array([[-0.9], [-0.8], [0.1], [0.7], [0.8]]), 1)
    expected = {
        (0, 1): [1, 1, 2, 2, 2],  # size-2 community filled first
        (1, 0): [2, 2, 2, 1, 1],  # size-3 community first: {-0.9, -0.8, 0.1}
    }
    seen = set()
    for seed in range(20):
        rng = RngStream(seed)
        order = tuple(RngStream(seed).gen.permutation(2).tolist())
        out = assign_geometric(ref, np.ones(5, bool), [2, 3], rng)
        assert out.tolist() == expected[order]
        seen.add(order)
    assert len(seen) == 2


def _naive_assign(points, active, sizes, order):
    idx = np.flatnonzero(active)
    pool = set(idx.tolist())
    out = np.zeros(len(points), dtype=np.int64)
    for comm in order:
        c = sizes[comm]
        centre = max(pool, key=lambda a: (np.linalg.norm(points[a]), -a))
        near = sorted(pool, key=lambda a: (np.linalg.norm(points[a] - points[centre]), a))[:c]
        for a in near:
            out[a] = comm + 1
            pool.discard(a)
    return out


@settings(max_examples=40, deadline=None)
@given(st.integers(2, 60), st.integers(1, 3), st.integers(0, 2**32))
def test_geometric_matches_brute_force(n, d, seed):
    rng = RngStream(seed)
    ref = build_reference_layer(n, d, rng.child("ref"))
    act = rng.child("act").gen.random(n) < 0.8
    N = int(act.sum())
    if N == 0:
        return
    cuts = np.sort(rng.child("cut").gen.choice(np.arange(1, N), size=min(3, N - 1), replace=False)) \
        if N > 1 else np.array([], dtype=int)
    sizes = np.diff(np.concatenate(([0], cuts, [N])))
    order = RngStream(seed, "assign").gen.permutation(len(sizes))
    fast = assign_geometric(ref, act, sizes, RngStream(seed, "assign"))
    assert np.array_equal(fast, _naive_assign(ref.points, act, sizes, order))


def test_geometric_sizes_respected_at_scale():
    ref = build_reference_layer(20_000, 2, RngStream(2))
    act = np.ones(20_000, bool)
    sizes, _ = generate_community_sizes(20_000, 1.5, 16, 200, RngStream(3))
    out = assign_geometric(ref, act, sizes, RngStream(4))
    assert np.array_equal(np.bincount(out)[1:], sizes)


def test_sizes_must_match_active_count():
    ref = build_reference_layer(10, 2, RngStream(0))
    with pytest.raises(ValueError):
        assign_geometric(ref, np.ones(10, bool), [3, 3], RngStream(0))


def test_r_one_is_identity():
    a = np.array([0, 1, 1, 2, 2, 2])
    assert np.array_equal(apply_correlation_strength(a, 1.0, RngStream(0)), a)


@settings(max_examples=50, deadline=None)
@given(st.lists(st.integers(0, 6), min_size=1, max_size=80), st.floats(0, 1), st.integers(0, 2**32))
def test_reshuffle_conserves_sizes_and_inactive(assignment, r, seed):
    a = np.array(assignment)
    out = apply_correlation_strength(a, r, RngStream(seed))
    assert np.array_equal(np.bincount(out, minlength=7), np.bincount(a, minlength=7))
    assert np.array_equal(out == 0, a == 0)


def _geometric_partition(n=1000, seed=0):
    ref = build_reference_layer(n, 2, RngStream(seed, "ref"))
    sizes, _ = generate_community_sizes(n, 1.5, 16, 32, RngStream(seed, "sz"))
    return assign_geometric(ref, np.ones(n, bool), sizes, RngStream(seed, "as"))


def test_r_zero_erases_geometry():
    geo = _geometric_partition()
    shuffled = apply_correlation_strength(geo, 0.0, RngStream(1))
    assert abs(ami(geo, shuffled)) < 0.02


def test_expected_leavers_at_three_quarters():
    geo = _geometric_partition()
    gen = RngStream(2).gen
    leavers = int(np.sum(gen.random(1000) < 0.25))
    assert abs(leavers - 250) <= 3 * np.sqrt(1000 * 0.25 * 0.75)
    out = apply_correlation_strength(geo, 0.75, RngStream(2))
    moved = int(np.sum(out != geo))
    assert moved <= leavers


def test_shared_reference_gives_correlated_partitions():
    ref = build_reference_layer(1000, 2, RngStream(0))
    act2 = RngStream(1).gen.random(1000) < 0.5
    p1 = plan_communities(ref, np.ones(1000, bool), 1.5, 16, 32, 1.0, RngStream(2))
    p2 = plan_communities(ref, act2, 1.5, 25, 50, 1.0, RngStream(3))
    both = act2
    assert ami(p1.assignment[both], p2.assignment[both]) > 0.4


def test_identical_layers_ami_high_but_below_one():
    ref = build_reference_layer(1000, 2, RngStream(0))
    act = np.ones(1000, bool)
    vals = []
    for k in range(5):
        a = plan_communities(ref, act, 1.5, 16, 32, 1.0, RngStream(k, "a")).assignment
        b = plan_communities(ref, act, 1.5, 16, 32, 1.0, RngStream(k, "b")).assignment
        vals.append(ami(a, b))
    assert 0.5 < np.mean(vals) < 1.0


def test_injected_sizes_must_sum_to_active():
    ref = build_reference_layer(20, 2, RngStream(0))
    with pytest.raises(GenerationInfeasible):
        plan_communities(ref, np.ones(20, bool), 1.5, 5, 10, 1.0, RngStream(0), sizes=[10, 5])


def test_plan_fields():
    ref = build_reference_layer(100, 2, RngStream(0))
    act = np.ones(100, bool)
    act[:10] = False
    plan = plan_communities(ref, act, 1.5, 8, 32, 0.5, RngStream(1))
    assert plan.inactive_size == 10 and plan.sizes.sum() == 90
    assert np.array_equal(np.bincount(plan.assignment)[1:], plan.sizes)
