import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy import stats
from sklearn.metrics import adjusted_mutual_info_score

from mlnbench.measures import (ami, correlation_report, count_inversions, edge_correlation_matrix,
                               kendall_tau_b, partition_pair)
from mlnbench.sampling import RngStream

from conftest import make_net


def test_tau_identity_and_reverse():
    x = np.arange(20)
    assert kendall_tau_b(x, x) == 1.0
    assert kendall_tau_b(x, -x) == -1.0


def test_tau_hand_example():
    assert kendall_tau_b([1, 2, 3], [1, 3, 2]) == pytest.approx(1 / 3)


def test_tau_all_tied_undefined():
    assert np.isnan(kendall_tau_b([1, 1, 1], [1, 2, 3]))
    assert np.isnan(kendall_tau_b([1], [2]))


@settings(max_examples=200, deadline=None)
@given(st.lists(st.tuples(st.integers(0, 6), st.integers(0, 6)), min_size=2, max_size=60))
def test_tau_matches_scipy(pairs):
    x, y = map(np.array, zip(*pairs))
    ours = kendall_tau_b(x, y)
    ref = stats.kendalltau(x, y, variant="b").statistic
    if np.isnan(ref):
        assert np.isnan(ours)
    else:
        assert ours == pytest.approx(ref, abs=1e-12)


@settings(max_examples=100, deadline=None)
@given(st.lists(st.floats(-1e3, 1e3), min_size=2, max_size=40, unique=True))
def test_tau_antisymmetry(x):
    x = np.array(x)
    y = RngStream(len(x)).gen.permutation(len(x)).astype(float)
    assert kendall_tau_b(x, y) == pytest.approx(-kendall_tau_b(x, -y))


@settings(max_examples=100, deadline=None)
@given(st.lists(st.integers(-50, 50), max_size=200))
def test_inversions_brute_force(vals):
    brute = sum(1 for i in range(len(vals)) for j in range(i + 1, len(vals)) if vals[i] > vals[j])
    assert count_inversions(vals) == brute


def test_tau_large_input_against_scipy():
    g = RngStream(3).gen
    x = g.integers(0, 50, 200_000)
    y = x + g.integers(0, 80, 200_000)
    assert kendall_tau_b(x, y) == pytest.approx(stats.kendalltau(x, y).statistic, abs=1e-10)


def test_ami_identical():
    a = np.array([1, 1, 2, 2, 3])
    assert ami(a, a) == 1.0
    assert ami(a, np.array([7, 7, 4, 4, 9])) == pytest.approx(1.0)


def test_ami_orthogonal_two_by_two():
    assert ami([1, 1, 2, 2], [1, 2, 1, 2]) <= 0


def test_ami_single_clusters_identical():
    assert ami([1, 1, 1], [4, 4, 4]) == 1.0


def test_ami_random_relabel_near_zero():
    g = RngStream(5).gen
    a = g.integers(1, 40, 1000)
    assert abs(ami(a, g.permutation(a))) < 0.02


@settings(max_examples=100, deadline=None)
@given(st.lists(st.tuples(st.integers(1, 5), st.integers(1, 5)), min_size=2, max_size=80))
def test_ami_matches_sklearn(pairs):
    a, b = map(np.array, zip(*pairs))
    ours = ami(a, b)
    ref = adjusted_mutual_info_score(a, b, average_method="arithmetic")
    if np.isnan(ours):
        return
    assert ours == pytest.approx(ref, abs=1e-9)


@settings(max_examples=50, deadline=None)
@given(st.lists(st.tuples(st.integers(1, 4), st.integers(1, 4)), min_size=3, max_size=50))
def test_ami_invariant_under_relabelling(pairs):
    a, b = map(np.array, zip(*pairs))
    perm = np.array([0, 3, 1, 4, 2])
    x, y = ami(a, b), ami(perm[a], b)
    assert (np.isnan(x) and np.isnan(y)) or x == pytest.approx(y, abs=1e-12)


def test_partition_pair_drops_inactive():
    a, b = partition_pair([0, 1, 1, 2], [3, 0, 3, 3])
    assert a.tolist() == [1, 2] and b.tolist() == [3, 3]


def test_edge_corr_identical_layers():
    e = [(0, 1), (1, 2)]
    assert edge_correlation_matrix(make_net(3, [e, e]))[0, 1] == 1.0


def test_edge_corr_half():
    act = np.ones(4, int)
    net = make_net(4, [[(0, 1), (1, 2)], [(1, 2), (2, 3)]], [act, act])
    assert edge_correlation_matrix(net)[0, 1] == 0.5


def test_edge_corr_subset():
    net = make_net(4, [[(0, 1), (1, 2), (2, 3)], [(1, 2)]], [np.ones(4, int)] * 2)
    assert edge_correlation_matrix(net)[0, 1] == 1.0


def test_edge_corr_respects_joint_activity():
    # actor 3 inactive in layer 2, so edge (2, 3) of layer 1 is not counted
    net = make_net(4, [[(0, 1), (2, 3)], [(0, 1)]], [np.array([1, 1, 1, 1]), np.array([1, 1, 1, 0])])
    assert edge_correlation_matrix(net)[0, 1] == 1.0


def test_edge_corr_undefined():
    net = make_net(4, [[(0, 1)], [(2, 3)]])
    assert np.isnan(edge_correlation_matrix(net)[0, 1])


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 2**32))
def test_edge_corr_range_and_relabel_invariance(seed):
    g = RngStream(seed).gen
    n = 30
    layers = []
    for _ in range(3):
        e = {tuple(sorted(p)) for p in g.integers(0, n, (40, 2)).tolist() if p[0] != p[1]}
        layers.append(sorted(e))
    net = make_net(n, layers)
    R = edge_correlation_matrix(net)
    ok = ~np.isnan(R)
    assert np.all((R[ok] >= 0) & (R[ok] <= 1))
    assert np.allclose(R, R.T, equal_nan=True)
    R2 = edge_correlation_matrix(net.relabel(g.permutation(n)))
    assert np.allclose(R, R2, equal_nan=True)


def test_report_single_layer():
    net = make_net(3, [[(0, 1), (1, 2)]], [np.array([1, 1, 1])])
    rep = correlation_report(net)
    assert rep.degree_tau.shape == rep.partition_ami.shape == rep.edge_corr.shape == (1, 1)
    assert rep.edge_corr[0, 0] == 1.0 and rep.partition_ami[0, 0] == 1.0


def test_report_symmetric_on_generated_network():
    from mlnbench.generator import generate
    from conftest import standard_config
    net = generate(standard_config(n=2000, ell=3, seed=1, r=[1.0, 0.5, 0.0], s=20, S=100),
                   skip_phase6=True).network
    rep = correlation_report(net)
    for M in (rep.degree_tau, rep.partition_ami, rep.edge_corr):
        assert np.allclose(M, M.T, equal_nan=True)
    A = rep.partition_ami
    assert A[0, 1] > A[0, 2] and abs(A[0, 2]) < 0.05 and abs(A[1, 2]) < 0.05
