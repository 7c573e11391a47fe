import numpy as np
import pytest

from mlnbench.core import GeneratorConfig, LayerGraph, MultilayerNetwork


def make_net(n, layers, partitions=None):
    """Build a network from 0-based edge lists."""
    partitions = partitions or [None] * len(layers)
    return MultilayerNetwork(n, tuple(
        LayerGraph(n, np.array(e, dtype=np.int64).reshape(-1, 2), p)
        for e, p in zip(layers, partitions)))


def standard_config(n=10_000, ell=2, seed=0, **overrides):
    """Medium-sized configuration used by the structural property tests."""
    kw = dict(q=1.0, tau=0.5, r=0.8, gamma=2.5, delta=5, Delta=50, beta=1.5,
              s=50, S=1000, xi=0.2)
    kw.update(overrides)
    R = np.full((ell, ell), 0.2)
    np.fill_diagonal(R, 1.0)
    return GeneratorConfig.uniform(n, ell, R=R, seed=seed, **kw)


@pytest.fixture
def two_triangles():
    return make_net(6, [[(0, 1), (1, 2), (0, 2), (3, 4), (4, 5), (3, 5)]])


ACCEPTANCE_LINES: list = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[1].rstrip(":"))):
            terminalreporter.write_line(line)
