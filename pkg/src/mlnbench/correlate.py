"""Phase 6: batch rewiring toward a target edge-correlation matrix.

Every swap replaces two edges of one layer by two others on the same four
actors, so actor degrees never change.  Swaps are restricted so that
community-internal edges are replaced by community-internal edges of the same
community and inter-community edges by inter-community edges; community and
background degrees are therefore invariant too.
"""
from __future__ import annotations

import math
import random
from dataclasses import dataclass, field

import numpy as np

from .core import LayerGraph, MultilayerNetwork
from .sampling import as_stream

NAN = float("nan")
REJECTION_TRIES = 64


class IndexableSet:
    """Set with O(1) add, remove and uniform choice."""

    __slots__ = ("items", "pos")

    def __init__(self, items=()):
        self.items: list = []
        self.pos: dict = {}
        for x in items:
            self.add(x)

    def add(self, x) -> None:
        if x not in self.pos:
            self.pos[x] = len(self.items)
            self.items.append(x)

    def remove(self, x) -> None:
        i = self.pos.pop(x)
        last = self.items.pop()
        if i < len(self.items):
            self.items[i] = last
            self.pos[last] = i

    def choice(self, rnd: random.Random):
        return self.items[int(rnd.random() * len(self.items))]

    def __contains__(self, x) -> bool:
        return x in self.pos

    def __len__(self) -> int:
        return len(self.items)


class _LayerState:
    __slots__ = ("n", "adj", "edges", "comm", "part", "active")

    def __init__(self, layer: LayerGraph):
        n = layer.n
        self.n = n
        self.part = layer.partition.tolist()
        self.active = layer.active.tolist()
        self.adj = [set() for _ in range(n)]
        keys = layer.keys().tolist()
        self.edges = IndexableSet(keys)
        self.comm: dict[int, IndexableSet] = {}
        part = self.part
        for (u, v), k in zip(layer.edges.tolist(), keys):
            self.adj[u].add(v)
            self.adj[v].add(u)
            if part[u] == part[v]:
                bucket = self.comm.get(part[u])
                if bucket is None:
                    bucket = self.comm[part[u]] = IndexableSet()
                bucket.add(k)

    def to_layer(self) -> LayerGraph:
        keys = np.array(self.edges.items, dtype=np.int64)
        edges = np.stack([keys // self.n, keys % self.n], axis=1) if len(keys) else np.zeros((0, 2))
        return LayerGraph(self.n, edges, np.array(self.part, dtype=np.int64))


def _key(u: int, v: int, n: int) -> int:
    return u * n + v if u < v else v * n + u


def l2_distance(R_hat: np.ndarray, R: np.ndarray) -> float:
    """Frobenius norm of ``R - R_hat`` over entries defined in both."""
    ok = ~np.isnan(R_hat) & ~np.isnan(R)
    return float(np.sqrt(np.sum((R[ok] - R_hat[ok]) ** 2)))


def select_pair(R_hat: np.ndarray, R: np.ndarray, rng) -> tuple[int, int] | None:
    """Sample ``i < j`` with probability proportional to ``|R_hat - R|``."""
    ell = len(R)
    iu, ju = np.triu_indices(ell, 1)
    diff = np.abs(R_hat[iu, ju] - R[iu, ju])
    diff = np.where(np.isnan(diff), 0.0, diff)
    total = diff.sum()
    if total <= 0:
        return None
    k = as_stream(rng).gen.choice(len(diff), p=diff / total)
    return int(iu[k]), int(ju[k])


@dataclass
class RewireSession:
    """Mutable multilayer state for Phase 6 with incremental correlation counts."""

    net: MultilayerNetwork
    rng: object = None
    layers: list = field(init=False)
    restricted: list = field(init=False)  # restricted[i][j] = |E_i^j|
    inter: dict = field(init=False)
    log: list = field(init=False, default_factory=list)
    swaps: int = field(init=False, default=0)

    def __post_init__(self):
        if not self.net.has_partitions():
            raise ValueError("edge-correlation matching needs per-layer partitions")
        stream = as_stream(self.rng)
        self.rnd = random.Random(int(stream.gen.integers(0, 2**63 - 1)))
        self.n = self.net.n
        self.layers = [_LayerState(layer) for layer in self.net.layers]
        ell = len(self.layers)
        self.restricted = [[0] * ell for _ in range(ell)]
        for i, layer in enumerate(self.net.layers):
            e = layer.edges
            for j in range(ell):
                if len(e):
                    act = self.net.layers[j].active
                    self.restricted[i][j] = int(np.count_nonzero(act[e[:, 0]] & act[e[:, 1]]))
        self.inter = {}
        for i in range(ell):
            for j in range(i + 1, ell):
                common = np.intersect1d(self.net.layers[i].keys(), self.net.layers[j].keys())
                self.inter[(i, j)] = IndexableSet(common.tolist())

    @property
    def ell(self) -> int:
        return len(self.layers)

    def correlation(self) -> np.ndarray:
        ell = self.ell
        R = np.full((ell, ell), NAN)
        for i in range(ell):
            if len(self.layers[i].edges):
                R[i, i] = 1.0
            for j in range(i + 1, ell):
                m = min(self.restricted[i][j], self.restricted[j][i])
                if m > 0:
                    R[i, j] = R[j, i] = len(self.inter[(i, j)]) / m
        return R

    # -- primitive edits ---------------------------------------------------

    def _add(self, li: int, u: int, v: int) -> None:
        L = self.layers[li]
        k = _key(u, v, self.n)
        L.adj[u].add(v)
        L.adj[v].add(u)
        L.edges.add(k)
        if L.part[u] == L.part[v]:
            bucket = L.comm.get(L.part[u])
            if bucket is None:
                bucket = L.comm[L.part[u]] = IndexableSet()
            bucket.add(k)
        for j, other in enumerate(self.layers):
            if j != li and other.active[u] and other.active[v]:
                self.restricted[li][j] += 1
                if k in other.edges:
                    self.inter[(li, j) if li < j else (j, li)].add(k)

    def _remove(self, li: int, u: int, v: int) -> None:
        L = self.layers[li]
        k = _key(u, v, self.n)
        L.adj[u].discard(v)
        L.adj[v].discard(u)
        L.edges.remove(k)
        if L.part[u] == L.part[v]:
            L.comm[L.part[u]].remove(k)
        for j, other in enumerate(self.layers):
            if j != li and other.active[u] and other.active[v]:
                self.restricted[li][j] -= 1
                if k in other.edges:
                    self.inter[(li, j) if li < j else (j, li)].remove(k)

    def swap(self, li: int, old: tuple, new: tuple) -> None:
        """Replace edges ``old`` by edges ``new`` in layer ``li``."""
        for u, v in old:
            self._remove(li, u, v)
        for u, v in new:
            self._add(li, u, v)
        self.log.append((li, old, new))
        self.swaps += 1

    def undo_to(self, mark: int) -> None:
        while len(self.log) > mark:
            li, old, new = self.log.pop()
            for u, v in new:
                self._remove(li, u, v)
            for u, v in old:
                self._add(li, u, v)

    def network(self) -> MultilayerNetwork:
        return MultilayerNetwork(self.n, tuple(L.to_layer() for L in self.layers))

    # -- sampling helpers ---------------------------------------------------

    def _restricted_edge(self, p: int, q: int):
        """Uniform edge of layer ``p`` with both ends active in layer ``q``."""
        P, Q = self.layers[p], self.layers[q]
        if not len(P.edges) or self.restricted[p][q] == 0:
            return None
        n, rnd = self.n, self.rnd
        for _ in range(REJECTION_TRIES):
            u, v = divmod(P.edges.choice(rnd), n)
            if Q.active[u] and Q.active[v]:
                return u, v
        return None


def _pick(rnd: random.Random, seq: list):
    return seq[int(rnd.random() * len(seq))] if seq else None


def raise_correlation(sess: RewireSession, i: int, j: int, attempts: int) -> int:
    """Try to copy primary edges into the secondary layer; returns swaps made."""
    rnd, n = sess.rnd, sess.n
    done = 0
    for _ in range(attempts):
        p, q = (i, j) if rnd.random() < 0.5 else (j, i)
        e = sess._restricted_edge(p, q)
        if e is None:
            continue
        u, v = e
        Q = sess.layers[q]
        if v in Q.adj[u]:
            continue
        part = Q.part
        cu, cv = part[u], part[v]
        if cu == cv:
            u2 = _pick(rnd, [w for w in Q.adj[u] if part[w] == cu])
            v2 = _pick(rnd, [w for w in Q.adj[v] if part[w] == cu])
        else:
            u2 = _pick(rnd, [w for w in Q.adj[u] if part[w] != cu and part[w] != cv])
            if u2 is None:
                continue
            cu2 = part[u2]
            v2 = _pick(rnd, [w for w in Q.adj[v] if part[w] != cu and part[w] != cv and part[w] != cu2])
        if u2 is None or v2 is None:
            continue
        if len({u, v, u2, v2}) < 4 or v2 in Q.adj[u2]:
            continue
        sess.swap(q, ((u, u2), (v, v2)), ((u, v), (u2, v2)))
        done += 1
    return done


def lower_correlation(sess: RewireSession, i: int, j: int, attempts: int) -> int:
    """Try to move shared edges out of the secondary layer; returns swaps made."""
    rnd, n = sess.rnd, sess.n
    shared = sess.inter[(i, j) if i < j else (j, i)]
    done = 0
    for _ in range(attempts):
        if not len(shared):
            break
        p, q = (i, j) if rnd.random() < 0.5 else (j, i)
        u, v = divmod(shared.choice(rnd), n)
        Q = sess.layers[q]
        part = Q.part
        cu, cv = part[u], part[v]
        if cu == cv:
            bucket = Q.comm.get(cu)
            if bucket is None or len(bucket) < 2:
                continue
            u2, v2 = divmod(bucket.choice(rnd), n)
        else:
            u2 = v2 = None
            for _ in range(REJECTION_TRIES):
                a, b = divmod(Q.edges.choice(rnd), n)
                if len({cu, cv, part[a], part[b]}) == 4:
                    u2, v2 = a, b
                    break
            if u2 is None:
                continue
        if rnd.random() < 0.5:
            u2, v2 = v2, u2
        if len({u, v, u2, v2}) < 4 or u2 in Q.adj[u] or v2 in Q.adj[v]:
            continue
        sess.swap(q, ((u, v), (u2, v2)), ((u, u2), (v, v2)))
        done += 1
    return done


@dataclass(frozen=True)
class MatchResult:
    network: MultilayerNetwork
    history: list  # (batch index, L2 distance) before each batch and at the end
    best_batch: int
    best_distance: float
    swaps: int


def match_correlations(net: MultilayerNetwork, R, t: int = 100, eps: float = 0.05,
                       rng=None) -> MatchResult:
    """Run ``t`` batches and return the best network seen (ties keep the earliest)."""
    R = np.asarray(R, dtype=float)
    stream = as_stream(rng)
    sess = RewireSession(net, stream.child("swaps"))
    pair_rng = stream.child("pairs")
    history = []
    best = (math.inf, 0, 0)  # distance, batch, log mark
    for b in range(t + 1):
        R_hat = sess.correlation()
        dist = l2_distance(R_hat, R)
        history.append((b, dist))
        if dist < best[0]:
            best = (dist, b, len(sess.log))
        if b == t:
            break
        pair = select_pair(R_hat, R, pair_rng)
        if pair is None:
            continue
        i, j = pair
        m = min(sess.restricted[i][j], sess.restricted[j][i])
        if m == 0:
            continue
        attempts = math.ceil(eps * m)
        if R_hat[i, j] < R[i, j]:
            raise_correlation(sess, i, j, attempts)
        else:
            lower_correlation(sess, i, j, attempts)
    swaps = sess.swaps
    if best[2] == 0:
        return MatchResult(net, history, best[1], best[0], swaps)
    sess.undo_to(best[2])
    return MatchResult(sess.network(), history, best[1], best[0], swaps)


def write_history(history, path) -> None:
    with open(path, "w") as fh:
        for b, d in history:
            fh.write(f"{b}\t{d!r}\n")
