"""Fit a generator configuration to an observed multilayer network."""
from __future__ import annotations

import math
import random
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import minimize_scalar

from .core import GeneratorConfig, LayerGraph, LayerParams, MultilayerNetwork
from .measures import ami, edge_correlation_matrix, kendall_tau_b, partition_pair
from .sampling import RngStream, TruncatedPowerLaw, as_stream

# used when a fit is undefined (too few or constant values)
FALLBACK_GAMMA = 2.5
FALLBACK_BETA = 1.5


# --------------------------------------------------------------------------
# Louvain


def _one_level(adj: list[dict], self_w: list[float], resolution: float, rnd: random.Random):
    """Local moving until no node changes community; returns node -> community."""
    nn = len(adj)
    k = [sum(a.values()) + 2 * self_w[i] for i, a in enumerate(adj)]
    m2 = float(sum(k))
    comm = list(range(nn))
    tot = k[:]
    if m2 == 0:
        return comm
    improved = True
    order = list(range(nn))
    while improved:
        improved = False
        rnd.shuffle(order)
        for i in order:
            ci = comm[i]
            ki = k[i]
            links: dict[int, float] = {}
            for j, w in adj[i].items():
                cj = comm[j]
                links[cj] = links.get(cj, 0.0) + w
            tot[ci] -= ki
            best_c = ci
            best_gain = links.get(ci, 0.0) - resolution * tot[ci] * ki / m2
            for c, w in links.items():
                gain = w - resolution * tot[c] * ki / m2
                if gain > best_gain + 1e-12:
                    best_gain, best_c = gain, c
            tot[best_c] += ki
            if best_c != ci:
                comm[i] = best_c
                improved = True
    return comm


def _aggregate(adj, self_w, comm):
    ids = {c: x for x, c in enumerate(dict.fromkeys(comm))}
    size = len(ids)
    new_adj: list[dict] = [dict() for _ in range(size)]
    new_self = [0.0] * size
    for i, a in enumerate(adj):
        ci = ids[comm[i]]
        new_self[ci] += self_w[i]
        for j, w in a.items():
            cj = ids[comm[j]]
            if ci == cj:
                new_self[ci] += w / 2.0  # each internal edge is seen from both ends
            else:
                new_adj[ci][cj] = new_adj[ci].get(cj, 0.0) + w
    return new_adj, new_self, [ids[c] for c in comm]


def louvain(layer: LayerGraph, resolution: float = 1.0, rng=None) -> np.ndarray:
    """Two-phase Louvain modularity maximisation.

    Returns a partition with communities numbered from 1 in order of their
    lowest member; actors without edges get 0.
    """
    n = layer.n
    part = np.zeros(n, dtype=np.int64)
    if layer.m == 0:
        return part
    rnd = random.Random(int(as_stream(rng).gen.integers(0, 2**63 - 1)))
    adj: list[dict] = [dict() for _ in range(n)]
    for u, v in layer.edges.tolist():
        adj[u][v] = adj[u].get(v, 0.0) + 1.0
        adj[v][u] = adj[v].get(u, 0.0) + 1.0
    self_w = [0.0] * n
    member = list(range(n))  # original node -> current super-node
    while True:
        comm = _one_level(adj, self_w, resolution, rnd)
        if len(set(comm)) == len(comm):
            break
        adj, self_w, mapping = _aggregate(adj, self_w, comm)
        member = [mapping[s] for s in member]
    deg = layer.degrees()
    raw = np.array(member, dtype=np.int64)
    out = np.zeros(n, dtype=np.int64)
    live = np.flatnonzero(deg > 0)
    _, first, inv = np.unique(raw[live], return_index=True, return_inverse=True)
    rank = np.empty(len(first), dtype=np.int64)
    rank[np.argsort(first, kind="stable")] = np.arange(1, len(first) + 1)
    out[live] = rank[inv.ravel()]
    return out


def modularity(layer: LayerGraph, partition, resolution: float = 1.0) -> float:
    """Newman modularity of ``partition`` on the layer's edges."""
    m = layer.m
    if m == 0:
        return float("nan")
    part = np.asarray(partition)
    e = layer.edges
    deg = layer.degrees()
    inside = np.count_nonzero(part[e[:, 0]] == part[e[:, 1]])
    _, inv = np.unique(part, return_inverse=True)
    tot = np.bincount(inv.ravel(), weights=deg)
    return float(inside / m - resolution * np.sum(tot ** 2) / (4.0 * m * m))


# --------------------------------------------------------------------------
# exponent fitting


def fit_power_law(values, floor: int | None = None) -> float:
    """Discrete MLE of the exponent for the truncated bucket law on
    ``[floor, max(values)]``.  NaN when all values are equal."""
    vals = np.asarray(values, dtype=np.int64)
    if len(vals) == 0:
        return float("nan")
    lo = int(vals.min()) if floor is None else int(floor)
    hi = int(vals.max())
    if np.any(vals < lo):
        raise ValueError(f"values below the floor {lo}")
    if hi == int(vals.min()):
        return float("nan")
    counts = np.bincount(vals - lo, minlength=hi - lo + 1).astype(float)

    def negloglik(g):
        pmf = TruncatedPowerLaw(g, lo, hi).pmf_array()
        with np.errstate(divide="ignore"):
            return -float(np.dot(counts, np.log(pmf)))

    res = minimize_scalar(negloglik, bounds=(1.01, 6.0), method="bounded",
                          options={"xatol": 1e-6})
    return float(res.x)


# --------------------------------------------------------------------------
# relabelling and extraction


def relabel_by_degree(net: MultilayerNetwork) -> np.ndarray:
    """Order of old actor indices: first-layer degree descending, ties by id."""
    deg = net.layers[0].degrees()
    return np.argsort(-deg, kind="stable")


@dataclass(frozen=True)
class Clamp:
    gamma_max: float | None = 3.0
    delta_min: int | None = 10
    s_min: int | None = 50


@dataclass
class ExtractionOptions:
    partitions: list | None = None  # None means detect with Louvain
    resolution: float = 1.0
    clamp: Clamp | None = None
    seed: int = 0


@dataclass
class ExtractionResult:
    config: GeneratorConfig
    order: np.ndarray  # new index k holds old actor order[k]
    network: MultilayerNetwork  # relabelled, with the partitions used
    degree_sequences: list
    community_sizes: list
    notes: list = field(default_factory=list)


def _apply_clamp(p: LayerParams, clamp: Clamp) -> None:
    if clamp.gamma_max is not None and p.gamma > clamp.gamma_max:
        p.gamma = clamp.gamma_max
    if clamp.delta_min is not None and p.delta < clamp.delta_min:
        p.delta = clamp.delta_min
        p.Delta = max(p.Delta, p.delta)
    if clamp.s_min is not None and p.s < clamp.s_min:
        p.s = clamp.s_min
        p.S = max(p.S, p.s)


def extract_config(net: MultilayerNetwork, opts: ExtractionOptions | None = None) -> ExtractionResult:
    opts = opts or ExtractionOptions()
    root = RngStream(opts.seed, "extract")
    notes: list[str] = []
    if opts.partitions is not None:
        if len(opts.partitions) != net.ell:
            raise ValueError("need one partition per layer")
        net = MultilayerNetwork(net.n, tuple(
            LayerGraph(net.n, layer.edges, np.asarray(part, dtype=np.int64))
            for layer, part in zip(net.layers, opts.partitions)))
    order = relabel_by_degree(net)
    net = net.relabel(order)
    n, ell = net.n, net.ell

    parts = []
    for i, layer in enumerate(net.layers):
        if opts.partitions is not None:
            parts.append(layer.partition)
        else:
            parts.append(louvain(layer, opts.resolution, root.child("louvain", i)))
    labels = np.arange(1, n + 1)
    layers = []
    degree_sequences = []
    community_sizes = []
    for i, layer in enumerate(net.layers):
        deg = layer.degrees()
        pos = deg > 0
        part = parts[i]
        p = LayerParams()
        active = part != 0 if opts.partitions is not None else pos
        p.q = float(np.mean(active))
        if pos.any():
            p.delta = int(deg[pos].min())
            p.Delta = int(deg[pos].max())
            g = fit_power_law(deg[pos], p.delta) if pos.sum() >= 10 else float("nan")
            if math.isnan(g):
                notes.append(f"layer {i + 1}: degree exponent undefined, using {FALLBACK_GAMMA}")
                g = FALLBACK_GAMMA
            p.gamma = g
            t = kendall_tau_b(labels[pos], deg[pos])
            p.tau = 0.0 if math.isnan(t) else float(-t)
        sizes = np.bincount(part)[1:]
        sizes = sizes[sizes > 0]
        if len(sizes):
            p.s, p.S = int(sizes.min()), int(sizes.max())
            b = fit_power_law(sizes, p.s) if len(sizes) >= 10 else float("nan")
            if math.isnan(b):
                notes.append(f"layer {i + 1}: community-size exponent undefined, using {FALLBACK_BETA}")
                b = FALLBACK_BETA
            p.beta = b
        if layer.m:
            p.xi = float(layer.noise()) if layer.partition is not None else float(
                np.mean(part[layer.edges[:, 0]] != part[layer.edges[:, 1]]))
        layers.append(p)
        degree_sequences.append(deg)
        community_sizes.append([int(c) for c in sizes])

    # the latent reference is unobservable; the first layer stands in for it
    if opts.partitions is None and net.layers[0].m:
        again = louvain(net.layers[0], opts.resolution, root.child("louvain-ref"))
        a, b = partition_pair(parts[0], again)
        r0 = ami(a, b) if len(a) else float("nan")
    else:
        r0 = 1.0
    for i, p in enumerate(layers):
        if i == 0:
            r = r0
        else:
            a, b = partition_pair(parts[i], parts[0])
            r = ami(a, b) if len(a) else float("nan")
        p.r = 1.0 if math.isnan(r) else float(min(1.0, max(0.0, r)))
    notes.append("r is a coarse estimate measured against the first layer's partition")

    if opts.clamp is not None:
        for p in layers:
            _apply_clamp(p, opts.clamp)

    labelled = MultilayerNetwork(n, tuple(
        LayerGraph(n, layer.edges, part) for layer, part in zip(net.layers, parts)))
    R = edge_correlation_matrix(labelled) if ell > 1 else np.ones((1, 1))
    cfg = GeneratorConfig(n=n, ell=ell, layers=layers, R=R, seed=opts.seed)
    return ExtractionResult(cfg, order, labelled, degree_sequences, community_sizes, notes)
