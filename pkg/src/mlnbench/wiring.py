"""Phases 4-5: half-edge split, configuration-model wiring, rewiring to a simple graph.

Recycle passes are vectorised.  Within one pass every recycled edge gets
exactly one rewiring attempt; attempts that touch an edge already used
earlier in the same sub-round are deferred to the next sub-round, which keeps
the outcome equivalent to processing the shuffled recycle list one edge at a
time.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np

from .core import GenerationInfeasible
from .sampling import as_stream, stochastic_round

log = logging.getLogger(__name__)

BACKGROUND_PATIENCE = 50


@dataclass(frozen=True)
class HalfEdgeSplit:
    Y: np.ndarray  # community half-edges
    Z: np.ndarray  # background half-edges


@dataclass
class LayerMultigraph:
    n: int
    community_edges: np.ndarray  # (m, 2), may hold loops and repeats
    community_of_edge: np.ndarray
    background_edges: np.ndarray


@dataclass(frozen=True)
class WiringResult:
    edges: np.ndarray
    community_edge_count: int
    transferred: int  # community edges handed to the background
    community_rewires: int
    background_rewires: int


def split_degrees(degree: np.ndarray, assignment: np.ndarray, xi: float, rng) -> HalfEdgeSplit:
    rng = as_stream(rng)
    degree = np.asarray(degree, dtype=np.int64)
    assignment = np.asarray(assignment, dtype=np.int64)
    Y = stochastic_round((1.0 - xi) * degree, rng)
    Y = np.asarray(Y, dtype=np.int64).reshape(degree.shape)
    Z = degree - Y
    if len(degree) == 0:
        return HalfEdgeSplit(Y, Z)
    ncomm = int(assignment.max()) + 1
    ysum = np.bincount(assignment, weights=Y, minlength=ncomm).astype(np.int64)
    odd = np.flatnonzero(ysum % 2 == 1)
    odd = odd[odd != 0]
    if len(odd):
        labels = np.arange(len(degree))
        in_odd = np.zeros(ncomm, dtype=bool)
        in_odd[odd] = True
        members = np.flatnonzero(in_odd[assignment])
        # per community: max degree first, ties by lowest label
        order = np.lexsort((labels[members], -degree[members], assignment[members]))
        members = members[order]
        comm = assignment[members]
        first = np.ones(len(members), dtype=bool)
        first[1:] = comm[1:] != comm[:-1]
        top = members[first]  # max-degree member per odd community
        with_z = members[Z[members] >= 1]
        cz = assignment[with_z]
        fz = np.ones(len(with_z), dtype=bool)
        fz[1:] = cz[1:] != cz[:-1]
        donor = np.full(ncomm, -1, dtype=np.int64)
        donor[cz[fz]] = with_z[fz]
        for c, t in zip(comm[first].tolist(), top.tolist()):
            a = donor[c]
            if a >= 0:
                Y[a] += 1
                Z[a] -= 1
            else:
                Y[t] -= 1
                Z[t] += 1
    return HalfEdgeSplit(Y, Z)


def configuration_model(degrees, rng) -> np.ndarray:
    """Uniform perfect matching of half-edges; loops and repeats allowed."""
    degrees = np.asarray(degrees, dtype=np.int64)
    if int(degrees.sum()) % 2:
        raise ValueError("configuration model needs an even degree sum")
    stubs = np.repeat(np.arange(len(degrees)), degrees)
    stubs = stubs[as_stream(rng).gen.permutation(len(stubs))]
    return stubs.reshape(-1, 2)


def grouped_configuration_model(degrees, group, rng) -> tuple[np.ndarray, np.ndarray]:
    """Independent configuration models inside each group (group 0 is skipped).

    Returns ``(edges, group_of_edge)`` with edges sorted by group.
    """
    degrees = np.asarray(degrees, dtype=np.int64)
    group = np.asarray(group, dtype=np.int64)
    degrees = np.where(group > 0, degrees, 0)
    stubs = np.repeat(np.arange(len(degrees)), degrees)
    g = group[stubs]
    if np.any(np.bincount(g) % 2):
        raise ValueError("every group needs an even half-edge sum")
    key = as_stream(rng).gen.random(len(stubs))
    order = np.lexsort((key, g))
    stubs = stubs[order]
    edges = stubs.reshape(-1, 2)
    return edges, g[order][::2].copy()


def build_multigraph(split: HalfEdgeSplit, assignment, rng) -> LayerMultigraph:
    rng = as_stream(rng)
    ce, cg = grouped_configuration_model(split.Y, assignment, rng.child("community"))
    be = configuration_model(split.Z, rng.child("background"))
    return LayerMultigraph(len(split.Y), ce, cg, be)


# --------------------------------------------------------------------------
# rewiring


def _keys(u, v, n):
    return np.minimum(u, v) * np.int64(n) + np.maximum(u, v)


def _find_bad(keys: np.ndarray, loops: np.ndarray, alive: np.ndarray, gen,
              forbidden: np.ndarray | None = None) -> np.ndarray:
    """Loops, surplus copies of repeated keys, and keys in ``forbidden``;
    returned in shuffled order.  The surviving copy is random."""
    idx = np.flatnonzero(alive)
    idx = idx[gen.permutation(len(idx))]
    k = keys[idx]
    _, first = np.unique(k, return_index=True)
    dup = np.ones(len(idx), dtype=bool)
    dup[first] = False
    bad = dup | loops[idx]
    if forbidden is not None and len(forbidden):
        pos = np.searchsorted(forbidden, k)
        pos[pos == len(forbidden)] = 0
        bad |= forbidden[pos] == k
    return idx[bad]


def _in_sorted(sorted_arr: np.ndarray, vals: np.ndarray) -> np.ndarray:
    if len(sorted_arr) == 0:
        return np.zeros(len(vals), dtype=bool)
    pos = np.searchsorted(sorted_arr, vals)
    pos[pos == len(sorted_arr)] = 0
    return sorted_arr[pos] == vals


def _rewire_pass(edges, group, gstart, gcount, bad, present_sorted, n, gen) -> int:
    """One attempt per recycled edge against a uniform partner of its group.

    ``present_sorted`` holds every key that counts as existing at the start
    of the pass.  Returns the number of accepted swaps.
    """
    pending = bad[gcount[group[bad]] > 1]
    added = np.zeros(0, dtype=np.int64)
    accepted = 0
    while len(pending):
        g = group[pending]
        partner = gstart[g] + (gen.random(len(pending)) * (gcount[g] - 1)).astype(np.int64)
        partner += partner >= pending
        # an attempt runs now only if neither of its edges was touched by an
        # earlier attempt of this sub-round; otherwise it waits
        inter = np.empty(2 * len(pending), dtype=np.int64)
        inter[0::2] = pending
        inter[1::2] = partner
        first = np.zeros(len(inter), dtype=bool)
        first[np.unique(inter, return_index=True)[1]] = True
        wait = ~(first[0::2] & first[1::2])
        run = np.flatnonzero(~wait)
        e, f = pending[run], partner[run]
        u, v = edges[e, 0], edges[e, 1]
        x, y = edges[f, 0], edges[f, 1]
        flip = gen.random(len(run)) < 0.5
        x, y = np.where(flip, y, x), np.where(flip, x, y)
        k1 = _keys(u, x, n)
        k2 = _keys(v, y, n)
        valid = (u != x) & (v != y) & (k1 != k2)
        valid &= ~_in_sorted(present_sorted, k1) & ~_in_sorted(present_sorted, k2)
        if len(added):
            added_sorted = np.sort(added)
            valid &= ~_in_sorted(added_sorted, k1) & ~_in_sorted(added_sorted, k2)
        # a key proposed twice: the earliest valid attempt keeps it, later ones wait
        cand = np.flatnonzero(valid)
        both = np.empty(2 * len(cand), dtype=np.int64)
        both[0::2] = k1[cand]
        both[1::2] = k2[cand]
        kfirst = np.zeros(len(both), dtype=bool)
        kfirst[np.unique(both, return_index=True)[1]] = True
        clash = ~(kfirst[0::2] & kfirst[1::2])
        wait[run[cand[clash]]] = True
        cand = cand[~clash]
        edges[e[cand], 0], edges[e[cand], 1] = u[cand], x[cand]
        edges[f[cand], 0], edges[f[cand], 1] = v[cand], y[cand]
        added = np.concatenate((added, k1[cand], k2[cand]))
        accepted += len(cand)
        pending = pending[wait]
    return accepted


def _groups(group: np.ndarray, ngroups: int):
    count = np.bincount(group, minlength=ngroups).astype(np.int64)
    start = np.concatenate(([0], np.cumsum(count)[:-1]))
    return start, count


def rewire_to_simple(mg: LayerMultigraph, rng, patience: int = BACKGROUND_PATIENCE) -> WiringResult:
    rng = as_stream(rng)
    gen = rng.gen
    n = mg.n
    ce = np.array(mg.community_edges, dtype=np.int64).reshape(-1, 2)
    cg = np.asarray(mg.community_of_edge, dtype=np.int64)
    if len(cg) > 1 and np.any(np.diff(cg) < 0):
        order = np.argsort(cg, kind="stable")
        ce, cg = ce[order], cg[order]
    ngroups = int(cg.max()) + 1 if len(cg) else 1
    gstart, gcount = _groups(cg, ngroups)

    alive = np.ones(len(ce), dtype=bool)
    prev = None
    community_rewires = 0
    while True:
        keys = _keys(ce[:, 0], ce[:, 1], n)
        bad = _find_bad(keys, ce[:, 0] == ce[:, 1], alive, gen)
        counts = np.bincount(cg[bad], minlength=ngroups)
        if prev is not None:
            stuck = (counts > 0) & (counts >= prev)
            if stuck.any():
                give_up = bad[stuck[cg[bad]]]
                alive[give_up] = False
                bad = bad[~stuck[cg[bad]]]
                counts[stuck] = 0
        if not len(bad):
            break
        present = np.sort(keys[alive])
        community_rewires += _rewire_pass(ce, cg, gstart, gcount, bad, present, n, gen)
        prev = counts

    transferred = int(np.count_nonzero(~alive))
    if transferred:
        log.info("moved %d community edges to the background", transferred)
    comm_final = ce[alive]
    comm_keys = np.sort(_keys(comm_final[:, 0], comm_final[:, 1], n))

    be = np.concatenate((np.asarray(mg.background_edges, dtype=np.int64).reshape(-1, 2),
                         ce[~alive]))
    bg_group = np.zeros(len(be), dtype=np.int64)
    bstart, bcount = _groups(bg_group, 1)
    everyone = np.ones(len(be), dtype=bool)
    best = None
    idle = 0
    background_rewires = 0
    while True:
        keys = _keys(be[:, 0], be[:, 1], n)
        bad = _find_bad(keys, be[:, 0] == be[:, 1], everyone, gen, comm_keys)
        if not len(bad):
            break
        if best is None or len(bad) < best:
            best, idle = len(bad), 0
        else:
            idle += 1
            if idle > patience:
                raise GenerationInfeasible(
                    f"background graph kept {len(bad)} loops or repeated edges "
                    f"after {patience} passes without progress")
        present = np.union1d(keys, comm_keys)
        background_rewires += _rewire_pass(be, bg_group, bstart, bcount, bad, present, n, gen)

    edges = np.concatenate((comm_final, be))
    return WiringResult(edges, len(comm_final), transferred, community_rewires, background_rewires)
