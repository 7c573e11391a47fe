"""Phase 3: community sizes, the shared reference layer, geometric assignment
and the correlation-strength reshuffle."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.spatial import cKDTree

from .core import GenerationInfeasible
from .sampling import TruncatedPowerLaw, as_stream, sample_unit_ball, tpl_sample


@dataclass(frozen=True)
class ReferenceLayer:
    points: np.ndarray
    d: int

    @property
    def n(self) -> int:
        return len(self.points)


@dataclass(frozen=True)
class CommunityPlan:
    """``assignment[a]`` is the community id of actor index ``a`` (0 = inactive)."""

    sizes: np.ndarray
    inactive_size: int
    assignment: np.ndarray
    exceeded_max: bool = False


def _draw_until(N: int, dist: TruncatedPowerLaw, gen_stream) -> np.ndarray:
    """I.i.d. sizes until the running total first reaches ``N``."""
    chunk = max(16, int(1.2 * N / dist.mean()) + 16)
    drawn = np.zeros(0, dtype=np.int64)
    total = 0
    while True:
        batch = tpl_sample(dist, chunk, gen_stream)
        csum = total + np.cumsum(batch)
        hit = np.flatnonzero(csum >= N)
        if len(hit):
            return np.concatenate((drawn, batch[: hit[0] + 1]))
        drawn = np.concatenate((drawn, batch))
        total = int(csum[-1])


def _adjust_overshoot(sizes: np.ndarray, N: int, s: int, S: int, gen) -> tuple[np.ndarray, bool] | None:
    """Make ``sizes`` sum to ``N``; None when the increment rule cannot be applied."""
    sizes = sizes.copy()
    x = int(sizes.sum()) - N
    if x == 0:
        return sizes, False
    last = int(sizes[-1])
    if last >= x + s:
        sizes[-1] = last - x
        return sizes, False
    sizes = sizes[:-1]
    need = last - x
    if need > len(sizes):
        return None
    room = np.flatnonzero(sizes < S)
    pool = room if len(room) >= need else np.arange(len(sizes))
    chosen = gen.choice(pool, size=need, replace=False)
    sizes[chosen] += 1
    return sizes, bool(np.any(sizes > S))


def generate_community_sizes(N: int, beta: float, s: int, S: int, rng,
                             max_iters: int = 1000) -> tuple[np.ndarray, bool]:
    """Sizes in ``[s, S]`` (rarely ``S + 1``) summing exactly to ``N``.

    Returns ``(sizes, exceeded_max)``.  Redraws up to ``max_iters`` times when
    the overshoot cannot be absorbed by the existing communities.
    """
    if N == 0:
        return np.zeros(0, dtype=np.int64), False
    if N < s:
        raise GenerationInfeasible(f"n too small for minimum community size ({N} active < s={s})")
    rng = as_stream(rng)
    dist = TruncatedPowerLaw(beta, s, S)
    for _ in range(max_iters):
        out = _adjust_overshoot(_draw_until(N, dist, rng), N, s, S, rng.gen)
        if out is not None:
            return out
    raise GenerationInfeasible(
        f"could not draw community sizes summing to {N} within {max_iters} attempts")


def build_reference_layer(n: int, d: int, rng) -> ReferenceLayer:
    return ReferenceLayer(sample_unit_ball(d, rng, count=n), d)


def assign_geometric(ref: ReferenceLayer, active: np.ndarray, sizes, rng) -> np.ndarray:
    """Greedy farthest-point grouping of active actors into communities.

    Communities are filled in a uniformly random order.  Each takes the
    unassigned active actor farthest from the origin and its ``c - 1``
    nearest unassigned active actors.
    """
    rng = as_stream(rng)
    active = np.asarray(active, dtype=bool)
    sizes = np.asarray(sizes, dtype=np.int64)
    idx = np.flatnonzero(active)
    if int(sizes.sum()) != len(idx):
        raise ValueError(f"sizes sum to {int(sizes.sum())}, expected {len(idx)} active actors")
    assignment = np.zeros(ref.n, dtype=np.int64)
    if len(idx) == 0:
        return assignment
    order = rng.gen.permutation(len(sizes))
    pts = ref.points[idx]
    norms = np.linalg.norm(pts, axis=1)
    # farthest first; ties by label via the stable sort on the negated norm
    far_order = np.argsort(-norms, kind="stable")
    taken = np.zeros(len(idx), dtype=bool)
    cursor = 0

    tree_ids = np.arange(len(idx))
    tree = cKDTree(pts)
    removed_since_build = 0

    for comm in order:
        c = int(sizes[comm])
        while taken[far_order[cursor]]:
            cursor += 1
        centre = far_order[cursor]
        if removed_since_build * 2 > len(tree_ids):
            tree_ids = np.flatnonzero(~taken)
            tree = cKDTree(pts[tree_ids])
            removed_since_build = 0
        free_in_tree = len(tree_ids) - removed_since_build
        k = min(len(tree_ids), max(2 * c, c + 8))
        while True:
            dist, pos = tree.query(pts[centre], k=k)
            pos = np.atleast_1d(pos)
            dist = np.atleast_1d(dist)
            cand = tree_ids[pos]
            keep = ~taken[cand]
            cand, dist = cand[keep], dist[keep]
            if len(cand) >= c or k >= len(tree_ids) or len(cand) == free_in_tree:
                break
            k = min(len(tree_ids), 2 * k)
        # distance ties resolved by actor label
        pick = np.lexsort((cand, dist))[:c]
        members = cand[pick]
        if centre not in members:
            members = np.concatenate(([centre], members[: c - 1]))
        taken[members] = True
        removed_since_build += len(members)
        assignment[idx[members]] = comm + 1
    return assignment


def apply_correlation_strength(assignment: np.ndarray, r: float, rng) -> np.ndarray:
    """Each active actor leaves with probability ``1 - r``; leavers refill the
    freed slots through a uniform random bijection."""
    if not 0 <= r <= 1:
        raise ValueError(f"r must lie in [0, 1], got {r}")
    assignment = np.asarray(assignment, dtype=np.int64).copy()
    if r == 1:
        return assignment
    rng = as_stream(rng)
    idx = np.flatnonzero(assignment != 0)
    leave = idx[rng.gen.random(len(idx)) < 1.0 - r]
    slots = assignment[leave]
    assignment[leave] = slots[rng.gen.permutation(len(slots))]
    return assignment


def plan_communities(ref: ReferenceLayer, active: np.ndarray, beta: float, s: int, S: int,
                     r: float, rng, sizes=None, max_iters: int = 1000) -> CommunityPlan:
    """Phase 3 for one layer: sizes (drawn or injected), geometry, reshuffle."""
    rng = as_stream(rng)
    N = int(np.count_nonzero(active))
    exceeded = False
    if sizes is None:
        sizes, exceeded = generate_community_sizes(N, beta, s, S, rng.child("sizes"), max_iters)
    else:
        sizes = np.asarray(sizes, dtype=np.int64)
        if int(sizes.sum()) != N:
            raise GenerationInfeasible(
                f"injected community sizes sum to {int(sizes.sum())}, layer has {N} active actors")
    assignment = assign_geometric(ref, active, sizes, rng.child("assign"))
    assignment = apply_correlation_strength(assignment, r, rng.child("reshuffle"))
    return CommunityPlan(sizes, len(active) - N, assignment, exceeded)

