"""Multilayer independent cascade (MICM) with AND/OR protocols and discount seeding."""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .core import LayerGraph, MultilayerNetwork
from .sampling import RngStream, as_stream

PROTOCOLS = ("AND", "OR")
SEEDERS = ("nsd", "dcd")


@dataclass(frozen=True)
class SpreadConfig:
    pi: float
    protocol: str = "OR"
    budget: int | str = 1  # actor count, or a percentage string such as "5%"
    seeder: str | Sequence[int] = "nsd"  # heuristic name or explicit 0-based actors
    max_steps: int | None = None
    repetitions: int = 1

    def __post_init__(self):
        if not 0 <= self.pi <= 1:
            raise ValueError(f"pi must lie in [0, 1], got {self.pi}")
        if self.protocol not in PROTOCOLS:
            raise ValueError(f"protocol must be one of {PROTOCOLS}")
        if isinstance(self.seeder, str) and self.seeder not in SEEDERS:
            raise ValueError(f"seeder must be one of {SEEDERS} or a list of actors")


@dataclass(frozen=True)
class DiffusionOutcome:
    steps: list  # steps[0] holds the seeds, steps[k] the actors activated at step k
    final_active: np.ndarray
    gain: float
    no_candidates: bool = False  # every actor was a seed, gain defined as 0


def resolve_budget(budget, n: int) -> int:
    """Seed count; percentages round half up and never go below 1."""
    if isinstance(budget, str):
        text = budget.strip()
        if text.endswith("%"):
            count = max(1, math.floor(float(text[:-1]) * n / 100.0 + 0.5))
        else:
            count = int(text)
    else:
        count = int(budget)
    if not 1 <= count <= n:
        raise ValueError(f"budget resolves to {count}, needs 1..{n}")
    return count


def _csr(n: int, edges: np.ndarray):
    """Directed arcs of an undirected edge list, grouped by source."""
    if len(edges) == 0:
        return np.zeros(n + 1, dtype=np.int64), np.zeros(0, dtype=np.int64)
    src = np.concatenate((edges[:, 0], edges[:, 1]))
    dst = np.concatenate((edges[:, 1], edges[:, 0]))
    order = np.lexsort((dst, src))
    indptr = np.zeros(n + 1, dtype=np.int64)
    np.cumsum(np.bincount(src, minlength=n), out=indptr[1:])
    return indptr, dst[order]


def _gather(indptr, sources):
    """Arc positions leaving ``sources``."""
    starts = indptr[sources]
    counts = indptr[sources + 1] - starts
    total = int(counts.sum())
    if total == 0:
        return np.zeros(0, dtype=np.int64)
    offsets = np.repeat(starts - np.concatenate(([0], np.cumsum(counts)[:-1])), counts)
    return offsets + np.arange(total)


def _discount_seeds(n: int, indptr, nbrs, budget: int) -> list[int]:
    score = np.diff(indptr).astype(float)
    picked = np.zeros(n, dtype=bool)
    out = []
    for _ in range(budget):
        masked = np.where(picked, -np.inf, score)
        s = int(np.argmax(masked))  # first maximum = lowest label
        picked[s] = True
        out.append(s)
        score[nbrs[indptr[s]:indptr[s + 1]]] -= 1
    return out


def seed_dcd(layer: LayerGraph, budget: int) -> list[int]:
    """Degree-discount seeding on one layer: each pick lowers its neighbours' scores by one."""
    indptr, nbrs = _csr(layer.n, layer.edges)
    return _discount_seeds(layer.n, indptr, nbrs, budget)


def seed_nsd(net: MultilayerNetwork, budget: int) -> list[int]:
    """The same discount rule on the union of all layers' neighbourhoods."""
    keys = np.unique(np.concatenate([layer.keys() for layer in net.layers]))
    edges = np.stack([keys // net.n, keys % net.n], axis=1) if len(keys) else np.zeros((0, 2), np.int64)
    indptr, nbrs = _csr(net.n, edges)
    return _discount_seeds(net.n, indptr, nbrs, budget)


def choose_seeds(net: MultilayerNetwork, cfg: SpreadConfig) -> list[int]:
    if not isinstance(cfg.seeder, str):
        seeds = [int(a) for a in cfg.seeder]
        if len(set(seeds)) != len(seeds) or any(not 0 <= a < net.n for a in seeds):
            raise ValueError("explicit seeds must be distinct actors of the network")
        return seeds
    budget = resolve_budget(cfg.budget, net.n)
    if cfg.seeder == "dcd":
        return seed_dcd(net.layers[0], budget)
    return seed_nsd(net, budget)


class Cascade:
    """Precomputed arcs and coin flips for one network realisation.

    One uniform per directed layer-edge decides whether that arc's single
    activation attempt succeeds; runs sharing a ``Cascade`` are coupled.
    """

    def __init__(self, net: MultilayerNetwork, pi: float, rng):
        gen = as_stream(rng).gen
        self.n = net.n
        self.arcs = []
        for layer in net.layers:
            indptr, dst = _csr(net.n, layer.edges)
            live = gen.random(len(dst)) < pi
            self.arcs.append((indptr, dst, live))
        self.present = np.stack([np.diff(a[0]) > 0 for a in self.arcs])  # layer x actor

    def run(self, seeds, protocol: str, max_steps: int | None = None) -> DiffusionOutcome:
        n = self.n
        seeds = np.unique(np.asarray(seeds, dtype=np.int64))
        active = np.zeros(n, dtype=bool)
        active[seeds] = True
        steps = [seeds]
        frontier = seeds
        step = 0
        while len(frontier) and (max_steps is None or step < max_steps):
            step += 1
            got = np.zeros((len(self.arcs), n), dtype=bool)
            for li, (indptr, dst, live) in enumerate(self.arcs):
                pos = _gather(indptr, frontier)
                if len(pos):
                    hit = pos[live[pos]]
                    got[li, dst[hit]] = True
            got[:, active] = False
            if protocol == "OR":
                new = got.any(axis=0)
            else:
                new = np.all(got | ~self.present, axis=0) & got.any(axis=0)
            frontier = np.flatnonzero(new)
            if not len(frontier):
                break
            active[frontier] = True
            steps.append(frontier)
        final = np.flatnonzero(active)
        base = n - len(seeds)
        if base == 0:
            return DiffusionOutcome(steps, final, 0.0, True)
        return DiffusionOutcome(steps, final, (len(final) - len(seeds)) / base)


def run_micm(net: MultilayerNetwork, cfg: SpreadConfig, rng, seeds=None) -> DiffusionOutcome:
    if seeds is None:
        seeds = choose_seeds(net, cfg)
    return Cascade(net, cfg.pi, rng).run(seeds, cfg.protocol, cfg.max_steps)


@dataclass(frozen=True)
class SweepRow:
    series: str
    protocol: str
    pi: float
    budget: str
    mean: float
    std: float
    delta: float  # relative to the baseline series, NaN when undefined


def experiment_sweep(configs: Sequence[SpreadConfig], nets: dict, reps: int,
                     baseline: str | None = None, seed: int = 0) -> list[SweepRow]:
    """Mean and std of the gain for every (series, config) cell.

    ``nets`` maps a series name to a list of networks; each network runs
    ``reps`` cascades per config.  ``delta`` is ``(mean - base) / base``.
    """
    if not nets or not configs:
        raise ValueError("need at least one network series and one config")
    baseline = baseline if baseline is not None else next(iter(nets))
    root = RngStream(seed, "sweep")
    means: dict = {}
    rows = []
    for series, group in nets.items():
        for ci, cfg in enumerate(configs):
            gains = []
            for k, net in enumerate(group):
                seeds = choose_seeds(net, cfg)
                for rep in range(reps):
                    out = run_micm(net, cfg, root.child(k, ci, rep), seeds=seeds)
                    gains.append(out.gain)
            g = np.asarray(gains)
            means[(series, ci)] = float(g.mean())
            rows.append([series, ci, float(g.mean()), float(g.std(ddof=1)) if len(g) > 1 else 0.0])
    out = []
    for series, ci, mean, std in rows:
        cfg = configs[ci]
        base = means.get((baseline, ci), float("nan"))
        delta = (mean - base) / base if base and not math.isnan(base) else float("nan")
        if series == baseline:
            delta = 0.0
        out.append(SweepRow(series, cfg.protocol, cfg.pi, str(cfg.budget), mean, std, delta))
    return out


def format_sweep(rows: list[SweepRow]) -> str:
    lines = ["series\tprotocol\tpi\tbudget\tmean_gain\tstd_gain\trel_delta"]
    for r in rows:
        lines.append(f"{r.series}\t{r.protocol}\t{r.pi:g}\t{r.budget}\t{r.mean:.6f}\t{r.std:.6f}\t"
                     + ("NaN" if math.isnan(r.delta) else f"{r.delta:.6f}"))
    return "\n".join(lines) + "\n"
