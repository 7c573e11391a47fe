"""Active-actor selection and label-correlated degree sequences."""
from __future__ import annotations

import functools
from dataclasses import dataclass
from importlib import resources
from pathlib import Path

import numpy as np

from .measures import count_inversions
from .sampling import RngStream, TruncatedPowerLaw, as_stream, tpl_sample

N_CANDIDATES = 20
DEFAULT_GRID = np.concatenate(([0.0], np.geomspace(1e-3, 20.0, 120)))


def select_active(n: int, q: float, rng) -> np.ndarray:
    if not 0 < q <= 1:
        raise ValueError(f"q must lie in (0, 1], got {q}")
    if q == 1:
        return np.ones(n, dtype=bool)
    return as_stream(rng).gen.random(n) < q


def generate_degrees(n_active: int, gamma: float, delta: int, Delta: int, rng) -> np.ndarray:
    """I.i.d. truncated power-law degrees, sorted non-increasing, even sum."""
    if n_active == 0:
        return np.zeros(0, dtype=np.int64)
    deg = tpl_sample(TruncatedPowerLaw(gamma, delta, Delta), n_active, rng)
    return fix_parity(deg)


def fix_parity(degrees) -> np.ndarray:
    """Sort non-increasing; if the sum is odd, decrement the largest entry."""
    deg = np.sort(np.asarray(degrees, dtype=np.int64))[::-1].copy()
    if len(deg) and deg.sum() % 2:
        deg[0] -= 1
        deg = np.sort(deg)[::-1].copy()
    return deg


@dataclass(frozen=True)
class SigmaTable:
    """Expected label/rank tau-b as a function of the noise scale sigma."""

    sigma: np.ndarray
    tau: np.ndarray
    n_cal: int

    def save(self, path) -> None:
        with open(path, "w") as fh:
            fh.write(f"# n_cal={self.n_cal}\n")
            for s, t in zip(self.sigma.tolist(), self.tau.tolist()):
                fh.write(f"{s!r}\t{t!r}\n")

    @classmethod
    def load(cls, path) -> "SigmaTable":
        n_cal = 0
        rows = []
        for line in Path(path).read_text().splitlines():
            if line.startswith("#"):
                if "n_cal=" in line:
                    n_cal = int(line.split("n_cal=")[1].split()[0])
                continue
            if line.strip():
                s, t = line.split("\t")
                rows.append((float(s), float(t)))
        arr = np.array(rows)
        return cls(arr[:, 0], arr[:, 1], n_cal)


@functools.lru_cache(maxsize=1)
def default_sigma_table() -> SigmaTable:
    ref = resources.files("mlnbench") / "data" / "sigma_table.tsv"
    with resources.as_file(ref) as path:
        return SigmaTable.load(path)


def label_rank_tau(ranks: np.ndarray) -> float:
    """tau-b between labels (ascending) and a tie-free rank vector."""
    m = len(ranks)
    if m < 2:
        return 1.0
    inv = count_inversions(ranks)
    return 1.0 - 4.0 * inv / (m * (m - 1))


def _noisy_ranks(labels: np.ndarray, n: int, sigma: float, gen) -> np.ndarray:
    """Rank (0 = smallest) of X_a = a/n + sigma * Z for each active actor."""
    x = labels / n
    if sigma > 0:
        x = x + sigma * gen.standard_normal(len(labels))
    order = np.argsort(x, kind="stable")  # ties go to the lower label
    ranks = np.empty(len(labels), dtype=np.int64)
    ranks[order] = np.arange(len(labels))
    return ranks


def build_sigma_table(n_cal: int, grid=DEFAULT_GRID, reps: int = 1, rng=None) -> SigmaTable:
    grid = np.asarray(grid, dtype=float)
    if len(grid) == 0 or np.any(np.diff(grid) <= 0):
        raise ValueError("grid must be non-empty and strictly ascending")
    rng = as_stream(rng if rng is not None else RngStream(0, "sigma-table"))
    labels = np.arange(1, n_cal + 1, dtype=float)
    taus = []
    for sigma in grid:
        vals = [label_rank_tau(_noisy_ranks(labels, n_cal, sigma, rng.gen)) for _ in range(reps)]
        taus.append(float(np.mean(vals)))
    return SigmaTable(grid, np.array(taus), n_cal)


def calibrate_sigma(target_tau: float, table: SigmaTable | None = None) -> float:
    """Invert the table by linear interpolation; tau=1 gives sigma=0."""
    if not 0 <= target_tau <= 1:
        raise ValueError(f"target tau must lie in [0, 1], got {target_tau}")
    table = table or default_sigma_table()
    if target_tau >= 1:
        return 0.0
    # running minimum removes sampling wiggles so the curve is invertible
    tau = np.minimum.accumulate(table.tau)
    if target_tau <= tau[-1]:
        return float(table.sigma[-1])
    # np.interp needs increasing x: walk the curve backwards
    return float(np.interp(target_tau, tau[::-1], table.sigma[::-1]))


@dataclass(frozen=True)
class DegreePlan:
    active: np.ndarray
    degree: np.ndarray
    layer: int = 0
    ordering_tau: float = float("nan")
    below_min: bool = False


def assign_degrees(active: np.ndarray, degrees, tau: float, table: SigmaTable | None = None,
                   rng=None, candidates: int = N_CANDIDATES, layer: int = 0,
                   delta: int | None = None) -> DegreePlan:
    """Give the sorted degree list to active actors so that label order and
    degree order have Kendall correlation close to ``tau``.

    ``ordering_tau`` records the tau-b between labels and the kept ordering
    (rank 1 holds the largest degree), after the sign flip for negative tau.
    """
    active = np.asarray(active, dtype=bool)
    degrees = np.sort(np.asarray(degrees, dtype=np.int64))[::-1]
    labels = np.flatnonzero(active) + 1.0
    N = len(labels)
    if len(degrees) != N:
        raise ValueError(f"{len(degrees)} degrees for {N} active actors")
    rng = as_stream(rng)
    n = len(active)
    sigma = calibrate_sigma(abs(tau), table)
    tries = 1 if sigma == 0 else max(1, candidates)
    best = None
    for _ in range(tries):
        ranks = _noisy_ranks(labels, n, sigma, rng.gen)
        t = label_rank_tau(ranks)
        if best is None or abs(t - abs(tau)) < abs(best[0] - abs(tau)):
            best = (t, ranks)
    achieved, ranks = best
    if tau < 0:
        ranks = N - 1 - ranks
        achieved = -achieved
    deg = np.zeros(n, dtype=np.int64)
    deg[active] = degrees[ranks]
    below = bool(delta is not None and N and degrees.min() < delta)
    return DegreePlan(active, deg, layer, achieved, below)
