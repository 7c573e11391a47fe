"""Seedable random primitives shared by every generation phase.

All randomness flows through :class:`RngStream`.  A stream is identified by a
64-bit seed and a text label; child streams are derived from the parent seed
and a label such as ``"degrees/2"`` so that each layer draws from its own
sequence regardless of the order in which layers are processed.
"""
from __future__ import annotations

import math
import zlib
from dataclasses import dataclass

import numpy as np


class RngStream:
    """Deterministic random stream keyed by ``(seed, label)``."""

    def __init__(self, seed: int, label: str = "root"):
        self.seed = int(seed) & 0xFFFFFFFFFFFFFFFF
        self.label = label
        key = tuple(zlib.crc32(part.encode()) for part in label.split("/"))
        ss = np.random.SeedSequence(entropy=self.seed, spawn_key=key)
        self.gen = np.random.Generator(np.random.PCG64(ss))

    def child(self, *parts) -> "RngStream":
        """Derive an independent stream; ``parts`` are joined into the label."""
        suffix = "/".join(str(p) for p in parts)
        return RngStream(self.seed, f"{self.label}/{suffix}")

    def __repr__(self):
        return f"RngStream(seed={self.seed}, label={self.label!r})"


def as_stream(rng) -> RngStream:
    if isinstance(rng, RngStream):
        return rng
    if rng is None:
        return RngStream(0)
    return RngStream(int(rng))


@dataclass(frozen=True)
class TruncatedPowerLaw:
    """Integer law on ``[lo, hi]`` with ``P(k)`` proportional to the mass of
    ``x**-gamma`` over the unit bucket ``[k, k+1)``."""

    gamma: float
    lo: int
    hi: int

    def __post_init__(self):
        if self.gamma <= 0:
            raise ValueError(f"gamma must be positive, got {self.gamma}")
        if self.lo < 1 or self.hi < self.lo:
            raise ValueError(f"need 1 <= lo <= hi, got lo={self.lo}, hi={self.hi}")

    def _antiderivative(self, x):
        # x**(1-g)/(1-g); the log branch keeps g == 1 total.
        g = self.gamma
        if g == 1.0:
            return np.log(x)
        return np.power(x, 1.0 - g) / (1.0 - g)

    def _mass(self, a, b):
        return self._antiderivative(b) - self._antiderivative(a)

    def support(self) -> np.ndarray:
        return np.arange(self.lo, self.hi + 1)

    def pmf_array(self) -> np.ndarray:
        """PMF over ``support()``."""
        k = self.support().astype(float)
        return self._mass(k, k + 1.0) / self._mass(float(self.lo), self.hi + 1.0)

    def survival_array(self) -> np.ndarray:
        """``P(X >= k)`` over ``support()``, in closed form."""
        k = self.support().astype(float)
        return self._mass(k, self.hi + 1.0) / self._mass(float(self.lo), self.hi + 1.0)

    def mean(self) -> float:
        return float(np.dot(self.support(), self.pmf_array()))


def tpl_pmf(dist: TruncatedPowerLaw, k: int) -> float:
    if not dist.lo <= k <= dist.hi:
        raise ValueError(f"k={k} outside support [{dist.lo}, {dist.hi}]")
    if dist.lo == dist.hi:
        return 1.0
    num = dist._mass(float(k), k + 1.0)
    den = dist._mass(float(dist.lo), dist.hi + 1.0)
    return float(num / den)


def tpl_sample(dist: TruncatedPowerLaw, count: int, rng) -> np.ndarray:
    """Inverse-transform sampling on the continuous truncated law, floored."""
    rng = as_stream(rng)
    if count <= 0:
        return np.zeros(0, dtype=np.int64)
    u = rng.gen.random(count)
    lo, top = float(dist.lo), dist.hi + 1.0
    g = dist.gamma
    if g == 1.0:
        x = lo * np.exp(u * math.log(top / lo))
    else:
        a, b = lo ** (1.0 - g), top ** (1.0 - g)
        x = np.power(a - u * (a - b), 1.0 / (1.0 - g))
    k = np.floor(x).astype(np.int64)
    return np.clip(k, dist.lo, dist.hi)


def stochastic_round(x, rng):
    """Round ``x`` down or up so that the expectation equals ``x``.

    Accepts a scalar or an array; returns the same shape.
    """
    rng = as_stream(rng)
    arr = np.asarray(x, dtype=float)
    if np.any(arr < 0):
        raise ValueError("stochastic_round expects non-negative input")
    base = np.floor(arr)
    frac = arr - base
    up = rng.gen.random(arr.shape) < frac
    out = (base + up).astype(np.int64)
    if out.ndim == 0:
        return int(out)
    return out


def sample_unit_ball(d: int, rng, count: int | None = None) -> np.ndarray:
    """Uniform point(s) in the closed unit ball of R^d.

    Direction from a normalised Gaussian, radius ``U**(1/d)``.
    """
    if d < 1:
        raise ValueError("dimension must be >= 1")
    rng = as_stream(rng)
    m = 1 if count is None else count
    g = rng.gen.standard_normal((m, d))
    norms = np.linalg.norm(g, axis=1)
    norms[norms == 0] = 1.0
    radius = rng.gen.random(m) ** (1.0 / d)
    pts = g / norms[:, None] * radius[:, None]
    return pts[0] if count is None else pts
