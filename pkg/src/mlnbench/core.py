"""Domain types, configuration validation and file I/O.

Actors are identified by 1-based ids in every file.  In memory, actor ``a``
lives at array index ``a - 1``; edges are stored as an ``(m, 2)`` int64 array
of 0-based indices with ``u < v``, sorted lexicographically.
"""
from __future__ import annotations

import math
import os
import re
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np


class NetworkFormatError(ValueError):
    """Malformed or non-simple input file."""

    def __init__(self, path, line, message):
        self.path = str(path)
        self.line = line
        super().__init__(f"{path}:{line}: {message}")


class ConfigError(ValueError):
    pass


class GenerationInfeasible(RuntimeError):
    """Raised when sampling or rewiring cannot satisfy the requested parameters."""


# --------------------------------------------------------------------------
# networks


def canonical_edges(edges, n: int | None = None) -> np.ndarray:
    """Return edges as a sorted ``(m, 2)`` array with ``u < v``."""
    arr = np.asarray(edges, dtype=np.int64).reshape(-1, 2)
    if arr.size == 0:
        return np.zeros((0, 2), dtype=np.int64)
    lo = np.minimum(arr[:, 0], arr[:, 1])
    hi = np.maximum(arr[:, 0], arr[:, 1])
    order = np.lexsort((hi, lo))
    return np.ascontiguousarray(np.stack([lo[order], hi[order]], axis=1))


def edge_keys(edges: np.ndarray, n: int) -> np.ndarray:
    """Scalar key ``u * n + v`` for canonical edges."""
    if len(edges) == 0:
        return np.zeros(0, dtype=np.int64)
    return edges[:, 0] * np.int64(n) + edges[:, 1]


def _frozen(arr):
    arr = np.asarray(arr)
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True)
class LayerGraph:
    """One layer: simple edge set over actors plus optional ground-truth partition.

    ``partition[a]`` is the community of actor index ``a``; 0 marks inactive.
    When no partition is known, activity falls back to positive degree.
    """

    n: int
    edges: np.ndarray
    partition: np.ndarray | None = None
    active: np.ndarray | None = None

    def __post_init__(self):
        edges = canonical_edges(self.edges)
        object.__setattr__(self, "edges", _frozen(edges))
        if self.partition is not None:
            part = np.asarray(self.partition, dtype=np.int64)
            if part.shape != (self.n,):
                raise ValueError(f"partition must have length n={self.n}")
            object.__setattr__(self, "partition", _frozen(part))
        if self.active is None:
            if self.partition is not None:
                act = self.partition != 0
            else:
                act = self.degrees() > 0
        else:
            act = np.asarray(self.active, dtype=bool)
        object.__setattr__(self, "active", _frozen(act))

    def degrees(self) -> np.ndarray:
        deg = np.zeros(self.n, dtype=np.int64)
        if len(self.edges):
            np.add.at(deg, self.edges[:, 0], 1)
            np.add.at(deg, self.edges[:, 1], 1)
        return deg

    @property
    def m(self) -> int:
        return len(self.edges)

    def keys(self) -> np.ndarray:
        return edge_keys(self.edges, self.n)

    def is_simple(self) -> bool:
        if len(self.edges) == 0:
            return True
        if np.any(self.edges[:, 0] == self.edges[:, 1]):
            return False
        k = self.keys()
        return len(np.unique(k)) == len(k)

    def adjacency(self) -> list[list[int]]:
        adj: list[list[int]] = [[] for _ in range(self.n)]
        for u, v in self.edges.tolist():
            adj[u].append(v)
            adj[v].append(u)
        return adj

    def noise(self) -> float:
        """Fraction of edges joining two different communities."""
        if self.partition is None or len(self.edges) == 0:
            return float("nan")
        p = self.partition
        return float(np.mean(p[self.edges[:, 0]] != p[self.edges[:, 1]]))


@dataclass(frozen=True)
class MultilayerNetwork:
    n: int
    layers: tuple

    def __post_init__(self):
        if self.n < 1:
            raise ValueError("n must be positive")
        layers = tuple(self.layers)
        if not layers:
            raise ValueError("need at least one layer")
        for layer in layers:
            if layer.n != self.n:
                raise ValueError("layer actor count differs from network n")
        object.__setattr__(self, "layers", layers)

    @property
    def ell(self) -> int:
        return len(self.layers)

    def has_partitions(self) -> bool:
        return all(layer.partition is not None for layer in self.layers)

    def relabel(self, order: np.ndarray) -> "MultilayerNetwork":
        """Apply ``new_index = order_position``: actor ``order[k]`` becomes index ``k``."""
        order = np.asarray(order, dtype=np.int64)
        inverse = np.empty(self.n, dtype=np.int64)
        inverse[order] = np.arange(self.n)
        layers = []
        for layer in self.layers:
            edges = inverse[layer.edges] if len(layer.edges) else layer.edges
            part = None if layer.partition is None else layer.partition[order]
            layers.append(LayerGraph(self.n, edges, part, layer.active[order]))
        return MultilayerNetwork(self.n, tuple(layers))


# --------------------------------------------------------------------------
# configuration

LAYER_KEYS = ("q", "tau", "r", "gamma", "delta", "Delta", "beta", "s", "S", "xi")
INT_LAYER_KEYS = {"delta", "Delta", "s", "S"}


@dataclass
class LayerParams:
    q: float = 1.0
    tau: float = 0.0
    r: float = 1.0
    gamma: float = 2.5
    delta: int = 5
    Delta: int = 50
    beta: float = 1.5
    s: int = 8
    S: int = 32
    xi: float = 0.2


@dataclass
class GeneratorConfig:
    n: int
    ell: int
    layers: list
    R: np.ndarray | None = None
    d: int = 2
    t: int = 100
    eps: float = 0.05
    max_sampling_iters: int = 1000
    seed: int = 0
    degree_sequences: list = field(default_factory=list)
    community_sizes: list = field(default_factory=list)

    def __post_init__(self):
        if self.R is None:
            self.R = np.eye(self.ell)
        self.R = np.asarray(self.R, dtype=float)
        if not self.degree_sequences:
            self.degree_sequences = [None] * len(self.layers)
        if not self.community_sizes:
            self.community_sizes = [None] * len(self.layers)

    @classmethod
    def uniform(cls, n: int, ell: int, R=None, **kwargs) -> "GeneratorConfig":
        """Config with identical layers; per-layer keys in ``kwargs`` may be
        scalars (shared) or sequences of length ``ell``."""
        glob = {k: kwargs.pop(k) for k in ("d", "t", "eps", "max_sampling_iters", "seed")
                if k in kwargs}
        layers = []
        for i in range(ell):
            vals = {}
            for k, v in kwargs.items():
                if k not in LAYER_KEYS:
                    raise TypeError(f"unknown parameter {k!r}")
                vals[k] = v[i] if isinstance(v, (list, tuple, np.ndarray)) else v
            layers.append(LayerParams(**vals))
        return cls(n=n, ell=ell, layers=layers, R=R, **glob)

    def layer_column(self, key: str) -> list:
        return [getattr(p, key) for p in self.layers]


@dataclass(frozen=True)
class Violation:
    field: str
    message: str

    def __str__(self):
        return f"{self.field}: {self.message}"


def _is_num(x) -> bool:
    try:
        return not isinstance(x, bool) and math.isfinite(float(x))
    except (TypeError, ValueError):
        return False


def _is_int(x) -> bool:
    return _is_num(x) and float(x) == int(float(x))


def validate_config(cfg) -> list[Violation]:
    """Check every parameter against its documented range.

    Never raises; malformed fields are reported as violations.
    """
    out: list[Violation] = []

    def bad(fld, msg):
        out.append(Violation(fld, msg))

    try:
        n = getattr(cfg, "n", None)
        ell = getattr(cfg, "ell", None)
        n_ok = _is_int(n) and int(n) >= 1
        if not n_ok:
            bad("n", "must be a positive integer")
        if not (_is_int(ell) and int(ell) >= 1):
            bad("ell", "must be a positive integer")
            ell = None
        else:
            ell = int(ell)
        for name, lo in (("d", 1), ("t", 1), ("max_sampling_iters", 1)):
            v = getattr(cfg, name, None)
            if not (_is_int(v) and int(v) >= lo):
                bad(name, f"must be an integer >= {lo}")
        eps = getattr(cfg, "eps", None)
        if not (_is_num(eps) and 0 < float(eps) <= 1):
            bad("eps", "batch fraction must lie in (0, 1]")
        seed = getattr(cfg, "seed", None)
        if not (_is_int(seed) and -(2**63) <= int(seed) < 2**64):
            bad("seed", "must be a 64-bit integer")

        out.extend(_validate_R(getattr(cfg, "R", None), ell))

        layers = getattr(cfg, "layers", None)
        if not isinstance(layers, (list, tuple)):
            bad("layers", "missing per-layer parameters")
            layers = []
        elif ell is not None and len(layers) != ell:
            bad("layers", f"expected {ell} layer records, got {len(layers)}")
        deg_seqs = getattr(cfg, "degree_sequences", None) or []
        size_seqs = getattr(cfg, "community_sizes", None) or []
        for i, p in enumerate(layers, start=1):
            skip = set()
            if i <= len(deg_seqs) and deg_seqs[i - 1] is not None:
                skip |= DEGREE_KEYS
            if i <= len(size_seqs) and size_seqs[i - 1] is not None:
                skip |= SIZE_KEYS
            out.extend(_validate_layer(p, i, int(n) if n_ok else None, skip))

        for name in ("degree_sequences", "community_sizes"):
            seqs = getattr(cfg, name, None) or []
            for i, seq in enumerate(seqs, start=1):
                if seq is None:
                    continue
                out.extend(_validate_injected(name, seq, i, int(n) if n_ok else None))
    except Exception as exc:  # validate_config must stay total
        bad("config", f"unreadable configuration ({type(exc).__name__}: {exc})")
    return out


def _validate_R(R, ell) -> list[Violation]:
    out = []
    try:
        arr = np.asarray(R, dtype=float)
    except (TypeError, ValueError):
        return [Violation("R", "not a numeric matrix")]
    if ell is None:
        return out
    if arr.shape != (ell, ell):
        return [Violation("R", f"must be {ell}x{ell}, got shape {arr.shape}")]
    defined = ~np.isnan(arr)
    if np.any(np.isinf(arr)) or np.any((arr[defined] < 0) | (arr[defined] > 1)):
        out.append(Violation("R", "entries must lie in [0, 1]"))
    same = (arr == arr.T) | (np.isnan(arr) & np.isnan(arr.T))
    if not np.all(same):
        out.append(Violation("R", "R not symmetric"))
    diag = np.diag(arr)
    if np.any(diag[~np.isnan(diag)] != 1.0):
        out.append(Violation("R", "diagonal entries must equal 1"))
    return out


# parameters an injected sequence replaces, so their ranges are not checked
DEGREE_KEYS = frozenset({"q", "tau", "gamma", "delta", "Delta"})
SIZE_KEYS = frozenset({"beta", "s", "S"})


def _validate_layer(p, i, n, skip=frozenset()) -> list[Violation]:
    out = []

    def get(key):
        return getattr(p, key, None)

    def bad(key, msg):
        out.append(Violation(f"layer {i}.{key}", msg))

    ranges = {
        "q": (lambda x: 0 < x <= 1, "must lie in (0, 1]"),
        "tau": (lambda x: -1 <= x <= 1, "must lie in [-1, 1]"),
        "r": (lambda x: 0 <= x <= 1, "must lie in [0, 1]"),
        "gamma": (lambda x: 2 < x < 3, "must lie in (2, 3)"),
        "beta": (lambda x: 1 < x < 2, "must lie in (1, 2)"),
        "xi": (lambda x: 0 < x < 1, "must lie in (0, 1)"),
    }
    for key, (ok, msg) in ranges.items():
        if key in skip:
            continue
        v = get(key)
        if not _is_num(v):
            bad(key, "must be a finite number")
        elif not ok(float(v)):
            bad(key, msg)
    ints = {}
    for key in ("delta", "Delta", "s", "S"):
        if key in skip:
            continue
        v = get(key)
        if not (_is_int(v) and int(v) >= 1):
            bad(key, "must be a positive integer")
        else:
            ints[key] = int(v)
    if "delta" in ints and "Delta" in ints:
        if ints["Delta"] < ints["delta"]:
            bad("Delta", "degree bound: need delta <= Delta")
        if n is not None and ints["Delta"] >= n:
            bad("Delta", "degree bound: need Delta < n")
    if "s" in ints and "delta" in ints and ints["s"] <= ints["delta"]:
        bad("s", "community size bound: need delta < s")
    if "s" in ints and "S" in ints and ints["S"] < ints["s"]:
        bad("S", "community size bound: need s <= S")
    if "S" in ints and n is not None and ints["S"] > n:
        bad("S", "community size bound: need S <= n")
    return out


def _validate_injected(name, seq, i, n) -> list[Violation]:
    fld = f"{name}[{i}]"
    try:
        arr = np.asarray(seq, dtype=float).ravel()
    except (TypeError, ValueError):
        return [Violation(fld, "not a numeric sequence")]
    if not np.all(np.isfinite(arr)) or np.any(arr != np.round(arr)):
        return [Violation(fld, "entries must be integers")]
    out = []
    if name == "degree_sequences":
        if n is not None and len(arr) != n:
            out.append(Violation(fld, f"needs one degree per actor ({n}), got {len(arr)}"))
        if np.any(arr < 0):
            out.append(Violation(fld, "degrees must be non-negative"))
        if int(arr.sum()) % 2:
            out.append(Violation(fld, "degree sum must be even"))
        if n is not None and len(arr) and arr.max() >= n:
            out.append(Violation(fld, "degrees must be < n"))
    else:
        if np.any(arr < 1):
            out.append(Violation(fld, "community sizes must be positive"))
    return out


# --------------------------------------------------------------------------
# config file


def _fmt(x) -> str:
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    x = float(x)
    if math.isnan(x):
        return "NaN"
    return repr(x) if x != int(x) else f"{x:.1f}"


def write_config(cfg: GeneratorConfig, path, injection_files: dict | None = None) -> Path:
    """Write the flat ``key = value`` config format.

    ``injection_files`` optionally maps ``"degree_files"``/``"comsize_files"`` to
    per-layer file names (``"-"`` for none).
    """
    path = Path(path)
    lines = [f"n = {cfg.n}", f"ell = {cfg.ell}", f"d = {cfg.d}", f"t = {cfg.t}",
             f"eps = {_fmt(cfg.eps)}", f"max_sampling_iters = {cfg.max_sampling_iters}",
             f"seed = {cfg.seed}"]
    for key in LAYER_KEYS:
        lines.append(f"{key} = " + ", ".join(_fmt(v) for v in cfg.layer_column(key)))
    lines.append("R =")
    for row in np.asarray(cfg.R):
        lines.append(" ".join(_fmt(v) for v in row))
    for key, names in (injection_files or {}).items():
        lines.append(f"{key} = " + ", ".join(names))
    path.write_text("\n".join(lines) + "\n")
    return path


_KV = re.compile(r"^\s*([A-Za-z_]+)\s*=\s*(.*?)\s*$")


def read_config(path) -> GeneratorConfig:
    """Parse a config file; injected sequences are resolved relative to it."""
    path = Path(path)
    raw: dict[str, str] = {}
    R_rows: list[list[float]] = []
    in_R = False
    for lineno, line in enumerate(path.read_text().splitlines(), start=1):
        stripped = line.split("#", 1)[0].strip()
        if not stripped:
            continue
        m = _KV.match(stripped)
        if m:
            key, val = m.group(1), m.group(2)
            in_R = key == "R"
            if in_R:
                if val:
                    R_rows.append([float(x) for x in val.split()])
                continue
            raw[key] = val
        elif in_R:
            try:
                R_rows.append([float(x) for x in stripped.split()])
            except ValueError:
                raise ConfigError(f"{path}:{lineno}: bad R row {stripped!r}") from None
        else:
            raise ConfigError(f"{path}:{lineno}: expected 'key = value', got {stripped!r}")

    def num(key, conv, default=None):
        if key not in raw:
            if default is None:
                raise ConfigError(f"{path}: missing key {key!r}")
            return default
        try:
            return conv(float(raw[key])) if conv is int else conv(raw[key])
        except ValueError:
            raise ConfigError(f"{path}: bad value for {key!r}: {raw[key]!r}") from None

    n = num("n", int)
    ell = num("ell", int)
    cols = {}
    for key in LAYER_KEYS:
        if key not in raw:
            continue
        parts = [x.strip() for x in raw[key].split(",")]
        if len(parts) == 1 and ell > 1:
            parts = parts * ell
        try:
            vals = [float(x) for x in parts]
        except ValueError:
            raise ConfigError(f"{path}: bad list for {key!r}") from None
        if len(vals) != ell:
            raise ConfigError(f"{path}: {key!r} needs {ell} values, got {len(vals)}")
        cols[key] = [int(v) if key in INT_LAYER_KEYS and v == int(v) else v for v in vals]
    layers = [LayerParams(**{k: cols[k][i] for k in cols}) for i in range(ell)]
    R = np.array(R_rows, dtype=float) if R_rows else np.eye(ell)

    base = path.parent
    degree_sequences = [None] * ell
    community_sizes = [None] * ell
    for key, target, reader in (("degree_files", degree_sequences, _read_degree_file),
                                ("comsize_files", community_sizes, _read_size_file)):
        if key in raw:
            names = [x.strip() for x in raw[key].split(",")]
            if len(names) != ell:
                raise ConfigError(f"{path}: {key!r} needs {ell} entries")
            for i, name in enumerate(names):
                if name and name != "-":
                    target[i] = reader(base / name, n)
    return GeneratorConfig(
        n=n, ell=ell, layers=layers, R=R,
        d=num("d", int, 2), t=num("t", int, 100), eps=num("eps", float, 0.05),
        max_sampling_iters=num("max_sampling_iters", int, 1000),
        seed=num("seed", int, 0),
        degree_sequences=degree_sequences, community_sizes=community_sizes,
    )


def _read_degree_file(path, n) -> np.ndarray:
    deg = np.zeros(n, dtype=np.int64)
    for lineno, a, k in _read_pairs(path):
        if not 1 <= a <= n:
            raise NetworkFormatError(path, lineno, f"actor {a} outside [1, {n}]")
        deg[a - 1] = k
    return deg


def _read_size_file(path, n=None) -> list[int]:
    sizes = []
    for lineno, line in enumerate(Path(path).read_text().splitlines(), start=1):
        if line.strip():
            try:
                sizes.append(int(line.strip()))
            except ValueError:
                raise NetworkFormatError(path, lineno, f"bad size {line!r}") from None
    return sizes


def write_degree_file(path, degrees) -> None:
    with open(path, "w") as fh:
        for a, k in enumerate(np.asarray(degrees).tolist(), start=1):
            fh.write(f"{a}\t{k}\n")


def write_size_file(path, sizes) -> None:
    with open(path, "w") as fh:
        for c in sizes:
            fh.write(f"{int(c)}\n")


# --------------------------------------------------------------------------
# network files


def _read_pairs(path):
    with open(path) as fh:
        for lineno, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            parts = line.split()
            if len(parts) != 2:
                raise NetworkFormatError(path, lineno, f"expected two fields, got {line.rstrip()!r}")
            try:
                a, b = int(parts[0]), int(parts[1])
            except ValueError:
                raise NetworkFormatError(path, lineno, f"non-integer field in {line.rstrip()!r}") from None
            yield lineno, a, b


def _read_edge_file(path):
    edges = []
    seen = {}
    for lineno, a, b in _read_pairs(path):
        if a < 1 or b < 1:
            raise NetworkFormatError(path, lineno, "actor ids must be positive")
        if a == b:
            raise NetworkFormatError(path, lineno, f"self-loop on actor {a}")
        key = (min(a, b), max(a, b))
        if key in seen:
            raise NetworkFormatError(path, lineno, f"duplicate edge {key} (first at line {seen[key]})")
        seen[key] = lineno
        edges.append(key)
    return edges


def read_network(paths: Sequence, n: int | None = None,
                 community_paths: Sequence | None = None) -> MultilayerNetwork:
    """Read one edge file per layer (1-based integer ids).

    ``n`` defaults to the largest id seen in any edge or community file.
    Without community files, actors of degree 0 in a layer are inactive there.
    """
    raw = [_read_edge_file(p) for p in paths]
    parts_raw = None
    max_id = max((max(e) for edges in raw for e in edges), default=0)
    if community_paths is not None:
        if len(community_paths) != len(paths):
            raise ValueError("need one community file per layer")
        parts_raw = []
        for p in community_paths:
            rows = list(_read_pairs(p))
            parts_raw.append((p, rows))
            max_id = max([max_id] + [a for _, a, _ in rows])
    if n is None:
        n = max_id
    elif max_id > n:
        raise ValueError(f"actor id {max_id} exceeds n={n}")
    if n < 1:
        raise ValueError("network has no actors")
    layers = []
    for idx, edges in enumerate(raw):
        arr = np.array(edges, dtype=np.int64).reshape(-1, 2) - 1
        part = None
        if parts_raw is not None:
            p, rows = parts_raw[idx]
            part = np.zeros(n, dtype=np.int64)
            for lineno, a, c in rows:
                if c < 0:
                    raise NetworkFormatError(p, lineno, "community ids must be >= 0")
                part[a - 1] = c
            deg = np.zeros(n, dtype=np.int64)
            np.add.at(deg, arr.ravel(), 1)
            inactive_with_edges = np.flatnonzero((part == 0) & (deg > 0))
            if len(inactive_with_edges):
                raise NetworkFormatError(p, 0, f"actor {inactive_with_edges[0] + 1} has edges but community 0")
        layers.append(LayerGraph(n, arr, part))
    return MultilayerNetwork(n, tuple(layers))


def read_labelled_network(paths: Sequence) -> tuple[MultilayerNetwork, list[str]]:
    """Read edge lists with arbitrary string labels; ids assigned by first appearance.

    Returns the network and ``labels`` where ``labels[a - 1]`` is actor ``a``'s
    original label.
    """
    index: dict[str, int] = {}
    raw = []
    for p in paths:
        edges = []
        seen = set()
        with open(p) as fh:
            for lineno, line in enumerate(fh, start=1):
                parts = line.split()
                if not parts:
                    continue
                if len(parts) < 2:
                    raise NetworkFormatError(p, lineno, "expected two fields")
                a, b = (index.setdefault(x, len(index)) for x in parts[:2])
                if a == b:
                    raise NetworkFormatError(p, lineno, f"self-loop on {parts[0]}")
                key = (min(a, b), max(a, b))
                if key in seen:
                    raise NetworkFormatError(p, lineno, f"duplicate edge {parts[0]} {parts[1]}")
                seen.add(key)
                edges.append(key)
        raw.append(edges)
    n = len(index)
    labels = [None] * n
    for lab, i in index.items():
        labels[i] = lab
    layers = [LayerGraph(n, np.array(e, dtype=np.int64).reshape(-1, 2)) for e in raw]
    return MultilayerNetwork(n, tuple(layers)), labels


def _layer_files(directory: Path, stem: str) -> list[Path]:
    found = []
    for p in directory.glob(f"{stem}_*.tsv"):
        m = re.fullmatch(rf"{stem}_(\d+)\.tsv", p.name)
        if m:
            found.append((int(m.group(1)), p))
    return [p for _, p in sorted(found)]


def read_network_dir(directory, n: int | None = None) -> MultilayerNetwork:
    """Read a directory written by :func:`write_network`."""
    directory = Path(directory)
    edge_files = _layer_files(directory, "layer")
    if not edge_files:
        raise FileNotFoundError(f"no layer_<i>.tsv files in {directory}")
    comm_files = _layer_files(directory, "communities")
    if n is None:
        summary = directory / "summary.txt"
        if summary.exists():
            m = re.search(r"^n\s+(\d+)", summary.read_text(), re.M)
            if m:
                n = int(m.group(1))
    if len(comm_files) == len(edge_files):
        return read_network(edge_files, n=n, community_paths=comm_files)
    return read_network(edge_files, n=n)


def format_matrix(mat) -> list[str]:
    return [" ".join("NaN" if math.isnan(x) else f"{x:.6f}" for x in row)
            for row in np.asarray(mat, dtype=float)]


def write_network(net: MultilayerNetwork, directory, report=None,
                  notes: Sequence[str] = ()) -> list[Path]:
    """Write edge, community and summary files; returns the paths written."""
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    written = []
    for i, layer in enumerate(net.layers, start=1):
        p = directory / f"layer_{i}.tsv"
        with open(p, "w") as fh:
            fh.writelines(f"{u}\t{v}\n" for u, v in (layer.edges + 1).tolist())
        written.append(p)
        part = layer.partition
        if part is None and not layer.active.any():
            part = np.zeros(net.n, dtype=np.int64)
        if part is not None:
            p = directory / f"communities_{i}.tsv"
            with open(p, "w") as fh:
                fh.writelines(f"{a}\t{c}\n" for a, c in enumerate(part.tolist(), start=1))
            written.append(p)
    if report is None:
        from .measures import correlation_report
        report = correlation_report(net)
    lines = [f"n\t{net.n}", f"ell\t{net.ell}"]
    lines += [f"edges_{i}\t{layer.m}" for i, layer in enumerate(net.layers, start=1)]
    if not net.has_partitions():
        lines.append("partitions\tabsent")
    for title, mat in (("degree_tau", report.degree_tau),
                       ("partition_ami", report.partition_ami),
                       ("edge_corr", report.edge_corr)):
        lines.append(f"[{title}]")
        lines.extend(format_matrix(mat))
    for note in notes:
        lines.append(f"note\t{note}")
    p = directory / "summary.txt"
    p.write_text("\n".join(lines) + "\n")
    written.append(p)
    return written


def ensure_dir(path) -> Path:
    path = Path(path)
    os.makedirs(path, exist_ok=True)
    return path
