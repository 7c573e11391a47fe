"""Inter-layer correlation measures: degree tau-b, partition AMI, edge correlation."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import gammaln

from .core import MultilayerNetwork, edge_keys

NAN = float("nan")


def _tied_pairs(sorted_vals: np.ndarray) -> int:
    """Number of equal-valued pairs in a sorted array."""
    if len(sorted_vals) < 2:
        return 0
    change = np.flatnonzero(np.diff(sorted_vals) != 0)
    bounds = np.concatenate(([0], change + 1, [len(sorted_vals)]))
    runs = np.diff(bounds).astype(np.int64)
    return int(np.sum(runs * (runs - 1) // 2))


def count_inversions(values) -> int:
    """Count pairs ``i < j`` with ``values[i] > values[j]``.

    Radix-style divide and conquer on the bits of the dense ranks, most
    significant first.  At each level the array is grouped by the higher bits
    (order inside a group is positional), every 0-bit element counts the 1-bit
    elements before it in its group, and each group is then stably partitioned
    by the current bit.  All steps are cumulative sums, so the cost is
    ``O(m log K)`` with no comparison sorts after the initial ranking.
    """
    vals = np.asarray(values)
    m = len(vals)
    if m < 2:
        return 0
    if np.issubdtype(vals.dtype, np.integer) and vals.min() == 0 and vals.max() == m - 1 \
            and np.all(np.bincount(vals, minlength=m) == 1):
        cur = vals.astype(np.int64)
    else:
        cur = np.unique(vals, return_inverse=True)[1].astype(np.int64).ravel()
    nbits = int(cur.max()).bit_length()
    total = 0
    pos = np.arange(m, dtype=np.int64)
    flag = np.empty(m, dtype=bool)
    flag[0] = True
    nxt = np.empty_like(cur)
    for b in range(nbits - 1, -1, -1):
        grp = cur >> (b + 1)
        bit = (cur >> b) & 1
        np.not_equal(grp[1:], grp[:-1], out=flag[1:])
        # start index of each element's group
        gstart = np.maximum.accumulate(np.where(flag, pos, 0))
        ones_incl = np.cumsum(bit)
        ones_excl = ones_incl - bit
        ones_before = ones_excl - ones_excl[gstart]
        zero = bit == 0
        total += int(ones_before[zero].sum())
        # stable partition of each group by the current bit
        zeros_before = (pos - gstart) - ones_before
        starts = np.flatnonzero(flag)
        ends = np.append(starts[1:], m)
        zeros_in_group = (ends - starts) - (ones_incl[ends - 1] - ones_excl[starts])
        zig = np.repeat(zeros_in_group, ends - starts)
        newpos = gstart + np.where(zero, zeros_before, zig + ones_before)
        nxt[newpos] = cur
        cur, nxt = nxt, cur
    return total


def kendall_tau_b(x, y) -> float:
    """Kendall tau-b; NaN when either input is constant or shorter than 2."""
    x = np.asarray(x)
    y = np.asarray(y)
    if x.shape != y.shape:
        raise ValueError("x and y must have the same length")
    m = len(x)
    if m < 2:
        return NAN
    order = np.lexsort((y, x))
    xs, ys = x[order], y[order]
    n0 = m * (m - 1) // 2
    n1 = _tied_pairs(xs)
    n2 = _tied_pairs(np.sort(ys))
    if n1 == n0 or n2 == n0:
        return NAN
    # joint ties: consecutive equal (x, y) after the lexsort
    same = np.concatenate(([False], (np.diff(xs) == 0) & (np.diff(ys) == 0)))
    if same.any():
        starts = np.flatnonzero(~same)
        runs = np.diff(np.concatenate((starts, [m]))).astype(np.int64)
        n3 = int(np.sum(runs * (runs - 1) // 2))
    else:
        n3 = 0
    swaps = count_inversions(ys)
    num = n0 - n1 - n2 + n3 - 2 * swaps
    return float(num / math.sqrt((n0 - n1) * (n0 - n2)))


# --------------------------------------------------------------------------
# AMI


def _contingency(a, b):
    _, ai = np.unique(a, return_inverse=True)
    _, bi = np.unique(b, return_inverse=True)
    ai = ai.ravel()
    bi = bi.ravel()
    ka, kb = ai.max() + 1, bi.max() + 1
    flat = np.bincount(ai * kb + bi, minlength=ka * kb)
    return flat.reshape(ka, kb)


def _entropy(counts, N):
    p = counts[counts > 0] / N
    return float(-np.sum(p * np.log(p)))


def expected_mutual_info(row_sums, col_sums, N) -> float:
    """E[MI] under the hypergeometric model with fixed margins (natural log)."""
    row_sums = np.asarray(row_sums, dtype=np.int64)
    col_sums = np.asarray(col_sums, dtype=np.int64)
    ua, ca = np.unique(row_sums, return_counts=True)
    ub, cb = np.unique(col_sums, return_counts=True)
    lgN = gammaln(N + 1)
    total = 0.0
    bmax = int(ub.max())
    for a, cnt_a in zip(ua.tolist(), ca.tolist()):
        top = min(a, bmax)
        nij = np.arange(1, top + 1, dtype=float)[None, :]
        b = ub.astype(float)[:, None]
        lo = np.maximum(1.0, a + b - N)
        hi = np.minimum(float(a), b)
        mask = (nij >= lo) & (nij <= hi)
        if not mask.any():
            continue
        nn = np.where(mask, nij, 1.0)
        term = (nn / N) * (np.log(N * nn) - np.log(a * b))
        rest = np.where(mask, N - a - b + nn, 1.0)
        logp = (gammaln(a + 1) + gammaln(b + 1) + gammaln(N - a + 1) + gammaln(N - b + 1)
                - lgN - gammaln(nn + 1) - gammaln(a - nn + 1)
                - gammaln(np.where(mask, b - nn, 0.0) + 1) - gammaln(rest + 1))
        contrib = np.where(mask, term * np.exp(np.where(mask, logp, -np.inf)), 0.0).sum(axis=1)
        total += cnt_a * float(np.dot(cb, contrib))
    return total


def ami(labels_a, labels_b) -> float:
    """Adjusted mutual information with arithmetic-mean normalisation."""
    a = np.asarray(labels_a)
    b = np.asarray(labels_b)
    if a.shape != b.shape or len(a) == 0:
        raise ValueError("labelings must be non-empty and of equal length")
    cont = _contingency(a, b)
    # identical up to relabelling: one non-zero cell per row and per column
    nz = cont > 0
    if np.all(nz.sum(axis=0) == 1) and np.all(nz.sum(axis=1) == 1):
        return 1.0
    N = float(len(a))
    rows = cont.sum(axis=1)
    cols = cont.sum(axis=0)
    ha, hb = _entropy(rows, N), _entropy(cols, N)
    nzv = cont[nz].astype(float)
    ri, ci = np.nonzero(nz)
    mi = float(np.sum(nzv / N * (np.log(N * nzv) - np.log(rows[ri] * cols[ci].astype(float)))))
    emi = expected_mutual_info(rows, cols, N)
    denom = 0.5 * (ha + hb) - emi
    if abs(denom) < 1e-15:
        return NAN
    return float((mi - emi) / denom)


def partition_pair(part_a, part_b):
    """Restrict two partitions to actors active (community != 0) in both."""
    part_a = np.asarray(part_a)
    part_b = np.asarray(part_b)
    both = (part_a != 0) & (part_b != 0)
    return part_a[both], part_b[both]


# --------------------------------------------------------------------------
# edges


def _restricted_keys(layer, mask, n):
    e = layer.edges
    if len(e) == 0:
        return np.zeros(0, dtype=np.int64)
    keep = mask[e[:, 0]] & mask[e[:, 1]]
    return edge_keys(e[keep], n)


def edge_correlation(layer_i, layer_j) -> float:
    both = layer_i.active & layer_j.active
    ki = _restricted_keys(layer_i, both, layer_i.n)
    kj = _restricted_keys(layer_j, both, layer_j.n)
    denom = min(len(ki), len(kj))
    if denom == 0:
        return NAN
    return len(np.intersect1d(ki, kj, assume_unique=True)) / denom


def edge_correlation_matrix(net: MultilayerNetwork) -> np.ndarray:
    ell = net.ell
    R = np.full((ell, ell), NAN)
    for i in range(ell):
        R[i, i] = 1.0 if net.layers[i].m > 0 else NAN
        for j in range(i + 1, ell):
            R[i, j] = R[j, i] = edge_correlation(net.layers[i], net.layers[j])
    return R


@dataclass(frozen=True)
class CorrelationReport:
    degree_tau: np.ndarray
    partition_ami: np.ndarray
    edge_corr: np.ndarray


def degree_tau_matrix(net: MultilayerNetwork) -> np.ndarray:
    ell = net.ell
    degs = [layer.degrees() for layer in net.layers]
    T = np.full((ell, ell), NAN)
    for i in range(ell):
        act = net.layers[i].active
        T[i, i] = 1.0 if len(np.unique(degs[i][act])) > 1 else NAN
        for j in range(i + 1, ell):
            both = act & net.layers[j].active
            T[i, j] = T[j, i] = kendall_tau_b(degs[i][both], degs[j][both])
    return T


def partition_ami_matrix(net: MultilayerNetwork) -> np.ndarray:
    ell = net.ell
    A = np.full((ell, ell), NAN)
    if not net.has_partitions():
        return A
    parts = [layer.partition for layer in net.layers]
    for i in range(ell):
        A[i, i] = 1.0 if np.any(parts[i] != 0) else NAN
        for j in range(i + 1, ell):
            a, b = partition_pair(parts[i], parts[j])
            A[i, j] = A[j, i] = ami(a, b) if len(a) else NAN
    return A


def correlation_report(net: MultilayerNetwork) -> CorrelationReport:
    return CorrelationReport(degree_tau_matrix(net), partition_ami_matrix(net),
                             edge_correlation_matrix(net))
