"""Selection of robust partitions from a completed Markov-time scan.

A scale is reported where the cross-time VI(t, t') matrix has a low
plateau (a maximal diagonal block whose pairwise values all stay under a
threshold) and the per-time ensemble VI(t) dips inside that block. The
thresholds default to fractions of ln N, the natural VI scale, and are
fully configurable.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .mstability import ScanResult
from .partition import Partition


@dataclass
class RobustScale:
    t_star: float
    partition: Partition
    t_lo: float
    t_hi: float
    vi_at_dip: float
    plateau_mean_vi: float
    index_star: int
    index_lo: int
    index_hi: int

    @property
    def num_clusters(self) -> int:
        return self.partition.num_clusters

    @property
    def width(self) -> int:
        return self.index_hi - self.index_lo + 1


def _smooth3(values: np.ndarray) -> np.ndarray:
    out = np.empty_like(values)
    for i in range(values.size):
        out[i] = values[max(0, i - 1) : i + 2].mean()
    return out


def _maximal_blocks(vi_cross: np.ndarray, threshold: float) -> list[tuple[int, int]]:
    """Maximal [lo, hi] index blocks with all pairwise VI <= threshold."""
    n = vi_cross.shape[0]
    left = np.empty(n, dtype=np.int64)
    a = 0
    for b in range(n):
        while a < b and vi_cross[a:b, b].max() > threshold:
            a += 1
        left[b] = a
    blocks = []
    for b in range(n):
        if b == n - 1 or left[b + 1] > left[b]:
            blocks.append((int(left[b]), b))
    return blocks


def find_robust_scales(
    scan: ScanResult,
    dip_threshold: float | None = None,
    plateau_threshold: float | None = None,
    min_plateau_points: int | None = None,
) -> list[RobustScale]:
    """Ordered (widest plateau first) robust scales; empty list if none qualify."""
    n_times = len(scan.records)
    n_nodes = scan.n_nodes
    if dip_threshold is None:
        dip_threshold = 0.1 * math.log(n_nodes)
    if plateau_threshold is None:
        plateau_threshold = 0.05 * math.log(n_nodes)
    if min_plateau_points is None:
        min_plateau_points = max(1, math.ceil(0.05 * n_times))
    if n_times < min_plateau_points:
        raise ValueError("scan shorter than min_plateau_points")

    vi_ens = np.array([rec.vi_ensemble for rec in scan.records])
    smoothed = _smooth3(vi_ens)
    times = scan.times

    accepted = []
    for lo, hi in _maximal_blocks(scan.vi_cross, plateau_threshold):
        if hi - lo + 1 < min_plateau_points:
            continue
        i_star = lo + int(np.argmin(smoothed[lo : hi + 1]))
        if vi_ens[i_star] <= dip_threshold:
            accepted.append((lo, hi))

    # merge overlapping blocks so reported plateaus are disjoint in t
    accepted.sort()
    merged: list[list[int]] = []
    for lo, hi in accepted:
        if merged and lo <= merged[-1][1]:
            merged[-1][1] = max(merged[-1][1], hi)
        else:
            merged.append([lo, hi])

    scales = []
    for lo, hi in merged:
        i_star = lo + int(np.argmin(smoothed[lo : hi + 1]))
        block = scan.vi_cross[lo : hi + 1, lo : hi + 1]
        size = hi - lo + 1
        off_diag_mean = float(block.sum() / (size * (size - 1))) if size > 1 else 0.0
        scales.append(
            RobustScale(
                t_star=float(times[i_star]),
                partition=scan.records[i_star].best_partition,
                t_lo=float(times[lo]),
                t_hi=float(times[hi]),
                vi_at_dip=float(vi_ens[i_star]),
                plateau_mean_vi=off_diag_mean,
                index_star=i_star,
                index_lo=lo,
                index_hi=hi,
            )
        )
    scales.sort(key=lambda s: (-s.width, s.index_lo))
    return scales
