"""Diffusion-based multiscale partition optimization.

The continuous-time random walk on a weighted graph has generator
L_rw = I - D^-1 A and kernel P(t) = exp(-t L_rw). For a partition with
membership matrix H, the clustered autocovariance is

    R(t, H) = H^T [Pi P(t) - pi pi^T] H

and the quality of the partition at Markov time t is r(t, H) = trace R.
The optimizer is a greedy Louvain scheme on the symmetrized gain matrix
B(t) = sym(Pi P(t) - pi pi^T), which leaves the trace objective
unchanged. A scan runs many randomized optimizations per time point and
summarizes reproducibility with the variation of information.

All randomness flows through numpy's PCG64 generator; per-run seeds are
SeedSequence([base_seed, time_index, run_index]), so results reproduce
across platforms and worker counts.
"""

from __future__ import annotations

import json
import multiprocessing
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np
from scipy.linalg import expm

from .errors import Disconnected
from .metrics import variation_of_information
from .partition import Partition
from .simgraph import SparseGraph

_GAIN_THRESHOLD = 1e-14  # |B| entries below this are zeroed for the optimizer


@dataclass
class MarkovProcess:
    """Stationary quantities and the spectral cache for kernel evaluation.

    The cache holds the eigendecomposition of the symmetric form
    D^1/2 (D^-1 A) D^-1/2, reused for every Markov time.
    """

    adjacency: np.ndarray
    degrees: np.ndarray
    pi: np.ndarray
    l_rw: np.ndarray
    eigenvalues: np.ndarray
    eigenvectors: np.ndarray
    d_sqrt: np.ndarray
    d_isqrt: np.ndarray
    node_ids: tuple[str, ...] = ()

    @property
    def n(self) -> int:
        return self.adjacency.shape[0]


def build_markov_process(graph: SparseGraph) -> MarkovProcess:
    if not graph.is_connected():
        raise Disconnected("stability analysis needs a connected graph")
    adj = graph.adjacency()
    deg = adj.sum(axis=1)
    pi = deg / deg.sum()
    d_isqrt = 1.0 / np.sqrt(deg)
    d_sqrt = np.sqrt(deg)
    a_sym = d_isqrt[:, None] * adj * d_isqrt[None, :]
    a_sym = (a_sym + a_sym.T) / 2.0
    eigenvalues, eigenvectors = np.linalg.eigh(a_sym)
    l_rw = np.eye(adj.shape[0]) - adj / deg[:, None]
    return MarkovProcess(adj, deg, pi, l_rw, eigenvalues, eigenvectors, d_sqrt, d_isqrt, graph.node_ids)


def transition_kernel(mp: MarkovProcess, t: float) -> np.ndarray:
    """Row-stochastic kernel P(t); spectral evaluation with an expm fallback."""
    if t < 0:
        raise ValueError("Markov time must be >= 0")
    if t == 0:
        return np.eye(mp.n)
    growth = np.exp(-t * (1.0 - mp.eigenvalues))
    left = mp.d_isqrt[:, None] * mp.eigenvectors
    right = (mp.eigenvectors * growth[None, :]).T * mp.d_sqrt[None, :]
    kernel = left @ right
    row_err = np.abs(kernel.sum(axis=1) - 1.0).max()
    if row_err > 1e-9 or kernel.min() < -1e-12:
        kernel = expm(-t * mp.l_rw)
    np.clip(kernel, 0.0, None, out=kernel)
    return kernel


def autocovariance_core(mp: MarkovProcess, p_t: np.ndarray) -> np.ndarray:
    """Pi P(t) - pi pi^T (the node-level matrix clustered by R)."""
    return mp.pi[:, None] * p_t - np.outer(mp.pi, mp.pi)


@dataclass
class AutocovarianceView:
    r_matrix: np.ndarray
    markov_time: float


def clustered_autocovariance(mp: MarkovProcess, p_t: np.ndarray, partition: Partition, *, markov_time: float = float("nan")) -> AutocovarianceView:
    h = partition.membership()
    core = autocovariance_core(mp, p_t)
    return AutocovarianceView(h.T @ core @ h, markov_time)


def markov_stability(view: AutocovarianceView) -> float:
    return float(np.trace(view.r_matrix))


# ---------------------------------------------------------------------------
# Louvain optimization of the trace objective
# ---------------------------------------------------------------------------

def gain_matrix(mp: MarkovProcess, p_t: np.ndarray) -> np.ndarray:
    core = autocovariance_core(mp, p_t)
    sym = (core + core.T) / 2.0
    sym[np.abs(sym) < _GAIN_THRESHOLD] = 0.0
    return sym


def _local_moves(m: np.ndarray, labels: np.ndarray, order: np.ndarray, min_gain: float, max_passes: int = 256) -> None:
    n = m.shape[0]
    for _ in range(max_passes):
        moved = False
        for v in order:
            a = labels[v]
            comm_w = np.bincount(labels, weights=m[v], minlength=n)
            comm_w[a] -= m[v, v]  # staying counts links to the rest of a only
            best = int(np.argmax(comm_w))
            if best != a and comm_w[best] > comm_w[a] + min_gain:
                labels[v] = best
                moved = True
        if not moved:
            return


def _compact(labels: np.ndarray) -> np.ndarray:
    _, inverse = np.unique(labels, return_inverse=True)
    return inverse.astype(np.int64)


def _louvain_labels(b: np.ndarray, rng: np.random.Generator, min_gain: float = 1e-14) -> np.ndarray:
    m = b
    assignment = np.arange(b.shape[0], dtype=np.int64)
    while True:
        n = m.shape[0]
        labels = np.arange(n, dtype=np.int64)
        _local_moves(m, labels, rng.permutation(n), min_gain)
        labels = _compact(labels)
        c = int(labels.max()) + 1
        if c == n:
            return assignment
        assignment = labels[assignment]
        h = np.zeros((n, c))
        h[np.arange(n), labels] = 1.0
        m = h.T @ m @ h
        if c == 1:
            return assignment


def louvain_ensemble(mp: MarkovProcess, t: float, seeds: Sequence) -> list[tuple[Partition, float]]:
    """Run the Louvain optimizer once per seed at Markov time t.

    The kernel and gain matrix are computed once and shared; each run is
    identical to an independent louvain_optimize call with that seed.
    """
    p_t = transition_kernel(mp, t)
    b = gain_matrix(mp, p_t)
    results = []
    for seed in seeds:
        rng = np.random.default_rng(seed)
        labels = _louvain_labels(b, rng)
        partition = Partition(labels)
        r = markov_stability(clustered_autocovariance(mp, p_t, partition, markov_time=t))
        results.append((partition, r))
    return results


def louvain_optimize(mp: MarkovProcess, t: float, seed) -> tuple[Partition, float]:
    """Greedy Louvain maximization of r(t, H); deterministic given seed."""
    if t <= 0:
        raise ValueError("Markov time must be > 0 for optimization")
    return louvain_ensemble(mp, t, [seed])[0]


# ---------------------------------------------------------------------------
# Scan across Markov times
# ---------------------------------------------------------------------------

def log_time_grid(t_min: float = 0.01, t_max: float = 100.0, num: int = 400) -> np.ndarray:
    return np.logspace(np.log10(t_min), np.log10(t_max), num)


def linear_time_grid(t_min: float = 0.01, t_max: float = 100.0, step: float = 0.01) -> np.ndarray:
    count = int(round((t_max - t_min) / step)) + 1
    return t_min + step * np.arange(count)


@dataclass
class ScanConfig:
    time_grid: np.ndarray = field(default_factory=log_time_grid)
    runs_per_time: int = 500
    keep_top: int = 50
    seed: int = 0

    def __post_init__(self):
        self.time_grid = np.asarray(self.time_grid, dtype=np.float64)
        if self.time_grid.ndim != 1 or self.time_grid.size == 0:
            raise ValueError("time_grid must be a non-empty 1-d array")
        if self.time_grid[0] <= 0 or np.any(np.diff(self.time_grid) <= 0):
            raise ValueError("time_grid must be strictly increasing and positive")
        if not (1 <= self.keep_top <= self.runs_per_time):
            raise ValueError("need 1 <= keep_top <= runs_per_time")


@dataclass
class ScanRecord:
    t: float
    best_partition: Partition
    r_best: float
    vi_ensemble: float

    @property
    def num_clusters(self) -> int:
        return self.best_partition.num_clusters


@dataclass
class ScanResult:
    records: list[ScanRecord]
    vi_cross: np.ndarray

    @property
    def times(self) -> np.ndarray:
        return np.array([rec.t for rec in self.records])

    @property
    def n_nodes(self) -> int:
        return self.records[0].best_partition.n

    def save(self, scan_path: str | Path, vi_path: str | Path) -> None:
        with open(scan_path, "w", encoding="utf-8") as fh:
            for rec in self.records:
                fh.write(json.dumps({
                    "t": rec.t,
                    "r": rec.r_best,
                    "num_clusters": rec.num_clusters,
                    "vi_ensemble": rec.vi_ensemble,
                    "partition": rec.best_partition.labels.tolist(),
                }, sort_keys=True) + "\n")
        with open(vi_path, "w", encoding="utf-8") as fh:
            for row in self.vi_cross:
                fh.write(" ".join(f"{v:.17g}" for v in row) + "\n")

    @classmethod
    def load(cls, scan_path: str | Path, vi_path: str | Path) -> "ScanResult":
        records = []
        with open(scan_path, encoding="utf-8") as fh:
            for line in fh:
                line = line.strip()
                if not line:
                    continue
                obj = json.loads(line)
                records.append(ScanRecord(
                    t=float(obj["t"]),
                    best_partition=Partition(obj["partition"]),
                    r_best=float(obj["r"]),
                    vi_ensemble=float(obj["vi_ensemble"]),
                ))
        vi_cross = np.loadtxt(vi_path, ndmin=2)
        return cls(records, vi_cross)


def _run_sort_key(item: tuple[Partition, float]):
    partition, r = item
    return (-r, partition.num_clusters, partition.as_tuple())


def _ensemble_vi(partitions: list[Partition]) -> float:
    k = len(partitions)
    if k < 2:
        return 0.0
    groups: dict[bytes, list] = {}
    for p in partitions:
        entry = groups.setdefault(p.key(), [p, 0])
        entry[1] += 1
    uniq = list(groups.values())
    total = 0.0
    for i in range(len(uniq)):
        for j in range(i + 1, len(uniq)):
            total += uniq[i][1] * uniq[j][1] * variation_of_information(uniq[i][0], uniq[j][0])
    return total / (k * (k - 1) / 2)


def _scan_one_time(mp: MarkovProcess, cfg: ScanConfig, index: int) -> ScanRecord:
    t = float(cfg.time_grid[index])
    p_t = transition_kernel(mp, t)
    b = gain_matrix(mp, p_t)
    runs = []
    for run in range(cfg.runs_per_time):
        rng = np.random.default_rng(np.random.SeedSequence([cfg.seed, index, run]))
        partition = Partition(_louvain_labels(b, rng))
        r = markov_stability(clustered_autocovariance(mp, p_t, partition, markov_time=t))
        runs.append((partition, r))
    runs.sort(key=_run_sort_key)
    best_partition, r_best = runs[0]
    vi = _ensemble_vi([p for p, _ in runs[: cfg.keep_top]])
    return ScanRecord(t, best_partition, r_best, vi)


_POOL_STATE: tuple[MarkovProcess, ScanConfig] | None = None


def _pool_worker(index: int) -> ScanRecord:
    assert _POOL_STATE is not None
    return _scan_one_time(_POOL_STATE[0], _POOL_STATE[1], index)


def cross_time_vi(partitions: list[Partition]) -> np.ndarray:
    """Symmetric VI(t, t') matrix between per-time best partitions."""
    k = len(partitions)
    keys = [p.key() for p in partitions]
    uniq_index: dict[bytes, int] = {}
    uniq: list[Partition] = []
    member = np.empty(k, dtype=np.int64)
    for i, key in enumerate(keys):
        if key not in uniq_index:
            uniq_index[key] = len(uniq)
            uniq.append(partitions[i])
        member[i] = uniq_index[key]
    u = len(uniq)
    base = np.zeros((u, u))
    for i in range(u):
        for j in range(i + 1, u):
            base[i, j] = base[j, i] = variation_of_information(uniq[i], uniq[j])
    return base[member[:, None], member[None, :]]


def scan(mp: MarkovProcess, cfg: ScanConfig, workers: int = 1) -> ScanResult:
    """Full Markov-time sweep; output is identical for any worker count."""
    indices = range(len(cfg.time_grid))
    if workers > 1:
        global _POOL_STATE
        _POOL_STATE = (mp, cfg)
        try:
            ctx = multiprocessing.get_context("fork")
            with ctx.Pool(workers) as pool:
                records = pool.map(_pool_worker, indices)
        finally:
            _POOL_STATE = None
    else:
        records = [_scan_one_time(mp, cfg, i) for i in indices]
    vi_cross = cross_time_vi([rec.best_partition for rec in records])
    return ScanResult(records, vi_cross)
