"""Similarity matrix normalization and MST-kNN graph sparsification.

From document vectors we compute cosine similarities S_cos, the distance
matrix D = 1 - S_cos, the max-normalized distances D_hat = D / max(D) and
the normalized similarities S_hat = 1 - D_hat in [0, 1]. The sparsified
graph keeps the minimum spanning tree of D_hat (global connectivity) plus
each node's k nearest neighbors (local geometry), with retained edges
weighted by S_hat.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

import numpy as np

from .embeddings import EmbeddingMatrix
from .errors import DegenerateCorpus, Disconnected

WEIGHT_FLOOR = 1e-12  # keeps the single farthest pair from zeroing out an edge


def cosine_similarity_matrix(embedding: EmbeddingMatrix) -> np.ndarray:
    """All-pairs cosine similarities; symmetric with unit diagonal."""
    rows = embedding.rows / np.linalg.norm(embedding.rows, axis=1, keepdims=True)
    sim = rows @ rows.T
    sim = (sim + sim.T) / 2.0
    np.clip(sim, -1.0, 1.0, out=sim)
    np.fill_diagonal(sim, 1.0)
    return sim


@dataclass
class SimilarityMatrix:
    """Max-normalized similarities S_hat and distances D_hat = 1 - S_hat."""

    s_hat: np.ndarray
    d_hat: np.ndarray

    @property
    def n(self) -> int:
        return self.s_hat.shape[0]


def normalize_similarity(s_cos: np.ndarray) -> SimilarityMatrix:
    """Element-wise max norm of the cosine distance matrix."""
    s_cos = np.asarray(s_cos, dtype=np.float64)
    if s_cos.ndim != 2 or s_cos.shape[0] != s_cos.shape[1]:
        raise ValueError("similarity matrix must be square")
    if np.abs(s_cos - s_cos.T).max() > 1e-9:
        raise ValueError("similarity matrix must be symmetric")
    dist = 1.0 - s_cos
    np.fill_diagonal(dist, 0.0)
    d_max = dist.max()
    if d_max <= 0.0:
        raise DegenerateCorpus("all documents identical; distance matrix is zero")
    d_hat = dist / d_max
    s_hat = 1.0 - d_hat
    np.fill_diagonal(s_hat, 1.0)
    np.fill_diagonal(d_hat, 0.0)
    return SimilarityMatrix(s_hat, d_hat)


class _UnionFind:
    def __init__(self, n: int):
        self.parent = list(range(n))

    def find(self, x: int) -> int:
        root = x
        while self.parent[root] != root:
            root = self.parent[root]
        while self.parent[x] != root:
            self.parent[x], x = root, self.parent[x]
        return root

    def union(self, a: int, b: int) -> bool:
        ra, rb = self.find(a), self.find(b)
        if ra == rb:
            return False
        self.parent[rb] = ra
        return True


def minimum_spanning_tree(d_hat: np.ndarray) -> list[tuple[int, int]]:
    """Kruskal's algorithm on the dense distance matrix.

    Equal-weight edges are taken in (i, j) order, so the tree is
    deterministic: with all weights equal the result is the star rooted
    at node 0.
    """
    n = d_hat.shape[0]
    iu, ju = np.triu_indices(n, k=1)
    weights = d_hat[iu, ju]
    order = np.lexsort((ju, iu, weights))
    uf = _UnionFind(n)
    edges = []
    for idx in order:
        i, j = int(iu[idx]), int(ju[idx])
        if uf.union(i, j):
            edges.append((i, j))
            if len(edges) == n - 1:
                break
    return edges


@dataclass
class SparseGraph:
    """Weighted undirected document graph; connected by construction."""

    node_ids: tuple[str, ...]
    edges: list[tuple[int, int, float]]  # i < j, weight in (0, 1]

    @property
    def n(self) -> int:
        return len(self.node_ids)

    def adjacency(self) -> np.ndarray:
        adj = np.zeros((self.n, self.n), dtype=np.float64)
        for i, j, w in self.edges:
            adj[i, j] = w
            adj[j, i] = w
        return adj

    def degrees(self) -> np.ndarray:
        return self.adjacency().sum(axis=1)

    def edge_index_set(self) -> set[tuple[int, int]]:
        return {(i, j) for i, j, _ in self.edges}

    def is_connected(self) -> bool:
        if self.n == 0:
            return False
        neighbors: list[list[int]] = [[] for _ in range(self.n)]
        for i, j, _ in self.edges:
            neighbors[i].append(j)
            neighbors[j].append(i)
        seen = {0}
        stack = [0]
        while stack:
            u = stack.pop()
            for v in neighbors[u]:
                if v not in seen:
                    seen.add(v)
                    stack.append(v)
        return len(seen) == self.n


def knn_neighbor_sets(d_hat: np.ndarray, k: int) -> list[np.ndarray]:
    """Indices of the k nearest nodes per row, ties to the smaller index."""
    n = d_hat.shape[0]
    dist = d_hat.copy()
    np.fill_diagonal(dist, np.inf)
    out = []
    for i in range(n):
        order = np.argsort(dist[i], kind="stable")
        out.append(order[: min(k, n - 1)])
    return out


def mst_knn_graph(
    s_hat: np.ndarray,
    d_hat: np.ndarray,
    k: int,
    node_ids: Sequence[str] | None = None,
) -> SparseGraph:
    """Union of the MST and every node's k nearest neighbors, weighted by S_hat."""
    if k < 0:
        raise ValueError("k must be >= 0")
    n = d_hat.shape[0]
    if n < 2:
        raise ValueError("graph needs at least two nodes")
    if node_ids is None:
        node_ids = tuple(str(i) for i in range(n))
    edge_set: set[tuple[int, int]] = set(minimum_spanning_tree(d_hat))
    if k > 0:
        for i, nbrs in enumerate(knn_neighbor_sets(d_hat, k)):
            for j in nbrs:
                j = int(j)
                edge_set.add((i, j) if i < j else (j, i))
    edges = []
    for i, j in sorted(edge_set):
        w = float(s_hat[i, j])
        if w <= 0.0:
            w = WEIGHT_FLOOR
        edges.append((i, j, w))
    graph = SparseGraph(tuple(node_ids), edges)
    if not graph.is_connected():
        raise Disconnected("MST-kNN graph is not connected")  # defensive; MST spans
    return graph


def graph_from_dense(adjacency: np.ndarray, node_ids: Sequence[str] | None = None) -> SparseGraph:
    """Wrap a dense symmetric weighted adjacency as a SparseGraph."""
    adjacency = np.asarray(adjacency, dtype=np.float64)
    n = adjacency.shape[0]
    if node_ids is None:
        node_ids = tuple(str(i) for i in range(n))
    edges = []
    iu, ju = np.triu_indices(n, k=1)
    for i, j in zip(iu, ju):
        w = adjacency[i, j]
        if w > 0.0:
            edges.append((int(i), int(j), float(w)))
    return SparseGraph(tuple(node_ids), edges)


# ---------------------------------------------------------------------------
# Edge-list export / import (17 significant digits, 0-based indices)
# ---------------------------------------------------------------------------

def save_graph(graph: SparseGraph, edges_path: str | Path, nodes_path: str | Path) -> None:
    with open(edges_path, "w", encoding="utf-8") as fh:
        for i, j, w in graph.edges:
            fh.write(f"{i} {j} {w:.17g}\n")
    with open(nodes_path, "w", encoding="utf-8") as fh:
        json.dump({str(i): doc_id for i, doc_id in enumerate(graph.node_ids)}, fh, sort_keys=True)
        fh.write("\n")


def load_graph(edges_path: str | Path, nodes_path: str | Path) -> SparseGraph:
    with open(nodes_path, encoding="utf-8") as fh:
        mapping = json.load(fh)
    node_ids = tuple(mapping[str(i)] for i in range(len(mapping)))
    edges = []
    with open(edges_path, encoding="utf-8") as fh:
        for line in fh:
            parts = line.split()
            if not parts:
                continue
            i, j, w = int(parts[0]), int(parts[1]), float(parts[2])
            if i > j:
                i, j = j, i
            edges.append((i, j, w))
    edges.sort()
    return SparseGraph(node_ids, edges)
