"""Partition-comparison and topic-quality metrics.

Information measures (entropy, mutual information, variation of
information, NMI) use the natural logarithm throughout, computed from
exact integer contingency counts. Pointwise mutual information also uses
natural log; note the paper-style aggregate score therefore has a fixed
but convention-dependent scale.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .corpus import Corpus, CooccurrenceStats, cooccurrence_stats
from .errors import SizeMismatch, UndefinedPMI, ZeroEntropy
from .partition import Partition


def contingency_counts(a: Partition, b: Partition) -> np.ndarray:
    """C_a x C_b integer matrix of shared node counts."""
    if a.n != b.n:
        raise SizeMismatch(f"partitions cover {a.n} and {b.n} nodes")
    ca, cb = a.num_clusters, b.num_clusters
    flat = np.bincount(a.labels * cb + b.labels, minlength=ca * cb)
    return flat.reshape(ca, cb)


def _entropy(counts: np.ndarray, n: int) -> float:
    nz = counts[counts > 0]
    return float(math.log(n) - np.sum(nz * np.log(nz)) / n)


def _mutual_information(joint: np.ndarray, n: int) -> float:
    rows = joint.sum(axis=1)
    cols = joint.sum(axis=0)
    i, j = np.nonzero(joint)
    nij = joint[i, j].astype(np.float64)
    return float(np.sum(nij / n * np.log(n * nij / (rows[i] * cols[j]))))


def variation_of_information(c: Partition, d: Partition) -> float:
    """VI = H(C) + H(D) - 2 I(C;D), natural log, unnormalized."""
    joint = contingency_counts(c, d)
    n = c.n
    h_c = _entropy(joint.sum(axis=1), n)
    h_d = _entropy(joint.sum(axis=0), n)
    vi = h_c + h_d - 2.0 * _mutual_information(joint, n)
    return max(vi, 0.0)


def nmi(c: Partition, d: Partition) -> float:
    """I(C;D) / sqrt(H(C) H(D)); 1 for identical partitions."""
    joint = contingency_counts(c, d)
    n = c.n
    h_c = _entropy(joint.sum(axis=1), n)
    h_d = _entropy(joint.sum(axis=0), n)
    if h_c == 0.0 or h_d == 0.0:
        raise ZeroEntropy("single-cluster partition has zero entropy; NMI undefined")
    value = _mutual_information(joint, n) / math.sqrt(h_c * h_d)
    return min(max(value, 0.0), 1.0)


def pmi_pair(w1: str, w2: str, stats: CooccurrenceStats) -> float:
    """log P(w1 w2) / (P(w1) P(w2)), natural log."""
    p1 = stats.p_term.get(w1, 0.0)
    p2 = stats.p_term.get(w2, 0.0)
    if p1 <= 0.0 or p2 <= 0.0:
        missing = w1 if p1 <= 0.0 else w2
        raise UndefinedPMI(f"word with zero probability: {missing!r}")
    p12 = stats.pair_probability(w1, w2)
    if p12 <= 0.0:
        raise UndefinedPMI(f"{w1!r} and {w2!r} never co-occur")
    return math.log(p12 / (p1 * p2))


@dataclass
class ClusterTopic:
    cluster_id: int
    size: int
    top_words: list[str]
    median_pmi: float
    defined_pairs: int


@dataclass
class TopicScoreReport:
    clusters: list[ClusterTopic]
    pmi_hat: float

    def to_json(self) -> dict:
        return {
            "pmi_hat": self.pmi_hat,
            "clusters": [
                {
                    "cluster": c.cluster_id,
                    "size": c.size,
                    "top_words": c.top_words,
                    "median_pmi": c.median_pmi,
                    "defined_pairs": c.defined_pairs,
                }
                for c in self.clusters
            ],
        }


def pmi_partition(partition: Partition, corpus: Corpus, top_n_words: int = 10) -> TopicScoreReport:
    """Aggregate topic coherence: per cluster, the median pairwise PMI of
    its most frequent stems; overall, the cluster-size-weighted average.

    Word and pair probabilities come from the full corpus. Pairs that
    never co-occur are dropped from the median; a cluster with no defined
    pair contributes 0 (the independence value).
    """
    if partition.n != len(corpus):
        raise SizeMismatch("partition does not match corpus size")
    records = corpus.records
    cluster_words: list[list[str]] = []
    for idx in partition.clusters():
        freq: dict[str, int] = {}
        for i in idx:
            for tok in records[int(i)].tokens:
                freq[tok] = freq.get(tok, 0) + 1
        ranked = sorted(freq.items(), key=lambda kv: (-kv[1], kv[0]))
        cluster_words.append([w for w, _ in ranked[:top_n_words]])

    union = sorted({w for words in cluster_words for w in words})
    stats = cooccurrence_stats(records, union)

    clusters = []
    pmi_hat = 0.0
    sizes = partition.sizes()
    for cid, words in enumerate(cluster_words):
        values = []
        for i in range(len(words)):
            for j in range(i + 1, len(words)):
                try:
                    values.append(pmi_pair(words[i], words[j], stats))
                except UndefinedPMI:
                    pass
        median = float(np.median(values)) if values else 0.0
        clusters.append(ClusterTopic(cid, int(sizes[cid]), words, median, len(values)))
        pmi_hat += sizes[cid] / partition.n * median
    return TopicScoreReport(clusters, float(pmi_hat))


@dataclass
class ContingencyTable:
    counts: np.ndarray
    z_scores: np.ndarray
    row_labels: list
    col_labels: list

    def to_json(self) -> dict:
        return {
            "rows": [str(x) for x in self.row_labels],
            "cols": [str(x) for x in self.col_labels],
            "counts": self.counts.tolist(),
            "z_scores": self.z_scores.tolist(),
        }


def contingency_zscores(partition: Partition, categories: Sequence) -> ContingencyTable:
    """Pearson residuals (O - E)/sqrt(E) of the cluster-by-category table."""
    if len(categories) != partition.n:
        raise SizeMismatch("category labels do not match partition size")
    col_labels = []
    seen: dict = {}
    for cat in categories:
        if cat not in seen:
            seen[cat] = len(seen)
            col_labels.append(cat)
    cat_part = Partition.from_labels(categories)
    counts = contingency_counts(partition, cat_part)
    n = partition.n
    expected = counts.sum(axis=1, keepdims=True) * counts.sum(axis=0, keepdims=True) / n
    z = np.zeros_like(expected, dtype=np.float64)
    mask = expected > 0
    z[mask] = (counts[mask] - expected[mask]) / np.sqrt(expected[mask])
    return ContingencyTable(counts, z, list(range(partition.num_clusters)), col_labels)


def sankey_links(p_fine: Partition, p_coarse: Partition) -> list[tuple[int, int, int]]:
    """(fine cluster, coarse cluster, shared node count) for every nonzero overlap."""
    counts = contingency_counts(p_fine, p_coarse)
    links = []
    for i, j in zip(*np.nonzero(counts)):
        links.append((int(i), int(j), int(counts[i, j])))
    links.sort()
    return links


def weighted_f1(predicted: Sequence, true: Sequence) -> float:
    """Per-class F1 averaged with weights = true-class support / N."""
    if len(predicted) != len(true):
        raise SizeMismatch("prediction and truth lengths differ")
    n = len(true)
    if n == 0:
        raise SizeMismatch("empty label sequences")
    classes = sorted(set(true) | set(predicted))
    score = 0.0
    for cls in classes:
        tp = sum(1 for p, t in zip(predicted, true) if p == cls and t == cls)
        pred_pos = sum(1 for p in predicted if p == cls)
        support = sum(1 for t in true if t == cls)
        if support == 0:
            continue
        precision = tp / pred_pos if pred_pos else 0.0
        recall = tp / support
        f1 = 2 * precision * recall / (precision + recall) if (precision + recall) > 0 else 0.0
        score += support / n * f1
    return score
