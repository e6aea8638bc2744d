"""Synthetic benchmark generators with planted ground truth.

These feed the acceptance suite and the `synth` CLI subcommand: a
two-level hierarchical weighted graph, topic corpora with disjoint
vocabularies, Gaussian blob datasets for the classifiers, and fake
"external" embeddings built from topic identity.
"""

from __future__ import annotations

import numpy as np

from .corpus import DocumentRecord
from .embeddings import EmbeddingMatrix, EmbeddingSource
from .harmclf import LabeledDataset
from .partition import Partition
from .simgraph import SparseGraph, graph_from_dense


def planted_hierarchy_graph(
    n_cliques: int = 16,
    clique_size: int = 4,
    cliques_per_group: int = 4,
    w_clique: float = 1.0,
    w_group: float = 0.3,
    w_cross: float = 0.05,
) -> tuple[SparseGraph, Partition, Partition]:
    """Two-level planted benchmark: cliques nested inside supergroups.

    Returns (graph, fine partition = cliques, coarse partition = groups).
    """
    if n_cliques % cliques_per_group:
        raise ValueError("n_cliques must be a multiple of cliques_per_group")
    n = n_cliques * clique_size
    clique = np.repeat(np.arange(n_cliques), clique_size)
    group = clique // cliques_per_group
    adj = np.full((n, n), w_cross)
    same_group = group[:, None] == group[None, :]
    same_clique = clique[:, None] == clique[None, :]
    adj[same_group] = w_group
    adj[same_clique] = w_clique
    np.fill_diagonal(adj, 0.0)
    graph = graph_from_dense(adj, tuple(f"n{i:04d}" for i in range(n)))
    return graph, Partition(clique), Partition(group)


def random_connected_graph(n: int, seed: int, edge_prob: float = 0.4) -> SparseGraph:
    """Erdos-Renyi weighted graph, resampled until connected."""
    rng = np.random.default_rng(seed)
    while True:
        adj = np.zeros((n, n))
        iu, ju = np.triu_indices(n, k=1)
        mask = rng.random(iu.size) < edge_prob
        weights = rng.uniform(0.2, 1.0, size=iu.size)
        adj[iu[mask], ju[mask]] = weights[mask]
        adj += adj.T
        graph = graph_from_dense(adj)
        if graph.edges and graph.is_connected():
            return graph


def _topic_vocab(topic_index: int, size: int) -> list[str]:
    prefix = f"q{chr(ord('a') + topic_index)}"
    return [f"{prefix}{i:03d}" for i in range(size)]


def _zipf_weights(size: int) -> np.ndarray:
    w = 1.0 / np.arange(1, size + 1)
    return w / w.sum()


def two_topic_corpus(
    n_docs: int = 200,
    vocab_per_topic: int = 30,
    seed: int = 0,
    doc_len: tuple[int, int] = (6, 10),
    n_bridge: int = 4,
    bridge_words: int = 6,
) -> tuple[list[DocumentRecord], Partition]:
    """Two disjoint-vocabulary topics plus a few bridge documents.

    The bridge documents contain the most frequent words of both topics,
    so cross-topic pairs of frequent words co-occur rarely (large negative
    PMI) instead of never; topic-pure clusters then beat mixed ones on
    coherence instead of tying with them.
    """
    rng = np.random.default_rng(seed)
    vocab = [_topic_vocab(k, vocab_per_topic) for k in range(2)]
    weights = _zipf_weights(vocab_per_topic)
    records = []
    topics = []
    bridge_text = " ".join(vocab[0][:bridge_words] + vocab[1][:bridge_words])
    for i in range(n_docs):
        topic = i % 2
        topics.append(topic)
        if i < n_bridge:
            text = bridge_text
        else:
            length = int(rng.integers(doc_len[0], doc_len[1] + 1))
            words = rng.choice(vocab[topic], size=length, p=weights)
            text = " ".join(words)
        records.append(
            DocumentRecord(
                doc_id=f"d{i:04d}",
                raw_text=text,
                categories={"topic": "AB"[topic]},
                harm_label=int(rng.integers(1, 6)),
            )
        )
    return records, Partition(np.asarray(topics))


def clustered_label_corpus(
    n_docs: int = 240,
    n_topics: int = 6,
    vocab_per_topic: int = 80,
    doc_len: tuple[int, int] = (8, 14),
    label_noise: float = 0.15,
    seed: int = 0,
) -> tuple[list[DocumentRecord], Partition]:
    """Corpus whose topic identity is informative of the harm label.

    Each topic uses a private vocabulary large enough that individual
    word features are diluted, while topic identity (recoverable by the
    unsupervised pipeline) predicts the label up to ``label_noise``.
    """
    rng = np.random.default_rng(seed)
    vocab = [_topic_vocab(k, vocab_per_topic) for k in range(n_topics)]
    records = []
    topics = []
    for i in range(n_docs):
        topic = i % n_topics
        topics.append(topic)
        label = (topic % 5) + 1
        if rng.random() < label_noise:
            label = int(rng.integers(1, 6))
        length = int(rng.integers(doc_len[0], doc_len[1] + 1))
        words = rng.choice(vocab[topic], size=length)
        records.append(
            DocumentRecord(
                doc_id=f"d{i:04d}",
                raw_text=" ".join(words),
                categories={"topic": f"T{topic}"},
                harm_label=label,
            )
        )
    return records, Partition(np.asarray(topics))


def topic_embeddings(
    records: list[DocumentRecord],
    topics: Partition,
    dim: int = 32,
    spread: float = 0.15,
    seed: int = 0,
) -> EmbeddingMatrix:
    """Fake externally trained vectors: one Gaussian blob per topic."""
    rng = np.random.default_rng(seed)
    k = topics.num_clusters
    centers = rng.normal(size=(k, dim))
    centers /= np.linalg.norm(centers, axis=1, keepdims=True)
    rows = centers[topics.labels] + spread * rng.normal(size=(len(records), dim))
    return EmbeddingMatrix(rows, tuple(r.doc_id for r in records), EmbeddingSource.EXTERNAL)


def blob_dataset(
    counts: dict[int, int],
    separation: float = 6.0,
    dim: int = 8,
    seed: int = 0,
) -> LabeledDataset:
    """Gaussian blobs (unit noise) with class means ``separation`` apart."""
    rng = np.random.default_rng(seed)
    classes = sorted(counts)
    if dim < len(classes):
        raise ValueError("dim must be >= number of classes")
    features = []
    labels = []
    for idx, cls in enumerate(classes):
        mean = np.zeros(dim)
        mean[idx] = separation
        pts = mean + rng.normal(size=(counts[cls], dim))
        features.append(pts)
        labels.extend([cls] * counts[cls])
    return LabeledDataset(np.vstack(features), np.asarray(labels))
