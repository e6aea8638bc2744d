"""Document vector representations: TF-iDF vectors built in-package and
ingestion of externally trained embedding vectors.

External vectors arrive in a plain-text interchange format:

    #embeddings N d
    doc_id v1 v2 ... vd        (N such lines, whitespace-delimited floats)
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

import numpy as np

from .corpus import Corpus
from .errors import (
    DimensionMismatch,
    DocumentEmptyAfterPreprocessing,
    EmbeddingFormatError,
    MissingVector,
    ZeroVector,
)


class EmbeddingSource(enum.Enum):
    TFIDF = "tfidf"
    EXTERNAL = "external"


@dataclass
class EmbeddingMatrix:
    """N x d dense matrix of document vectors, one row per doc_id."""

    rows: np.ndarray
    row_ids: tuple[str, ...]
    source: EmbeddingSource

    def __post_init__(self):
        self.rows = np.asarray(self.rows, dtype=np.float64)
        if self.rows.ndim != 2:
            raise ValueError("rows must be a 2-d array")
        if self.rows.shape[0] != len(self.row_ids):
            raise ValueError("row count does not match row_ids")
        norms = np.linalg.norm(self.rows, axis=1)
        zero = np.flatnonzero(norms == 0.0)
        if zero.size:
            raise ZeroVector(self.row_ids[zero[0]])

    @property
    def n(self) -> int:
        return self.rows.shape[0]

    @property
    def dim(self) -> int:
        return self.rows.shape[1]


def tfidf_matrix(corpus: Corpus) -> EmbeddingMatrix:
    """TF-iDF document vectors: tf(i,w) * (ln((1+N)/(1+df(w))) + 1), rows
    L2-normalized. Columns follow vocabulary term ids (lexicographic)."""
    n = len(corpus)
    if n == 0:
        raise ValueError("empty corpus")
    vocab = corpus.vocabulary
    mat = np.zeros((n, len(vocab)), dtype=np.float64)
    idf = np.empty(len(vocab), dtype=np.float64)
    for term, stats in vocab.items():
        idf[stats.term_id] = np.log((1.0 + n) / (1.0 + stats.document_frequency)) + 1.0
    for i, rec in enumerate(corpus.records):
        if not rec.tokens:
            raise DocumentEmptyAfterPreprocessing(rec.doc_id)
        for tok in rec.tokens:
            mat[i, vocab[tok].term_id] += 1.0
    mat *= idf[np.newaxis, :]
    mat /= np.linalg.norm(mat, axis=1, keepdims=True)
    return EmbeddingMatrix(mat, tuple(corpus.doc_ids), EmbeddingSource.TFIDF)


def load_embeddings(path: str | Path, expected_doc_ids: Sequence[str]) -> EmbeddingMatrix:
    """Read an interchange file and return rows ordered as ``expected_doc_ids``."""
    path = Path(path)
    with open(path, encoding="utf-8") as fh:
        header = fh.readline().split()
        if len(header) != 3 or header[0] != "#embeddings":
            raise EmbeddingFormatError(f"{path}: missing '#embeddings N d' header")
        try:
            n_declared, dim = int(header[1]), int(header[2])
        except ValueError as exc:
            raise EmbeddingFormatError(f"{path}: non-integer header fields") from exc
        vectors: dict[str, np.ndarray] = {}
        for lineno, line in enumerate(fh, 2):
            parts = line.split()
            if not parts:
                continue
            doc_id = parts[0]
            if doc_id in vectors:
                raise EmbeddingFormatError(f"{path}:{lineno}: duplicate doc_id {doc_id!r}")
            if len(parts) - 1 != dim:
                raise DimensionMismatch(dim, len(parts) - 1, where=f"{path}:{lineno}")
            vectors[doc_id] = np.array([float(x) for x in parts[1:]], dtype=np.float64)
    if len(vectors) != n_declared:
        raise EmbeddingFormatError(
            f"{path}: header declares {n_declared} vectors, found {len(vectors)}"
        )
    rows = np.empty((len(expected_doc_ids), dim), dtype=np.float64)
    for i, doc_id in enumerate(expected_doc_ids):
        if doc_id not in vectors:
            raise MissingVector(doc_id)
        rows[i] = vectors[doc_id]
        if not rows[i].any():
            raise ZeroVector(doc_id)
    return EmbeddingMatrix(rows, tuple(expected_doc_ids), EmbeddingSource.EXTERNAL)


def save_embeddings(matrix: EmbeddingMatrix, path: str | Path) -> None:
    """Write the interchange format read back by :func:`load_embeddings`."""
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(f"#embeddings {matrix.n} {matrix.dim}\n")
        for doc_id, row in zip(matrix.row_ids, matrix.rows):
            fh.write(doc_id + " " + " ".join(f"{v:.17g}" for v in row) + "\n")
