"""Node-to-cluster assignments in canonical form.

A partition stores one cluster id per node, relabeled by first
appearance (node 0's cluster is 0, the next unseen cluster is 1, ...).
Canonical form makes equality, hashing and the lexicographic tie-break
used during optimization well defined.
"""

from __future__ import annotations

from typing import Iterable, Sequence

import numpy as np


class Partition:
    __slots__ = ("labels",)

    def __init__(self, labels: Sequence[int] | np.ndarray):
        arr = np.asarray(labels)
        if arr.ndim != 1 or arr.size == 0:
            raise ValueError("labels must be a non-empty 1-d sequence")
        canon = np.empty(arr.size, dtype=np.int64)
        mapping: dict = {}
        for i, lab in enumerate(arr.tolist()):
            if lab not in mapping:
                mapping[lab] = len(mapping)
            canon[i] = mapping[lab]
        self.labels = canon
        self.labels.setflags(write=False)

    @classmethod
    def from_labels(cls, labels: Iterable) -> "Partition":
        """Build from arbitrary hashable labels (e.g. category strings)."""
        mapping: dict = {}
        ints = []
        for lab in labels:
            if lab not in mapping:
                mapping[lab] = len(mapping)
            ints.append(mapping[lab])
        return cls(np.asarray(ints, dtype=np.int64))

    @property
    def n(self) -> int:
        return int(self.labels.size)

    @property
    def num_clusters(self) -> int:
        return int(self.labels.max()) + 1

    def sizes(self) -> np.ndarray:
        return np.bincount(self.labels, minlength=self.num_clusters)

    def membership(self) -> np.ndarray:
        """Binary membership matrix H (n x C, float64)."""
        h = np.zeros((self.n, self.num_clusters), dtype=np.float64)
        h[np.arange(self.n), self.labels] = 1.0
        return h

    def clusters(self) -> list[np.ndarray]:
        order = np.argsort(self.labels, kind="stable")
        return np.split(order, np.cumsum(self.sizes())[:-1])

    def key(self) -> bytes:
        return self.labels.tobytes()

    def as_tuple(self) -> tuple[int, ...]:
        return tuple(self.labels.tolist())

    def __eq__(self, other) -> bool:
        return isinstance(other, Partition) and np.array_equal(self.labels, other.labels)

    def __hash__(self) -> int:
        return hash(self.key())

    def __repr__(self) -> str:
        return f"Partition(n={self.n}, clusters={self.num_clusters})"
