"""Supervised prediction of the five-level harm label.

Feature matrices are assembled from declared blocks (one-hot categorical
attributes, TF-iDF vectors, external embeddings, cluster labels from the
unsupervised analysis). Two linear classifiers are provided: a ridge
classifier solved in closed form on +/-1 indicator targets, and a linear
SVM trained by Pegasos-style stochastic subgradient descent. Evaluation
is stratified k-fold cross-validation scored with the weighted F1.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Mapping, Sequence

import numpy as np

from .corpus import DocumentRecord
from .embeddings import EmbeddingMatrix
from .errors import DegenerateLabels, InsufficientClass, MissingPartition, SizeMismatch
from .metrics import weighted_f1
from .partition import Partition

HARM_CLASS_NAMES = {1: "No harm", 2: "Low", 3: "Moderate", 4: "Severe", 5: "Death"}


# ---------------------------------------------------------------------------
# Feature assembly
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Categorical:
    name: str


@dataclass(frozen=True)
class TextTfidf:
    pass


@dataclass(frozen=True)
class TextEmbedding:
    pass


@dataclass(frozen=True)
class MsLabels:
    num_clusters: int


FeatureBlock = Categorical | TextTfidf | TextEmbedding | MsLabels


@dataclass(frozen=True)
class FeatureSpec:
    blocks: tuple[FeatureBlock, ...]

    def __post_init__(self):
        if not self.blocks:
            raise ValueError("feature spec needs at least one block")


@dataclass
class FeatureAssembly:
    matrix: np.ndarray
    block_slices: list[tuple[FeatureBlock, slice]]

    @property
    def total_dimension(self) -> int:
        return self.matrix.shape[1]

    def standardize_columns(self) -> np.ndarray:
        """Columns to standardize during CV: dense embedding blocks only."""
        cols: list[int] = []
        for block, sl in self.block_slices:
            if isinstance(block, TextEmbedding):
                cols.extend(range(sl.start, sl.stop))
        return np.asarray(cols, dtype=np.int64)


def one_hot(records: Sequence[DocumentRecord], category_name: str) -> tuple[np.ndarray, list[str]]:
    """One column per distinct value, ordered by first appearance; records
    missing the category land in a dedicated "unknown" column."""
    values = []
    for rec in records:
        v = rec.categories.get(category_name)
        values.append("unknown" if v is None or v == "" else v)
    index: dict[str, int] = {}
    for v in values:
        if v not in index:
            index[v] = len(index)
    mat = np.zeros((len(values), len(index)), dtype=np.float64)
    for i, v in enumerate(values):
        mat[i, index[v]] = 1.0
    return mat, list(index)


def assemble_features(
    records: Sequence[DocumentRecord],
    spec: FeatureSpec,
    partition: Partition | None = None,
    tfidf: EmbeddingMatrix | None = None,
    embedding: EmbeddingMatrix | None = None,
) -> FeatureAssembly:
    """Concatenate feature blocks in spec order. Never reads harm_label."""
    n = len(records)
    parts: list[np.ndarray] = []
    slices: list[tuple[FeatureBlock, slice]] = []
    start = 0
    for block in spec.blocks:
        if isinstance(block, Categorical):
            mat, _ = one_hot(records, block.name)
        elif isinstance(block, TextTfidf):
            if tfidf is None:
                raise ValueError("TextTfidf block needs the tfidf matrix")
            mat = tfidf.rows
        elif isinstance(block, TextEmbedding):
            if embedding is None:
                raise ValueError("TextEmbedding block needs the embedding matrix")
            mat = embedding.rows
        elif isinstance(block, MsLabels):
            if partition is None:
                raise MissingPartition("MsLabels block needs a partition")
            if partition.num_clusters != block.num_clusters:
                raise SizeMismatch(
                    f"MsLabels expects {block.num_clusters} clusters, partition has {partition.num_clusters}"
                )
            mat = partition.membership()
        else:  # pragma: no cover - exhaustive over FeatureBlock
            raise TypeError(f"unknown block {block!r}")
        if mat.shape[0] != n:
            raise SizeMismatch(f"block {block!r} has {mat.shape[0]} rows for {n} records")
        parts.append(np.asarray(mat, dtype=np.float64))
        slices.append((block, slice(start, start + mat.shape[1])))
        start += mat.shape[1]
    return FeatureAssembly(np.hstack(parts), slices)


# ---------------------------------------------------------------------------
# Datasets
# ---------------------------------------------------------------------------

@dataclass
class LabeledDataset:
    features: np.ndarray
    labels: np.ndarray
    class_names: Mapping[int, str] = field(default_factory=lambda: dict(HARM_CLASS_NAMES))

    def __post_init__(self):
        self.features = np.asarray(self.features, dtype=np.float64)
        self.labels = np.asarray(self.labels)
        if self.features.shape[0] != self.labels.shape[0]:
            raise SizeMismatch("feature rows and labels differ in length")

    @property
    def n(self) -> int:
        return self.features.shape[0]


def balanced_sample(dataset: LabeledDataset, per_class_counts: Mapping, seed: int) -> LabeledDataset:
    """Uniform per-class sampling without replacement; deterministic given seed."""
    rng = np.random.default_rng(seed)
    keep: list[np.ndarray] = []
    for cls in sorted(per_class_counts):
        want = int(per_class_counts[cls])
        idx = np.flatnonzero(dataset.labels == cls)
        if idx.size < want:
            raise InsufficientClass(cls, int(idx.size), want)
        chosen = np.sort(rng.choice(idx, size=want, replace=False))
        keep.append(chosen)
    rows = np.concatenate(keep)
    return LabeledDataset(dataset.features[rows], dataset.labels[rows], dataset.class_names)


# ---------------------------------------------------------------------------
# Linear models
# ---------------------------------------------------------------------------

@dataclass
class LinearModel:
    classes: np.ndarray
    weights: np.ndarray  # F x K
    intercept: np.ndarray  # K
    objective_history: list[float] = field(default_factory=list)

    def decision(self, x: np.ndarray) -> np.ndarray:
        return x @ self.weights + self.intercept

    def predict(self, x: np.ndarray) -> np.ndarray:
        return self.classes[np.argmax(self.decision(x), axis=1)]


def ridge_train(train: LabeledDataset, alpha: float = 1.0) -> LinearModel:
    """One-vs-rest ridge regression on +/-1 targets, closed form, intercept
    unpenalized."""
    if alpha <= 0:
        raise ValueError("alpha must be > 0")
    classes = np.unique(train.labels)
    if classes.size < 2:
        raise DegenerateLabels("ridge needs at least two classes")
    x, n = train.features, train.n
    targets = np.where(train.labels[:, None] == classes[None, :], 1.0, -1.0)
    z = np.hstack([x, np.ones((n, 1))])
    gram = z.T @ z
    gram[np.arange(x.shape[1]), np.arange(x.shape[1])] += alpha
    coef = np.linalg.solve(gram, z.T @ targets)
    return LinearModel(classes, coef[:-1], coef[-1])


def svm_linear_train(
    train: LabeledDataset,
    penalty: float = 10.0,
    epochs: int = 100,
    seed: int = 0,
    tol: float = 1e-4,
) -> LinearModel:
    """One-vs-rest hinge-loss classifier, Pegasos step schedule.

    The bias is folded in as a regularized constant-feature column (the
    schedule's large early steps make a free intercept drift). The
    returned model is the best full-batch-objective iterate seen at any
    epoch end, so the recorded objective history is non-increasing.
    Training stops when the epoch objective's relative change falls under
    ``tol`` or at the epoch cap.
    """
    if penalty <= 0:
        raise ValueError("penalty must be > 0")
    classes = np.unique(train.labels)
    if classes.size < 2:
        raise DegenerateLabels("SVM needs at least two classes")
    n = train.n
    x = np.hstack([train.features, np.ones((n, 1))])
    targets = np.where(train.labels[:, None] == classes[None, :], 1.0, -1.0)
    lam = 1.0 / (penalty * n)
    coef = np.zeros((x.shape[1], classes.size))
    rng = np.random.default_rng(seed)

    def objective(w):
        hinge = np.maximum(0.0, 1.0 - targets * (x @ w))
        return lam / 2.0 * float((w * w).sum()) + float(hinge.sum()) / n

    best_obj = objective(coef)
    best = coef.copy()
    history = [best_obj]
    prev_obj = best_obj
    step = 0
    for _ in range(epochs):
        for i in rng.permutation(n):
            step += 1
            eta = 1.0 / (lam * step)
            margins = targets[i] * (x[i] @ coef)
            active = margins < 1.0
            coef *= 1.0 - eta * lam
            if active.any():
                coef[:, active] += eta * np.outer(x[i], targets[i, active])
        obj = objective(coef)
        if obj < best_obj:
            best_obj = obj
            best = coef.copy()
        history.append(best_obj)
        if abs(prev_obj - obj) <= tol * max(1.0, abs(prev_obj)):
            break
        prev_obj = obj
    return LinearModel(classes, best[:-1], best[-1], objective_history=history)


# ---------------------------------------------------------------------------
# Cross-validation
# ---------------------------------------------------------------------------

@dataclass
class ModelSpec:
    kind: str = "ridge"  # "ridge" | "svm"
    alpha: float = 1.0
    penalty: float = 10.0
    tol: float = 1e-4
    epochs: int = 100
    standardize_columns: np.ndarray | None = None

    def __post_init__(self):
        if self.kind not in ("ridge", "svm"):
            raise ValueError(f"unknown model kind {self.kind!r}")


@dataclass
class CVReport:
    fold_scores: list[float]
    mean_f1: float
    std_f1: float
    class_order: list
    per_class: dict
    confusion: np.ndarray

    def to_json(self) -> dict:
        return {
            "fold_scores": self.fold_scores,
            "mean_weighted_f1": self.mean_f1,
            "std_weighted_f1": self.std_f1,
            "classes": [str(c) for c in self.class_order],
            "per_class": self.per_class,
            "confusion": self.confusion.tolist(),
        }


def stratified_folds(labels: np.ndarray, folds: int, seed: int) -> np.ndarray:
    """Deterministic stratified fold ids; class counts per fold differ by <= 1."""
    if folds < 2:
        raise ValueError("folds must be >= 2")
    assignment = np.empty(labels.shape[0], dtype=np.int64)
    rng = np.random.default_rng(np.random.SeedSequence([seed, folds]))
    for cls in np.unique(labels):
        idx = np.flatnonzero(labels == cls)
        if idx.size < folds:
            raise DegenerateLabels(f"class {cls!r} has {idx.size} rows for {folds} folds")
        perm = rng.permutation(idx)
        assignment[perm] = np.arange(perm.size) % folds
    return assignment


def _fit(spec: ModelSpec, train: LabeledDataset, seed: int) -> LinearModel:
    if spec.kind == "ridge":
        return ridge_train(train, alpha=spec.alpha)
    return svm_linear_train(train, penalty=spec.penalty, epochs=spec.epochs, seed=seed, tol=spec.tol)


def cross_validate(dataset: LabeledDataset, spec: ModelSpec, folds: int = 5, seed: int = 0) -> CVReport:
    """Stratified k-fold CV; scaling statistics are fit on training folds only."""
    fold_ids = stratified_folds(dataset.labels, folds, seed)
    classes = np.unique(dataset.labels)
    class_pos = {c: i for i, c in enumerate(classes.tolist())}
    oof_pred = np.empty_like(dataset.labels)
    scores = []
    for f in range(folds):
        train_mask = fold_ids != f
        x_train = dataset.features[train_mask].copy()
        x_test = dataset.features[~train_mask].copy()
        if spec.standardize_columns is not None and spec.standardize_columns.size:
            cols = spec.standardize_columns
            mu = x_train[:, cols].mean(axis=0)
            sd = x_train[:, cols].std(axis=0)
            sd[sd == 0.0] = 1.0
            x_train[:, cols] = (x_train[:, cols] - mu) / sd
            x_test[:, cols] = (x_test[:, cols] - mu) / sd
        model = _fit(spec, LabeledDataset(x_train, dataset.labels[train_mask], dataset.class_names),
                     seed=int(np.random.SeedSequence([seed, f]).generate_state(1)[0]))
        pred = model.predict(x_test)
        oof_pred[~train_mask] = pred
        scores.append(weighted_f1(pred.tolist(), dataset.labels[~train_mask].tolist()))

    confusion = np.zeros((classes.size, classes.size), dtype=np.int64)
    for t, p in zip(dataset.labels.tolist(), oof_pred.tolist()):
        confusion[class_pos[t], class_pos[p]] += 1
    per_class = {}
    for i, cls in enumerate(classes.tolist()):
        tp = confusion[i, i]
        support = confusion[i].sum()
        pred_pos = confusion[:, i].sum()
        precision = tp / pred_pos if pred_pos else 0.0
        recall = tp / support if support else 0.0
        f1 = 2 * precision * recall / (precision + recall) if (precision + recall) > 0 else 0.0
        name = dataset.class_names.get(cls, str(cls)) if isinstance(dataset.class_names, dict) else str(cls)
        per_class[str(cls)] = {
            "name": name,
            "precision": float(precision),
            "recall": float(recall),
            "f1": float(f1),
            "support": int(support),
        }
    return CVReport(
        fold_scores=[float(s) for s in scores],
        mean_f1=float(np.mean(scores)),
        std_f1=float(np.std(scores)),
        class_order=classes.tolist(),
        per_class=per_class,
        confusion=confusion,
    )
