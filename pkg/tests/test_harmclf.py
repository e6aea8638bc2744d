"""Classifier, feature-assembly and cross-validation tests."""

import numpy as np
import pytest

import textgraph as tg
from textgraph.corpus import DocumentRecord
from textgraph.embeddings import EmbeddingMatrix, EmbeddingSource
from textgraph.errors import DegenerateLabels, InsufficientClass, MissingPartition
from textgraph.harmclf import (
    Categorical,
    FeatureSpec,
    LabeledDataset,
    ModelSpec,
    MsLabels,
    TextEmbedding,
    TextTfidf,
    assemble_features,
    balanced_sample,
    cross_validate,
    one_hot,
    ridge_train,
    stratified_folds,
    svm_linear_train,
)
from textgraph.partition import Partition
from textgraph.synth import blob_dataset

PAPER_COUNTS = {1: 1016, 2: 1016, 3: 1016, 4: 508, 5: 508}


def records_with(values, category="loc"):
    records = []
    for i, v in enumerate(values):
        cats = {} if v is None else {category: v}
        records.append(DocumentRecord(str(i), tokens=["tok"], categories=cats, harm_label=1))
    return records


# --- one-hot encoding ---------------------------------------------------------

def test_one_hot_first_appearance_order():
    mat, cols = one_hot(records_with(["a", "b", "a"]), "loc")
    assert cols == ["a", "b"]
    assert mat.tolist() == [[1, 0], [0, 1], [1, 0]]


def test_one_hot_single_value():
    mat, cols = one_hot(records_with(["x", "x", "x"]), "loc")
    assert cols == ["x"]
    assert mat.tolist() == [[1], [1], [1]]


def test_one_hot_missing_value_unknown_column():
    mat, cols = one_hot(records_with(["a", None, "b"]), "loc")
    assert cols == ["a", "unknown", "b"]
    assert mat.shape == (3, 3)
    assert mat.sum(axis=1).tolist() == [1, 1, 1]


# --- balanced sampling ----------------------------------------------------------

def test_balanced_sample_paper_counts():
    rng = np.random.default_rng(0)
    labels = np.concatenate([np.full(1500, c) for c in (1, 2, 3)] + [np.full(700, c) for c in (4, 5)])
    data = LabeledDataset(rng.normal(size=(labels.size, 3)), labels)
    sampled = balanced_sample(data, PAPER_COUNTS, seed=1)
    assert sampled.n == 4064
    counts = {c: int((sampled.labels == c).sum()) for c in range(1, 6)}
    assert counts == PAPER_COUNTS


def test_balanced_sample_insufficient():
    data = LabeledDataset(np.zeros((4, 2)), np.array([1, 1, 2, 2]))
    with pytest.raises(InsufficientClass):
        balanced_sample(data, {1: 3, 2: 1}, seed=0)


def test_balanced_sample_one_per_class_deterministic():
    rng = np.random.default_rng(3)
    labels = np.repeat([1, 2, 3, 4, 5], 10)
    data = LabeledDataset(rng.normal(size=(50, 2)), labels)
    a = balanced_sample(data, {c: 1 for c in range(1, 6)}, seed=9)
    b = balanced_sample(data, {c: 1 for c in range(1, 6)}, seed=9)
    assert a.n == 5
    assert sorted(a.labels.tolist()) == [1, 2, 3, 4, 5]
    assert np.array_equal(a.features, b.features)


# --- ridge ------------------------------------------------------------------------

def test_ridge_separable_blobs_perfect_training_f1():
    data = blob_dataset({1: 40, 2: 40, 3: 40}, separation=8.0, seed=0)
    model = ridge_train(data, alpha=1.0)
    pred = model.predict(data.features)
    assert tg.weighted_f1(pred.tolist(), data.labels.tolist()) == 1.0


def test_ridge_normal_equations_residual():
    data = blob_dataset({1: 30, 2: 30, 3: 30}, separation=4.0, seed=1)
    alpha = 2.5
    model = ridge_train(data, alpha=alpha)
    x = data.features
    z = np.hstack([x, np.ones((x.shape[0], 1))])
    targets = np.where(data.labels[:, None] == model.classes[None, :], 1.0, -1.0)
    coef = np.vstack([model.weights, model.intercept])
    penalty = np.vstack([alpha * model.weights, np.zeros((1, targets.shape[1]))])
    residual = z.T @ (z @ coef) + penalty - z.T @ targets
    assert np.linalg.norm(residual) <= 1e-8 * np.linalg.norm(z.T @ targets)


def test_ridge_huge_alpha_collapses_to_intercept_class():
    data = blob_dataset({1: 50, 2: 30}, separation=8.0, seed=2)
    model = ridge_train(data, alpha=1e12)
    assert np.abs(model.weights).max() < 1e-6
    pred = model.predict(data.features)
    assert np.all(pred == 1)  # majority class wins on intercepts


def test_ridge_row_duplication_with_alpha_scaling():
    data = blob_dataset({1: 20, 2: 20}, separation=3.0, seed=3)
    doubled = LabeledDataset(np.vstack([data.features] * 2), np.concatenate([data.labels] * 2))
    m1 = ridge_train(data, alpha=1.0)
    m2 = ridge_train(doubled, alpha=2.0)
    assert np.abs(m1.weights - m2.weights).max() <= 1e-9
    assert np.abs(m1.intercept - m2.intercept).max() <= 1e-9


def test_ridge_rejects_single_class():
    with pytest.raises(DegenerateLabels):
        ridge_train(LabeledDataset(np.zeros((3, 2)), np.array([1, 1, 1])), alpha=1.0)


# --- linear SVM ----------------------------------------------------------------------

def test_svm_separable_blobs():
    data = blob_dataset({1: 40, 2: 40, 3: 40}, separation=8.0, seed=4)
    model = svm_linear_train(data, penalty=10.0, epochs=30, seed=0)
    pred = model.predict(data.features)
    assert tg.weighted_f1(pred.tolist(), data.labels.tolist()) >= 0.99


def test_svm_deterministic_given_seed():
    data = blob_dataset({1: 25, 2: 25}, separation=4.0, seed=5)
    m1 = svm_linear_train(data, epochs=10, seed=7)
    m2 = svm_linear_train(data, epochs=10, seed=7)
    assert np.array_equal(m1.weights, m2.weights)
    assert np.array_equal(m1.intercept, m2.intercept)


def test_svm_objective_history_non_increasing():
    data = blob_dataset({1: 30, 2: 30, 3: 30}, separation=2.0, seed=6)
    model = svm_linear_train(data, epochs=25, seed=1)
    history = np.array(model.objective_history)
    assert np.all(np.diff(history) <= 1e-6)


def test_svm_rejects_single_class():
    with pytest.raises(DegenerateLabels):
        svm_linear_train(LabeledDataset(np.zeros((3, 2)), np.array([2, 2, 2])))


# --- cross-validation ------------------------------------------------------------------

def test_stratified_folds_are_a_partition():
    labels = np.repeat([1, 2, 3], [20, 15, 10])
    folds = stratified_folds(labels, 5, seed=0)
    assert folds.shape == labels.shape
    for f in range(5):
        assert (folds == f).sum() == 9
    for cls, total in ((1, 20), (2, 15), (3, 10)):
        per_fold = [np.sum((folds == f) & (labels == cls)) for f in range(5)]
        assert max(per_fold) - min(per_fold) <= 1
        assert sum(per_fold) == total


def test_stratified_folds_reject_tiny_class():
    labels = np.array([1, 1, 1, 1, 2, 2])
    with pytest.raises(DegenerateLabels):
        stratified_folds(labels, 5, seed=0)


def test_cross_validate_perfect_data():
    data = blob_dataset({c: 40 for c in range(1, 6)}, separation=8.0, seed=7)
    report = cross_validate(data, ModelSpec(kind="ridge"), folds=5, seed=0)
    assert report.mean_f1 >= 0.95
    assert len(report.fold_scores) == 5
    assert report.confusion.sum() == data.n
    assert report.confusion.sum(axis=1).tolist() == [40] * 5


def test_cross_validate_two_folds_four_rows():
    data = LabeledDataset(np.array([[0.0], [0.1], [1.0], [1.1]]), np.array([1, 1, 2, 2]))
    report = cross_validate(data, ModelSpec(kind="ridge"), folds=2, seed=0)
    assert len(report.fold_scores) == 2


def test_cross_validate_standardizes_on_train_only():
    rng = np.random.default_rng(8)
    x = rng.normal(size=(60, 4)) * 100.0 + 5.0
    y = (x[:, 0] > 5.0).astype(int) + 1
    data = LabeledDataset(x, y)
    spec = ModelSpec(kind="ridge", standardize_columns=np.arange(4))
    report = cross_validate(data, spec, folds=5, seed=1)
    assert report.mean_f1 > 0.9


# --- feature assembly ---------------------------------------------------------------------

def embedding_matrix(n, d, seed=0):
    rng = np.random.default_rng(seed)
    return EmbeddingMatrix(rng.normal(size=(n, d)), tuple(str(i) for i in range(n)),
                           EmbeddingSource.EXTERNAL)


def test_assemble_categorical_only():
    records = records_with(["a", "b", "c", "a"])
    out = assemble_features(records, FeatureSpec((Categorical("loc"),)))
    assert out.matrix.shape == (4, 3)
    assert out.total_dimension == 3


def test_assemble_embedding_plus_ms_labels():
    records = records_with(["a"] * 6)
    emb = embedding_matrix(6, 300)
    part = Partition([0, 0, 1, 1, 2, 2])
    out = assemble_features(records, FeatureSpec((TextEmbedding(), MsLabels(3))),
                            partition=part, embedding=emb)
    assert out.matrix.shape == (6, 303)
    assert out.standardize_columns().tolist() == list(range(300))


def test_assemble_dimension_arithmetic():
    records = records_with(["a", "b"] * 3)
    tfidf = EmbeddingMatrix(np.ones((6, 7)), tuple(str(i) for i in range(6)), EmbeddingSource.TFIDF)
    part = Partition([0, 1, 2, 0, 1, 2])
    out = assemble_features(records, FeatureSpec((TextTfidf(), Categorical("loc"), MsLabels(3))),
                            partition=part, tfidf=tfidf)
    assert out.total_dimension == 7 + 2 + 3


def test_assemble_missing_partition():
    records = records_with(["a", "b"])
    with pytest.raises(MissingPartition):
        assemble_features(records, FeatureSpec((MsLabels(2),)))


def test_assemble_never_reads_harm_label():
    records = records_with(["a", "b", "a", "b"])
    harms = [1, 2, 3, 4]
    for rec, h in zip(records, harms):
        rec.harm_label = h
    part = Partition([0, 1, 0, 1])
    out = assemble_features(records, FeatureSpec((Categorical("loc"), MsLabels(2))), partition=part)
    labels = np.array(harms, dtype=float)
    for col in out.matrix.T:
        assert not np.array_equal(col, labels)


def test_informative_block_never_hurts_training_f1():
    rng = np.random.default_rng(9)
    n = 100
    noise = rng.normal(size=(n, 5))
    labels = np.repeat([1, 2], n // 2)
    informative = (labels == 2).astype(float)[:, None]
    weak = LabeledDataset(noise, labels)
    strong = LabeledDataset(np.hstack([noise, informative]), labels)
    f1_weak = tg.weighted_f1(ridge_train(weak).predict(weak.features).tolist(), labels.tolist())
    f1_strong = tg.weighted_f1(ridge_train(strong).predict(strong.features).tolist(), labels.tolist())
    assert f1_strong >= f1_weak
