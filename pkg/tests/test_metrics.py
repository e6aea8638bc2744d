"""Metric formula checks, hand examples, metric axioms and library oracles."""

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from sklearn.metrics import f1_score, normalized_mutual_info_score

import textgraph as tg
from textgraph.corpus import DocumentRecord
from textgraph.errors import SizeMismatch, UndefinedPMI, ZeroEntropy
from textgraph.metrics import contingency_counts
from textgraph.partition import Partition

partitions = lambda n: st.lists(st.integers(0, 4), min_size=n, max_size=n).map(Partition)


# --- variation of information -------------------------------------------------

def test_vi_identical_partitions_zero():
    p = Partition([0, 1, 0, 2, 1])
    assert tg.variation_of_information(p, p) == 0.0


def test_vi_one_vs_singletons():
    c = Partition([0, 0, 0, 0])
    d = Partition([0, 1, 2, 3])
    assert tg.variation_of_information(c, d) == pytest.approx(math.log(4), abs=1e-12)


def test_vi_crossing_pairs():
    c = Partition([0, 0, 1, 1])
    d = Partition([0, 1, 0, 1])
    assert tg.variation_of_information(c, d) == pytest.approx(2 * math.log(2), abs=1e-12)


def test_vi_size_mismatch():
    with pytest.raises(SizeMismatch):
        tg.variation_of_information(Partition([0, 1]), Partition([0, 1, 2]))


@given(partitions(8), partitions(8))
@settings(max_examples=80, deadline=None)
def test_vi_symmetry_and_identity(a, b):
    vab = tg.variation_of_information(a, b)
    vba = tg.variation_of_information(b, a)
    assert vab == pytest.approx(vba, abs=1e-12)
    assert vab >= 0.0
    if a == b:
        assert vab == 0.0
    else:
        assert vab > 1e-9  # distinct canonical partitions have positive VI


@given(partitions(8), partitions(8), partitions(8))
@settings(max_examples=80, deadline=None)
def test_vi_triangle_inequality(a, b, c):
    ab = tg.variation_of_information(a, b)
    bc = tg.variation_of_information(b, c)
    ac = tg.variation_of_information(a, c)
    assert ac <= ab + bc + 1e-10


# --- NMI ------------------------------------------------------------------------

def test_nmi_identical():
    p = Partition([0, 0, 1, 1, 2])
    assert tg.nmi(p, Partition([2, 2, 0, 0, 1])) == 1.0


def test_nmi_independent_partitions():
    c = Partition([0, 0, 1, 1])
    d = Partition([0, 1, 0, 1])
    assert tg.nmi(c, d) == pytest.approx(0.0, abs=1e-12)


def test_nmi_strict_merge_hand_value():
    c = Partition([0, 1, 2, 2])
    d = Partition([0, 0, 1, 1])
    n = 4
    h_c = -(0.25 * math.log(0.25) * 2 + 0.5 * math.log(0.5))
    h_d = math.log(2)
    mi = (0.25 * math.log((0.25) / (0.25 * 0.5))) * 2 + 0.5 * math.log(0.5 / (0.5 * 0.5))
    assert tg.nmi(c, d) == pytest.approx(mi / math.sqrt(h_c * h_d), abs=1e-12)


def test_nmi_zero_entropy_raises():
    with pytest.raises(ZeroEntropy):
        tg.nmi(Partition([0, 0, 0]), Partition([0, 1, 2]))


@given(partitions(10), partitions(10))
@settings(max_examples=80, deadline=None)
def test_nmi_matches_sklearn_geometric(a, b):
    if a.num_clusters < 2 or b.num_clusters < 2:
        return
    ours = tg.nmi(a, b)
    theirs = normalized_mutual_info_score(a.labels, b.labels, average_method="geometric")
    assert ours == pytest.approx(theirs, abs=1e-10)
    assert 0.0 <= ours <= 1.0


# --- PMI ------------------------------------------------------------------------

def _stats(p1, p2, p12, n=100):
    from textgraph.corpus import CooccurrenceStats

    return CooccurrenceStats({"u": p1, "v": p2}, {frozenset(("u", "v")): p12}, n)


def test_pmi_independent_words_zero():
    assert tg.pmi_pair("u", "v", _stats(0.5, 0.4, 0.2)) == pytest.approx(0.0, abs=1e-15)


def test_pmi_perfect_cooccurrence():
    assert tg.pmi_pair("u", "v", _stats(0.5, 0.5, 0.5)) == pytest.approx(math.log(2), abs=1e-15)


def test_pmi_never_cooccurring_undefined():
    with pytest.raises(UndefinedPMI):
        tg.pmi_pair("u", "v", _stats(0.5, 0.5, 0.0))


def test_pmi_symmetric():
    stats = _stats(0.3, 0.6, 0.25)
    assert tg.pmi_pair("u", "v", stats) == tg.pmi_pair("v", "u", stats)


def test_pmi_partition_private_vocabularies():
    # Two clusters of 3 docs; each cluster's words always co-occur within
    # its own documents only: every within-cluster pair has
    # PMI = ln(N / n_docs_containing) = ln(6/3) = ln 2.
    docs = [["a", "b"]] * 3 + [["c", "d"]] * 3
    corpus = tg.Corpus.from_records(
        [DocumentRecord(str(i), tokens=t) for i, t in enumerate(docs)]
    )
    part = Partition([0, 0, 0, 1, 1, 1])
    report = tg.pmi_partition(part, corpus, top_n_words=2)
    for cluster in report.clusters:
        assert cluster.median_pmi == pytest.approx(math.log(2), abs=1e-12)
    assert report.pmi_hat == pytest.approx(math.log(2), abs=1e-12)


def test_pmi_partition_single_cluster_weight_one():
    docs = [["a", "b"], ["a", "b"], ["a", "c"]]
    corpus = tg.Corpus.from_records(
        [DocumentRecord(str(i), tokens=t) for i, t in enumerate(docs)]
    )
    part = Partition([0, 0, 0])
    report = tg.pmi_partition(part, corpus, top_n_words=3)
    assert report.pmi_hat == pytest.approx(report.clusters[0].median_pmi)


def test_pmi_partition_planted_beats_shuffled():
    from textgraph.synth import two_topic_corpus

    records, planted = two_topic_corpus(n_docs=80, seed=5)
    for rec in records:
        rec.tokens = tg.preprocess(rec.raw_text)
    corpus = tg.Corpus.from_records(records)
    planted_score = tg.pmi_partition(planted, corpus).pmi_hat
    rng = np.random.default_rng(0)
    shuffled = Partition(rng.permutation(planted.labels))
    assert planted_score > tg.pmi_partition(shuffled, corpus).pmi_hat


# --- contingency z-scores ---------------------------------------------------------

def test_contingency_hand_example():
    part = Partition([0, 0, 1, 1])
    cats = ["x", "y", "x", "y"]
    table = tg.contingency_zscores(part, cats)
    assert table.counts.tolist() == [[1, 1], [1, 1]]
    assert np.allclose(table.z_scores, 0.0)


def test_contingency_identical_labels_structure():
    part = Partition([0, 0, 1, 1, 2, 2])
    cats = ["a", "a", "b", "b", "c", "c"]
    table = tg.contingency_zscores(part, cats)
    assert np.all(np.diag(table.z_scores) > 0)
    off = table.z_scores[~np.eye(3, dtype=bool)]
    assert np.all(off < 0)


def test_contingency_independent_labels_unit_std():
    rng = np.random.default_rng(42)
    n, c, k = 40000, 20, 20
    part = Partition(rng.integers(0, c, size=n))
    cats = rng.integers(0, k, size=n).tolist()
    table = tg.contingency_zscores(part, cats)
    assert table.z_scores.std() == pytest.approx(1.0, abs=0.2)


def test_contingency_marginals_consistent():
    part = Partition([0, 1, 0, 2, 1, 0])
    cats = ["a", "b", "a", "a", "b", "c"]
    table = tg.contingency_zscores(part, cats)
    assert table.counts.sum() == 6
    assert table.counts.sum(axis=1).tolist() == part.sizes().tolist()


# --- Sankey links ------------------------------------------------------------------

def test_sankey_identical_partitions_diagonal():
    p = Partition([0, 0, 1, 1, 2])
    links = tg.sankey_links(p, p)
    assert links == [(0, 0, 2), (1, 1, 2), (2, 2, 1)]


def test_sankey_strict_refinement_single_outlink():
    fine = Partition([0, 1, 2, 3])
    coarse = Partition([0, 0, 1, 1])
    links = tg.sankey_links(fine, coarse)
    assert [l[0] for l in links] == [0, 1, 2, 3]
    assert sum(l[2] for l in links) == 4


def test_sankey_crossing_six_nodes():
    fine = Partition([0, 0, 1, 1, 2, 2])
    coarse = Partition([0, 1, 0, 1, 0, 1])
    links = tg.sankey_links(fine, coarse)
    assert links == [(0, 0, 1), (0, 1, 1), (1, 0, 1), (1, 1, 1), (2, 0, 1), (2, 1, 1)]
    assert sum(l[2] for l in links) == 6


@given(partitions(12), partitions(12))
@settings(max_examples=40, deadline=None)
def test_sankey_weights_marginalize(a, b):
    links = tg.sankey_links(a, b)
    counts = contingency_counts(a, b)
    assert sum(l[2] for l in links) == 12
    for i in range(a.num_clusters):
        assert sum(w for f, _, w in links if f == i) == counts[i].sum()


# --- weighted F1 --------------------------------------------------------------------

def test_weighted_f1_perfect():
    assert tg.weighted_f1([1, 2, 3], [1, 2, 3]) == 1.0


def test_weighted_f1_single_prediction_two_classes():
    pred = [0, 0, 0, 0]
    true = [0, 0, 1, 1]
    assert tg.weighted_f1(pred, true) == pytest.approx(1 / 3, abs=1e-12)


def test_weighted_f1_hand_confusion():
    pred = [0, 0, 1, 1, 0, 1]
    true = [0, 0, 0, 1, 1, 1]
    assert tg.weighted_f1(pred, true) == pytest.approx(2 / 3, abs=1e-12)


def test_weighted_f1_relabeling_invariance():
    pred = [0, 1, 1, 2, 0]
    true = [0, 1, 2, 2, 1]
    remap = {0: 7, 1: 3, 2: 9}
    assert tg.weighted_f1([remap[p] for p in pred], [remap[t] for t in true]) == pytest.approx(
        tg.weighted_f1(pred, true), abs=1e-15
    )


@given(
    st.lists(st.integers(0, 3), min_size=2, max_size=30),
    st.lists(st.integers(0, 3), min_size=2, max_size=30),
)
@settings(max_examples=80, deadline=None)
def test_weighted_f1_matches_sklearn(pred, true):
    size = min(len(pred), len(true))
    pred, true = pred[:size], true[:size]
    ours = tg.weighted_f1(pred, true)
    theirs = f1_score(true, pred, average="weighted", zero_division=0)
    assert ours == pytest.approx(theirs, abs=1e-10)
