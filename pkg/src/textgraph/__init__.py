"""Unsupervised multiscale clustering of free-text document collections,
with evaluation metrics and a harm-level classifier on top."""

from .corpus import (
    Corpus,
    CooccurrenceStats,
    DocumentRecord,
    Vocabulary,
    build_vocabulary,
    cooccurrence_stats,
    load_stopwords,
    ngram_frequencies,
    preprocess,
)
from .embeddings import EmbeddingMatrix, EmbeddingSource, load_embeddings, save_embeddings, tfidf_matrix
from .mstability import (
    MarkovProcess,
    ScanConfig,
    ScanResult,
    build_markov_process,
    clustered_autocovariance,
    linear_time_grid,
    log_time_grid,
    louvain_optimize,
    markov_stability,
    scan,
    transition_kernel,
)
from .metrics import (
    contingency_zscores,
    nmi,
    pmi_pair,
    pmi_partition,
    sankey_links,
    variation_of_information,
    weighted_f1,
)
from .partition import Partition
from .scaleselect import RobustScale, find_robust_scales
from .simgraph import (
    SimilarityMatrix,
    SparseGraph,
    cosine_similarity_matrix,
    minimum_spanning_tree,
    mst_knn_graph,
    normalize_similarity,
)

__version__ = "0.1.0"
