"""Exception types raised across the package.

Every error that callers are expected to handle derives from
:class:`TextgraphError`, so pipeline code can catch one base class at the
stage boundary and turn it into an exit status.
"""

from __future__ import annotations


class TextgraphError(Exception):
    """Base class for all package errors."""


# --- corpus / embeddings ---------------------------------------------------

class DocumentEmptyAfterPreprocessing(TextgraphError):
    def __init__(self, doc_id: str):
        super().__init__(f"document {doc_id!r} has no tokens after preprocessing")
        self.doc_id = doc_id


class MissingVector(TextgraphError):
    def __init__(self, doc_id: str):
        super().__init__(f"no embedding vector for document {doc_id!r}")
        self.doc_id = doc_id


class DimensionMismatch(TextgraphError):
    def __init__(self, expected: int, found: int, where: str = ""):
        msg = f"expected dimension {expected}, found {found}"
        if where:
            msg += f" ({where})"
        super().__init__(msg)
        self.expected = expected
        self.found = found


class ZeroVector(TextgraphError):
    def __init__(self, doc_id: str):
        super().__init__(f"embedding vector for document {doc_id!r} is all zero")
        self.doc_id = doc_id


class EmbeddingFormatError(TextgraphError):
    """Malformed embedding interchange file."""


# --- similarity graph ------------------------------------------------------

class DegenerateCorpus(TextgraphError):
    """All documents are identical; the normalized distance matrix is zero."""


class Disconnected(TextgraphError):
    """Graph is not connected (cannot happen for MST-backed graphs)."""


# --- metrics ---------------------------------------------------------------

class SizeMismatch(TextgraphError):
    """Two partitions or label sequences do not cover the same node set."""


class ZeroEntropy(TextgraphError):
    """A partition has zero entropy (single cluster); NMI is undefined."""


class UndefinedPMI(TextgraphError):
    """Word pair never co-occurs (or a word has zero probability)."""


# --- classifier ------------------------------------------------------------

class InsufficientClass(TextgraphError):
    def __init__(self, label, have: int, want: int):
        super().__init__(f"class {label!r} has {have} rows, {want} requested")
        self.label = label
        self.have = have
        self.want = want


class DegenerateLabels(TextgraphError):
    """Training labels do not support the requested operation."""


class MissingPartition(TextgraphError):
    """A cluster-label feature block was requested without a partition."""


# --- pipeline / CLI --------------------------------------------------------

class ConfigError(TextgraphError):
    """Invalid or incomplete pipeline configuration."""


class StaleArtifact(TextgraphError):
    """Stage inputs changed since the recorded manifest entry (rerun upstream or --force)."""
