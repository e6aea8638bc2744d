"""Document corpus handling: tokenization, vocabulary statistics, word
co-occurrence probabilities and n-gram frequency lists.

The preprocessing contract: lowercase, split on word boundaries, drop
punctuation-only and digit-only tokens, stem (Porter with Snowball
fallback), then drop stop-words. Stop-word removal happens after
stemming, so the removal applies to the stemmed forms.
"""

from __future__ import annotations

import json
import re
from collections import Counter
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path
from typing import Iterable, Mapping, Sequence

from .errors import ConfigError
from .stemming import stem_token

_TOKEN_RE = re.compile(r"[^\W_]+", re.UNICODE)


def load_stopwords(path: str | Path | None = None) -> frozenset[str]:
    """Load a stop-word list (one token per line, UTF-8).

    Without a path, returns the pinned 179-word English list shipped with
    the package.
    """
    if path is None:
        text = resources.files("textgraph.resources").joinpath("stopwords_en.txt").read_text("utf-8")
    else:
        text = Path(path).read_text("utf-8")
    return frozenset(line.strip() for line in text.splitlines() if line.strip())


_DEFAULT_STOPWORDS = load_stopwords()


def preprocess(raw_text: str, stopword_list: frozenset[str] | set[str] | None = None) -> list[str]:
    """Turn raw text into a normalized stem sequence. Empty input gives []."""
    if stopword_list is None:
        stopword_list = _DEFAULT_STOPWORDS
    tokens = _TOKEN_RE.findall(raw_text.lower())
    out = []
    for tok in tokens:
        if tok.isdigit():
            continue
        stem = stem_token(tok)
        if stem in stopword_list:
            continue
        out.append(stem)
    return out


@dataclass
class DocumentRecord:
    """One report: identity, raw text, token sequence and hand-coded attributes."""

    doc_id: str
    raw_text: str = ""
    tokens: list[str] = field(default_factory=list)
    categories: dict[str, str] = field(default_factory=dict)
    harm_label: int | None = None

    def __post_init__(self):
        if self.harm_label is not None and self.harm_label not in (1, 2, 3, 4, 5):
            raise ValueError(f"harm_label must be in 1..5, got {self.harm_label!r}")


@dataclass(frozen=True)
class TermStats:
    term_id: int
    document_frequency: int
    corpus_frequency: int


class Vocabulary(Mapping[str, TermStats]):
    """term -> (term_id, document frequency, corpus frequency).

    Term ids are assigned in lexicographic term order, so the vocabulary
    (and everything derived from it) is invariant under record
    permutation.
    """

    def __init__(self, df: Mapping[str, int], cf: Mapping[str, int]):
        self._stats = {}
        for term_id, term in enumerate(sorted(df)):
            self._stats[term] = TermStats(term_id, df[term], cf[term])

    def __getitem__(self, term: str) -> TermStats:
        return self._stats[term]

    def __iter__(self):
        return iter(self._stats)

    def __len__(self) -> int:
        return len(self._stats)

    @property
    def terms(self) -> list[str]:
        return sorted(self._stats)


def build_vocabulary(records: Sequence[DocumentRecord]) -> Vocabulary:
    df: Counter[str] = Counter()
    cf: Counter[str] = Counter()
    for rec in records:
        cf.update(rec.tokens)
        df.update(set(rec.tokens))
    return Vocabulary(df, cf)


@dataclass
class Corpus:
    records: list[DocumentRecord]
    vocabulary: Vocabulary

    @classmethod
    def from_records(cls, records: Iterable[DocumentRecord]) -> "Corpus":
        records = list(records)
        seen = set()
        for rec in records:
            if rec.doc_id in seen:
                raise ValueError(f"duplicate doc_id {rec.doc_id!r}")
            seen.add(rec.doc_id)
        return cls(records, build_vocabulary(records))

    def __len__(self) -> int:
        return len(self.records)

    @property
    def doc_ids(self) -> list[str]:
        return [rec.doc_id for rec in self.records]


@dataclass
class CooccurrenceStats:
    """Document-level occurrence probabilities for a term subset.

    ``p_term[w]`` is the fraction of documents containing w; ``p_pair``
    maps unordered pairs (as frozensets) to the fraction of documents
    containing both words.
    """

    p_term: dict[str, float]
    p_pair: dict[frozenset[str], float]
    universe_size: int

    def pair_probability(self, w1: str, w2: str) -> float:
        return self.p_pair.get(frozenset((w1, w2)), 0.0)


def cooccurrence_stats(records: Sequence[DocumentRecord], term_subset: Iterable[str]) -> CooccurrenceStats:
    """Exact document-count probabilities P(w) and P(w1 w2) over ``records``."""
    terms = sorted(set(term_subset))
    n = len(records)
    doc_count: Counter[str] = Counter()
    pair_count: Counter[frozenset[str]] = Counter()
    term_set = set(terms)
    for rec in records:
        present = sorted(term_set.intersection(rec.tokens))
        doc_count.update(present)
        for i in range(len(present)):
            for j in range(i + 1, len(present)):
                pair_count[frozenset((present[i], present[j]))] += 1
    p_term = {w: doc_count[w] / n if n else 0.0 for w in terms}
    p_pair = {pair: c / n for pair, c in pair_count.items()}
    return CooccurrenceStats(p_term, p_pair, n)


def ngram_frequencies(records: Sequence[DocumentRecord], n: int, top_m: int) -> list[tuple[str, int]]:
    """Top contiguous token n-grams over a record group, ties lexicographic."""
    if n not in (2, 3):
        raise ValueError(f"n must be 2 or 3, got {n}")
    counts: Counter[str] = Counter()
    for rec in records:
        toks = rec.tokens
        for i in range(len(toks) - n + 1):
            counts[" ".join(toks[i : i + n])] += 1
    ranked = sorted(counts.items(), key=lambda kv: (-kv[1], kv[0]))
    return ranked[:top_m]


# ---------------------------------------------------------------------------
# Document file I/O (JSON-lines)
# ---------------------------------------------------------------------------

def read_documents(path: str | Path) -> list[DocumentRecord]:
    """Read raw documents from a JSON-lines file (fields: id, text,
    optional categories, optional harm). Tokens are not yet populated."""
    records = []
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            line = line.strip()
            if not line:
                continue
            try:
                obj = json.loads(line)
            except json.JSONDecodeError as exc:
                raise ConfigError(f"{path}:{lineno}: invalid JSON ({exc})") from exc
            if "id" not in obj or "text" not in obj:
                raise ConfigError(f"{path}:{lineno}: document needs 'id' and 'text'")
            records.append(
                DocumentRecord(
                    doc_id=str(obj["id"]),
                    raw_text=obj["text"],
                    categories={str(k): str(v) for k, v in (obj.get("categories") or {}).items()},
                    harm_label=obj.get("harm"),
                )
            )
    return records


def write_documents(records: Sequence[DocumentRecord], path: str | Path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for rec in records:
            obj: dict = {"id": rec.doc_id, "text": rec.raw_text}
            if rec.categories:
                obj["categories"] = rec.categories
            if rec.harm_label is not None:
                obj["harm"] = rec.harm_label
            fh.write(json.dumps(obj, sort_keys=True) + "\n")


def write_tokenized(records: Sequence[DocumentRecord], path: str | Path) -> None:
    """Persist preprocessed records (the `preprocess` stage artifact)."""
    with open(path, "w", encoding="utf-8") as fh:
        for rec in records:
            obj: dict = {"id": rec.doc_id, "tokens": rec.tokens}
            if rec.categories:
                obj["categories"] = rec.categories
            if rec.harm_label is not None:
                obj["harm"] = rec.harm_label
            fh.write(json.dumps(obj, sort_keys=True) + "\n")


def read_tokenized(path: str | Path) -> list[DocumentRecord]:
    records = []
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            line = line.strip()
            if not line:
                continue
            obj = json.loads(line)
            if "id" not in obj or "tokens" not in obj:
                raise ConfigError(f"{path}:{lineno}: tokenized record needs 'id' and 'tokens'")
            records.append(
                DocumentRecord(
                    doc_id=str(obj["id"]),
                    tokens=[str(t) for t in obj["tokens"]],
                    categories={str(k): str(v) for k, v in (obj.get("categories") or {}).items()},
                    harm_label=obj.get("harm"),
                )
            )
    return records
