"""Tokenization, vocabulary building, and TF-IDF vectorization.

Shared by detection (sentence features) and matching (token sets). Vectors
are sparse (term id, weight) pairs over a vocabulary frozen at fit time, so
trained feature weights stay inspectable term by term.
"""
from __future__ import annotations

import math
import re
from collections import Counter
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from .errors import TrainingError

# Maximal runs of letters/digits; everything else separates. Underscore is
# punctuation here, unlike \w.
_TOKEN_RE = re.compile(r"[^\W_]+", re.UNICODE)


@dataclass(frozen=True)
class TfIdfConfig:
    lowercase: bool = True
    sublinear_tf: bool = False
    l2_normalize: bool = True
    use_bigrams: bool = False


def tokenize(text: str, config: TfIdfConfig | None = None) -> list[str]:
    """Split text into maximal alphanumeric runs, lowercased by default."""
    if config is None:
        config = TfIdfConfig()
    if config.lowercase:
        text = text.lower()
    return _TOKEN_RE.findall(text)


def _features(tokens: Sequence[str], config: TfIdfConfig) -> list[str]:
    if not config.use_bigrams:
        return list(tokens)
    feats = list(tokens)
    feats.extend(f"{a}_{b}" for a, b in zip(tokens, tokens[1:]))
    return feats


@dataclass
class Vocabulary:
    """Term-to-id map with per-term document frequencies."""

    term_to_id: dict[str, int] = field(default_factory=dict)
    document_frequency: list[int] = field(default_factory=list)
    n_documents: int = 0

    def __len__(self) -> int:
        return len(self.term_to_id)


@dataclass
class SparseVector:
    """Sparse feature vector; ids strictly increasing, no stored zeros."""

    ids: np.ndarray
    values: np.ndarray

    def norm(self) -> float:
        return float(math.sqrt(float(np.dot(self.values, self.values))))

    def nnz(self) -> int:
        return int(self.ids.shape[0])


_EMPTY_IDS = np.zeros(0, dtype=np.int32)
_EMPTY_VALUES = np.zeros(0, dtype=np.float64)


def zero_vector() -> SparseVector:
    return SparseVector(ids=_EMPTY_IDS, values=_EMPTY_VALUES)


@dataclass
class TfIdfModel:
    """Frozen vocabulary plus smoothed inverse-document-frequency weights."""

    vocabulary: Vocabulary
    idf: np.ndarray
    config: TfIdfConfig


def fit_tfidf(documents: Sequence[Sequence[str]], config: TfIdfConfig | None = None) -> TfIdfModel:
    """Fit a TF-IDF model over tokenized documents.

    Document frequency counts presence, not multiplicity; the idf weight is
    the smoothed ln((1 + N) / (1 + df)) + 1, strictly positive for any term.
    """
    if config is None:
        config = TfIdfConfig()
    docs = list(documents)
    if not docs:
        raise TrainingError("cannot fit TF-IDF on an empty document list")
    vocab = Vocabulary()
    for tokens in docs:
        seen: set[str] = set()
        for term in _features(tokens, config):
            if term in seen:
                continue
            seen.add(term)
            term_id = vocab.term_to_id.get(term)
            if term_id is None:
                vocab.term_to_id[term] = len(vocab.term_to_id)
                vocab.document_frequency.append(1)
            else:
                vocab.document_frequency[term_id] += 1
    vocab.n_documents = len(docs)
    df = np.asarray(vocab.document_frequency, dtype=np.float64)
    idf = np.log((1.0 + len(docs)) / (1.0 + df)) + 1.0
    return TfIdfModel(vocabulary=vocab, idf=idf, config=config)


def transform(model: TfIdfModel, tokens: Sequence[str]) -> SparseVector:
    """Vectorize one tokenized document against a fitted model.

    Out-of-vocabulary terms contribute nothing; an all-OOV document maps to
    the zero vector.
    """
    counts: Counter[int] = Counter()
    term_to_id = model.vocabulary.term_to_id
    for term in _features(tokens, model.config):
        term_id = term_to_id.get(term)
        if term_id is not None:
            counts[term_id] += 1
    if not counts:
        return zero_vector()
    ids = np.array(sorted(counts), dtype=np.int32)
    tf = np.array([counts[i] for i in ids], dtype=np.float64)
    if model.config.sublinear_tf:
        tf = np.log1p(tf)
    values = tf * model.idf[ids]
    if model.config.l2_normalize:
        norm = math.sqrt(float(np.dot(values, values)))
        if norm > 0.0:
            values = values / norm
    return SparseVector(ids=ids, values=values)


def transform_text(model: TfIdfModel, text: str) -> SparseVector:
    return transform(model, tokenize(text, model.config))


def token_set(text: str) -> frozenset[str]:
    """Lowercased token set, used by fuzzy matching and the inverted index."""
    return frozenset(tokenize(text))


def iter_token_counts(tokens: Iterable[str]) -> Counter:
    return Counter(tokens)
