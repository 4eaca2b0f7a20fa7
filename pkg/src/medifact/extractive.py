"""Extractive correction: fuzzy-match a paragraph against the training pairs.

Flagged training records are indexed once; queries are pre-filtered through
an inverted token index so matching stays near-linear over thousands of
entries, then scored with max(edit similarity, token Jaccard). A returned
correction is always byte-equal to some indexed gold corrected sentence.
"""
from __future__ import annotations

import logging
import re
from dataclasses import dataclass
from typing import Iterable, Sequence

from . import kernels
from .corpus import ClinicalRecord
from .textproc import tokenize

logger = logging.getLogger(__name__)

DEFAULT_MIN_SIMILARITY = 0.85
DEFAULT_MIN_SENTENCE_SIMILARITY = 0.60
PREFILTER_RARE_TOKENS = 10

_WS_RE = re.compile(r"\s+")


def normalize(text: str) -> str:
    """Lowercase and collapse runs of whitespace."""
    return _WS_RE.sub(" ", text.strip().lower())


def edit_similarity(a: str, b: str) -> float:
    """1 - levenshtein/max-length on normalized strings; both empty -> 1."""
    na, nb = normalize(a), normalize(b)
    longest = max(len(na), len(nb))
    if longest == 0:
        return 1.0
    return 1.0 - kernels.levenshtein(na, nb) / longest


def token_jaccard(a: str, b: str) -> float:
    sa, sb = set(tokenize(a)), set(tokenize(b))
    union = sa | sb
    if not union:
        return 0.0
    return len(sa & sb) / len(union)


def similarity(a: str, b: str) -> float:
    """Fuzzy similarity in [0, 1]: max of edit similarity and token Jaccard."""
    na, nb = normalize(a), normalize(b)
    if not na and not nb:
        return 1.0
    return max(_edit_sim_normalized(na, nb), token_jaccard(a, b))


def _edit_sim_normalized(na: str, nb: str) -> float:
    longest = max(len(na), len(nb))
    if longest == 0:
        return 1.0
    if na == nb:
        return 1.0
    return 1.0 - kernels.levenshtein(na, nb) / longest


@dataclass(frozen=True)
class IndexEntry:
    """One flagged training pair, pre-normalized for matching."""

    text_id: str
    normalized_paragraph: str
    sentence_bodies: tuple[tuple[int, str], ...]
    gold_error_index: int
    error_sentence: str
    gold_corrected_sentence: str


@dataclass
class MatchResult:
    matched_text_id: str
    paragraph_similarity: float
    sentence_similarity: float
    proposed_correction: str
    error_sentence: str


@dataclass
class TrainingPairIndex:
    entries: list[IndexEntry]
    token_index: dict[str, list[int]]

    def __len__(self) -> int:
        return len(self.entries)


def build_pair_index(records: Iterable[ClinicalRecord]) -> TrainingPairIndex:
    """Index flagged records that carry a usable correction pair."""
    entries: list[IndexEntry] = []
    token_index: dict[str, list[int]] = {}
    skipped = 0
    for rec in records:
        if rec.gold_flag is not True:
            continue
        error_sent = (
            rec.sentence_by_index(rec.gold_error_index)
            if rec.gold_error_index is not None
            else None
        )
        if error_sent is None or not rec.gold_corrected_sentence:
            skipped += 1
            continue
        pos = len(entries)
        entries.append(
            IndexEntry(
                text_id=rec.text_id,
                normalized_paragraph=normalize(rec.text),
                sentence_bodies=tuple(
                    (s.declared_index, normalize(s.body)) for s in rec.indexed_sentences
                ),
                gold_error_index=rec.gold_error_index,
                error_sentence=error_sent.body,
                gold_corrected_sentence=rec.gold_corrected_sentence,
            )
        )
        for token in set(tokenize(rec.text)):
            token_index.setdefault(token, []).append(pos)
    if skipped:
        logger.warning("pair index skipped %d flagged records without usable pairs", skipped)
    return TrainingPairIndex(entries=entries, token_index=token_index)


def _candidates(index: TrainingPairIndex, paragraph: str) -> list[int]:
    query_tokens = set(tokenize(paragraph))
    postings = [
        (len(index.token_index[t]), t) for t in query_tokens if t in index.token_index
    ]
    if not postings:
        return []
    postings.sort()
    hits: set[int] = set()
    for _, token in postings[:PREFILTER_RARE_TOKENS]:
        hits.update(index.token_index[token])
    return sorted(hits)


def best_training_match(
    index: TrainingPairIndex,
    paragraph: str,
    min_similarity: float = DEFAULT_MIN_SIMILARITY,
) -> MatchResult | None:
    """Most similar indexed paragraph, if it clears the similarity floor.

    Ties go to the lexicographically smallest text_id. Candidates whose
    similarity provably cannot reach the current best (length bound on the
    edit distance) skip the quadratic edit-distance pass.
    """
    query_norm = normalize(paragraph)
    scored: list[tuple[float, float, IndexEntry]] = []
    for pos in _candidates(index, paragraph):
        entry = index.entries[pos]
        tok_sim = token_jaccard(paragraph, entry.normalized_paragraph)
        longest = max(len(query_norm), len(entry.normalized_paragraph))
        if longest:
            edit_upper = 1.0 - abs(len(query_norm) - len(entry.normalized_paragraph)) / longest
        else:
            edit_upper = 1.0
        scored.append((max(tok_sim, edit_upper), tok_sim, entry))
    # Highest upper bound first: once a bound falls below the running best,
    # no later candidate can win and the quadratic pass stops early.
    scored.sort(key=lambda item: -item[0])
    best_entry: IndexEntry | None = None
    best_sim = -1.0
    for upper, tok_sim, entry in scored:
        if upper < best_sim:
            break
        sim = max(tok_sim, _edit_sim_normalized(query_norm, entry.normalized_paragraph))
        if sim > best_sim or (sim == best_sim and best_entry is not None and entry.text_id < best_entry.text_id):
            best_sim = sim
            best_entry = entry
    if best_entry is None or best_sim < min_similarity:
        return None
    return MatchResult(
        matched_text_id=best_entry.text_id,
        paragraph_similarity=best_sim,
        sentence_similarity=0.0,
        proposed_correction=best_entry.gold_corrected_sentence,
        error_sentence=best_entry.error_sentence,
    )


def best_training_match_exhaustive(
    index: TrainingPairIndex,
    paragraph: str,
    min_similarity: float = DEFAULT_MIN_SIMILARITY,
) -> MatchResult | None:
    """Full scan with no token pre-filter or pruning; oracle for the fast path."""
    query_norm = normalize(paragraph)
    best_entry: IndexEntry | None = None
    best_sim = -1.0
    for entry in index.entries:
        sim = max(
            token_jaccard(paragraph, entry.normalized_paragraph),
            _edit_sim_normalized(query_norm, entry.normalized_paragraph),
        )
        if sim > best_sim or (sim == best_sim and best_entry is not None and entry.text_id < best_entry.text_id):
            best_sim = sim
            best_entry = entry
    if best_entry is None or best_sim < min_similarity:
        return None
    return MatchResult(
        matched_text_id=best_entry.text_id,
        paragraph_similarity=best_sim,
        sentence_similarity=0.0,
        proposed_correction=best_entry.gold_corrected_sentence,
        error_sentence=best_entry.error_sentence,
    )


def extract_correction(
    match: MatchResult,
    detected_sentence: str,
    min_sentence_similarity: float = DEFAULT_MIN_SENTENCE_SIMILARITY,
) -> str | None:
    """Lift the matched pair's correction when its error sentence agrees.

    Also records the sentence similarity on the match. Returns None (routing
    falls through to the abstractive backend) below the floor.
    """
    sent_sim = similarity(detected_sentence, match.error_sentence)
    match.sentence_similarity = sent_sim
    if sent_sim < min_sentence_similarity:
        return None
    return match.proposed_correction


def rare_query_tokens(index: TrainingPairIndex, paragraph: str, k: int = PREFILTER_RARE_TOKENS) -> list[str]:
    """The k indexed query tokens with the shortest postings (diagnostics)."""
    query_tokens = set(tokenize(paragraph))
    postings = sorted(
        (len(index.token_index[t]), t) for t in query_tokens if t in index.token_index
    )
    return [t for _, t in postings[:k]]


def sequence_token_diff(a: Sequence[str], b: Sequence[str]) -> int:
    """Token-level edit distance, used for the abstractive edit budget."""
    return kernels.levenshtein_tokens(list(a), list(b))
