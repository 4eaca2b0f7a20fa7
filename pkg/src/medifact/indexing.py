"""Resolve the reported error-sentence index against pre-defined numbering.

Dataset sentence numbering does not always follow newline order, so the
final index is the declared prefix of the most similar indexed sentence.
The naive positional variant backs the ablation mode that ignores the
declared numbering.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

from .corpus import IndexedSentence, split_paragraph
from .extractive import similarity

DEFAULT_INDEX_FLOOR = 0.30
NO_INDEX = -1


@dataclass(frozen=True)
class IndexResolution:
    resolved_index: int
    best_similarity: float
    matched_declared_index: int


def resolve_index(
    detected_text: str,
    indexed_sentences: Sequence[IndexedSentence],
    floor: float = DEFAULT_INDEX_FLOOR,
) -> IndexResolution:
    """Declared index of the sentence most similar to the detected text.

    Ties break toward the lowest declared index; a best similarity under
    ``floor`` resolves to -1. The result is invariant to the order in which
    sentences are supplied.
    """
    if not indexed_sentences:
        return IndexResolution(NO_INDEX, 0.0, NO_INDEX)
    best_idx = NO_INDEX
    best_sim = -1.0
    for sent in sorted(indexed_sentences, key=lambda s: s.declared_index):
        sim = similarity(detected_text, sent.body)
        if sim > best_sim:
            best_sim = sim
            best_idx = sent.declared_index
    resolved = best_idx if best_sim >= floor else NO_INDEX
    return IndexResolution(
        resolved_index=resolved,
        best_similarity=best_sim,
        matched_declared_index=best_idx,
    )


def naive_position_index(detected_text: str, text: str) -> int:
    """Position of the most similar naive segment, ignoring declared numbering.

    Mirrors indexing against a plain newline/period split: the reported index
    is the 0-based position of the best segment, -1 for an empty paragraph.
    """
    segments = split_paragraph(text)
    if not segments:
        return NO_INDEX
    best_pos = 0
    best_sim = -1.0
    for pos, segment in enumerate(segments):
        sim = similarity(detected_text, segment)
        if sim > best_sim:
            best_sim = sim
            best_pos = pos
    return best_pos
