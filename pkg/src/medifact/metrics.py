"""Scoring harness: flag accuracy, sentence-index accuracy, ROUGE-1 F, and
aggregate scores with the NA convention.

Neural metrics are not computed here; externally produced per-item score
files (line-delimited {text_id, score}) merge into the aggregates as extra
channels.
"""
from __future__ import annotations

import json
import logging
from collections import Counter
from dataclasses import dataclass, field
from pathlib import Path
from typing import Mapping, Protocol, Sequence

from .corpus import NO_CORRECTION, ClinicalRecord
from .errors import ValidationError
from .textproc import tokenize

logger = logging.getLogger(__name__)


class ScoredRow(Protocol):
    text_id: str
    flag: bool
    error_index: int
    corrected_sentence: str


@dataclass
class PerItemScore:
    text_id: str
    r1f: float
    flag_hit: bool
    index_hit: bool


@dataclass
class EvalReport:
    flag_accuracy: float
    sentence_accuracy: float
    r1f: float
    aggregate_score: float | None
    aggregate_c: float
    n_items: int
    n_na_pairs: int
    per_item: list[PerItemScore] = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "flag_accuracy": self.flag_accuracy,
            "sentence_accuracy": self.sentence_accuracy,
            "r1f": self.r1f,
            "aggregate_score": self.aggregate_score,
            "aggregate_c": self.aggregate_c,
            "n_items": self.n_items,
            "n_na_pairs": self.n_na_pairs,
            "per_item": [
                {
                    "text_id": item.text_id,
                    "r1f": item.r1f,
                    "flag_hit": item.flag_hit,
                    "index_hit": item.index_hit,
                }
                for item in self.per_item
            ],
        }


def rouge1_f(candidate: str, reference: str) -> float:
    """Unigram ROUGE F-measure with clipped counts.

    Empty vs empty scores 1.0; empty vs non-empty scores 0.0.
    """
    cand = tokenize(candidate)
    ref = tokenize(reference)
    if not cand and not ref:
        return 1.0
    if not cand or not ref:
        return 0.0
    cand_counts = Counter(cand)
    ref_counts = Counter(ref)
    overlap = sum(min(n, ref_counts[tok]) for tok, n in cand_counts.items())
    if overlap == 0:
        return 0.0
    precision = overlap / len(cand)
    recall = overlap / len(ref)
    return 2.0 * precision * recall / (precision + recall)


def _is_na(text: str) -> bool:
    return text.strip().upper() == NO_CORRECTION


def score_na_aware(candidate: str, reference: str) -> float:
    """NA sentinel convention: both NA -> 1.0, exactly one NA -> 0.0."""
    cand_na = _is_na(candidate)
    ref_na = _is_na(reference)
    if cand_na and ref_na:
        return 1.0
    if cand_na or ref_na:
        return 0.0
    return rouge1_f(candidate, reference)


def read_external_scores(path: str | Path) -> dict[str, float]:
    """Load a line-delimited {text_id, score} file."""
    scores: dict[str, float] = {}
    text = Path(path).read_text(encoding="utf-8")
    for line_no, line in enumerate(text.splitlines(), start=1):
        if not line.strip():
            continue
        try:
            row = json.loads(line)
            text_id = str(row["text_id"])
            score = float(row["score"])
        except (json.JSONDecodeError, KeyError, TypeError, ValueError) as exc:
            raise ValidationError(f"{path}:{line_no}: bad score row: {exc}") from exc
        if text_id in scores:
            raise ValidationError(f"{path}:{line_no}: duplicate text_id {text_id!r}")
        scores[text_id] = score
    return scores


def evaluate_run(
    predictions: Sequence[ScoredRow],
    gold: Sequence[ClinicalRecord],
    external_scores: Mapping[str, Mapping[str, float]] | None = None,
) -> EvalReport:
    """Score a run against gold records, aligned by text_id.

    A gold record with no prediction counts as wrong on all three subtasks
    (with a warning). External channels are per-item score maps keyed by
    channel name; unknown text_ids in them are validation errors.
    """
    if not gold:
        raise ValidationError("cannot evaluate against an empty gold set")
    by_id: dict[str, ScoredRow] = {}
    for pred in predictions:
        if pred.text_id in by_id:
            raise ValidationError(f"duplicate text_id in predictions: {pred.text_id!r}")
        by_id[pred.text_id] = pred

    gold_ids = {rec.text_id for rec in gold}
    extras = sorted(set(by_id) - gold_ids)
    if extras:
        logger.warning("ignoring %d predictions with no gold record: %s", len(extras), extras[:5])
    external_scores = external_scores or {}
    for channel, per_item in external_scores.items():
        unknown = sorted(set(per_item) - gold_ids)
        if unknown:
            raise ValidationError(
                f"external score channel {channel!r} has unknown text_id(s): {unknown[:5]}"
            )

    per_item: list[PerItemScore] = []
    channel_means: dict[str, list[float]] = {"r1f": []}
    agg_c_terms: list[float] = []
    n_na_pairs = 0
    for rec in gold:
        gold_flag = bool(rec.gold_flag)
        gold_index = rec.gold_error_index if rec.gold_error_index is not None else -1
        gold_correction = rec.gold_corrected_sentence or NO_CORRECTION
        pred = by_id.get(rec.text_id)
        if pred is None:
            logger.warning("no prediction for %s; counted wrong on all subtasks", rec.text_id)
            flag_hit = False
            index_hit = False
            item_r1f = 0.0
        else:
            flag_hit = pred.flag == gold_flag
            index_hit = pred.error_index == gold_index
            item_r1f = score_na_aware(pred.corrected_sentence, gold_correction)
        if pred is not None and _is_na(pred.corrected_sentence) and _is_na(gold_correction):
            n_na_pairs += 1
        per_item.append(
            PerItemScore(text_id=rec.text_id, r1f=item_r1f, flag_hit=flag_hit, index_hit=index_hit)
        )
        channel_means["r1f"].append(item_r1f)
        item_channels = [item_r1f]
        for channel, scores in external_scores.items():
            if rec.text_id in scores:
                value = scores[rec.text_id]
                channel_means.setdefault(channel, []).append(value)
                item_channels.append(value)
        agg_c_terms.append(max(item_channels))

    n = len(gold)
    flag_accuracy = sum(1 for item in per_item if item.flag_hit) / n
    sentence_accuracy = sum(1 for item in per_item if item.index_hit) / n
    r1f_mean = sum(channel_means["r1f"]) / n
    aggregate_score = sum(
        sum(values) / len(values) for values in channel_means.values()
    ) / len(channel_means)
    aggregate_c = sum(agg_c_terms) / n
    return EvalReport(
        flag_accuracy=flag_accuracy,
        sentence_accuracy=sentence_accuracy,
        r1f=r1f_mean,
        aggregate_score=aggregate_score,
        aggregate_c=aggregate_c,
        n_items=n,
        n_na_pairs=n_na_pairs,
        per_item=per_item,
    )


def render_report(report: EvalReport) -> str:
    lines = [
        f"items:             {report.n_items}",
        f"flag accuracy:     {report.flag_accuracy:.4f}",
        f"sentence accuracy: {report.sentence_accuracy:.4f}",
        f"R1F:               {report.r1f:.4f}",
        f"aggregate score:   {report.aggregate_score:.4f}"
        if report.aggregate_score is not None
        else "aggregate score:   n/a",
        f"aggregate C:       {report.aggregate_c:.4f}",
        f"NA pairs:          {report.n_na_pairs}",
    ]
    return "\n".join(lines)
