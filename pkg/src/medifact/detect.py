"""Stage-1 detection: weak sentence labels from paired paragraphs, two SVMs.

Paragraph-level annotations become sentence-level training sets: gold error
sentences train an error model, clean and corrected sentences train a
correct model. A paragraph is flagged when its best (error - correct) score
clears the flag threshold; the arg-max sentence is the candidate.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Iterable, Sequence

from .config import PipelineConfig
from .corpus import ClinicalRecord
from .errors import TrainingError
from .svm import LinearSvmModel, SvmConfig, decision_score, train_svm
from .textproc import TfIdfModel, fit_tfidf, tokenize, transform

logger = logging.getLogger(__name__)


@dataclass
class DetectorPair:
    tfidf: TfIdfModel
    error_svm: LinearSvmModel
    correct_svm: LinearSvmModel
    flag_threshold: float = 0.0


@dataclass(frozen=True)
class SentenceScore:
    declared_index: int
    combined: float
    error_score: float
    correct_score: float


@dataclass
class DetectionTrainingSet:
    """Weakly labeled sentence texts for both SVMs, plus label counts."""

    error_texts: list[str] = field(default_factory=list)
    error_labels: list[int] = field(default_factory=list)
    correct_texts: list[str] = field(default_factory=list)
    correct_labels: list[int] = field(default_factory=list)

    def counts(self) -> dict[str, int]:
        return {
            "error_positives": self.error_labels.count(1),
            "error_negatives": self.error_labels.count(-1),
            "correct_positives": self.correct_labels.count(1),
            "correct_negatives": self.correct_labels.count(-1),
        }


def build_detection_training_set(records: Iterable[ClinicalRecord]) -> DetectionTrainingSet:
    """Derive sentence-level labels from paragraph-level gold annotations.

    Flagged records: the gold error sentence is an error positive and a
    correct negative; every other sentence is a clean correct positive; the
    gold corrected sentence joins the correct positives. Unflagged records
    contribute all sentences as clean.
    """
    out = DetectionTrainingSet()
    n_flagged = 0
    for rec in records:
        if rec.gold_flag is None:
            continue
        if rec.gold_flag:
            n_flagged += 1
            for sent in rec.indexed_sentences:
                if sent.declared_index == rec.gold_error_index:
                    out.error_texts.append(sent.body)
                    out.error_labels.append(1)
                    out.correct_texts.append(sent.body)
                    out.correct_labels.append(-1)
                else:
                    out.error_texts.append(sent.body)
                    out.error_labels.append(-1)
                    out.correct_texts.append(sent.body)
                    out.correct_labels.append(1)
            if rec.gold_corrected_sentence:
                out.correct_texts.append(rec.gold_corrected_sentence)
                out.correct_labels.append(1)
        else:
            for sent in rec.indexed_sentences:
                out.error_texts.append(sent.body)
                out.error_labels.append(-1)
                out.correct_texts.append(sent.body)
                out.correct_labels.append(1)
    if n_flagged == 0:
        raise TrainingError(
            "no flagged record in the training input; the error model would be single-class"
        )
    return out


def train_detectors(
    records: Sequence[ClinicalRecord], config: PipelineConfig | None = None
) -> DetectorPair:
    """Fit the shared TF-IDF model and train both sentence classifiers."""
    if config is None:
        config = PipelineConfig()
    labeled = build_detection_training_set(records)
    counts = labeled.counts()
    logger.info("detection training set: %s", counts)

    tfidf_cfg = config.tfidf_config()
    fit_texts: list[str] = []
    for rec in records:
        if rec.gold_flag is None:
            continue
        fit_texts.extend(s.body for s in rec.indexed_sentences)
        if rec.gold_flag and rec.gold_corrected_sentence:
            fit_texts.append(rec.gold_corrected_sentence)
    tfidf = fit_tfidf([tokenize(t, tfidf_cfg) for t in fit_texts], tfidf_cfg)
    n_features = len(tfidf.vocabulary)

    def vectors_for(texts: list[str]):
        return [transform(tfidf, tokenize(t, tfidf_cfg)) for t in texts]

    svm_cfg = SvmConfig(
        lam=config.svm_lambda,
        epochs=config.svm_epochs,
        seed=config.seed,
        positive_class_weight=config.positive_class_weight,
    )
    # The class-weight boost targets the error model's rare positives; the
    # correct model's positives are the majority class and stay unweighted.
    correct_cfg = SvmConfig(
        lam=config.svm_lambda,
        epochs=config.svm_epochs,
        seed=config.seed,
        positive_class_weight=1.0,
    )
    error_svm = train_svm(
        vectors_for(labeled.error_texts), labeled.error_labels, svm_cfg, n_features
    )
    correct_svm = train_svm(
        vectors_for(labeled.correct_texts), labeled.correct_labels, correct_cfg, n_features
    )
    return DetectorPair(
        tfidf=tfidf,
        error_svm=error_svm,
        correct_svm=correct_svm,
        flag_threshold=config.flag_threshold,
    )


def score_sentences(detectors: DetectorPair, record: ClinicalRecord) -> list[SentenceScore]:
    """One score per indexed sentence, ascending declared index."""
    cfg = detectors.tfidf.config
    scores: list[SentenceScore] = []
    for sent in sorted(record.indexed_sentences, key=lambda s: s.declared_index):
        vec = transform(detectors.tfidf, tokenize(sent.body, cfg))
        e = decision_score(detectors.error_svm, vec)
        c = decision_score(detectors.correct_svm, vec)
        scores.append(
            SentenceScore(
                declared_index=sent.declared_index,
                combined=e - c,
                error_score=e,
                correct_score=c,
            )
        )
    return scores


def detect_error(detectors: DetectorPair, record: ClinicalRecord) -> tuple[bool, int | None]:
    """Error flag plus the candidate sentence's declared index.

    The candidate is the arg-max combined score (ties: lowest declared
    index); the flag is true when that score exceeds the threshold. No flag,
    no candidate.
    """
    scores = score_sentences(detectors, record)
    if not scores:
        return False, None
    best = scores[0]
    for score in scores[1:]:
        if score.combined > best.combined:
            best = score
    if best.combined > detectors.flag_threshold:
        return True, best.declared_index
    return False, None
