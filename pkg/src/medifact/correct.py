"""Stage-2 routing: extraction first, abstractive backend next, fallback last.

The abstractive backend is pluggable behind a small wire protocol (POST
/correct, GET /health). Backend output is held to a token edit budget: a
rewrite that strays more than ``max_edit_tokens`` tokens from the detected
sentence is rejected and the copy-through fallback applies, so the pipeline
never emits an unbounded rewrite. Backend failures degrade per record, never
abort a run.
"""
from __future__ import annotations

import json
import logging
import threading
import urllib.error
import urllib.request
from dataclasses import dataclass
from typing import Protocol

from .config import PipelineConfig
from .corpus import NO_CORRECTION, NO_ERROR_INDEX, ClinicalRecord
from .detect import DetectorPair, detect_error
from .errors import BackendError
from .extractive import (
    TrainingPairIndex,
    best_training_match,
    extract_correction,
    sequence_token_diff,
)
from .indexing import naive_position_index, resolve_index
from .textproc import tokenize

logger = logging.getLogger(__name__)

MODES = ("extractive_only", "qa", "qa_with_resolver")

PROVENANCE_EXTRACTIVE = "extractive"
PROVENANCE_ABSTRACTIVE = "abstractive"
PROVENANCE_FALLBACK = "fallback"
PROVENANCE_NONE = "none"


@dataclass(frozen=True)
class CorrectionRequest:
    context: str
    error_sentence: str
    question: str


@dataclass(frozen=True)
class BackendReply:
    corrected_sentence: str
    confidence: float


class CorrectionBackend(Protocol):
    def correct(self, request: CorrectionRequest) -> BackendReply: ...


class FallbackBackend:
    """Copy-through: emits the detected sentence unchanged, confidence 0."""

    name = "fallback"

    def correct(self, request: CorrectionRequest) -> BackendReply:
        return BackendReply(corrected_sentence=request.error_sentence, confidence=0.0)


class HttpBackend:
    """JSON-over-HTTP client for the correction wire protocol."""

    name = "http"

    def __init__(self, base_url: str, timeout: float = 10.0, max_inflight: int = 4):
        self.base_url = base_url.rstrip("/")
        self.timeout = timeout
        self._gate = threading.Semaphore(max(1, max_inflight))

    def health(self) -> bool:
        try:
            with urllib.request.urlopen(self.base_url + "/health", timeout=self.timeout) as resp:
                if resp.status != 200:
                    return False
                body = json.loads(resp.read().decode("utf-8"))
                return body.get("status") == "ok"
        except (OSError, ValueError):
            return False

    def correct(self, request: CorrectionRequest) -> BackendReply:
        payload = json.dumps(
            {
                "context": request.context,
                "question": request.question,
                "error_sentence": request.error_sentence,
            },
            ensure_ascii=False,
        ).encode("utf-8")
        req = urllib.request.Request(
            self.base_url + "/correct",
            data=payload,
            headers={"Content-Type": "application/json; charset=utf-8"},
            method="POST",
        )
        with self._gate:
            try:
                with urllib.request.urlopen(req, timeout=self.timeout) as resp:
                    raw = resp.read().decode("utf-8")
            except urllib.error.HTTPError as exc:
                raise BackendError(f"backend returned HTTP {exc.code}") from exc
            except (OSError, ValueError) as exc:
                raise BackendError(f"backend unreachable: {exc}") from exc
        try:
            body = json.loads(raw)
            corrected = body["corrected_sentence"]
            confidence = float(body["confidence"])
        except (KeyError, TypeError, ValueError) as exc:
            raise BackendError(f"malformed backend response: {raw[:200]!r}") from exc
        if not isinstance(corrected, str):
            raise BackendError("backend corrected_sentence is not a string")
        return BackendReply(corrected_sentence=corrected, confidence=confidence)


@dataclass(frozen=True)
class Prediction:
    text_id: str
    flag: bool
    error_index: int
    corrected_sentence: str
    provenance: str
    confidence: float

    def __post_init__(self):
        negative = (
            not self.flag
            and self.error_index == NO_ERROR_INDEX
            and self.corrected_sentence == NO_CORRECTION
            and self.provenance == PROVENANCE_NONE
        )
        positive = (
            self.flag
            and self.error_index != NO_ERROR_INDEX
            and self.corrected_sentence not in ("", NO_CORRECTION)
            and self.provenance != PROVENANCE_NONE
        )
        if not (negative or positive):
            raise ValueError(f"inconsistent prediction: {self}")
        if not 0.0 <= self.confidence <= 1.0:
            raise ValueError(f"confidence out of range: {self.confidence}")


def negative_prediction(text_id: str) -> Prediction:
    return Prediction(
        text_id=text_id,
        flag=False,
        error_index=NO_ERROR_INDEX,
        corrected_sentence=NO_CORRECTION,
        provenance=PROVENANCE_NONE,
        confidence=0.0,
    )


def correct_abstractive(
    backend: CorrectionBackend,
    request: CorrectionRequest,
    max_edit_tokens: int = 2,
) -> tuple[str, float, str]:
    """Query the backend and enforce the token edit budget.

    Returns (corrected sentence, confidence, provenance). Budget violations
    and backend failures degrade to the copy-through fallback.
    """
    try:
        reply = backend.correct(request)
    except BackendError as exc:
        logger.warning("abstractive backend failed, falling back: %s", exc)
        return request.error_sentence, 0.0, PROVENANCE_FALLBACK

    corrected = reply.corrected_sentence.strip()
    if not corrected:
        return request.error_sentence, 0.0, PROVENANCE_FALLBACK
    diff = sequence_token_diff(tokenize(corrected), tokenize(request.error_sentence))
    if diff > max_edit_tokens:
        logger.info(
            "backend rewrite rejected: %d token edits exceed budget %d", diff, max_edit_tokens
        )
        return request.error_sentence, 0.0, PROVENANCE_FALLBACK
    if isinstance(backend, FallbackBackend):
        return corrected, 0.0, PROVENANCE_FALLBACK
    confidence = min(1.0, max(0.0, reply.confidence))
    return corrected, confidence, PROVENANCE_ABSTRACTIVE


def run_pipeline(
    detectors: DetectorPair,
    pair_index: TrainingPairIndex,
    backend: CorrectionBackend,
    record: ClinicalRecord,
    mode: str = "qa_with_resolver",
    config: PipelineConfig | None = None,
) -> Prediction:
    """Full per-record pass: detect, extract, optionally query the backend.

    Extraction, when it fires, is never overridden by the backend. The
    reported index follows the mode: declared-prefix resolution, or naive
    position for the resolver-free mode.
    """
    if mode not in MODES:
        raise ValueError(f"unknown mode {mode!r}, expected one of {MODES}")
    if config is None:
        config = PipelineConfig()

    flag, candidate_index = detect_error(detectors, record)
    if not flag or candidate_index is None:
        return negative_prediction(record.text_id)

    detected = record.sentence_by_index(candidate_index)
    assert detected is not None
    detected_body = detected.body

    corrected: str | None = None
    provenance = PROVENANCE_FALLBACK
    confidence = 0.0

    match = best_training_match(pair_index, record.text, config.min_similarity)
    if match is not None:
        lifted = extract_correction(match, detected_body, config.min_sentence_similarity)
        if lifted is not None:
            corrected = lifted
            provenance = PROVENANCE_EXTRACTIVE
            confidence = min(match.paragraph_similarity, match.sentence_similarity)

    if corrected is None and mode in ("qa", "qa_with_resolver"):
        request = CorrectionRequest(
            context=record.text,
            error_sentence=detected_body,
            question=config.question_template.format(
                error_sentence=detected_body, context=record.text
            ),
        )
        corrected, confidence, provenance = correct_abstractive(
            backend, request, config.max_edit_tokens
        )

    if corrected is None:
        corrected = detected_body
        provenance = PROVENANCE_FALLBACK
        confidence = 0.0

    if not corrected.strip() or corrected.strip() == NO_CORRECTION:
        # A positive prediction cannot carry the no-correction sentinel; a
        # detected sentence that degenerates to it is treated as no error.
        if detected_body.strip() and detected_body.strip() != NO_CORRECTION:
            corrected = detected_body
            provenance = PROVENANCE_FALLBACK
            confidence = 0.0
        else:
            return negative_prediction(record.text_id)

    if mode == "qa":
        error_index = naive_position_index(detected_body, record.text)
        if error_index == NO_ERROR_INDEX:
            error_index = candidate_index
    else:
        resolution = resolve_index(detected_body, record.indexed_sentences, config.index_floor)
        error_index = resolution.resolved_index
        if error_index == NO_ERROR_INDEX:
            # Stage 1 already names a valid declared index; keep the
            # prediction consistent rather than reporting no-index.
            error_index = candidate_index

    return Prediction(
        text_id=record.text_id,
        flag=True,
        error_index=error_index,
        corrected_sentence=corrected,
        provenance=provenance,
        confidence=min(1.0, max(0.0, confidence)),
    )
