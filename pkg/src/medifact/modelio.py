"""Versioned binary model file: every trained component in one artifact.

Layout: magic "MFCQ1", u32 format version, u32 chunk count, then named
chunks (u16 name length, ASCII name, u64 payload length, payload), closed by
a SHA-256 digest of everything before it. JSON chunks use sorted keys and
float arrays are raw little-endian f64, so identical training runs produce
byte-identical files. Checksum or version mismatches are hard errors.
"""
from __future__ import annotations

import hashlib
import json
import struct
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .config import PipelineConfig, config_from_dict
from .detect import DetectorPair
from .errors import ModelFileError
from .extractive import IndexEntry, TrainingPairIndex
from .svm import LinearSvmModel, SvmConfig
from .textproc import TfIdfConfig, TfIdfModel, Vocabulary, tokenize

MAGIC = b"MFCQ1"
FORMAT_VERSION = 1
_DIGEST_LEN = 32


@dataclass
class PipelineModel:
    """Everything cmd_predict needs, as trained by cmd_train."""

    detectors: DetectorPair
    pair_index: TrainingPairIndex
    config: PipelineConfig


def _json_bytes(payload) -> bytes:
    return json.dumps(payload, sort_keys=True, ensure_ascii=False, separators=(",", ":")).encode(
        "utf-8"
    )


def _f64_bytes(arr: np.ndarray) -> bytes:
    return np.ascontiguousarray(arr, dtype="<f8").tobytes()


def _pack_chunks(chunks: list[tuple[str, bytes]]) -> bytes:
    out = bytearray()
    out += MAGIC
    out += struct.pack("<I", FORMAT_VERSION)
    out += struct.pack("<I", len(chunks))
    for name, payload in chunks:
        raw_name = name.encode("ascii")
        out += struct.pack("<H", len(raw_name))
        out += raw_name
        out += struct.pack("<Q", len(payload))
        out += payload
    out += hashlib.sha256(bytes(out)).digest()
    return bytes(out)


def _unpack_chunks(blob: bytes) -> dict[str, bytes]:
    if len(blob) < len(MAGIC) + 8 + _DIGEST_LEN:
        raise ModelFileError("model file truncated")
    if blob[: len(MAGIC)] != MAGIC:
        raise ModelFileError(f"bad magic: expected {MAGIC!r}")
    body, digest = blob[:-_DIGEST_LEN], blob[-_DIGEST_LEN:]
    if hashlib.sha256(body).digest() != digest:
        raise ModelFileError("model file checksum mismatch")
    offset = len(MAGIC)
    (version,) = struct.unpack_from("<I", body, offset)
    offset += 4
    if version != FORMAT_VERSION:
        raise ModelFileError(f"unsupported model format version {version}, expected {FORMAT_VERSION}")
    (n_chunks,) = struct.unpack_from("<I", body, offset)
    offset += 4
    chunks: dict[str, bytes] = {}
    for _ in range(n_chunks):
        (name_len,) = struct.unpack_from("<H", body, offset)
        offset += 2
        name = body[offset : offset + name_len].decode("ascii")
        offset += name_len
        (payload_len,) = struct.unpack_from("<Q", body, offset)
        offset += 8
        chunks[name] = body[offset : offset + payload_len]
        offset += payload_len
    if offset != len(body):
        raise ModelFileError("model file has trailing bytes")
    return chunks


def _svm_chunks(prefix: str, model: LinearSvmModel) -> list[tuple[str, bytes]]:
    meta = {
        "bias": model.bias,
        "lam": model.train_config.lam,
        "epochs": model.train_config.epochs,
        "seed": model.train_config.seed,
        "positive_class_weight": model.train_config.positive_class_weight,
    }
    return [
        (f"{prefix}_meta", _json_bytes(meta)),
        (f"{prefix}_weights", _f64_bytes(model.weights)),
    ]


def _svm_from_chunks(prefix: str, chunks: dict[str, bytes]) -> LinearSvmModel:
    meta = json.loads(chunks[f"{prefix}_meta"].decode("utf-8"))
    weights = np.frombuffer(chunks[f"{prefix}_weights"], dtype="<f8").copy()
    cfg = SvmConfig(
        lam=meta["lam"],
        epochs=meta["epochs"],
        seed=meta["seed"],
        positive_class_weight=meta["positive_class_weight"],
    )
    return LinearSvmModel(weights=weights, bias=meta["bias"], train_config=cfg)


def save_model(model: PipelineModel, path: str | Path) -> None:
    tfidf = model.detectors.tfidf
    vocab = tfidf.vocabulary
    terms = [""] * len(vocab.term_to_id)
    for term, term_id in vocab.term_to_id.items():
        terms[term_id] = term
    tfidf_meta = {
        "terms": terms,
        "document_frequency": vocab.document_frequency,
        "n_documents": vocab.n_documents,
        "config": {
            "lowercase": tfidf.config.lowercase,
            "sublinear_tf": tfidf.config.sublinear_tf,
            "l2_normalize": tfidf.config.l2_normalize,
            "use_bigrams": tfidf.config.use_bigrams,
        },
    }
    entries = [
        {
            "text_id": e.text_id,
            "normalized_paragraph": e.normalized_paragraph,
            "sentence_bodies": [[idx, body] for idx, body in e.sentence_bodies],
            "gold_error_index": e.gold_error_index,
            "error_sentence": e.error_sentence,
            "gold_corrected_sentence": e.gold_corrected_sentence,
        }
        for e in model.pair_index.entries
    ]
    chunks: list[tuple[str, bytes]] = [
        ("config", _json_bytes(model.config.to_dict())),
        ("detector_meta", _json_bytes({"flag_threshold": model.detectors.flag_threshold})),
        ("tfidf_meta", _json_bytes(tfidf_meta)),
        ("tfidf_idf", _f64_bytes(tfidf.idf)),
    ]
    chunks += _svm_chunks("error_svm", model.detectors.error_svm)
    chunks += _svm_chunks("correct_svm", model.detectors.correct_svm)
    chunks.append(("pair_index", _json_bytes({"entries": entries})))
    Path(path).write_bytes(_pack_chunks(chunks))


def load_model(path: str | Path) -> PipelineModel:
    try:
        blob = Path(path).read_bytes()
    except OSError as exc:
        raise ModelFileError(f"cannot read model file: {exc}") from exc
    chunks = _unpack_chunks(blob)
    try:
        config = config_from_dict(json.loads(chunks["config"].decode("utf-8")))
        detector_meta = json.loads(chunks["detector_meta"].decode("utf-8"))
        tfidf_meta = json.loads(chunks["tfidf_meta"].decode("utf-8"))
        idf = np.frombuffer(chunks["tfidf_idf"], dtype="<f8").copy()
        error_svm = _svm_from_chunks("error_svm", chunks)
        correct_svm = _svm_from_chunks("correct_svm", chunks)
        raw_entries = json.loads(chunks["pair_index"].decode("utf-8"))["entries"]
    except (KeyError, ValueError) as exc:
        raise ModelFileError(f"model file is missing or corrupts a section: {exc}") from exc

    vocab = Vocabulary(
        term_to_id={term: i for i, term in enumerate(tfidf_meta["terms"])},
        document_frequency=list(tfidf_meta["document_frequency"]),
        n_documents=tfidf_meta["n_documents"],
    )
    cfg = tfidf_meta["config"]
    tfidf = TfIdfModel(
        vocabulary=vocab,
        idf=idf,
        config=TfIdfConfig(
            lowercase=cfg["lowercase"],
            sublinear_tf=cfg["sublinear_tf"],
            l2_normalize=cfg["l2_normalize"],
            use_bigrams=cfg["use_bigrams"],
        ),
    )
    entries = [
        IndexEntry(
            text_id=e["text_id"],
            normalized_paragraph=e["normalized_paragraph"],
            sentence_bodies=tuple((int(i), b) for i, b in e["sentence_bodies"]),
            gold_error_index=e["gold_error_index"],
            error_sentence=e["error_sentence"],
            gold_corrected_sentence=e["gold_corrected_sentence"],
        )
        for e in raw_entries
    ]
    token_index: dict[str, list[int]] = {}
    for pos, entry in enumerate(entries):
        for token in set(tokenize(entry.normalized_paragraph)):
            token_index.setdefault(token, []).append(pos)
    pair_index = TrainingPairIndex(entries=entries, token_index=token_index)
    detectors = DetectorPair(
        tfidf=tfidf,
        error_svm=error_svm,
        correct_svm=correct_svm,
        flag_threshold=detector_meta["flag_threshold"],
    )
    return PipelineModel(detectors=detectors, pair_index=pair_index, config=config)
