"""Ingest, validate, and normalize the paired-paragraph clinical dataset.

Inputs are delimiter-separated tables (quoted fields may embed newlines) or
line-delimited JSON records; column names are schema-driven. Rows violating
record invariants are collected as rejects with reasons, never dropped
silently.
"""
from __future__ import annotations

import csv
import io
import json
import logging
import re
from dataclasses import dataclass
from pathlib import Path
from typing import BinaryIO, Iterable, Union

from .errors import CorpusIOError, SchemaError, SentenceValidationError

logger = logging.getLogger(__name__)

NO_CORRECTION = "NA"
NO_ERROR_INDEX = -1

_ENTRY_RE = re.compile(r"^\s*(\d+)(?:[ \t]+|$)")


@dataclass(frozen=True)
class IndexedSentence:
    """One pre-numbered sentence: declared index, prefix-stripped body."""

    declared_index: int
    body: str
    char_span: tuple[int, int]


@dataclass
class ClinicalRecord:
    """One dataset row; gold fields stay None on unlabeled splits."""

    text_id: str
    text: str
    indexed_sentences: list[IndexedSentence]
    gold_flag: bool | None = None
    gold_error_index: int | None = None
    gold_corrected_sentence: str | None = None
    gold_corrected_text: str | None = None

    def sentence_by_index(self, declared_index: int) -> IndexedSentence | None:
        for sent in self.indexed_sentences:
            if sent.declared_index == declared_index:
                return sent
        return None

    def declared_indices(self) -> list[int]:
        return [s.declared_index for s in self.indexed_sentences]


@dataclass(frozen=True)
class Reject:
    row_number: int
    reason: str


@dataclass(frozen=True)
class ColumnSchema:
    """Maps logical fields to column names; override any for differently-labeled data."""

    text_id: str = "Text ID"
    text: str = "Text"
    sentences: str = "Sentences"
    error_flag: str = "Error Flag"
    error_index: str = "Error Sentence ID"
    corrected_sentence: str = "Corrected Sentence"
    corrected_text: str = "Corrected Text"
    delimiter: str = ","

    def mandatory(self) -> tuple[str, str, str]:
        return (self.text_id, self.text, self.sentences)

    def with_overrides(self, overrides: dict[str, str]) -> "ColumnSchema":
        known = {f for f in self.__dataclass_fields__}
        bad = sorted(set(overrides) - known)
        if bad:
            raise SchemaError(f"unknown schema field(s): {', '.join(bad)}")
        merged = {f: getattr(self, f) for f in known}
        merged.update(overrides)
        return ColumnSchema(**merged)


def parse_numbered_sentences(raw: str) -> list[IndexedSentence]:
    """Parse a newline-separated block of index-prefixed sentences.

    Lines with no leading integer token are continuation lines and attach to
    the previous sentence's body. Duplicate declared indices are an error.
    """
    sentences: list[tuple[int, list[str], int, int]] = []
    if raw is None:
        return []
    offset = 0
    for line in raw.split("\n"):
        line_start = offset
        offset += len(line) + 1
        if not line.strip():
            continue
        m = _ENTRY_RE.match(line)
        if m:
            declared = int(m.group(1))
            body = line[m.end():].strip()
            parts = [body] if body else []
            sentences.append((declared, parts, line_start, line_start + len(line)))
        else:
            if not sentences:
                raise SentenceValidationError(
                    "continuation line before any numbered sentence: %r" % line.strip()
                )
            declared, parts, start, _ = sentences[-1]
            parts.append(line.strip())
            sentences[-1] = (declared, parts, start, line_start + len(line))
    seen: dict[int, int] = {}
    for declared, _, _, _ in sentences:
        seen[declared] = seen.get(declared, 0) + 1
    dupes = sorted(d for d, n in seen.items() if n > 1)
    if dupes:
        raise SentenceValidationError(f"duplicate sentence indices: {dupes}")
    return [
        IndexedSentence(declared_index=d, body=" ".join(parts), char_span=(start, end))
        for d, parts, start, end in sentences
    ]


def split_paragraph(text: str) -> list[str]:
    """Naive splitter: newlines when present, else sentence-final periods."""
    if not text or not text.strip():
        return []
    if "\n" in text:
        return [line.strip() for line in text.split("\n") if line.strip()]
    parts = re.split(r"(?<=\.)\s+", text.strip())
    return [p.strip() for p in parts if p.strip()]


_TRUE_FLAGS = {"1", "true", "yes"}
_FALSE_FLAGS = {"0", "false", "no"}


def _parse_flag(value: str | None) -> bool | None:
    if value is None:
        return None
    v = value.strip().lower()
    if not v:
        return None
    if v in _TRUE_FLAGS:
        return True
    if v in _FALSE_FLAGS:
        return False
    raise ValueError(f"unrecognized error flag value: {value!r}")


def _parse_index(value: str | None) -> int | None:
    if value is None:
        return None
    v = value.strip()
    if not v or v.upper() == NO_CORRECTION:
        return None
    return int(float(v))


def normalize_correction(value: str | None) -> str | None:
    """Canonicalize the no-correction sentinel: 'na' (any case) -> 'NA'."""
    if value is None:
        return None
    v = value.strip()
    if not v:
        return None
    if v.upper() == NO_CORRECTION:
        return NO_CORRECTION
    return v


def _build_record(row: dict[str, str | None], schema: ColumnSchema) -> ClinicalRecord:
    text_id = (row.get(schema.text_id) or "").strip()
    if not text_id:
        raise ValueError("empty text_id")
    text = row.get(schema.text) or ""
    sentences = parse_numbered_sentences(row.get(schema.sentences) or "")
    for sent in sentences:
        if not sent.body:
            raise ValueError(f"sentence {sent.declared_index} has an empty body")
    if text.strip() and not sentences:
        raise ValueError("record has text but no indexed sentences")

    flag = _parse_flag(row.get(schema.error_flag))
    index = _parse_index(row.get(schema.error_index))
    corrected = normalize_correction(row.get(schema.corrected_sentence))
    corrected_text = row.get(schema.corrected_text)
    if corrected_text is not None and not corrected_text.strip():
        corrected_text = None

    if flag is False:
        if index is None:
            index = NO_ERROR_INDEX
        if corrected is None:
            corrected = NO_CORRECTION
        if index != NO_ERROR_INDEX:
            raise ValueError(f"flag=false but error index is {index}, expected {NO_ERROR_INDEX}")
        if corrected != NO_CORRECTION:
            raise ValueError("flag=false but a corrected sentence is present")
    elif flag is True:
        if index is None:
            raise ValueError("flag=true but no error sentence index given")
        matches = [s for s in sentences if s.declared_index == index]
        if len(matches) != 1:
            raise ValueError(
                f"error index {index} matches {len(matches)} sentences, expected exactly 1"
            )
        if corrected == NO_CORRECTION:
            corrected = None
    return ClinicalRecord(
        text_id=text_id,
        text=text,
        indexed_sentences=sentences,
        gold_flag=flag,
        gold_error_index=index,
        gold_corrected_sentence=corrected,
        gold_corrected_text=corrected_text,
    )


Source = Union[str, Path, BinaryIO, bytes]


def _read_text(source: Source) -> str:
    try:
        if isinstance(source, (str, Path)):
            data = Path(source).read_bytes()
        elif isinstance(source, bytes):
            data = source
        else:
            data = source.read()
            if isinstance(data, str):
                return data
    except OSError as exc:
        raise CorpusIOError(f"cannot read input: {exc}") from exc
    try:
        return data.decode("utf-8")
    except UnicodeDecodeError as exc:
        raise CorpusIOError(f"input is not valid UTF-8: {exc}") from exc


def _looks_like_jsonl(text: str) -> bool:
    head = text.lstrip()
    return head.startswith("{")


def parse_dataset(
    source: Source,
    schema: ColumnSchema | None = None,
    fmt: str = "auto",
) -> tuple[list[ClinicalRecord], list[Reject]]:
    """Parse a dataset into records plus a rejects list.

    ``fmt`` is "csv", "jsonl", or "auto" (sniffed from the first byte).
    Row counts always satisfy len(records) + len(rejects) == input rows.
    """
    if schema is None:
        schema = ColumnSchema()
    text = _read_text(source)
    if fmt == "auto":
        fmt = "jsonl" if _looks_like_jsonl(text) else "csv"
    if fmt == "jsonl":
        rows = _iter_jsonl_rows(text)
    elif fmt == "csv":
        rows = _iter_csv_rows(text, schema)
    else:
        raise SchemaError(f"unknown dataset format: {fmt!r}")

    records: list[ClinicalRecord] = []
    rejects: list[Reject] = []
    seen_ids: set[str] = set()
    for row_number, row in rows:
        parse_error = row.get("__parse_error__")
        if parse_error:
            rejects.append(Reject(row_number=row_number, reason=str(parse_error)))
            continue
        try:
            record = _build_record(row, schema)
            if record.text_id in seen_ids:
                raise ValueError(f"duplicate text_id {record.text_id!r}")
            seen_ids.add(record.text_id)
        except (ValueError, SentenceValidationError) as exc:
            rejects.append(Reject(row_number=row_number, reason=str(exc)))
            continue
        records.append(record)
    if rejects:
        logger.warning("rejected %d of %d rows", len(rejects), len(records) + len(rejects))
    return records, rejects


def _iter_csv_rows(text: str, schema: ColumnSchema):
    reader = csv.DictReader(io.StringIO(text), delimiter=schema.delimiter)
    header = reader.fieldnames
    if header is None:
        return
    missing = [col for col in schema.mandatory() if col not in header]
    if missing:
        raise SchemaError(f"missing mandatory column(s): {', '.join(missing)}")
    for i, row in enumerate(reader, start=2):  # header is row 1
        yield i, row


def _iter_jsonl_rows(text: str):
    for i, line in enumerate(text.splitlines(), start=1):
        if not line.strip():
            continue
        try:
            row = json.loads(line)
        except json.JSONDecodeError as exc:
            yield i, {"__parse_error__": str(exc)}
            continue
        if not isinstance(row, dict):
            yield i, {"__parse_error__": "row is not an object"}
            continue
        yield i, {k: (str(v) if v is not None else None) for k, v in row.items()}


def write_dataset(records: Iterable[ClinicalRecord], path: str | Path, schema: ColumnSchema | None = None) -> None:
    """Serialize records back to the tabular format (round-trips with parse)."""
    if schema is None:
        schema = ColumnSchema()
    fieldnames = [
        schema.text_id,
        schema.text,
        schema.sentences,
        schema.error_flag,
        schema.error_index,
        schema.corrected_sentence,
        schema.corrected_text,
    ]
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.DictWriter(fh, fieldnames=fieldnames, delimiter=schema.delimiter)
        writer.writeheader()
        for rec in records:
            writer.writerow(record_to_row(rec, schema))


def record_to_row(rec: ClinicalRecord, schema: ColumnSchema | None = None) -> dict[str, str]:
    if schema is None:
        schema = ColumnSchema()
    sentences = "\n".join(f"{s.declared_index} {s.body}" for s in rec.indexed_sentences)
    row = {
        schema.text_id: rec.text_id,
        schema.text: rec.text,
        schema.sentences: sentences,
        schema.error_flag: "",
        schema.error_index: "",
        schema.corrected_sentence: "",
        schema.corrected_text: "",
    }
    if rec.gold_flag is not None:
        row[schema.error_flag] = "1" if rec.gold_flag else "0"
        row[schema.error_index] = str(
            rec.gold_error_index if rec.gold_error_index is not None else NO_ERROR_INDEX
        )
        row[schema.corrected_sentence] = rec.gold_corrected_sentence or (
            NO_CORRECTION if rec.gold_flag is False else ""
        )
        row[schema.corrected_text] = rec.gold_corrected_text or ""
    return row


def write_rejects_report(rejects: Iterable[Reject], path: str | Path) -> None:
    """Line-delimited {row_number, reason} records."""
    with open(path, "w", encoding="utf-8") as fh:
        for rej in rejects:
            fh.write(json.dumps({"row_number": rej.row_number, "reason": rej.reason}, ensure_ascii=False))
            fh.write("\n")
