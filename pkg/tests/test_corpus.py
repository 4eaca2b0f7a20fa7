"""Corpus ingestion tests: parsing, validation, rejects, round-trips."""
from __future__ import annotations

import csv
import io
import json
import random

import pytest

from medifact.corpus import (
    ColumnSchema,
    parse_dataset,
    parse_numbered_sentences,
    split_paragraph,
    write_dataset,
    write_rejects_report,
)
from medifact.errors import CorpusIOError, SchemaError, SentenceValidationError

SCHEMA = ColumnSchema()


def make_csv(rows: list[dict]) -> bytes:
    buf = io.StringIO()
    writer = csv.DictWriter(
        buf,
        fieldnames=[
            SCHEMA.text_id,
            SCHEMA.text,
            SCHEMA.sentences,
            SCHEMA.error_flag,
            SCHEMA.error_index,
            SCHEMA.corrected_sentence,
            SCHEMA.corrected_text,
        ],
    )
    writer.writeheader()
    for row in rows:
        writer.writerow(row)
    return buf.getvalue().encode("utf-8")


def good_row(text_id="t1", flagged=True):
    text = "The patient is stable.\nHe was given asprin."
    sentences = "0 The patient is stable.\n1 He was given asprin."
    row = {
        SCHEMA.text_id: text_id,
        SCHEMA.text: text,
        SCHEMA.sentences: sentences,
    }
    if flagged:
        row[SCHEMA.error_flag] = "1"
        row[SCHEMA.error_index] = "1"
        row[SCHEMA.corrected_sentence] = "He was given aspirin."
        row[SCHEMA.corrected_text] = "The patient is stable.\nHe was given aspirin."
    else:
        row[SCHEMA.error_flag] = "0"
        row[SCHEMA.error_index] = "-1"
        row[SCHEMA.corrected_sentence] = "NA"
        row[SCHEMA.corrected_text] = ""
    return row


class TestParseNumberedSentences:
    def test_canonical_two_lines(self):
        got = parse_numbered_sentences("0 The patient is stable.\n1 He was given aspirin.")
        assert [(s.declared_index, s.body) for s in got] == [
            (0, "The patient is stable."),
            (1, "He was given aspirin."),
        ]

    def test_empty_input(self):
        assert parse_numbered_sentences("") == []

    def test_continuation_line_attaches_to_previous(self):
        # hand trace: line 2 has no leading integer, so it extends sentence 0
        got = parse_numbered_sentences("0 BP 90/62\nmmHg noted.\n1 Afebrile.")
        assert [(s.declared_index, s.body) for s in got] == [
            (0, "BP 90/62 mmHg noted."),
            (1, "Afebrile."),
        ]

    def test_duplicate_indices_rejected_with_list(self):
        with pytest.raises(SentenceValidationError) as exc:
            parse_numbered_sentences("2 A.\n2 B.\n3 C.\n3 D.")
        assert "[2, 3]" in str(exc.value)

    def test_leading_continuation_is_error(self):
        with pytest.raises(SentenceValidationError):
            parse_numbered_sentences("no prefix here\n1 Fine.")

    def test_non_contiguous_indices_allowed(self):
        got = parse_numbered_sentences("4 Later.\n0 Earlier.")
        assert [s.declared_index for s in got] == [4, 0]

    def test_no_character_loss(self):
        rng = random.Random(11)
        words = ["alpha", "beta", "90/62", "x2", "q.d."]
        for _ in range(50):
            lines = []
            expected_entries = rng.randint(1, 6)
            for idx in range(expected_entries):
                lines.append(f"{idx} " + " ".join(rng.choice(words) for _ in range(rng.randint(1, 4))))
                for _ in range(rng.randint(0, 2)):
                    lines.append(" ".join(rng.choice(words) for _ in range(rng.randint(1, 3))))
            raw = "\n".join(lines)
            sentences = parse_numbered_sentences(raw)
            flattened = "".join(
                "".join((str(s.declared_index) + s.body).split()) for s in sentences
            )
            assert flattened == "".join(raw.split())

    def test_char_spans_point_into_raw(self):
        raw = "0 BP 90/62\nmmHg noted.\n1 Afebrile."
        sentences = parse_numbered_sentences(raw)
        for sent in sentences:
            start, end = sent.char_span
            segment = raw[start:end]
            assert segment.startswith(str(sent.declared_index))
            assert sent.body.split()[-1] in segment


class TestSplitParagraph:
    def test_period_splitting(self):
        assert split_paragraph("A. B. C.") == ["A.", "B.", "C."]

    def test_newline_splitting(self):
        assert split_paragraph("line1\nline2") == ["line1", "line2"]

    def test_newline_takes_precedence(self):
        assert split_paragraph("S1. S2.\nS3.") == ["S1. S2.", "S3."]

    def test_empty(self):
        assert split_paragraph("") == []
        assert split_paragraph("   ") == []

    def test_no_empty_segments(self):
        assert split_paragraph("a.\n\n\nb.") == ["a.", "b."]


class TestParseDataset:
    def test_three_wellformed_rows(self):
        data = make_csv([good_row("a"), good_row("b", flagged=False), good_row("c")])
        records, rejects = parse_dataset(data)
        assert len(records) == 3
        assert rejects == []
        assert records[0].gold_flag is True
        assert records[1].gold_flag is False
        assert records[1].gold_error_index == -1
        assert records[1].gold_corrected_sentence == "NA"

    def test_flag_false_with_index_is_rejected(self):
        row = good_row("bad", flagged=False)
        row[SCHEMA.error_index] = "4"
        records, rejects = parse_dataset(make_csv([row]))
        assert records == []
        assert len(rejects) == 1
        assert "flag=false" in rejects[0].reason

    def test_ten_rows_two_malformed_counts_match_hand_checker(self):
        rows = []
        for i in range(10):
            row = good_row(f"r{i}", flagged=i % 2 == 0)
            if i == 3:  # flag=0 but corrected sentence present
                row[SCHEMA.corrected_sentence] = "Some sentence."
            if i == 6:  # error index pointing at a missing sentence
                row[SCHEMA.error_index] = "9"
            rows.append(row)
        data = make_csv(rows)

        # independent row-by-row checker over the same CSV bytes
        reader = csv.DictReader(io.StringIO(data.decode("utf-8")))
        expect_bad = 0
        for raw in reader:
            flag = raw[SCHEMA.error_flag] == "1"
            idx = int(raw[SCHEMA.error_index])
            corrected = raw[SCHEMA.corrected_sentence]
            declared = [int(line.split()[0]) for line in raw[SCHEMA.sentences].splitlines()]
            bad = (not flag and (idx != -1 or corrected.strip().upper() != "NA")) or (
                flag and idx not in declared
            )
            expect_bad += bad
        assert expect_bad == 2

        records, rejects = parse_dataset(data)
        assert len(rejects) == expect_bad
        assert len(records) == 10 - expect_bad
        assert len(records) + len(rejects) == 10

    def test_missing_mandatory_column_names_it(self):
        buf = io.StringIO()
        writer = csv.DictWriter(buf, fieldnames=[SCHEMA.text_id, SCHEMA.text])
        writer.writeheader()
        writer.writerow({SCHEMA.text_id: "x", SCHEMA.text: "T."})
        with pytest.raises(SchemaError) as exc:
            parse_dataset(buf.getvalue().encode("utf-8"))
        assert SCHEMA.sentences in str(exc.value)

    def test_unreadable_stream_is_io_error(self):
        with pytest.raises(CorpusIOError):
            parse_dataset("/nonexistent/path/to/file.csv")

    def test_invalid_utf8_is_io_error(self):
        with pytest.raises(CorpusIOError):
            parse_dataset(b"\xff\xfe\x00bad")

    def test_duplicate_text_id_rejected(self):
        records, rejects = parse_dataset(make_csv([good_row("same"), good_row("same")]))
        assert len(records) == 1
        assert len(rejects) == 1
        assert "duplicate" in rejects[0].reason

    def test_jsonl_input(self):
        rows = [
            {
                SCHEMA.text_id: "j1",
                SCHEMA.text: "One.\nTwo.",
                SCHEMA.sentences: "0 One.\n1 Two.",
                SCHEMA.error_flag: "0",
            }
        ]
        data = "\n".join(json.dumps(r) for r in rows).encode("utf-8")
        records, rejects = parse_dataset(data)
        assert len(records) == 1 and not rejects
        assert records[0].text_id == "j1"

    def test_jsonl_bad_line_is_reject_not_crash(self):
        data = b'{"Text ID": "a", "Text": "X.", "Sentences": "0 X."}\nnot json at all\n'
        records, rejects = parse_dataset(data, fmt="jsonl")
        assert len(records) == 1
        assert len(rejects) == 1

    def test_unlabeled_split_gold_fields_none(self):
        row = {
            SCHEMA.text_id: "u1",
            SCHEMA.text: "Only text.",
            SCHEMA.sentences: "0 Only text.",
        }
        buf = io.StringIO()
        writer = csv.DictWriter(buf, fieldnames=[SCHEMA.text_id, SCHEMA.text, SCHEMA.sentences])
        writer.writeheader()
        writer.writerow(row)
        records, rejects = parse_dataset(buf.getvalue().encode("utf-8"))
        assert not rejects
        assert records[0].gold_flag is None
        assert records[0].gold_error_index is None

    def test_na_normalized_case_insensitively(self):
        row = good_row("n1", flagged=False)
        row[SCHEMA.corrected_sentence] = " na "
        records, rejects = parse_dataset(make_csv([row]))
        assert not rejects
        assert records[0].gold_corrected_sentence == "NA"


def test_round_trip_write_then_parse(tmp_path, small_corpus):
    path = tmp_path / "roundtrip.csv"
    write_dataset(small_corpus.train, path)
    records, rejects = parse_dataset(path)
    assert not rejects
    assert len(records) == len(small_corpus.train)
    for got, want in zip(records, small_corpus.train):
        assert got.text_id == want.text_id
        assert got.text == want.text
        assert got.gold_flag == want.gold_flag
        assert got.gold_error_index == want.gold_error_index
        assert got.gold_corrected_sentence == want.gold_corrected_sentence
        assert [(s.declared_index, s.body) for s in got.indexed_sentences] == [
            (s.declared_index, s.body) for s in want.indexed_sentences
        ]


def test_rejects_report_format(tmp_path):
    row = good_row("bad", flagged=False)
    row[SCHEMA.error_index] = "2"
    _, rejects = parse_dataset(make_csv([row]))
    out = tmp_path / "rejects.jsonl"
    write_rejects_report(rejects, out)
    lines = out.read_text(encoding="utf-8").splitlines()
    parsed = [json.loads(line) for line in lines]
    assert parsed[0]["row_number"] == 2
    assert "reason" in parsed[0]
