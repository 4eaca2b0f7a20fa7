"""Metric tests: brute-force ROUGE oracle, NA conventions, report math."""
from __future__ import annotations

import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from medifact.corpus import ClinicalRecord, parse_numbered_sentences
from medifact.errors import ValidationError
from medifact.metrics import (
    evaluate_run,
    read_external_scores,
    render_report,
    rouge1_f,
    score_na_aware,
)


def brute_force_rouge1_f(candidate_tokens, reference_tokens):
    """Independent counter: per-token list.count, no Counter, no clipping trick."""
    if not candidate_tokens and not reference_tokens:
        return 1.0
    if not candidate_tokens or not reference_tokens:
        return 0.0
    overlap = 0
    for token in set(candidate_tokens):
        overlap += min(candidate_tokens.count(token), reference_tokens.count(token))
    precision = overlap / len(candidate_tokens)
    recall = overlap / len(reference_tokens)
    if precision + recall == 0:
        return 0.0
    return 2 * precision * recall / (precision + recall)


WORDS = ["the", "patient", "has", "diabetes", "hypertension", "aspirin", "fever", "mild"]


class TestRouge:
    def test_identical_sentences(self):
        assert rouge1_f("the patient is stable", "the patient is stable") == 1.0

    def test_three_of_four_overlap_hand_value(self):
        got = rouge1_f("the patient has diabetes", "the patient has hypertension")
        assert got == pytest.approx(0.75, abs=1e-12)

    def test_disjoint_tokens(self):
        assert rouge1_f("alpha beta", "gamma delta") == 0.0

    def test_empty_conventions(self):
        assert rouge1_f("", "") == 1.0
        assert rouge1_f("", "words here") == 0.0
        assert rouge1_f("words here", "") == 0.0

    def test_matches_brute_force_on_200_random_pairs(self):
        rng = random.Random(314)
        for _ in range(200):
            cand = [rng.choice(WORDS) for _ in range(rng.randint(0, 30))]
            ref = [rng.choice(WORDS) for _ in range(rng.randint(0, 30))]
            got = rouge1_f(" ".join(cand), " ".join(ref))
            want = brute_force_rouge1_f(cand, ref)
            assert abs(got - want) <= 1e-12

    def test_case_insensitive(self):
        assert rouge1_f("The Patient", "the patient") == 1.0

    @settings(max_examples=150, deadline=None)
    @given(
        st.lists(st.sampled_from(WORDS), max_size=15),
        st.lists(st.sampled_from(WORDS), max_size=15),
    )
    def test_symmetric_and_bounded(self, cand, ref):
        a = rouge1_f(" ".join(cand), " ".join(ref))
        b = rouge1_f(" ".join(ref), " ".join(cand))
        assert a == pytest.approx(b, abs=1e-12)
        assert 0.0 <= a <= 1.0


class TestNaAware:
    def test_both_na(self):
        assert score_na_aware("NA", "NA") == 1.0
        assert score_na_aware(" na ", "NA") == 1.0

    def test_one_na(self):
        assert score_na_aware("NA", "He takes aspirin.") == 0.0
        assert score_na_aware("He takes aspirin.", "NA") == 0.0

    def test_delegates_to_rouge(self):
        rng = random.Random(9)
        for _ in range(30):
            cand = " ".join(rng.choice(WORDS) for _ in range(rng.randint(1, 10)))
            ref = " ".join(rng.choice(WORDS) for _ in range(rng.randint(1, 10)))
            assert score_na_aware(cand, ref) == rouge1_f(cand, ref)


def gold_record(text_id, flagged, body="The patient has diabetes.", corrected="The patient has anemia."):
    return ClinicalRecord(
        text_id=text_id,
        text=body,
        indexed_sentences=parse_numbered_sentences(f"0 {body}"),
        gold_flag=flagged,
        gold_error_index=0 if flagged else -1,
        gold_corrected_sentence=corrected if flagged else "NA",
    )


def pred_row(text_id, flag, index, corrected):
    from medifact.cli import RunRow

    return RunRow(text_id=text_id, flag=flag, error_index=index, corrected_sentence=corrected)


class TestEvaluateRun:
    def test_perfect_run(self):
        gold = [gold_record(f"g{i}", i % 2 == 0) for i in range(6)]
        preds = [
            pred_row(
                rec.text_id,
                bool(rec.gold_flag),
                rec.gold_error_index,
                rec.gold_corrected_sentence,
            )
            for rec in gold
        ]
        report = evaluate_run(preds, gold)
        assert report.flag_accuracy == 1.0
        assert report.sentence_accuracy == 1.0
        assert report.r1f == pytest.approx(1.0, abs=1e-12)
        assert report.aggregate_c == pytest.approx(1.0, abs=1e-12)
        assert report.n_items == 6
        assert report.n_na_pairs == 3

    def test_ten_items_four_flag_mismatches(self):
        gold = [gold_record(f"g{i}", True) for i in range(10)]
        preds = []
        for i, rec in enumerate(gold):
            if i < 4:
                preds.append(pred_row(rec.text_id, False, -1, "NA"))
            else:
                preds.append(pred_row(rec.text_id, True, 0, rec.gold_corrected_sentence))
        report = evaluate_run(preds, gold)
        assert report.flag_accuracy == pytest.approx(0.6, abs=1e-12)

    def test_missing_prediction_counts_wrong_everywhere(self):
        gold = [gold_record("a", True), gold_record("b", False)]
        preds = [pred_row("b", False, -1, "NA")]
        report = evaluate_run(preds, gold)
        assert report.flag_accuracy == 0.5
        assert report.sentence_accuracy == 0.5
        item = {p.text_id: p for p in report.per_item}["a"]
        assert not item.flag_hit and not item.index_hit and item.r1f == 0.0

    def test_duplicate_prediction_id_is_error(self):
        gold = [gold_record("a", False)]
        preds = [pred_row("a", False, -1, "NA"), pred_row("a", False, -1, "NA")]
        with pytest.raises(ValidationError):
            evaluate_run(preds, gold)

    def test_unknown_external_id_is_error(self):
        gold = [gold_record("a", False)]
        preds = [pred_row("a", False, -1, "NA")]
        with pytest.raises(ValidationError):
            evaluate_run(preds, gold, {"bert": {"zzz": 0.5}})

    def test_negatives_count_as_index_hits(self):
        gold = [gold_record("a", False)]
        preds = [pred_row("a", False, -1, "NA")]
        report = evaluate_run(preds, gold)
        assert report.sentence_accuracy == 1.0

    def test_aggregate_channels(self):
        gold = [gold_record("a", True), gold_record("b", True)]
        preds = [
            pred_row("a", True, 0, gold[0].gold_corrected_sentence),  # r1f 1.0
            pred_row("b", True, 0, "totally unrelated words entirely"),  # r1f 0.0
        ]
        external = {"bert": {"a": 0.4, "b": 0.9}}
        report = evaluate_run(preds, gold, external)
        assert report.r1f == pytest.approx(0.5, abs=1e-12)
        # aggregate_score: mean over channel means = mean(0.5, 0.65)
        assert report.aggregate_score == pytest.approx((0.5 + 0.65) / 2, abs=1e-12)
        # aggregate_c: per-item max channel = max(1.0, 0.4), max(0.0, 0.9)
        assert report.aggregate_c == pytest.approx((1.0 + 0.9) / 2, abs=1e-12)
        # bounded below by the mean per-item minimum channel
        mean_min = (min(1.0, 0.4) + min(0.0, 0.9)) / 2
        assert mean_min <= report.aggregate_c <= 1.0

    def test_adding_correct_prediction_never_decreases_metrics(self):
        gold = [gold_record(f"g{i}", i % 2 == 0) for i in range(5)]
        partial = [
            pred_row(rec.text_id, bool(rec.gold_flag), rec.gold_error_index,
                     rec.gold_corrected_sentence)
            for rec in gold[:4]
        ]
        before = evaluate_run(partial, gold)
        complete = partial + [
            pred_row(gold[4].text_id, bool(gold[4].gold_flag), gold[4].gold_error_index,
                     gold[4].gold_corrected_sentence)
        ]
        after = evaluate_run(complete, gold)
        assert after.flag_accuracy >= before.flag_accuracy
        assert after.sentence_accuracy >= before.sentence_accuracy
        assert after.r1f >= before.r1f
        assert after.aggregate_c >= before.aggregate_c

    def test_empty_gold_is_error(self):
        with pytest.raises(ValidationError):
            evaluate_run([], [])

    def test_render_report_mentions_all_rates(self):
        gold = [gold_record("a", False)]
        report = evaluate_run([pred_row("a", False, -1, "NA")], gold)
        text = render_report(report)
        for needle in ("flag accuracy", "sentence accuracy", "R1F", "aggregate"):
            assert needle in text


def test_read_external_scores(tmp_path):
    path = tmp_path / "scores.jsonl"
    path.write_text('{"text_id": "a", "score": 0.5}\n{"text_id": "b", "score": 0.25}\n')
    assert read_external_scores(path) == {"a": 0.5, "b": 0.25}


def test_read_external_scores_duplicate_is_error(tmp_path):
    path = tmp_path / "scores.jsonl"
    path.write_text('{"text_id": "a", "score": 0.5}\n{"text_id": "a", "score": 0.2}\n')
    with pytest.raises(ValidationError):
        read_external_scores(path)


def test_read_external_scores_malformed_is_error(tmp_path):
    path = tmp_path / "scores.jsonl"
    path.write_text('{"text_id": "a"}\n')
    with pytest.raises(ValidationError):
        read_external_scores(path)
