"""Batch command-line surface: train, predict, evaluate, ablate.

Run files are header-less plain text, one record per line, fields
space-separated: ``text_id flag index correction-text...``; the correction
is "NA" and the index -1 on unflagged lines. Exit codes: 0 success,
1 validation, 2 I/O.
"""
from __future__ import annotations

import argparse
import json
import logging
import os
import sys
import tempfile
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace
from pathlib import Path
from typing import Sequence

from .config import PipelineConfig, load_config_file
from .corpus import (
    NO_CORRECTION,
    ClinicalRecord,
    ColumnSchema,
    parse_dataset,
    write_rejects_report,
)
from .correct import (
    MODES,
    CorrectionBackend,
    FallbackBackend,
    HttpBackend,
    Prediction,
    run_pipeline,
)
from .detect import train_detectors
from .errors import CorpusIOError, MedifactError, ValidationError
from .extractive import build_pair_index
from .metrics import evaluate_run, read_external_scores, render_report
from .modelio import PipelineModel, load_model, save_model

logger = logging.getLogger(__name__)

BACKEND_URL_ENV = "MEDIFACT_BACKEND_URL"

EXIT_OK = 0
EXIT_VALIDATION = 1
EXIT_IO = 2


@dataclass(frozen=True)
class RunRow:
    """One parsed run-file line; shape-compatible with Prediction for scoring."""

    text_id: str
    flag: bool
    error_index: int
    corrected_sentence: str


def write_run_file(predictions: Sequence[Prediction], path: str | Path) -> None:
    lines = []
    for pred in predictions:
        if any(ch.isspace() for ch in pred.text_id):
            raise ValidationError(f"text_id {pred.text_id!r} contains whitespace")
        correction = " ".join(pred.corrected_sentence.split()) or NO_CORRECTION
        lines.append(f"{pred.text_id} {int(pred.flag)} {pred.error_index} {correction}")
    Path(path).write_text("\n".join(lines) + ("\n" if lines else ""), encoding="utf-8")


def read_run_file(path: str | Path) -> list[RunRow]:
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise CorpusIOError(f"cannot read run file: {exc}") from exc
    rows: list[RunRow] = []
    for line_no, line in enumerate(text.splitlines(), start=1):
        if not line.strip():
            continue
        parts = line.split(" ", 3)
        if len(parts) < 4:
            raise ValidationError(f"{path}:{line_no}: expected 'text_id flag index correction'")
        text_id, flag_s, index_s, correction = parts
        if flag_s not in ("0", "1"):
            raise ValidationError(f"{path}:{line_no}: flag must be 0 or 1, got {flag_s!r}")
        try:
            index = int(index_s)
        except ValueError as exc:
            raise ValidationError(f"{path}:{line_no}: bad index {index_s!r}") from exc
        rows.append(
            RunRow(
                text_id=text_id,
                flag=flag_s == "1",
                error_index=index,
                corrected_sentence=correction,
            )
        )
    return rows


def predict_records(
    model: PipelineModel,
    records: Sequence[ClinicalRecord],
    mode: str,
    backend: CorrectionBackend | None = None,
    jobs: int = 1,
) -> list[Prediction]:
    """Run the pipeline over records, preserving input order."""
    backend = backend or FallbackBackend()

    def one(record: ClinicalRecord) -> Prediction:
        return run_pipeline(
            model.detectors, model.pair_index, backend, record, mode=mode, config=model.config
        )

    if jobs > 1:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            return list(pool.map(one, records))
    return [one(record) for record in records]


def provenance_histogram(predictions: Sequence[Prediction]) -> dict[str, int]:
    counts = {"extractive": 0, "abstractive": 0, "fallback": 0, "none": 0}
    for pred in predictions:
        counts[pred.provenance] = counts.get(pred.provenance, 0) + 1
    return counts


def _parse_schema_arg(value: str | None) -> ColumnSchema:
    schema = ColumnSchema()
    if not value:
        return schema
    overrides: dict[str, str] = {}
    for piece in value.split(","):
        if not piece.strip():
            continue
        if "=" not in piece:
            raise ValidationError(f"--schema expects logical=column pairs, got {piece!r}")
        key, column = piece.split("=", 1)
        overrides[key.strip()] = column.strip()
    return schema.with_overrides(overrides)


def _effective_config(args, base: PipelineConfig | None = None) -> PipelineConfig:
    cfg = base or PipelineConfig()
    if getattr(args, "config", None):
        cfg = load_config_file(args.config, cfg)
    overrides = {}
    if getattr(args, "seed", None) is not None:
        overrides["seed"] = args.seed
    if getattr(args, "flag_threshold", None) is not None:
        overrides["flag_threshold"] = args.flag_threshold
    if getattr(args, "min_similarity", None) is not None:
        overrides["min_similarity"] = args.min_similarity
    if getattr(args, "max_edit_tokens", None) is not None:
        overrides["max_edit_tokens"] = args.max_edit_tokens
    if overrides:
        cfg = replace(cfg, **overrides)
    return cfg


def _make_backend(args, cfg: PipelineConfig) -> CorrectionBackend:
    url = getattr(args, "backend_url", None) or os.environ.get(BACKEND_URL_ENV)
    if not url:
        return FallbackBackend()
    backend = HttpBackend(url, timeout=cfg.backend_timeout, max_inflight=cfg.backend_max_inflight)
    if not backend.health():
        print(
            f"warning: backend {url} failed its health probe; using the copy-through fallback",
            file=sys.stderr,
        )
        return FallbackBackend()
    return backend


def _load_records(path: str, schema: ColumnSchema, rejects_out: str | None = None):
    records, rejects = parse_dataset(path, schema)
    if rejects:
        print(f"warning: rejected {len(rejects)} rows", file=sys.stderr)
        for rej in rejects[:10]:
            print(f"  row {rej.row_number}: {rej.reason}", file=sys.stderr)
        if rejects_out:
            write_rejects_report(rejects, rejects_out)
            print(f"reject report written to {rejects_out}", file=sys.stderr)
    return records, rejects


def cmd_train(args) -> int:
    schema = _parse_schema_arg(args.schema)
    cfg = _effective_config(args)
    records, _ = _load_records(args.train_path, schema, args.rejects_out)
    if not records:
        raise ValidationError("no usable training records after validation")
    flagged = sum(1 for r in records if r.gold_flag)
    unflagged = sum(1 for r in records if r.gold_flag is False)
    print(f"records: {len(records)} (flagged={flagged}, unflagged={unflagged})")
    detectors = train_detectors(records, cfg)
    for name, model in (("error", detectors.error_svm), ("correct", detectors.correct_svm)):
        history = model.objective_history or []
        trail = " ".join(f"{v:.4f}" for v in history)
        print(f"{name}-svm objective by epoch: {trail}")
    pair_index = build_pair_index(records)
    print(f"pair index entries: {len(pair_index)}")
    model = PipelineModel(detectors=detectors, pair_index=pair_index, config=cfg)
    save_model(model, args.out_model)
    print(f"model written to {args.out_model}")
    return EXIT_OK


def cmd_predict(args) -> int:
    model = load_model(args.model)
    cfg = _effective_config(args, model.config)
    model.config = cfg
    model.detectors.flag_threshold = cfg.flag_threshold
    schema = _parse_schema_arg(args.schema)
    records, _ = _load_records(args.test_path, schema)
    backend = _make_backend(args, cfg)
    predictions = predict_records(model, records, args.mode, backend, jobs=args.jobs)
    write_run_file(predictions, args.out)
    hist = provenance_histogram(predictions)
    print(
        "provenance: "
        + " ".join(f"{key}={hist.get(key, 0)}" for key in ("extractive", "abstractive", "fallback", "none"))
    )
    print(f"run written to {args.out} ({len(predictions)} lines)")
    return EXIT_OK


def cmd_evaluate(args) -> int:
    rows = read_run_file(args.run_path)
    schema = _parse_schema_arg(args.schema)
    gold, _ = _load_records(args.gold_path, schema)
    if not gold:
        raise ValidationError("gold file yielded no usable records")
    external = {}
    for spec_arg in args.external_scores or []:
        if "=" not in spec_arg:
            raise ValidationError(f"--external-scores expects name=path, got {spec_arg!r}")
        name, path = spec_arg.split("=", 1)
        external[name.strip()] = read_external_scores(path.strip())
    report = evaluate_run(rows, gold, external or None)
    print(render_report(report))
    report_path = args.report_out or (str(args.run_path) + ".report.json")
    Path(report_path).write_text(
        json.dumps(report.to_dict(), indent=2, sort_keys=True), encoding="utf-8"
    )
    print(f"report written to {report_path}")
    return EXIT_OK


def cmd_ablate(args) -> int:
    model = load_model(args.model)
    cfg = _effective_config(args, model.config)
    model.config = cfg
    model.detectors.flag_threshold = cfg.flag_threshold
    schema = _parse_schema_arg(args.schema)
    records, _ = _load_records(args.test_path, schema)
    gold, _ = _load_records(args.gold_path, schema)
    if not gold:
        raise ValidationError("gold file yielded no usable records")
    backend = _make_backend(args, cfg)
    out_dir = Path(args.out_dir) if args.out_dir else Path(tempfile.mkdtemp(prefix="medifact-ablate-"))
    out_dir.mkdir(parents=True, exist_ok=True)

    rows = []
    for mode in MODES:
        predictions = predict_records(model, records, mode, backend, jobs=args.jobs)
        run_path = out_dir / f"run-{mode}.txt"
        write_run_file(predictions, run_path)
        report = evaluate_run(predictions, gold)
        rows.append((mode, report))
    print(f"{'mode':<18} {'R1F':>8} {'flag_acc':>9} {'sent_acc':>9}")
    for mode, report in rows:
        print(
            f"{mode:<18} {report.r1f:>8.4f} {report.flag_accuracy:>9.4f} "
            f"{report.sentence_accuracy:>9.4f}"
        )
    print(f"run files in {out_dir}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="medifact",
        description="Detect and correct single-word errors in clinical paragraphs.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def add_common(p):
        p.add_argument("--schema", help="logical=column overrides, comma separated")
        p.add_argument("--config", help="key = value config file")

    p_train = sub.add_parser("train", help="train detectors and build the pair index")
    p_train.add_argument("train_path")
    p_train.add_argument("--out-model", required=True, dest="out_model")
    p_train.add_argument("--seed", type=int, default=None)
    p_train.add_argument("--flag-threshold", type=float, default=None, dest="flag_threshold")
    p_train.add_argument("--rejects-out", default=None, dest="rejects_out")
    add_common(p_train)
    p_train.set_defaults(func=cmd_train)

    p_pred = sub.add_parser("predict", help="write a run file for a test set")
    p_pred.add_argument("test_path")
    p_pred.add_argument("--model", required=True)
    p_pred.add_argument("--mode", choices=MODES, default="qa_with_resolver")
    p_pred.add_argument("--out", required=True)
    p_pred.add_argument("--backend-url", default=None, dest="backend_url")
    p_pred.add_argument("--jobs", type=int, default=1)
    p_pred.add_argument("--min-similarity", type=float, default=None, dest="min_similarity")
    p_pred.add_argument("--flag-threshold", type=float, default=None, dest="flag_threshold")
    p_pred.add_argument("--max-edit-tokens", type=int, default=None, dest="max_edit_tokens")
    add_common(p_pred)
    p_pred.set_defaults(func=cmd_predict)

    p_eval = sub.add_parser("evaluate", help="score a run file against gold records")
    p_eval.add_argument("run_path")
    p_eval.add_argument("gold_path")
    p_eval.add_argument(
        "--external-scores",
        action="append",
        default=None,
        dest="external_scores",
        help="name=path of a line-delimited {text_id, score} file; repeatable",
    )
    p_eval.add_argument("--report-out", default=None, dest="report_out")
    add_common(p_eval)
    p_eval.set_defaults(func=cmd_evaluate)

    p_abl = sub.add_parser("ablate", help="compare all prediction modes on one test set")
    p_abl.add_argument("test_path")
    p_abl.add_argument("gold_path")
    p_abl.add_argument("--model", required=True)
    p_abl.add_argument("--backend-url", default=None, dest="backend_url")
    p_abl.add_argument("--jobs", type=int, default=1)
    p_abl.add_argument("--out-dir", default=None, dest="out_dir")
    p_abl.add_argument("--min-similarity", type=float, default=None, dest="min_similarity")
    p_abl.add_argument("--flag-threshold", type=float, default=None, dest="flag_threshold")
    p_abl.add_argument("--max-edit-tokens", type=int, default=None, dest="max_edit_tokens")
    add_common(p_abl)
    p_abl.set_defaults(func=cmd_ablate)
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    logging.basicConfig(level=os.environ.get("MEDIFACT_LOG", "WARNING"))
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (CorpusIOError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO
    except MedifactError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION


if __name__ == "__main__":
    sys.exit(main())
