"""Pipeline configuration: every tunable threshold in one place.

Values come from defaults, then an optional key=value config file, then CLI
flags, in that order. The full snapshot is stored inside the model file so a
trained pipeline replays with the settings it was built with.
"""
from __future__ import annotations

from dataclasses import asdict, dataclass, fields, replace
from pathlib import Path

from .errors import ValidationError
from .textproc import TfIdfConfig

DEFAULT_QUESTION_TEMPLATE = (
    "What single word in this sentence is medically incorrect, and what should it be? "
    "Sentence: {error_sentence} Context: {context}"
)


@dataclass(frozen=True)
class PipelineConfig:
    # feature extraction
    lowercase: bool = True
    sublinear_tf: bool = False
    l2_normalize: bool = True
    use_bigrams: bool = False
    # detector training
    svm_lambda: float = 1e-4
    svm_epochs: int = 20
    seed: int = 42
    positive_class_weight: float = 2.0
    flag_threshold: float = 0.0
    # extraction and indexing
    min_similarity: float = 0.85
    min_sentence_similarity: float = 0.60
    index_floor: float = 0.30
    # abstractive routing
    max_edit_tokens: int = 2
    question_template: str = DEFAULT_QUESTION_TEMPLATE
    backend_timeout: float = 10.0
    backend_max_inflight: int = 4

    def tfidf_config(self) -> TfIdfConfig:
        return TfIdfConfig(
            lowercase=self.lowercase,
            sublinear_tf=self.sublinear_tf,
            l2_normalize=self.l2_normalize,
            use_bigrams=self.use_bigrams,
        )

    def to_dict(self) -> dict:
        return asdict(self)


_BOOL_VALUES = {"true": True, "false": False, "1": True, "0": False, "yes": True, "no": False}


def _coerce(name: str, value: str, target_type: type):
    if target_type is bool:
        v = value.strip().lower()
        if v not in _BOOL_VALUES:
            raise ValidationError(f"config key {name}: expected a boolean, got {value!r}")
        return _BOOL_VALUES[v]
    if target_type is int:
        return int(value)
    if target_type is float:
        return float(value)
    return value


def config_from_dict(values: dict, base: PipelineConfig | None = None) -> PipelineConfig:
    base = base or PipelineConfig()
    type_map = {f.name: type(getattr(base, f.name)) for f in fields(PipelineConfig)}
    updates = {}
    for name, value in values.items():
        if name not in type_map:
            raise ValidationError(f"unknown config key: {name}")
        if isinstance(value, str):
            value = _coerce(name, value, type_map[name])
        updates[name] = value
    return replace(base, **updates)


def load_config_file(path: str | Path, base: PipelineConfig | None = None) -> PipelineConfig:
    """Parse a flat key = value file; '#' starts a comment."""
    values: dict[str, str] = {}
    text = Path(path).read_text(encoding="utf-8")
    for line_no, line in enumerate(text.splitlines(), start=1):
        stripped = line.split("#", 1)[0].strip()
        if not stripped:
            continue
        if "=" not in stripped:
            raise ValidationError(f"{path}:{line_no}: expected key = value, got {line!r}")
        key, value = stripped.split("=", 1)
        values[key.strip()] = value.strip()
    try:
        return config_from_dict(values, base)
    except (TypeError, ValueError) as exc:
        raise ValidationError(f"{path}: {exc}") from exc
