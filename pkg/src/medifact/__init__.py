"""Clinical one-word-error detection and correction pipeline.

Stage 1 flags the erroneous sentence with a pair of weakly supervised linear
SVMs over TF-IDF features; stage 2 lifts the correction from the most
similar training pair when one exists, otherwise defers to a pluggable
abstractive backend; the reported sentence index is resolved against the
dataset's pre-defined numbering. See the cli module for the batch surface.
"""
from .config import PipelineConfig
from .corpus import ClinicalRecord, ColumnSchema, IndexedSentence, parse_dataset
from .correct import FallbackBackend, HttpBackend, Prediction, run_pipeline
from .detect import DetectorPair, detect_error, train_detectors
from .extractive import TrainingPairIndex, best_training_match, build_pair_index, similarity
from .indexing import resolve_index
from .metrics import EvalReport, evaluate_run, rouge1_f
from .modelio import PipelineModel, load_model, save_model

__version__ = "0.1.0"

__all__ = [
    "ClinicalRecord",
    "ColumnSchema",
    "DetectorPair",
    "EvalReport",
    "FallbackBackend",
    "HttpBackend",
    "IndexedSentence",
    "PipelineConfig",
    "PipelineModel",
    "Prediction",
    "TrainingPairIndex",
    "best_training_match",
    "build_pair_index",
    "detect_error",
    "evaluate_run",
    "load_model",
    "parse_dataset",
    "resolve_index",
    "rouge1_f",
    "run_pipeline",
    "save_model",
    "similarity",
    "train_detectors",
    "__version__",
]
