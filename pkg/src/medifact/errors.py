"""Exception hierarchy shared across the pipeline."""
from __future__ import annotations


class MedifactError(Exception):
    """Base class for all pipeline errors."""


class CorpusIOError(MedifactError):
    """Unreadable or undecodable input stream."""


class SchemaError(MedifactError):
    """A mandatory column is missing or the schema is inconsistent."""


class SentenceValidationError(MedifactError):
    """Numbered-sentence block violates its contract (e.g. duplicate indices)."""


class TrainingError(MedifactError):
    """Training preconditions violated (single-class labels, NaN features)."""


class ModelFileError(MedifactError):
    """Model file is corrupt, has a bad magic, or an unsupported version."""


class ValidationError(MedifactError):
    """Run files, score files, or predictions violate their contracts."""


class BackendError(MedifactError):
    """Abstractive backend failed or returned a malformed response."""
