"""Edit-distance kernels: compiled fast path with a pure-Python fallback.

The compiled extension is selected at import time when present; setting
MEDIFACT_PURE_KERNELS=1 forces the fallback. ``backend_name`` records which
path is active, and ``available_backends`` exposes both for benchmarking.
"""
from __future__ import annotations

import os
from typing import Callable, Sequence

from . import pure

_FORCE_PURE = os.environ.get("MEDIFACT_PURE_KERNELS", "") not in ("", "0")

_compiled = None
if not _FORCE_PURE:
    try:
        from . import _speedups as _compiled  # type: ignore[no-redef]
    except ImportError:
        _compiled = None

backend_name = "compiled" if _compiled is not None else "pure"

if _compiled is not None:
    import numpy as np

    def _codes(seq: Sequence) -> "np.ndarray":
        if isinstance(seq, str):
            return np.frombuffer(seq.encode("utf-32-le"), dtype="<u4").astype(np.int32)
        return np.asarray(seq, dtype=np.int32)

    def levenshtein(a: Sequence, b: Sequence) -> int:
        return _compiled.levenshtein_i32(_codes(a), _codes(b))

else:
    levenshtein = pure.levenshtein


def levenshtein_tokens(a: Sequence[str], b: Sequence[str]) -> int:
    """Levenshtein distance over token sequences (one edit = one token)."""
    ids: dict[str, int] = {}
    enc_a = [ids.setdefault(t, len(ids)) for t in a]
    enc_b = [ids.setdefault(t, len(ids)) for t in b]
    return levenshtein(enc_a, enc_b)


def available_backends() -> dict[str, Callable[[Sequence, Sequence], int]]:
    """Kernel implementations importable right now, keyed by name."""
    backends: dict[str, Callable[[Sequence, Sequence], int]] = {"pure": pure.levenshtein}
    if _compiled is not None:
        backends["compiled"] = levenshtein
    return backends
