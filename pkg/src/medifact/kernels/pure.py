"""Pure-Python edit-distance kernel.

Fallback used when the compiled extension is unavailable (or disabled via
MEDIFACT_PURE_KERNELS=1). Same contract as the compiled kernel: exact
Levenshtein distance over arbitrary equality-comparable sequences.
"""
from __future__ import annotations

from typing import Sequence


def levenshtein(a: Sequence, b: Sequence) -> int:
    """Exact Levenshtein distance between two sequences.

    Unit-cost insertions, deletions, and substitutions; two-row dynamic
    program, O(len(a) * len(b)) time and O(min) space.
    """
    n, m = len(a), len(b)
    if n == 0:
        return m
    if m == 0:
        return n
    if n > m:
        a, b = b, a
        n, m = m, n
    prev = list(range(n + 1))
    cur = [0] * (n + 1)
    for i in range(1, m + 1):
        cur[0] = i
        bc = b[i - 1]
        for j in range(1, n + 1):
            if a[j - 1] == bc:
                cur[j] = prev[j - 1]
            else:
                cur[j] = 1 + min(prev[j], cur[j - 1], prev[j - 1])
        prev, cur = cur, prev
    return prev[n]
