"""Benchmark the compiled edit-distance kernel against the pure fallback.

Times the exact workload fuzzy matching runs: paragraph-length and
sentence-length Levenshtein calls. Run from the repo root:

    python3 benchmarks/bench_kernels.py
"""
from __future__ import annotations

import random
import statistics
import time

from medifact import kernels
from medifact.synthetic import SyntheticConfig, generate_corpus


def make_pairs(n_pairs: int, seed: int = 7):
    corpus = generate_corpus(SyntheticConfig(n_train=max(40, n_pairs // 2), n_test=10, seed=seed))
    texts = [r.text for r in corpus.train]
    sentences = [s.body for r in corpus.train for s in r.indexed_sentences]
    rng = random.Random(seed)
    paragraph_pairs = [(rng.choice(texts), rng.choice(texts)) for _ in range(n_pairs)]
    sentence_pairs = [(rng.choice(sentences), rng.choice(sentences)) for _ in range(n_pairs * 10)]
    return paragraph_pairs, sentence_pairs


def time_backend(fn, pairs, repeats: int = 3) -> float:
    best = float("inf")
    checksum = 0
    for _ in range(repeats):
        start = time.perf_counter()
        for a, b in pairs:
            checksum += fn(a, b)
        best = min(best, time.perf_counter() - start)
    assert checksum >= 0
    return best


def main() -> None:
    backends = kernels.available_backends()
    print(f"active backend: {kernels.backend_name}")
    if "compiled" not in backends:
        print("compiled kernel not built; run `python3 setup.py build_ext --inplace` first")
    paragraph_pairs, sentence_pairs = make_pairs(400)
    para_len = statistics.mean(len(a) for a, _ in paragraph_pairs)
    sent_len = statistics.mean(len(a) for a, _ in sentence_pairs)
    print(f"{len(paragraph_pairs)} paragraph pairs (avg {para_len:.0f} chars), "
          f"{len(sentence_pairs)} sentence pairs (avg {sent_len:.0f} chars)\n")
    print(f"{'workload':<12} {'backend':<10} {'seconds':>9} {'pairs/s':>12}")
    timings: dict[tuple[str, str], float] = {}
    for workload, pairs in (("paragraphs", paragraph_pairs), ("sentences", sentence_pairs)):
        for name, fn in sorted(backends.items()):
            # sanity: both backends agree before being timed
            a, b = pairs[0]
            assert backends["pure"](a, b) == fn(a, b)
            elapsed = time_backend(fn, pairs)
            timings[(workload, name)] = elapsed
            print(f"{workload:<12} {name:<10} {elapsed:>9.4f} {len(pairs) / elapsed:>12.0f}")
    if "compiled" in backends:
        for workload in ("paragraphs", "sentences"):
            speedup = timings[(workload, "pure")] / timings[(workload, "compiled")]
            print(f"\ncompiled speedup on {workload}: {speedup:.1f}x")


if __name__ == "__main__":
    main()
