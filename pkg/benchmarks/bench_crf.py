#!/usr/bin/env python3
"""Benchmark the compiled chain kernels against the NumPy fallback.

Times log-partition, forward-backward posteriors, and masked Viterbi over
synthetic batches at a few problem sizes, then prints a speedup table.

Usage: python benchmarks/bench_crf.py [--repeats N]
"""

import argparse
import time

import numpy as np

from spanchain.crf import _pykernels

try:
    from spanchain.crf import _ckernels
except ImportError:
    _ckernels = None

SIZES = [(64, 5), (256, 11), (256, 41), (1024, 11)]
N_DOCS = 20


def make_batch(rng, t, k):
    docs = []
    for _ in range(N_DOCS):
        docs.append(
            (
                np.ascontiguousarray(rng.normal(0, 1, (t, k))),
                np.ascontiguousarray(rng.normal(0, 1, (k, k))),
                np.ascontiguousarray(rng.normal(0, 1, k)),
                np.ascontiguousarray(rng.normal(0, 1, k)),
            )
        )
    return docs


def bench(impl, batch, repeats):
    k = batch[0][1].shape[0]
    allowed = np.ones((k, k), dtype=np.uint8)
    a_start = np.ones(k, dtype=np.uint8)
    a_end = np.ones(k, dtype=np.uint8)
    timings = {}
    for name, fn in (
        ("logz", lambda d: impl.logz(*d)),
        ("posteriors", lambda d: impl.posteriors(*d)),
        ("viterbi", lambda d: impl.viterbi(*d, allowed, a_start, a_end)),
    ):
        best = float("inf")
        for _ in range(repeats):
            start = time.perf_counter()
            for doc in batch:
                fn(doc)
            best = min(best, time.perf_counter() - start)
        timings[name] = best
    return timings


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--repeats", type=int, default=3)
    args = parser.parse_args()
    rng = np.random.default_rng(0)
    print(f"{N_DOCS} documents per batch, best of {args.repeats} runs\n")
    header = f"{'T':>5} {'K':>4} {'kernel':>11} {'logz':>10} {'posteriors':>11} {'viterbi':>10} {'speedup':>8}"
    print(header)
    print("-" * len(header))
    for t, k in SIZES:
        batch = make_batch(rng, t, k)
        py = bench(_pykernels, batch, args.repeats)
        row = f"{t:>5} {k:>4} {'python':>11} {py['logz'] * 1e3:>8.1f}ms {py['posteriors'] * 1e3:>9.1f}ms {py['viterbi'] * 1e3:>8.1f}ms {'':>8}"
        print(row)
        if _ckernels is not None:
            cy = bench(_ckernels, batch, args.repeats)
            total_py = sum(py.values())
            total_cy = sum(cy.values())
            row = (
                f"{'':>5} {'':>4} {'cython':>11} {cy['logz'] * 1e3:>8.1f}ms "
                f"{cy['posteriors'] * 1e3:>9.1f}ms {cy['viterbi'] * 1e3:>8.1f}ms "
                f"{total_py / total_cy:>7.1f}x"
            )
            print(row)
    if _ckernels is None:
        print("\ncompiled kernels not built; showing the NumPy fallback only")


if __name__ == "__main__":
    main()
