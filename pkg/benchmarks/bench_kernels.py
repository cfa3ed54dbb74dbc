"""Time the compiled kernels against the pure-Python fallback.

    python3 benchmarks/bench_kernels.py [--repeat 3]

Workloads are sized like the bundled data: a 10k-word vocabulary, 50-d
vectors and a few thousand short documents.
"""

import argparse
import time

import numpy as np

from modeda.kernels import compiled_kernels, python_kernels


def _docs(rng, vocab, n_docs):
    lengths = rng.integers(5, 25, n_docs)
    ids = rng.integers(0, vocab, lengths.sum()).astype(np.int64)
    starts = np.concatenate([[0], np.cumsum(lengths)]).astype(np.int64)
    return ids, starts


def workloads(seed=0):
    rng = np.random.default_rng(seed)
    vocab, dim = 10_000, 50

    ids, starts = _docs(rng, vocab, 3000)
    rows, cols, vals = python_kernels.cooccurrence(ids, starts, 10, vocab)
    order = rng.permutation(len(vals)).astype(np.int64)

    def glove_state():
        r = np.random.default_rng(seed)
        W, Wc = (r.random((vocab, dim)) - 0.5) / dim, (r.random((vocab, dim)) - 0.5) / dim
        b, bc = (r.random(vocab) - 0.5) / dim, (r.random(vocab) - 0.5) / dim
        return [W, Wc, b, bc, np.ones((vocab, dim)), np.ones((vocab, dim)), np.ones(vocab), np.ones(vocab)]

    unit = rng.standard_normal((vocab, dim))
    unit /= np.linalg.norm(unit, axis=1, keepdims=True)
    rank = np.arange(vocab, dtype=np.int64)
    queries = rng.choice(vocab, 100, replace=False)

    n, d, C = 2000, 5000, 2
    nnz_per_row = 12
    indices = np.concatenate([np.sort(rng.choice(d, nnz_per_row, replace=False)) for _ in range(n)]).astype(np.int64)
    indptr = np.arange(0, n * nnz_per_row + 1, nnz_per_row, dtype=np.int64)
    data = rng.integers(1, 3, n * nnz_per_row).astype(np.float64)
    y = rng.integers(0, C, n).astype(np.int64)
    perm = rng.permutation(n).astype(np.int64)

    return {
        "cooccurrence (3000 docs, window 10)": lambda k: k.cooccurrence(ids, starts, 10, vocab),
        f"glove_epoch ({len(vals)} pairs, d=50)":
            lambda k: k.glove_epoch(rows, cols, vals, order, *glove_state(), 10.0, 0.75, 0.05),
        "topk_scan (100 queries, 10k x 50)":
            lambda k: [k.topk_scan(unit, unit[q], int(q), rank, 10) for q in queries],
        "softmax_sgd_epoch (2000 x 5000 sparse)":
            lambda k: k.softmax_sgd_epoch(indptr, indices, data, y, perm, np.zeros((C, d)), np.zeros(C),
                                          0.5, 1e-4, 32),
    }


def best_of(fn, repeat):
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t0)
    return min(times)


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=3)
    args = ap.parse_args(argv)
    if compiled_kernels is None:
        print("compiled extension not built; only the Python backend is timed")
    print(f"{'kernel':44s} {'python s':>10s} {'cython s':>10s} {'speedup':>8s}")
    for name, work in workloads().items():
        tp = best_of(lambda: work(python_kernels), args.repeat)
        if compiled_kernels is None:
            print(f"{name:44s} {tp:10.4f} {'-':>10s} {'-':>8s}")
            continue
        tc = best_of(lambda: work(compiled_kernels), args.repeat)
        print(f"{name:44s} {tp:10.4f} {tc:10.4f} {tp / tc:7.1f}x")


if __name__ == "__main__":
    main()
