"""Pure-Python versions of the compiled kernels in ``_ckernels.pyx``.

Used when the extension is not built or ``MODEDA_PURE_PYTHON=1``. The
arithmetic follows the compiled code step for step, except the softmax
regression epoch, which is vectorized per batch.
"""

import heapq
from math import log, sqrt

import numpy as np


def cooccurrence(ids, starts, window, vocab_size):
    ids = [int(x) for x in ids]
    starts = [int(x) for x in starts]
    table = {}
    get = table.get
    for doc in range(len(starts) - 1):
        lo, hi = starts[doc], starts[doc + 1]
        for i in range(lo, hi):
            a = ids[i]
            j = i - 1
            while j >= lo and i - j <= window:
                b = ids[j]
                w = 1.0 / (i - j)
                k1 = a * vocab_size + b
                table[k1] = get(k1, 0.0) + w
                k2 = b * vocab_size + a
                table[k2] = get(k2, 0.0) + w
                j -= 1
    keys = sorted(table)
    rows = np.array([k // vocab_size for k in keys], dtype=np.int64)
    cols = np.array([k % vocab_size for k in keys], dtype=np.int64)
    vals = np.array([table[k] for k in keys], dtype=np.float64)
    return rows, cols, vals


def glove_epoch(rows, cols, vals, order, W, Wc, b, bc, gW, gWc, gb, gbc, x_max, alpha, lr):
    rows_l, cols_l, vals_l = rows.tolist(), cols.tolist(), vals.tolist()
    W_l, Wc_l, gW_l, gWc_l = W.tolist(), Wc.tolist(), gW.tolist(), gWc.tolist()
    b_l, bc_l, gb_l, gbc_l = b.tolist(), bc.tolist(), gb.tolist(), gbc.tolist()
    dim = W.shape[1]
    cost = 0.0
    for e in order.tolist():
        i, j, x = rows_l[e], cols_l[e], vals_l[e]
        wi, wj, gi, gj = W_l[i], Wc_l[j], gW_l[i], gWc_l[j]
        diff = 0.0
        for k in range(dim):
            diff += wi[k] * wj[k]
        diff += b_l[i] + bc_l[j] - log(x)
        weight = 1.0 if x > x_max else (x / x_max) ** alpha
        fdiff = weight * diff
        cost += 0.5 * fdiff * diff
        for k in range(dim):
            temp1 = fdiff * wj[k]
            temp2 = fdiff * wi[k]
            wi[k] -= lr * temp1 / sqrt(gi[k])
            wj[k] -= lr * temp2 / sqrt(gj[k])
            gi[k] += temp1 * temp1
            gj[k] += temp2 * temp2
        b_l[i] -= lr * fdiff / sqrt(gb_l[i])
        bc_l[j] -= lr * fdiff / sqrt(gbc_l[j])
        fdiff *= fdiff
        gb_l[i] += fdiff
        gbc_l[j] += fdiff
    W[:] = W_l
    Wc[:] = Wc_l
    gW[:] = gW_l
    gWc[:] = gWc_l
    b[:] = b_l
    bc[:] = bc_l
    gb[:] = gb_l
    gbc[:] = gbc_l
    return cost


def topk_scan(unit, query, exclude, lex_rank, topn):
    q = query.tolist()
    dim = len(q)
    ranks = lex_rank.tolist()
    # heap entries are (score, -rank, row): the root is the worst kept neighbor
    heap = []
    if topn > 0:
        for row, vec in enumerate(unit.tolist()):
            if row == exclude:
                continue
            s = 0.0
            for k in range(dim):
                s += vec[k] * q[k]
            item = (s, -ranks[row], row)
            if len(heap) < topn:
                heapq.heappush(heap, item)
            elif item > heap[0]:
                heapq.heapreplace(heap, item)
    heap.sort(reverse=True)
    idx = np.array([r for _, _, r in heap], dtype=np.int64)
    scores = np.array([s for s, _, _ in heap], dtype=np.float64)
    return idx, scores


def _dense_rows(indptr, indices, data, rows, d):
    out = np.zeros((len(rows), d))
    for r, doc in enumerate(rows):
        lo, hi = indptr[doc], indptr[doc + 1]
        np.add.at(out[r], indices[lo:hi], data[lo:hi])
    return out


def softmax_sgd_epoch(indptr, indices, data, y, perm, W, b, lr, l2, batch_size):
    # vectorized per batch; agrees with the compiled loop to rounding, not bit for bit
    indptr = np.asarray(indptr)
    indices = np.asarray(indices)
    data = np.asarray(data)
    y = np.asarray(y)
    C, d = W.shape
    for start in range(0, len(perm), batch_size):
        rows = perm[start:start + batch_size]
        m = len(rows)
        Xb = _dense_rows(indptr, indices, data, rows, d)
        Z = Xb @ W.T + b
        Z -= Z.max(axis=1, keepdims=True)
        P = np.exp(Z)
        P /= P.sum(axis=1, keepdims=True)
        P[np.arange(m), y[rows]] -= 1.0
        gW = P.T @ Xb / m + l2 * W
        gb = P.sum(axis=0) / m
        W -= lr * gW
        b -= lr * gb


def softmax_objective(indptr, indices, data, y, W, b, l2):
    indptr = np.asarray(indptr)
    y = np.asarray(y)
    n = len(y)
    total = 0.0
    for lo in range(0, n, 256):
        rows = np.arange(lo, min(n, lo + 256))
        Z = _dense_rows(indptr, np.asarray(indices), np.asarray(data), rows, W.shape[1]) @ W.T + b
        mx = Z.max(axis=1)
        lse = np.log(np.exp(Z - mx[:, None]).sum(axis=1)) + mx
        total += float((lse - Z[np.arange(len(rows)), y[rows]]).sum())
    return total / n + 0.5 * l2 * float((W * W).sum())
