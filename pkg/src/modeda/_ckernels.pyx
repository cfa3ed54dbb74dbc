# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled inner loops: co-occurrence counting, GloVe and softmax-regression epochs, top-k cosine scan.

Every routine mirrors ``modeda._pykernels`` operation for operation so the
two backends agree to the last bit on IEEE-754 hardware without FMA
contraction.
"""

import numpy as np

from libc.math cimport exp, log, pow, sqrt
from libcpp.unordered_map cimport unordered_map
from libcpp.vector cimport vector
from libcpp.algorithm cimport sort
from libcpp.utility cimport pair
from libc.stdint cimport int64_t


def cooccurrence(const int64_t[:] ids, const int64_t[:] starts, int window, int64_t vocab_size):
    cdef unordered_map[int64_t, double] table
    cdef Py_ssize_t n_docs = starts.shape[0] - 1
    cdef Py_ssize_t doc, i, j, lo, hi
    cdef int64_t a, b
    cdef double w
    with nogil:
        for doc in range(n_docs):
            lo = starts[doc]
            hi = starts[doc + 1]
            for i in range(lo, hi):
                a = ids[i]
                j = i - 1
                while j >= lo and i - j <= window:
                    b = ids[j]
                    w = 1.0 / <double>(i - j)
                    table[a * vocab_size + b] += w
                    table[b * vocab_size + a] += w
                    j -= 1

    cdef vector[int64_t] keys
    cdef pair[int64_t, double] item
    keys.reserve(table.size())
    for item in table:
        keys.push_back(item.first)
    sort(keys.begin(), keys.end())

    cdef Py_ssize_t n = keys.size()
    rows = np.empty(n, dtype=np.int64)
    cols = np.empty(n, dtype=np.int64)
    vals = np.empty(n, dtype=np.float64)
    cdef int64_t[:] r = rows
    cdef int64_t[:] c = cols
    cdef double[:] v = vals
    cdef int64_t key
    for i in range(n):
        key = keys[i]
        r[i] = key // vocab_size
        c[i] = key % vocab_size
        v[i] = table[key]
    return rows, cols, vals


def glove_epoch(const int64_t[:] rows, const int64_t[:] cols, const double[:] vals,
                const int64_t[:] order,
                double[:, ::1] W, double[:, ::1] Wc, double[:] b, double[:] bc,
                double[:, ::1] gW, double[:, ::1] gWc, double[:] gb, double[:] gbc,
                double x_max, double alpha, double lr):
    cdef Py_ssize_t n = order.shape[0]
    cdef Py_ssize_t dim = W.shape[1]
    cdef Py_ssize_t t, k
    cdef int64_t e, i, j
    cdef double x, diff, fdiff, weight, temp1, temp2, cost = 0.0
    with nogil:
        for t in range(n):
            e = order[t]
            i = rows[e]
            j = cols[e]
            x = vals[e]
            diff = 0.0
            for k in range(dim):
                diff += W[i, k] * Wc[j, k]
            diff += b[i] + bc[j] - log(x)
            if x > x_max:
                weight = 1.0
            else:
                weight = pow(x / x_max, alpha)
            fdiff = weight * diff
            cost += 0.5 * fdiff * diff
            for k in range(dim):
                temp1 = fdiff * Wc[j, k]
                temp2 = fdiff * W[i, k]
                W[i, k] -= lr * temp1 / sqrt(gW[i, k])
                Wc[j, k] -= lr * temp2 / sqrt(gWc[j, k])
                gW[i, k] += temp1 * temp1
                gWc[j, k] += temp2 * temp2
            b[i] -= lr * fdiff / sqrt(gb[i])
            bc[j] -= lr * fdiff / sqrt(gbc[j])
            fdiff *= fdiff
            gb[i] += fdiff
            gbc[j] += fdiff
    return cost


cdef inline bint _better(double s1, int64_t r1, double s2, int64_t r2) nogil:
    return s1 > s2 or (s1 == s2 and r1 < r2)


cdef void _sift_down(double* hs, int64_t* hr, int64_t* hi, Py_ssize_t size, Py_ssize_t pos) nogil:
    # min-heap on the "better" order: root is the worst kept neighbor
    cdef Py_ssize_t child, worst
    cdef double ts
    cdef int64_t tr, ti
    while True:
        child = 2 * pos + 1
        if child >= size:
            return
        worst = child
        if child + 1 < size and _better(hs[child], hr[child], hs[child + 1], hr[child + 1]):
            worst = child + 1
        if _better(hs[worst], hr[worst], hs[pos], hr[pos]):
            return
        ts = hs[pos]; hs[pos] = hs[worst]; hs[worst] = ts
        tr = hr[pos]; hr[pos] = hr[worst]; hr[worst] = tr
        ti = hi[pos]; hi[pos] = hi[worst]; hi[worst] = ti
        pos = worst


cdef void _sift_up(double* hs, int64_t* hr, int64_t* hi, Py_ssize_t pos) nogil:
    cdef Py_ssize_t parent
    cdef double ts
    cdef int64_t tr, ti
    while pos > 0:
        parent = (pos - 1) // 2
        if not _better(hs[parent], hr[parent], hs[pos], hr[pos]):
            return
        ts = hs[pos]; hs[pos] = hs[parent]; hs[parent] = ts
        tr = hr[pos]; hr[pos] = hr[parent]; hr[parent] = tr
        ti = hi[pos]; hi[pos] = hi[parent]; hi[parent] = ti
        pos = parent


def topk_scan(const double[:, ::1] unit, const double[:] query, int64_t exclude,
              const int64_t[:] lex_rank, Py_ssize_t topn):
    cdef Py_ssize_t n = unit.shape[0]
    cdef Py_ssize_t dim = unit.shape[1]
    if topn > n:
        topn = n
    heap_s = np.empty(max(topn, 1), dtype=np.float64)
    heap_r = np.empty(max(topn, 1), dtype=np.int64)
    heap_i = np.empty(max(topn, 1), dtype=np.int64)
    cdef double[:] hs = heap_s
    cdef int64_t[:] hr = heap_r
    cdef int64_t[:] hi = heap_i
    cdef Py_ssize_t size = 0, row, k
    cdef double s
    with nogil:
        if topn > 0:
            for row in range(n):
                if row == exclude:
                    continue
                s = 0.0
                for k in range(dim):
                    s += unit[row, k] * query[k]
                if size < topn:
                    hs[size] = s
                    hr[size] = lex_rank[row]
                    hi[size] = row
                    size += 1
                    _sift_up(&hs[0], &hr[0], &hi[0], size - 1)
                elif _better(s, lex_rank[row], hs[0], hr[0]):
                    hs[0] = s
                    hr[0] = lex_rank[row]
                    hi[0] = row
                    _sift_down(&hs[0], &hr[0], &hi[0], size, 0)
    order = np.lexsort((heap_r[:size], -heap_s[:size]))
    return heap_i[:size][order], heap_s[:size][order]


def softmax_sgd_epoch(const int64_t[:] indptr, const int64_t[:] indices, const double[:] data,
                      const int64_t[:] y, const int64_t[:] perm, double[:, ::1] W, double[:] b,
                      double lr, double l2, Py_ssize_t batch_size):
    """One pass of mini-batch gradient descent on L2-regularized softmax cross-entropy.

    Rows are CSR-encoded; ``perm`` gives the visiting order.
    """
    cdef Py_ssize_t C = W.shape[0], d = W.shape[1], n = perm.shape[0]
    cdef Py_ssize_t start, m, r, c, k, p
    cdef int64_t doc
    cdef double z, mx, s, g, decay
    resid = np.empty((batch_size, C), dtype=np.float64)
    cdef double[:, ::1] R = resid
    with nogil:
        start = 0
        while start < n:
            m = batch_size if start + batch_size <= n else n - start
            for r in range(m):
                doc = perm[start + r]
                for c in range(C):
                    z = b[c]
                    for p in range(indptr[doc], indptr[doc + 1]):
                        z = z + W[c, indices[p]] * data[p]
                    R[r, c] = z
                mx = R[r, 0]
                for c in range(1, C):
                    if R[r, c] > mx:
                        mx = R[r, c]
                s = 0.0
                for c in range(C):
                    R[r, c] = exp(R[r, c] - mx)
                    s = s + R[r, c]
                for c in range(C):
                    R[r, c] = R[r, c] / s
                R[r, y[doc]] -= 1.0
            if l2 > 0:
                decay = lr * l2
                for c in range(C):
                    for k in range(d):
                        W[c, k] -= decay * W[c, k]
            for r in range(m):
                doc = perm[start + r]
                for c in range(C):
                    g = lr * R[r, c] / m
                    for p in range(indptr[doc], indptr[doc + 1]):
                        W[c, indices[p]] -= g * data[p]
            for c in range(C):
                s = 0.0
                for r in range(m):
                    s = s + R[r, c]
                b[c] -= lr * (s / m)
            start += batch_size


def softmax_objective(const int64_t[:] indptr, const int64_t[:] indices, const double[:] data,
                      const int64_t[:] y, const double[:, ::1] W, const double[:] b, double l2):
    """Mean cross-entropy over all rows plus ``l2/2 * ||W||^2``."""
    cdef Py_ssize_t C = W.shape[0], d = W.shape[1], n = y.shape[0]
    cdef Py_ssize_t i, c, k, p
    cdef double mx, s, total = 0.0, reg = 0.0
    z_buf = np.empty(C, dtype=np.float64)
    cdef double[:] z = z_buf
    with nogil:
        for i in range(n):
            for c in range(C):
                z[c] = b[c]
                for p in range(indptr[i], indptr[i + 1]):
                    z[c] = z[c] + W[c, indices[p]] * data[p]
            mx = z[0]
            for c in range(1, C):
                if z[c] > mx:
                    mx = z[c]
            s = 0.0
            for c in range(C):
                s = s + exp(z[c] - mx)
            total = total + (log(s) + mx - z[y[i]])
        for c in range(C):
            for k in range(d):
                reg = reg + W[c, k] * W[c, k]
    return total / n + 0.5 * l2 * reg
