# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled CART tree builder and tree traversal.

Mirrors :mod:`ibts.classify._tree_py` step for step; both must produce
identical trees for identical inputs.
"""

import numpy as np
cimport numpy as cnp
from libc.stdlib cimport malloc, free, qsort
from libc.stdint cimport uint64_t, int64_t

cnp.import_array()

ctypedef struct ValueClass:
    double v
    int64_t c

ctypedef struct Frame:
    int64_t node
    int64_t start
    int64_t end
    int64_t depth


cdef inline uint64_t splitmix_next(uint64_t* state) noexcept nogil:
    cdef uint64_t z
    state[0] += <uint64_t>0x9E3779B97F4A7C15ULL
    z = state[0]
    z = (z ^ (z >> 30)) * <uint64_t>0xBF58476D1CE4E5B9ULL
    z = (z ^ (z >> 27)) * <uint64_t>0x94D049BB133111EBULL
    return z ^ (z >> 31)


cdef int cmp_value(const void* a, const void* b) noexcept nogil:
    cdef double x = (<ValueClass*>a).v
    cdef double y = (<ValueClass*>b).v
    if x < y:
        return -1
    if x > y:
        return 1
    return 0


def build_tree(double[:, ::1] Xt, const cnp.intp_t[::1] y, const cnp.intp_t[::1] sample,
               int n_classes, int mtry, int max_depth, int min_leaf, uint64_t seed):
    """Grow one tree on the rows listed in ``sample`` (duplicates allowed).

    ``Xt`` is feature-major: ``Xt[f, row]``. Returns the arrays
    ``(feature, threshold, left, right, counts)``; leaves have feature -1.
    """
    cdef int64_t p = Xt.shape[0]
    cdef int64_t m = sample.shape[0]
    cdef int64_t cap = 2 * m + 1
    cdef int64_t k = n_classes

    feature_a = np.full(cap, -1, dtype=np.int64)
    threshold_a = np.zeros(cap, dtype=np.float64)
    left_a = np.full(cap, -1, dtype=np.int64)
    right_a = np.full(cap, -1, dtype=np.int64)
    counts_a = np.zeros((cap, k), dtype=np.int64)
    cdef int64_t[::1] feature = feature_a
    cdef double[::1] threshold = threshold_a
    cdef int64_t[::1] left = left_a
    cdef int64_t[::1] right = right_a
    cdef int64_t[:, ::1] counts = counts_a

    idx_a = np.asarray(sample, dtype=np.intp).copy()
    cdef cnp.intp_t[::1] idx = idx_a
    feats_a = np.arange(p, dtype=np.int64)
    cdef int64_t[::1] feats = feats_a

    cdef ValueClass* buf = <ValueClass*>malloc(max(m, 1) * sizeof(ValueClass))
    cdef int64_t* lc = <int64_t*>malloc(max(k, 1) * sizeof(int64_t))
    cdef int64_t* tc = <int64_t*>malloc(max(k, 1) * sizeof(int64_t))
    cdef Frame* stack = <Frame*>malloc(cap * sizeof(Frame))
    if buf == NULL or lc == NULL or tc == NULL or stack == NULL:
        free(buf); free(lc); free(tc); free(stack)
        raise MemoryError()

    cdef uint64_t state = seed
    cdef int64_t top = 0, node_count = 1
    cdef int64_t node, start, end, depth, n, i, j, r, f, c, nonzero, visited, tmp
    cdef int64_t sq_parent, sq_l, sq_r, n_l, n_r, best_f, lo, hi
    cdef cnp.intp_t swap
    cdef double parent_score, best_score, score, vmin, vmax, v, best_thr, a, b, thr
    cdef bint is_leaf

    with nogil:
        stack[0].node = 0
        stack[0].start = 0
        stack[0].end = m
        stack[0].depth = 0
        top = 1
        while top > 0:
            top -= 1
            node = stack[top].node
            start = stack[top].start
            end = stack[top].end
            depth = stack[top].depth
            n = end - start

            for c in range(k):
                tc[c] = 0
            for i in range(start, end):
                tc[y[idx[i]]] += 1
            nonzero = 0
            sq_parent = 0
            for c in range(k):
                counts[node, c] = tc[c]
                sq_parent += tc[c] * tc[c]
                if tc[c] > 0:
                    nonzero += 1

            is_leaf = (n < 2 * min_leaf or nonzero <= 1
                       or (max_depth >= 0 and depth >= max_depth))
            if is_leaf:
                continue

            parent_score = <double>sq_parent / <double>n
            best_score = -1.0
            best_f = -1
            best_thr = 0.0
            visited = 0
            j = 0
            while j < p and visited < mtry:
                r = j + <int64_t>(splitmix_next(&state) % <uint64_t>(p - j))
                tmp = feats[j]
                feats[j] = feats[r]
                feats[r] = tmp
                f = feats[j]
                j += 1

                vmin = Xt[f, idx[start]]
                vmax = vmin
                for i in range(start, end):
                    v = Xt[f, idx[i]]
                    buf[i - start].v = v
                    buf[i - start].c = y[idx[i]]
                    if v < vmin:
                        vmin = v
                    if v > vmax:
                        vmax = v
                if vmin == vmax:
                    continue
                visited += 1

                qsort(buf, n, sizeof(ValueClass), cmp_value)
                for c in range(k):
                    lc[c] = 0
                sq_l = 0
                sq_r = sq_parent
                for i in range(n - 1):
                    c = buf[i].c
                    sq_l += 2 * lc[c] + 1
                    sq_r -= 2 * (tc[c] - lc[c]) - 1
                    lc[c] += 1
                    n_l = i + 1
                    n_r = n - n_l
                    if n_l < min_leaf or n_r < min_leaf:
                        continue
                    if not buf[i].v < buf[i + 1].v:
                        continue
                    score = <double>sq_l / <double>n_l + <double>sq_r / <double>n_r
                    if score > best_score:
                        best_score = score
                        best_f = f
                        a = buf[i].v
                        b = buf[i + 1].v
                        thr = 0.5 * (a + b)
                        if thr >= b:
                            thr = a
                        best_thr = thr

            if best_f < 0 or not (best_score - parent_score > 1e-10 * parent_score):
                continue

            # partition idx[start:end]: values <= thr first
            lo = start
            hi = end - 1
            while lo <= hi:
                if Xt[best_f, idx[lo]] <= best_thr:
                    lo += 1
                else:
                    swap = idx[lo]
                    idx[lo] = idx[hi]
                    idx[hi] = swap
                    hi -= 1

            feature[node] = best_f
            threshold[node] = best_thr
            left[node] = node_count
            right[node] = node_count + 1
            node_count += 2
            stack[top].node = right[node]
            stack[top].start = lo
            stack[top].end = end
            stack[top].depth = depth + 1
            top += 1
            stack[top].node = left[node]
            stack[top].start = start
            stack[top].end = lo
            stack[top].depth = depth + 1
            top += 1

    free(buf)
    free(lc)
    free(tc)
    free(stack)
    return (feature_a[:node_count].copy(), threshold_a[:node_count].copy(),
            left_a[:node_count].copy(), right_a[:node_count].copy(),
            counts_a[:node_count].copy())


def apply_tree(const int64_t[::1] feature, const double[::1] threshold,
               const int64_t[::1] left, const int64_t[::1] right,
               const double[:, ::1] X):
    """Leaf index reached by every row of ``X`` (row-major, original columns)."""
    cdef int64_t n = X.shape[0]
    out_a = np.empty(n, dtype=np.int64)
    cdef int64_t[::1] out = out_a
    cdef int64_t i, node
    with nogil:
        for i in range(n):
            node = 0
            while feature[node] >= 0:
                if X[i, feature[node]] <= threshold[node]:
                    node = left[node]
                else:
                    node = right[node]
            out[i] = node
    return out_a
