# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled inner loops: negative-sampling training and LCS.

Mirrors `seqrec.kernels.pure` update for update: same learning-rate
schedule, same integer LCG stream for negative draws and subsampling,
one update per (center, context) pair with the composed vector
recomputed from the current parameters. Grad accumulation runs in
double precision; the matrices stay float32.
"""

from libc.math cimport exp, log1p

import numpy as np

ctypedef unsigned long long u64
ctypedef long long i64

BACKEND_NAME = "c"


cdef inline u64 _lcg_next(u64 state) noexcept nogil:
    return state * 25214903917ULL + 11ULL


cdef inline double _clamp(double f) noexcept nogil:
    if f > 30.0:
        return 30.0
    if f < -30.0:
        return -30.0
    return f


cdef inline double _sigmoid(double f) noexcept nogil:
    return 1.0 / (1.0 + exp(-f))


cdef inline double _softplus(double x) noexcept nogil:
    # log(1 + e^x); callers pass clamped logits
    return log1p(exp(x))


cdef inline i64 _cum_search(const i64* cum, i64 n, i64 r) noexcept nogil:
    # first index with cum[idx] > r (matches searchsorted side="right")
    cdef i64 lo = 0, hi = n, mid
    while lo < hi:
        mid = (lo + hi) >> 1
        if cum[mid] <= r:
            lo = mid + 1
        else:
            hi = mid
    return lo


cdef inline double _alpha_at(double alpha0, double alpha_floor,
                             i64 clock, i64 total) noexcept nogil:
    cdef double alpha = alpha0 + (alpha_floor - alpha0) * (<double>clock / <double>total)
    return alpha if alpha > alpha_floor else alpha_floor


def lcg_next(state):
    """One step of the shared 64-bit LCG (exposed for parity tests)."""
    return int(_lcg_next(<u64>state))


def train_epoch_sg(float[:, ::1] input_vecs, float[:, ::1] ctx_vecs,
                   const int[::1] sent_tokens, const i64[::1] sent_offsets,
                   const int[::1] row_data, const i64[::1] row_offsets,
                   const i64[::1] cum_table, int negatives, int window,
                   double alpha0, double alpha_floor, i64 clock,
                   i64 total_pairs, lcg_state, keep_thresholds):
    cdef u64 state = <u64>lcg_state
    cdef bint use_sample = keep_thresholds is not None
    keep_arr = keep_thresholds if use_sample else np.zeros(1, dtype=np.int64)
    cdef const i64[::1] keep = keep_arr

    cdef i64 n_sent = sent_offsets.shape[0] - 1
    cdef int dim = input_vecs.shape[1]
    cdef i64 vocab_n = cum_table.shape[0]
    cdef i64 total_w = cum_table[vocab_n - 1]

    cdef i64 max_len = 0, s, q
    for s in range(n_sent):
        q = sent_offsets[s + 1] - sent_offsets[s]
        if q > max_len:
            max_len = q
    kept_arr = np.empty(max(max_len, 1), dtype=np.int32)
    h_arr = np.zeros(dim, dtype=np.float64)
    e_arr = np.zeros(dim, dtype=np.float64)
    cdef int[::1] kept = kept_arr
    cdef double[::1] h = h_arr
    cdef double[::1] neu1e = e_arr

    cdef double loss = 0.0, alpha, f, g, label, inv
    cdef i64 pairs = 0, lo, hi, i, j, jlo, jhi, m, rs, re, n_rows, rr, r48
    cdef int center, context, target, d, neg, row

    with nogil:
        for s in range(n_sent):
            lo = sent_offsets[s]
            hi = sent_offsets[s + 1]
            m = 0
            for i in range(lo, hi):
                if use_sample:
                    state = _lcg_next(state)
                    if <i64>((state >> 33) & 0x7FFFFFFFULL) >= keep[sent_tokens[i]]:
                        continue
                kept[m] = sent_tokens[i]
                m += 1
            for i in range(m):
                center = kept[i]
                rs = row_offsets[center]
                re = row_offsets[center + 1]
                n_rows = re - rs
                inv = 1.0 / <double>n_rows
                jlo = i - window
                if jlo < 0:
                    jlo = 0
                jhi = i + window
                if jhi > m - 1:
                    jhi = m - 1
                for j in range(jlo, jhi + 1):
                    if j == i:
                        continue
                    context = kept[j]
                    alpha = _alpha_at(alpha0, alpha_floor, clock, total_pairs)
                    for d in range(dim):
                        h[d] = 0.0
                    for rr in range(rs, re):
                        row = row_data[rr]
                        for d in range(dim):
                            h[d] += input_vecs[row, d]
                    for d in range(dim):
                        h[d] *= inv
                        neu1e[d] = 0.0
                    for neg in range(negatives + 1):
                        if neg == 0:
                            target = context
                            label = 1.0
                        else:
                            state = _lcg_next(state)
                            r48 = <i64>((state >> 16) & 0xFFFFFFFFFFFFULL)
                            target = <int>_cum_search(&cum_table[0], vocab_n,
                                                      r48 % total_w)
                            if target == context:
                                continue
                            label = 0.0
                        f = 0.0
                        for d in range(dim):
                            f += h[d] * <double>ctx_vecs[target, d]
                        f = _clamp(f)
                        if label > 0.0:
                            loss += _softplus(-f)
                        else:
                            loss += _softplus(f)
                        g = (label - _sigmoid(f)) * alpha
                        for d in range(dim):
                            neu1e[d] += g * <double>ctx_vecs[target, d]
                            ctx_vecs[target, d] += <float>(g * h[d])
                    for rr in range(rs, re):
                        row = row_data[rr]
                        for d in range(dim):
                            input_vecs[row, d] += <float>(neu1e[d] * inv)
                    clock += 1
                    pairs += 1
    return clock, int(state), loss, pairs


def train_epoch_cbow(float[:, ::1] input_vecs, float[:, ::1] ctx_vecs,
                     const int[::1] sent_tokens, const i64[::1] sent_offsets,
                     const int[::1] row_data, const i64[::1] row_offsets,
                     const i64[::1] cum_table, int negatives, int window,
                     double alpha0, double alpha_floor, i64 clock,
                     i64 total_pairs, lcg_state, keep_thresholds):
    cdef u64 state = <u64>lcg_state
    cdef bint use_sample = keep_thresholds is not None
    keep_arr = keep_thresholds if use_sample else np.zeros(1, dtype=np.int64)
    cdef const i64[::1] keep = keep_arr

    cdef i64 n_sent = sent_offsets.shape[0] - 1
    cdef int dim = input_vecs.shape[1]
    cdef i64 vocab_n = cum_table.shape[0]
    cdef i64 total_w = cum_table[vocab_n - 1]

    cdef i64 max_len = 0, s, q
    for s in range(n_sent):
        q = sent_offsets[s + 1] - sent_offsets[s]
        if q > max_len:
            max_len = q
    kept_arr = np.empty(max(max_len, 1), dtype=np.int32)
    h_arr = np.zeros(dim, dtype=np.float64)
    e_arr = np.zeros(dim, dtype=np.float64)
    cdef int[::1] kept = kept_arr
    cdef double[::1] h = h_arr
    cdef double[::1] neu1e = e_arr

    cdef double loss = 0.0, alpha, f, g, label, share, wcount
    cdef i64 pairs = 0, lo, hi, i, j, jlo, jhi, m, rs, re, rr, r48
    cdef int center, tok, target, d, neg, row

    with nogil:
        for s in range(n_sent):
            lo = sent_offsets[s]
            hi = sent_offsets[s + 1]
            m = 0
            for i in range(lo, hi):
                if use_sample:
                    state = _lcg_next(state)
                    if <i64>((state >> 33) & 0x7FFFFFFFULL) >= keep[sent_tokens[i]]:
                        continue
                kept[m] = sent_tokens[i]
                m += 1
            for i in range(m):
                center = kept[i]
                jlo = i - window
                if jlo < 0:
                    jlo = 0
                jhi = i + window
                if jhi > m - 1:
                    jhi = m - 1
                if jhi - jlo < 1:
                    continue
                wcount = <double>(jhi - jlo)  # window positions minus self
                alpha = _alpha_at(alpha0, alpha_floor, clock, total_pairs)
                # mean of composed window-token vectors
                for d in range(dim):
                    h[d] = 0.0
                for j in range(jlo, jhi + 1):
                    if j == i:
                        continue
                    tok = kept[j]
                    rs = row_offsets[tok]
                    re = row_offsets[tok + 1]
                    share = 1.0 / (wcount * <double>(re - rs))
                    for rr in range(rs, re):
                        row = row_data[rr]
                        for d in range(dim):
                            h[d] += share * <double>input_vecs[row, d]
                for d in range(dim):
                    neu1e[d] = 0.0
                for neg in range(negatives + 1):
                    if neg == 0:
                        target = center
                        label = 1.0
                    else:
                        state = _lcg_next(state)
                        r48 = <i64>((state >> 16) & 0xFFFFFFFFFFFFULL)
                        target = <int>_cum_search(&cum_table[0], vocab_n,
                                                  r48 % total_w)
                        if target == center:
                            continue
                        label = 0.0
                    f = 0.0
                    for d in range(dim):
                        f += h[d] * <double>ctx_vecs[target, d]
                    f = _clamp(f)
                    if label > 0.0:
                        loss += _softplus(-f)
                    else:
                        loss += _softplus(f)
                    g = (label - _sigmoid(f)) * alpha
                    for d in range(dim):
                        neu1e[d] += g * <double>ctx_vecs[target, d]
                        ctx_vecs[target, d] += <float>(g * h[d])
                for j in range(jlo, jhi + 1):
                    if j == i:
                        continue
                    tok = kept[j]
                    rs = row_offsets[tok]
                    re = row_offsets[tok + 1]
                    share = 1.0 / (wcount * <double>(re - rs))
                    for rr in range(rs, re):
                        row = row_data[rr]
                        for d in range(dim):
                            input_vecs[row, d] += <float>(neu1e[d] * share)
                clock += 1
                pairs += 1
    return clock, int(state), loss, pairs


def lcs_length_i32(a, b):
    """Longest common subsequence length of two int32 arrays.

    Classic row-rolled DP: O(|a|*|b|) time, O(min(|a|,|b|)) memory.
    """
    a = np.ascontiguousarray(a, dtype=np.int32)
    b = np.ascontiguousarray(b, dtype=np.int32)
    if a.size == 0 or b.size == 0:
        return 0
    if a.size < b.size:
        a, b = b, a
    cdef const int[::1] xa = a
    cdef const int[::1] xb = b
    cdef i64 n = xb.shape[0]
    prev_arr = np.zeros(n + 1, dtype=np.int32)
    cur_arr = np.zeros(n + 1, dtype=np.int32)
    cdef int[::1] prev_mv = prev_arr
    cdef int[::1] cur_mv = cur_arr
    cdef int* pp = &prev_mv[0]
    cdef int* cc = &cur_mv[0]
    cdef int* tmp
    cdef i64 i, j
    cdef int x, best
    with nogil:
        for i in range(xa.shape[0]):
            x = xa[i]
            for j in range(1, n + 1):
                if xb[j - 1] == x:
                    cc[j] = pp[j - 1] + 1
                else:
                    best = pp[j]
                    if cc[j - 1] > best:
                        best = cc[j - 1]
                    cc[j] = best
            tmp = pp
            pp = cc
            cc = tmp
    return int(pp[n])
