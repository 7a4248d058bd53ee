"""Numpy fallback for the hot loops.

Implements exactly the same update rule, learning-rate schedule and
integer RNG stream as the compiled kernels in `_inner`, one update per
(center, context) pair with the composed vector recomputed from the
current parameters. Floating point rounding may differ from the
compiled path in the last bits; the negative-sample draws do not.
"""

from __future__ import annotations

import numpy as np

BACKEND_NAME = "python"

_M64 = (1 << 64) - 1
_LCG_MUL = 25214903917
_LCG_ADD = 11
_MASK48 = 0xFFFFFFFFFFFF
_MASK31 = 0x7FFFFFFF
_LOGIT_CLAMP = 30.0


def lcg_next(state: int) -> int:
    """One step of the 64-bit LCG driving all training-time draws."""
    return (state * _LCG_MUL + _LCG_ADD) & _M64


def _sigmoid(f):
    return 1.0 / (1.0 + np.exp(-f))


def _alpha_at(alpha0, alpha_floor, clock, total):
    alpha = alpha0 + (alpha_floor - alpha0) * (clock / total)
    return alpha if alpha > alpha_floor else alpha_floor


def _subsample(tokens, keep_thresholds, state):
    kept = []
    for t in tokens:
        state = lcg_next(state)
        if ((state >> 33) & _MASK31) < keep_thresholds[t]:
            kept.append(t)
    return np.asarray(kept, dtype=np.int32), state


def _draw_negatives(cum_table, total_w, negatives, forbidden, state):
    """word2vec-style draws; a draw equal to the positive is dropped."""
    targets = []
    for _ in range(negatives):
        state = lcg_next(state)
        r = ((state >> 16) & _MASK48) % total_w
        t = int(np.searchsorted(cum_table, r, side="right"))
        if t == forbidden:
            continue
        targets.append(t)
    return targets, state


def _one_update(input_vecs, ctx_vecs, rows, targets, labels, alpha):
    """Negative-sampling update of a composed vector against targets.

    Targets are processed one at a time so a repeated negative draw
    sees the context row already moved by its first occurrence, the
    same order the compiled path uses. Returns the summed loss term.
    rows may contain duplicate bucket ids (gram hash self-collisions),
    hence np.add.at for the input-side update.
    """
    h = input_vecs[rows].mean(axis=0, dtype=np.float64)
    loss = 0.0
    neu1e = np.zeros_like(h)
    for target, label in zip(targets, labels):
        told = ctx_vecs[target].astype(np.float64)
        f = min(max(float(told @ h), -_LOGIT_CLAMP), _LOGIT_CLAMP)
        loss += float(np.logaddexp(0.0, -f if label > 0.0 else f))
        g = (label - _sigmoid(f)) * alpha
        neu1e += g * told
        ctx_vecs[target] += (g * h).astype(np.float32)
    np.add.at(input_vecs, rows, (neu1e / len(rows)).astype(np.float32))
    return loss, neu1e


def train_epoch_sg(
    input_vecs,
    ctx_vecs,
    sent_tokens,
    sent_offsets,
    row_data,
    row_offsets,
    cum_table,
    negatives,
    window,
    alpha0,
    alpha_floor,
    clock,
    total_pairs,
    lcg_state,
    keep_thresholds,
):
    total_w = int(cum_table[-1])
    loss = 0.0
    pairs = 0
    lcg_state = int(lcg_state)
    for s in range(len(sent_offsets) - 1):
        toks = sent_tokens[sent_offsets[s] : sent_offsets[s + 1]]
        if keep_thresholds is not None:
            toks, lcg_state = _subsample(toks, keep_thresholds, lcg_state)
        m = len(toks)
        for i in range(m):
            center = int(toks[i])
            rows = row_data[row_offsets[center] : row_offsets[center + 1]]
            for j in range(max(0, i - window), min(m - 1, i + window) + 1):
                if j == i:
                    continue
                context = int(toks[j])
                alpha = _alpha_at(alpha0, alpha_floor, clock, total_pairs)
                negs, lcg_state = _draw_negatives(
                    cum_table, total_w, negatives, context, lcg_state
                )
                step_loss, _ = _one_update(
                    input_vecs,
                    ctx_vecs,
                    rows,
                    [context] + negs,
                    [1.0] + [0.0] * len(negs),
                    alpha,
                )
                loss += step_loss
                clock += 1
                pairs += 1
    return clock, lcg_state, loss, pairs


def train_epoch_cbow(
    input_vecs,
    ctx_vecs,
    sent_tokens,
    sent_offsets,
    row_data,
    row_offsets,
    cum_table,
    negatives,
    window,
    alpha0,
    alpha_floor,
    clock,
    total_pairs,
    lcg_state,
    keep_thresholds,
):
    """One update per center: the mean of the window tokens' composed
    vectors predicts the center's context vector; the gradient is
    shared across every contributing row (1 / (|window| * rows)).
    """
    total_w = int(cum_table[-1])
    loss = 0.0
    pairs = 0
    lcg_state = int(lcg_state)
    for s in range(len(sent_offsets) - 1):
        toks = sent_tokens[sent_offsets[s] : sent_offsets[s + 1]]
        if keep_thresholds is not None:
            toks, lcg_state = _subsample(toks, keep_thresholds, lcg_state)
        m = len(toks)
        for i in range(m):
            center = int(toks[i])
            wpos = [
                j
                for j in range(max(0, i - window), min(m - 1, i + window) + 1)
                if j != i
            ]
            if not wpos:
                continue
            alpha = _alpha_at(alpha0, alpha_floor, clock, total_pairs)
            row_sets = [
                row_data[row_offsets[int(toks[j])] : row_offsets[int(toks[j]) + 1]]
                for j in wpos
            ]
            h = np.zeros(input_vecs.shape[1], dtype=np.float64)
            for rows in row_sets:
                h += input_vecs[rows].mean(axis=0, dtype=np.float64)
            h /= len(wpos)

            negs, lcg_state = _draw_negatives(
                cum_table, total_w, negatives, center, lcg_state
            )
            neu1e = np.zeros_like(h)
            for target, label in zip([center] + negs, [1.0] + [0.0] * len(negs)):
                told = ctx_vecs[target].astype(np.float64)
                f = min(max(float(told @ h), -_LOGIT_CLAMP), _LOGIT_CLAMP)
                loss += float(np.logaddexp(0.0, -f if label > 0.0 else f))
                g = (label - _sigmoid(f)) * alpha
                neu1e += g * told
                ctx_vecs[target] += (g * h).astype(np.float32)
            for rows in row_sets:
                share = neu1e / (len(wpos) * len(rows))
                np.add.at(input_vecs, rows, share.astype(np.float32))
            clock += 1
            pairs += 1
    return clock, lcg_state, loss, pairs


def lcs_length_i32(a, b) -> int:
    """Longest common subsequence length over int32 arrays.

    Row-rolled DP with the relaxed recurrence
    cur[j] = max(prev[j], cur[j-1], prev[j-1] + eq), which vectorizes
    as a cumulative maximum; O(|a|*|b|) time, O(min(|a|,|b|)) memory.
    """
    a = np.asarray(a, dtype=np.int32)
    b = np.asarray(b, dtype=np.int32)
    if a.size == 0 or b.size == 0:
        return 0
    if a.size < b.size:
        a, b = b, a
    prev = np.zeros(b.size + 1, dtype=np.int32)
    cur = np.zeros(b.size + 1, dtype=np.int32)
    for x in a:
        np.maximum(prev[1:], prev[:-1] + (b == x), out=cur[1:])
        np.maximum.accumulate(cur[1:], out=cur[1:])
        prev, cur = cur, prev
    return int(prev[-1])
