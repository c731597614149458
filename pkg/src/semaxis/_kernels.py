"""Compiled inner loops for CBOW training with negative sampling.

All randomness comes from a per-worker xorshift64* stream held in a one-cell
uint64 array, so a single worker replays bit-for-bit from its seed.
"""

import math

import numpy as np
from numba import njit

_MUL = np.uint64(2685821657736338717)
_S12 = np.uint64(12)
_S25 = np.uint64(25)
_S27 = np.uint64(27)
_S11 = np.uint64(11)
_INV53 = 1.0 / 9007199254740992.0


@njit(nogil=True, cache=True)
def next_u64(state):
    x = state[0]
    x ^= x >> _S12
    x ^= x << _S25
    x ^= x >> _S27
    state[0] = x
    return x * _MUL


@njit(nogil=True, cache=True)
def next_uniform(state):
    return float(next_u64(state) >> _S11) * _INV53


@njit(nogil=True, cache=True)
def draw_index(cum, u):
    # smallest i with cum[i] > u
    lo = 0
    hi = cum.shape[0] - 1
    while lo < hi:
        mid = (lo + hi) // 2
        if cum[mid] > u:
            hi = mid
        else:
            lo = mid + 1
    return lo


@njit(nogil=True, cache=True)
def draw_negatives(cum, n, state):
    out = np.empty(n, dtype=np.int64)
    for i in range(n):
        out[i] = draw_index(cum, next_uniform(state))
    return out


@njit(nogil=True, cache=True)
def _softplus(x):
    if x > 0:
        return x + math.log1p(math.exp(-x))
    return math.log1p(math.exp(x))


@njit(nogil=True, cache=True)
def cbow_epoch(
    syn0,
    syn1,
    ids,
    offsets,
    sent_lo,
    sent_hi,
    keep_prob,
    neg_cum,
    window,
    negatives,
    lr0,
    decay,
    progress0,
    progress_scale,
    total_progress,
    state,
    trained_counts,
):
    """One pass over sentences [sent_lo, sent_hi).

    Returns (loss_sum, n_examples, tokens_seen). Loss is the negative-sampling
    objective evaluated just before each update.
    """
    dim = syn0.shape[1]
    h = np.empty(dim, dtype=np.float64)
    neu1e = np.empty(dim, dtype=np.float64)
    buf = np.empty(0, dtype=np.int64)
    loss = 0.0
    n_examples = 0
    seen = 0
    lr_floor = lr0 * 1e-4
    for s in range(sent_lo, sent_hi):
        lo = offsets[s]
        hi = offsets[s + 1]
        if hi - lo > buf.shape[0]:
            buf = np.empty(hi - lo, dtype=np.int64)
        n = 0
        for j in range(lo, hi):
            w = ids[j]
            seen += 1
            p = keep_prob[w]
            if p < 1.0 and next_uniform(state) > p:
                continue
            buf[n] = w
            n += 1
        if decay:
            frac = (progress0 + seen * progress_scale) / (total_progress + 1.0)
            lr = lr0 * (1.0 - frac)
            if lr < lr_floor:
                lr = lr_floor
        else:
            lr = lr0
        for pos in range(n):
            w = buf[pos]
            trained_counts[w] += 1
            b = int(next_u64(state) % np.uint64(window))
            reach = window - b
            start = pos - reach
            if start < 0:
                start = 0
            stop = pos + reach + 1
            if stop > n:
                stop = n
            cw = 0
            for k in range(dim):
                h[k] = 0.0
                neu1e[k] = 0.0
            for c in range(start, stop):
                if c == pos:
                    continue
                row = buf[c]
                for k in range(dim):
                    h[k] += syn0[row, k]
                cw += 1
            if cw == 0:
                continue
            for k in range(dim):
                h[k] /= cw
            for d in range(negatives + 1):
                if d == 0:
                    target = w
                    label = 1.0
                else:
                    target = draw_index(neg_cum, next_uniform(state))
                    if target == w:
                        continue
                    label = 0.0
                f = 0.0
                for k in range(dim):
                    f += h[k] * syn1[target, k]
                if label > 0.5:
                    loss += _softplus(-f)
                else:
                    loss += _softplus(f)
                if f >= 0:
                    sig = 1.0 / (1.0 + math.exp(-f))
                else:
                    ef = math.exp(f)
                    sig = ef / (1.0 + ef)
                g = (label - sig) * lr
                for k in range(dim):
                    neu1e[k] += g * syn1[target, k]
                    syn1[target, k] += g * h[k]
            for c in range(start, stop):
                if c == pos:
                    continue
                row = buf[c]
                for k in range(dim):
                    syn0[row, k] += neu1e[k]
            n_examples += 1
    return loss, n_examples, seen
