# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled kernel backend.

Operation-for-operation twin of ``pure.py``; see the note there about keeping
both files in lockstep so outputs stay bit-identical.
"""

from libc.math cimport pow as cpow

import numpy as np


cdef inline unsigned long long _mix(unsigned long long z) nogil:
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL
    return z ^ (z >> 31)


def next_u64(state):
    """One SplitMix64 step: returns (output, new_state)."""
    cdef unsigned long long s = state
    s += 0x9E3779B97F4A7C15ULL
    return _mix(s), s


def next_double(state):
    """Uniform double in [0, 1) from the top 53 bits of one SplitMix64 step."""
    cdef unsigned long long s = state
    cdef unsigned long long z
    s += 0x9E3779B97F4A7C15ULL
    z = _mix(s)
    return (z >> 11) * (2.0 ** -53), s


def run_walk(
    long long[::1] indptr,
    long long[::1] indices,
    double[::1] weights,
    long long[::1] visits,
    long long start,
    long long max_len,
    double alpha,
    long long banned,
    bint per_step,
    state,
):
    """One exploratory walk over a CSR graph (see the pure twin's docstring)."""
    cdef unsigned long long rng = state
    cdef unsigned long long z
    cdef long long cur = start
    cdef long long lo, hi, e, v, nxt, chosen
    cdef long long j
    cdef double total, r, acc, s
    cdef double[::1] scores
    cdef long long n_path = 1

    path = [start]
    scratch = np.zeros(0, dtype=np.float64)

    while n_path < max_len:
        lo = indptr[cur]
        hi = indptr[cur + 1]
        if hi == lo:
            break
        if scratch.shape[0] < hi - lo:
            scratch = np.zeros(hi - lo, dtype=np.float64)
        scores = scratch
        total = 0.0
        for e in range(lo, hi):
            v = indices[e]
            if v != banned:
                s = weights[e] * cpow(1.0 / (1.0 + <double> visits[v]), alpha)
                scores[e - lo] = s
                total += s
            else:
                scores[e - lo] = 0.0
        if total <= 0.0:
            break
        rng += 0x9E3779B97F4A7C15ULL
        z = _mix(rng)
        r = ((z >> 11) * (2.0 ** -53)) * total
        chosen = -1
        acc = 0.0
        for j in range(hi - lo):
            acc += scores[j]
            if r < acc:
                chosen = lo + j
                break
        if chosen < 0:
            # r hit the accumulated total exactly; take the last positive entry
            for j in range(hi - lo - 1, -1, -1):
                if scores[j] > 0.0:
                    chosen = lo + j
                    break
        nxt = indices[chosen]
        path.append(nxt)
        n_path += 1
        if per_step:
            visits[nxt] += 1
        cur = nxt
    if not per_step:
        for j in range(1, n_path):
            visits[<long long> path[j]] += 1
    return path, rng


def lcs_length(long long[::1] a, long long[::1] b):
    """Length of the longest common subsequence of two int64 arrays."""
    cdef long long n = a.shape[0]
    cdef long long m = b.shape[0]
    if n == 0 or m == 0:
        return 0
    prev_arr = np.zeros(m + 1, dtype=np.int64)
    cur_arr = np.zeros(m + 1, dtype=np.int64)
    cdef long long[::1] prev = prev_arr
    cdef long long[::1] cur = cur_arr
    cdef long long[::1] tmp
    cdef long long i, j, ai
    for i in range(1, n + 1):
        ai = a[i - 1]
        for j in range(1, m + 1):
            if ai == b[j - 1]:
                cur[j] = prev[j - 1] + 1
            elif prev[j] >= cur[j - 1]:
                cur[j] = prev[j]
            else:
                cur[j] = cur[j - 1]
        tmp = prev
        prev = cur
        cur = tmp
    return prev[m]
