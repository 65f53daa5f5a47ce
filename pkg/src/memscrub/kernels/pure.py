"""Pure-Python kernel twin.

Implements exactly the same operations, in exactly the same order, as the
compiled backend in ``_native.pyx``. Every arithmetic step is IEEE-754 double
precision through the same libm entry points, so walks and LCS tables are
bit-identical across backends. Keep the two files in lockstep.
"""

from __future__ import annotations

import math

_MASK64 = (1 << 64) - 1


def next_u64(state: int) -> tuple[int, int]:
    """One SplitMix64 step: returns (output, new_state)."""
    state = (state + 0x9E3779B97F4A7C15) & _MASK64
    z = state
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK64
    z = z ^ (z >> 31)
    return z, state


def next_double(state: int) -> tuple[float, int]:
    """Uniform double in [0, 1) from the top 53 bits of one SplitMix64 step."""
    z, state = next_u64(state)
    return (z >> 11) * 2.0**-53, state


def run_walk(
    indptr,
    indices,
    weights,
    visits,
    start: int,
    max_len: int,
    alpha: float,
    banned: int,
    per_step: bool,
    state: int,
) -> tuple[list[int], int]:
    """One exploratory walk over a CSR graph.

    Transition scores are w(u,v) * (1 / (1 + vis(v)))**alpha; `banned` (pass -1
    for none) is scored 0. `visits` is mutated: after each accepted step when
    `per_step`, otherwise once for the whole walk after it ends. Consumes one
    RNG draw per accepted step. Returns (node-index path, new RNG state).
    """
    path = [start]
    cur = start
    while len(path) < max_len:
        lo = int(indptr[cur])
        hi = int(indptr[cur + 1])
        if hi == lo:
            break
        scores = [0.0] * (hi - lo)
        total = 0.0
        for e in range(lo, hi):
            v = int(indices[e])
            if v != banned:
                s = float(weights[e]) * math.pow(1.0 / (1.0 + float(visits[v])), alpha)
                scores[e - lo] = s
                total += s
        if total <= 0.0:
            break
        r, state = next_double(state)
        r *= total
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
        nxt = int(indices[chosen])
        path.append(nxt)
        if per_step:
            visits[nxt] += 1
        cur = nxt
    if not per_step:
        for v in path[1:]:
            visits[v] += 1
    return path, state


def lcs_length(a, b) -> int:
    """Length of the longest common subsequence of two int sequences."""
    n = len(a)
    m = len(b)
    if n == 0 or m == 0:
        return 0
    prev = [0] * (m + 1)
    cur = [0] * (m + 1)
    for i in range(1, n + 1):
        ai = a[i - 1]
        for j in range(1, m + 1):
            if ai == b[j - 1]:
                cur[j] = prev[j - 1] + 1
            elif prev[j] >= cur[j - 1]:
                cur[j] = prev[j]
            else:
                cur[j] = cur[j - 1]
        prev, cur = cur, prev
    return prev[m]
