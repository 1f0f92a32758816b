"""Compiled inner loop shared by every simulated run.

The loop consumes random variates from a ``numpy.random.Generator`` in a fixed
order per generation: the mutation draws of :func:`sswmlab.mutation.flip_positions`
followed, for SSWM only, by one uniform for the acceptance test.
"""

import math

import numpy as np
from numba import njit

ONEMAX, CLIFF, BALANCE = 0, 1, 2
SSWM, EA = 0, 1
LOCAL, GLOBAL = 0, 1

# layout of the int64 stats vector filled for balance runs
ST_LO_DEC, ST_LO_DEC_WINDOW, ST_RELEVANT, ST_MAX_B, ST_MIN_B, ST_TRAP, ST_ZERO = range(7)
N_STATS = 7


@njit(cache=True)
def pfix(df, N, beta):
    if N == 1.0:
        return 1.0
    x = 2.0 * beta * df
    if x == 0.0:
        return 1.0 / N
    if N * x < -700.0:
        y = -x
        return math.exp(-(N - 1.0) * y) * (-math.expm1(-y)) / (-math.expm1(-N * y))
    return math.expm1(-x) / math.expm1(-N * x)


@njit(cache=True)
def level_value(prob, n, d, ones):
    if prob == CLIFF and ones > n - d:
        return ones - d + 0.5
    return float(ones)


@njit(cache=True)
def balance_branch(n, lo, zeros_a, ones_b):
    if 2 * lo == n:
        return 1
    if n < 16 * ones_b and 16 * ones_b < 7 * n:
        return 2
    if zeros_a > math.sqrt(n):
        return 3
    return 4


@njit(cache=True)
def balance_value(n, lo, zeros_a, ones_b):
    br = balance_branch(n, lo, zeros_a, ones_b)
    if br == 1:
        return float(n) ** 3
    if br == 2:
        return float(ones_b + n * lo)
    if br == 3:
        return float(n) * n * lo
    return 0.0


@njit(cache=True)
def _leading_ones(x, start, h):
    q = start
    while q < h and x[q] == 1:
        q += 1
    return q


@njit(cache=True)
def simulate(x, prob, d, algo, mut, N, beta, ptable, cdf, budget, rng, stats, trace):
    """Run one process from ``x`` (modified in place).

    ``ptable[m + c]`` (``c = len(ptable) // 2``) holds ``p_fix(m / 2)``; other
    differences are evaluated directly. ``cdf`` is the flip-count CDF of a
    global mutation. Returns ``(generations, success, final_fitness)``.
    ``trace`` receives the current fitness after every generation when it has
    length ``budget + 1``.
    """
    n = x.shape[0]
    h = n // 2
    record = trace.shape[0] > 0
    pos = np.empty(n, dtype=np.int64)
    centre = ptable.shape[0] // 2

    ones = 0
    for q in range(n):
        ones += x[q]
    ones_a = 0
    ones_b = 0
    lo = 0
    if prob == BALANCE:
        for q in range(h):
            ones_a += x[q]
        ones_b = ones - ones_a
        lo = _leading_ones(x, 0, h)
        f = balance_value(n, lo, h - ones_a, ones_b)
        opt = float(n) ** 3
        stats[ST_MAX_B] = ones_b
        stats[ST_MIN_B] = ones_b
    else:
        f = level_value(prob, n, d, ones)
        opt = level_value(prob, n, d, n)
    if record:
        trace[0] = f
    if f == opt:
        return 0, True, f

    gen = 0
    while gen < budget:
        gen += 1
        if mut == LOCAL:
            k = 1
            pos[0] = np.int64(rng.random() * n)
        else:
            v = rng.random()
            k = 0
            while v >= cdf[k]:
                k += 1
            c = 0
            for j in range(n - k, n):
                t = np.int64(rng.random() * (j + 1))
                for w in range(c):
                    if pos[w] == t:
                        t = j
                        break
                pos[c] = t
                c += 1

        d_ones = 0
        d_a = 0
        min_a = n
        for u in range(k):
            p = pos[u]
            step = 1 - 2 * np.int64(x[p])
            x[p] ^= 1
            d_ones += step
            if p < h:
                d_a += step
                if p < min_a:
                    min_a = p
        new_ones = ones + d_ones

        if prob == BALANCE:
            new_ones_a = ones_a + d_a
            new_ones_b = new_ones - new_ones_a
            if min_a < lo:
                new_lo = min_a
            elif min_a == lo:
                new_lo = _leading_ones(x, lo, h)
            else:
                new_lo = lo
            fy = balance_value(n, new_lo, h - new_ones_a, new_ones_b)
            if mut == LOCAL or min_a >= lo:
                stats[ST_RELEVANT] += 1
        else:
            fy = level_value(prob, n, d, new_ones)

        delta = fy - f
        if algo == EA:
            accepted = delta >= 0.0
        else:
            m = 2.0 * delta
            if abs(m) < centre and m == math.floor(m):
                pa = ptable[np.int64(m) + centre]
            else:
                pa = pfix(delta, N, beta)
            accepted = rng.random() < pa

        if accepted:
            if prob == BALANCE:
                if new_lo < lo:
                    stats[ST_LO_DEC] += 1
                    if (n < 16 * ones_b < 7 * n) and (n < 16 * new_ones_b < 7 * n):
                        stats[ST_LO_DEC_WINDOW] += 1
                br = balance_branch(n, new_lo, h - new_ones_a, new_ones_b)
                if br == 3:
                    stats[ST_TRAP] = 1
                elif br == 4:
                    stats[ST_ZERO] = 1
                if new_ones_b > stats[ST_MAX_B]:
                    stats[ST_MAX_B] = new_ones_b
                if new_ones_b < stats[ST_MIN_B]:
                    stats[ST_MIN_B] = new_ones_b
                ones_a = new_ones_a
                ones_b = new_ones_b
                lo = new_lo
            ones = new_ones
            f = fy
        else:
            for u in range(k):
                x[pos[u]] ^= 1
        if record:
            trace[gen] = f
        if accepted and f == opt:
            return gen, True, f
    return gen, False, f
