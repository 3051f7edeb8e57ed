"""Compiled batch samplers for the bottom rows of RSK insertion tableaux.

Every kernel draws its letters from the ``numpy.random.Generator`` passed in,
in the same order as ``gen.random()`` would from Python, so a kernel run can
be replayed letter by letter by the pure-Python reference code.

Rows live in one flat float64 buffer, row ``r`` occupying
``buf[r * cap : r * cap + lens[r]]``.  Label ``k + 1`` encodes a new box
above row ``k``.
"""

import math

import numpy as np
from numba import njit


def row_capacity(n: int) -> int:
    # lambda_0 of a Plancherel diagram is 2*sqrt(n) + O(n^(1/6)).
    return int(3.0 * math.sqrt(n)) + 32


@njit(cache=True, boundscheck=False)
def _cascade(buf, lens, cap, k, a):
    # Start the scan near the expected position; only speed depends on it.
    hint = int(lens[0] * math.sqrt(a))
    for r in range(k + 1):
        L = lens[r]
        off = r * cap
        p = hint if hint < L else L
        if p < L and buf[off + p] <= a:
            p += 1
            while p < L and buf[off + p] <= a:
                p += 1
        else:
            while p > 0 and buf[off + p - 1] > a:
                p -= 1
        if p == L:
            if L == cap:
                raise ValueError("row capacity exceeded")
            buf[off + L] = a
            lens[r] = L + 1
            return r
        b = buf[off + p]
        buf[off + p] = a
        a = b
        hint = p
    return k + 1


@njit(cache=True)
def grow_labels(gen, reps, burn, steps, k, cap):
    """Growth labels of insertions ``burn+1 .. burn+steps``, per replicate.

    Also returns the bottom ``k + 1`` row lengths after the last insertion.
    """
    labels = np.empty((reps, steps), np.int8)
    lengths = np.empty((reps, k + 1), np.int64)
    buf = np.empty((k + 1) * cap)
    lens = np.zeros(k + 1, np.int64)
    for rep in range(reps):
        lens[:] = 0
        for _ in range(burn):
            _cascade(buf, lens, cap, k, gen.random())
        for j in range(steps):
            labels[rep, j] = _cascade(buf, lens, cap, k, gen.random())
        lengths[rep, :] = lens
    return labels, lengths


@njit(cache=True)
def bottom_rows(gen, reps, n, k, cap):
    """Rows ``0..k`` of the insertion tableau of ``n`` uniform letters.

    Returns ``(values, lengths)``; ``values[rep, r, :lengths[rep, r]]`` is
    row ``r`` and the rest is NaN.
    """
    values = np.full((reps, k + 1, cap), np.nan)
    lengths = np.empty((reps, k + 1), np.int64)
    buf = np.empty((k + 1) * cap)
    lens = np.zeros(k + 1, np.int64)
    for rep in range(reps):
        lens[:] = 0
        for _ in range(n):
            _cascade(buf, lens, cap, k, gen.random())
        for r in range(k + 1):
            L = lens[r]
            values[rep, r, :L] = buf[r * cap: r * cap + L]
        lengths[rep, :] = lens
    return values, lengths


@njit(cache=True)
def cascade_words(words, k, cap):
    """Feed explicit letters through the kernel; used to cross-check it."""
    reps, n = words.shape
    labels = np.empty((reps, n), np.int8)
    values = np.full((reps, k + 1, cap), np.nan)
    buf = np.empty((k + 1) * cap)
    lens = np.zeros(k + 1, np.int64)
    for rep in range(reps):
        lens[:] = 0
        for i in range(n):
            labels[rep, i] = _cascade(buf, lens, cap, k, words[rep, i])
        for r in range(k + 1):
            L = lens[r]
            values[rep, r, :L] = buf[r * cap: r * cap + L]
    return labels, values


@njit(cache=True)
def shapes(gen, reps, n, k, cap):
    """Lengths of rows ``0..k`` after ``n`` uniform letters, per replicate."""
    lengths = np.empty((reps, k + 1), np.int64)
    buf = np.empty((k + 1) * cap)
    lens = np.zeros(k + 1, np.int64)
    for rep in range(reps):
        lens[:] = 0
        for _ in range(n):
            _cascade(buf, lens, cap, k, gen.random())
        lengths[rep, :] = lens
    return lengths
