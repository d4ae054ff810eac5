"""Compiled twin of the reference solver for bulk simulation.

Same algorithm, same SplitMix64 draw sequence, same counters as
:func:`roommates.solver.solve` over :class:`roommates.instance.LazyPreferences`
(or over :func:`roommates.instance.new_explicit_random` tables in eager
mode), so a seed yields an identical verdict and identical counters on
both paths. The lazy lists live in two open-addressing hash tables (keys and values
interleaved, linear probing) keyed by
``x * (n + 1) + i`` (rank -> person) and ``x * (n + 1) + y``
(person -> rank); the self-sentinels are implicit. If a table passes its
load limit the solve is restarted from the seed with twice the capacity.
"""

from __future__ import annotations

import math

import numpy as np
from numba import njit

U = np.uint64
MASK64 = (1 << 64) - 1
_GAMMA = U(0x9E3779B97F4A7C15)
_M1 = U(0xBF58476D1CE4E5B9)
_M2 = U(0x94D049BB133111EB)
_S30 = U(30)
_S27 = U(27)
_S31 = U(31)

SOLVED = 0
FAIL_PHASE_I = 1
FAIL_PHASE_II = 2
_OVERFLOW = -1

# counters layout
C_CALLS = 0
C_CREATED = 1
C_PHASE1 = 2
C_PHASE2 = 3
C_PEAK = 4
C_CREATED1 = 5
N_COUNTERS = 6


@njit(cache=True, inline="always")
def _mix64(z):
    z = (z ^ (z >> _S30)) * _M1
    z = (z ^ (z >> _S27)) * _M2
    return z ^ (z >> _S31)


@njit(cache=True)
def stream_seed(master, index):
    return _mix64(master + _GAMMA * U(index + 1))


@njit(cache=True, inline="always")
def _below(st, m):
    mu = U(m)
    t = (U(0) - mu) % mu
    limit = U(0) - t
    while True:
        st[0] += _GAMMA
        r = _mix64(st[0])
        if t == U(0) or r < limit:
            return np.int64(r % mu)


@njit(cache=True, inline="always")
def _slot(key, shift):
    return np.int64((U(key) * _GAMMA) >> shift)


@njit(cache=True, inline="always")
def _lookup(tab, key, shift, mask):
    s = _slot(key, shift)
    while True:
        k = tab[2 * s]
        if k == key:
            return tab[2 * s + 1]
        if k == -1:
            return -1
        s = (s + 1) & mask


@njit(cache=True, inline="always")
def _insert(tab, key, val, shift, mask):
    s = _slot(key, shift)
    while tab[2 * s] != -1:
        s = (s + 1) & mask
    tab[2 * s] = key
    tab[2 * s + 1] = val


@njit(cache=True)
def _get_data(n, x, i, eager, person, rank, ptab, rtab, shift, mask, limit, st, cnt, phase):
    """Return (y, r); y == -1 signals hash-table overflow."""
    cnt[C_CALLS] += 1
    if phase == 1:
        cnt[C_PHASE1] += 1
    else:
        cnt[C_PHASE2] += 1
    if eager:
        y = person[x, i]
        return y, rank[y, x]
    if i == n:
        return x, n
    w = n + 1
    y = _lookup(ptab, x * w + i, shift, mask)
    if y != -1:
        return y, _lookup(rtab, y * w + x, shift, mask)
    if cnt[C_PEAK] - n + 2 > limit:
        return -1, -1
    while True:
        y = _below(st, n) + 1
        if y != x and _lookup(rtab, x * w + y, shift, mask) == -1:
            break
    while True:
        r = _below(st, n) + 1
        if r != n and _lookup(ptab, y * w + r, shift, mask) == -1:
            break
    _insert(ptab, x * w + i, y, shift, mask)
    _insert(rtab, x * w + y, i, shift, mask)
    _insert(ptab, y * w + r, x, shift, mask)
    _insert(rtab, y * w + x, r, shift, mask)
    cnt[C_CREATED] += 1
    if phase == 1:
        cnt[C_CREATED1] += 1
    cnt[C_PEAK] += 2
    return y, r


@njit(cache=True)
def _run(n, eager, person, rank, ptab, rtab, shift, mask, limit, st, cnt, partner):
    leftperson = np.zeros(n + 1, np.int64)
    leftrank = np.ones(n + 1, np.int64)
    rightperson = np.arange(n + 1)
    rightrank = np.full(n + 1, n, np.int64)
    secondperson = np.zeros(n + 1, np.int64)
    secondrank = np.zeros(n + 1, np.int64)
    secondrightrank = np.zeros(n + 1, np.int64)
    holds = np.zeros(n + 1, np.bool_)
    mark = np.zeros(n + 1, np.bool_)
    walk = np.zeros(n + 1, np.int64)

    # phase I
    for x in range(1, n + 1):
        proposer = x
        while True:
            nxt, rk_ = _get_data(n, proposer, leftrank[proposer], eager, person, rank,
                                 ptab, rtab, shift, mask, limit, st, cnt, 1)
            if nxt == -1:
                return _OVERFLOW
            while rk_ > rightrank[nxt]:
                leftrank[proposer] += 1
                nxt, rk_ = _get_data(n, proposer, leftrank[proposer], eager, person, rank,
                                     ptab, rtab, shift, mask, limit, st, cnt, 1)
                if nxt == -1:
                    return _OVERFLOW
            previous = rightperson[nxt]
            rightrank[nxt] = rk_
            rightperson[nxt] = proposer
            leftperson[proposer] = nxt
            proposer = previous
            if not holds[nxt]:
                break
        holds[nxt] = True
        if leftrank[proposer] == n:
            return FAIL_PHASE_I

    # phase II
    while True:
        x = 1
        while x < n and leftrank[x] >= rightrank[x]:
            x += 1
        if leftrank[x] >= rightrank[x]:
            break
        length = 0
        while True:
            walk[length] = x
            length += 1
            mark[x] = True
            p = leftrank[x]
            while True:
                p += 1
                y, r = _get_data(n, x, p, eager, person, rank,
                                 ptab, rtab, shift, mask, limit, st, cnt, 2)
                if y == -1:
                    return _OVERFLOW
                if r <= rightrank[y]:
                    break
            secondrank[x] = p
            secondperson[x] = y
            secondrightrank[x] = r
            x = rightperson[y]
            if mark[x]:
                break
        first = 0
        while walk[first] != x:
            first += 1
        for k in range(length):
            mark[walk[k]] = False
        for k in range(first, length):
            v = walk[k]
            leftrank[v] = secondrank[v]
            leftperson[v] = secondperson[v]
            rightrank[leftperson[v]] = secondrightrank[v]
            rightperson[leftperson[v]] = v
        possible = True
        for k in range(first, length):
            v = walk[k]
            if leftrank[v] > rightrank[v]:
                possible = False
        if not possible:
            return FAIL_PHASE_II
    partner[:] = leftperson
    return SOLVED


@njit(cache=True)
def _shuffled_tables(n, st):
    person = np.zeros((n + 1, n + 1), np.int64)
    rank = np.zeros((n + 1, n + 1), np.int64)
    row = np.empty(n - 1, np.int64)
    for x in range(1, n + 1):
        m = 0
        for y in range(1, n + 1):
            if y != x:
                row[m] = y
                m += 1
        for k in range(n - 2, 0, -1):
            j = _below(st, k + 1)
            tmp = row[k]
            row[k] = row[j]
            row[j] = tmp
        for k in range(n - 1):
            person[x, k + 1] = row[k]
        person[x, n] = x
    for x in range(1, n + 1):
        for i in range(1, n + 1):
            rank[x, person[x, i]] = i
    return person, rank


@njit(cache=True)
def shuffled_tables(n, seed):
    """Compiled :func:`roommates.instance.new_explicit_random` tables."""
    st = np.empty(1, np.uint64)
    st[0] = seed
    return _shuffled_tables(n, st)


@njit(cache=True)
def _initial_log2(n):
    # a lazy solve discloses about 2 n^1.5 entries per table
    need = 3.0 * n * math.sqrt(n) + 64.0
    b = 6
    while (1 << b) < need:
        b += 1
    return b


@njit(cache=True, nogil=True)
def solve_seed(n, seed, eager, cnt, partner):
    """Solve the random instance of size n generated from ``seed``.

    ``cnt`` (int64[N_COUNTERS]) and ``partner`` (int64[n + 1]) are filled in place.
    Returns SOLVED, FAIL_PHASE_I or FAIL_PHASE_II.
    """
    dummy = np.zeros((1, 1), np.int64)
    if eager:
        st = np.empty(1, np.uint64)
        st[0] = seed
        person, rank = _shuffled_tables(n, st)
        cnt[:] = 0
        cnt[C_PEAK] = n * n
        empty = np.zeros(1, np.int64)
        return _run(n, True, person, rank, empty, empty,
                    U(63), 0, 0, st, cnt, partner)
    log2 = _initial_log2(n)
    while True:
        cap = 1 << log2
        ptab = np.full(2 * cap, -1, np.int64)
        rtab = np.full(2 * cap, -1, np.int64)
        st = np.empty(1, np.uint64)
        st[0] = seed
        cnt[:] = 0
        cnt[C_PEAK] = n
        code = _run(n, False, dummy, dummy, ptab, rtab,
                    U(64 - log2), cap - 1, (cap * 7) // 10, st, cnt, partner)
        if code != _OVERFLOW:
            return code
        log2 += 1


@njit(cache=True, nogil=True)
def outcomes_range(n, master, start, stop, eager):
    """Verdict codes for instances ``start..stop-1`` of a batch."""
    out = np.empty(stop - start, np.int8)
    cnt = np.zeros(N_COUNTERS, np.int64)
    partner = np.zeros(n + 1, np.int64)
    for k in range(start, stop):
        out[k - start] = solve_seed(n, stream_seed(master, k), eager, cnt, partner)
    return out


@njit(cache=True, nogil=True)
def counters_range(n, master, start, stop):
    """Per-instance counters (rows) and verdict codes for lazy solves."""
    rows = np.empty((stop - start, N_COUNTERS), np.int64)
    codes = np.empty(stop - start, np.int8)
    cnt = np.zeros(N_COUNTERS, np.int64)
    partner = np.zeros(n + 1, np.int64)
    for k in range(start, stop):
        codes[k - start] = solve_seed(n, stream_seed(master, k), False, cnt, partner)
        rows[k - start, :] = cnt
    return rows, codes
