"""Jit block sieve: per-multiple trial division with local loops."""
from __future__ import annotations

import numpy as np
from numba import njit

SENTINEL = 1 << 40


@njit(cache=True)
def _sieve_block_impl(lo, hi, primes, s_slot, chi_idx, q, idx, e):
    m = hi - lo
    rem = np.empty(m, dtype=np.int64)
    for i in range(m):
        rem[i] = lo + i
        idx[i] = 0
    for j in range(e.shape[0]):
        for i in range(m):
            e[j, i] = 0
    for t in range(primes.shape[0]):
        p = primes[t]
        slot = s_slot[t]
        kp = chi_idx[p % q]
        start = ((lo + p - 1) // p) * p
        for v in range(start - lo, m, p):
            r = rem[v]
            a = 0
            while r % p == 0:
                r //= p
                a += 1
            rem[v] = r
            if slot < 0:
                idx[v] += a * kp
            else:
                e[slot, v] += a
    for i in range(m):
        if rem[i] > 1:
            idx[i] += chi_idx[rem[i] % q]


def sieve_block(lo: int, hi: int, primes: np.ndarray, s_slot: np.ndarray,
                chi_idx: np.ndarray, q: int, n_s: int):
    m = hi - lo
    idx = np.empty(m, dtype=np.int64)
    e = np.empty((n_s, m), dtype=np.int64)
    _sieve_block_impl(lo, hi, primes.astype(np.int64), s_slot.astype(np.int64),
                      chi_idx.astype(np.int64), q, idx, e)
    return idx, e
