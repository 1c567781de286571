"""Vectorized block sieve: prime-power slices, one division per level."""
from __future__ import annotations

import numpy as np

SENTINEL = 1 << 40  # phase-index value marking f(n) = 0


def sieve_block(lo: int, hi: int, primes: np.ndarray, s_slot: np.ndarray,
                chi_idx: np.ndarray, q: int, n_s: int):
    """Phase data for n in [lo, hi).

    Returns (idx, e): idx[i] accumulates the character phase index of the
    non-modified part of lo+i (values >= SENTINEL mean the value is 0);
    e[j, i] is the exponent of the j-th modified prime in lo+i.
    """
    m = hi - lo
    n = np.arange(lo, hi, dtype=np.int64)
    rem = n.copy()
    idx = np.zeros(m, dtype=np.int64)
    e = np.zeros((n_s, m), dtype=np.int64)
    for t in range(len(primes)):
        p = int(primes[t])
        slot = int(s_slot[t])
        kp = int(chi_idx[p % q])
        pa = p
        while pa < hi:
            start = ((lo + pa - 1) // pa) * pa
            if start >= hi:
                break
            off = np.arange(start - lo, m, pa, dtype=np.int64)
            rem[off] //= p
            if slot < 0:
                idx[off] += kp
            else:
                e[slot, off] += 1
            if pa > (hi - 1) // p:
                break
            pa *= p
    big = rem > 1
    idx[big] += chi_idx[rem[big] % q]
    return idx, e
