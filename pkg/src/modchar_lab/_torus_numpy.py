"""Vectorized box-hit scan over a chunk of orbit indices.

All comparisons are on 128-bit values split into uint64 limbs; a hit means
every coordinate is strictly below the box side. Wraparound additions are
the arithmetic, so overflow stays silenced locally.
"""
import numpy as np


def box_scan(base_hi, base_lo, off_hi, off_lo, eps_hi, eps_lo, m):
    """Indices k in [0, m) whose d coordinates base[i] + off[i][k] all fall
    below (eps_hi, eps_lo); offsets may be longer than m and are sliced."""
    d = len(base_hi)
    ok = None
    with np.errstate(over="ignore"):
        for i in range(d):
            lo = off_lo[i][:m] + np.uint64(base_lo[i])
            carry = lo < off_lo[i][:m]
            hi = off_hi[i][:m] + np.uint64(base_hi[i]) + carry
            below = (hi < eps_hi) | ((hi == eps_hi) & (lo < eps_lo))
            ok = below if ok is None else (ok & below)
            if not ok.any():
                return np.empty(0, dtype=np.int64)
    return np.flatnonzero(ok).astype(np.int64)
