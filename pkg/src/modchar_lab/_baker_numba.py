"""Compiled shell-minimum scan for ||m . alpha|| over |m|_inf <= M.

Walks the half grid (first nonzero coordinate positive) with incremental
128-bit phase accumulation; distances match the numpy path bit for bit
because both convert the identical limb pairs through the same expression.
"""
import numba
import numpy as np


@numba.njit(cache=True, inline="always")
def _dist(hi, lo):
    vf = hi * 2.0 ** -64 + lo * 2.0 ** -128
    if vf <= 0.5:
        return vf
    return 1.0 - vf


@numba.njit(cache=True)
def _shell_mins_impl(alpha_hi, alpha_lo, M, out):
    d = alpha_hi.shape[0]
    if d == 1:
        hi = np.uint64(0)
        lo = np.uint64(0)
        for m in range(1, M + 1):
            lo2 = lo + alpha_lo[0]
            c = np.uint64(1) if lo2 < lo else np.uint64(0)
            hi = hi + alpha_hi[0] + c
            lo = lo2
            out[m] = _dist(hi, lo)
        return
    # negated step for the last coordinate, to seed each inner sweep at -M
    neg_lo = np.uint64(0) - alpha_lo[d - 1]
    neg_hi = np.uint64(0) - alpha_hi[d - 1] - (np.uint64(1) if alpha_lo[d - 1] != np.uint64(0) else np.uint64(0))
    seed_hi = np.uint64(0)
    seed_lo = np.uint64(0)
    for _ in range(M):
        lo2 = seed_lo + neg_lo
        c = np.uint64(1) if lo2 < seed_lo else np.uint64(0)
        seed_hi = seed_hi + neg_hi + c
        seed_lo = lo2
    if d == 2:
        h1_hi = np.uint64(0)
        h1_lo = np.uint64(0)
        for m1 in range(0, M + 1):
            if m1 > 0:
                lo2 = h1_lo + alpha_lo[0]
                c = np.uint64(1) if lo2 < h1_lo else np.uint64(0)
                h1_hi = h1_hi + alpha_hi[0] + c
                h1_lo = lo2
            lo2 = h1_lo + seed_lo
            c = np.uint64(1) if lo2 < h1_lo else np.uint64(0)
            v_hi = h1_hi + seed_hi + c
            v_lo = lo2
            for m2 in range(-M, M + 1):
                if m1 != 0 or m2 != 0:
                    shell = m1 if m1 > (m2 if m2 >= 0 else -m2) else (m2 if m2 >= 0 else -m2)
                    dd = _dist(v_hi, v_lo)
                    if dd < out[shell]:
                        out[shell] = dd
                lo2 = v_lo + alpha_lo[1]
                c = np.uint64(1) if lo2 < v_lo else np.uint64(0)
                v_hi = v_hi + alpha_hi[1] + c
                v_lo = lo2
        return
    # d == 3
    seed2_hi = np.uint64(0)
    seed2_lo = np.uint64(0)
    neg2_lo = np.uint64(0) - alpha_lo[1]
    neg2_hi = np.uint64(0) - alpha_hi[1] - (np.uint64(1) if alpha_lo[1] != np.uint64(0) else np.uint64(0))
    for _ in range(M):
        lo2 = seed2_lo + neg2_lo
        c = np.uint64(1) if lo2 < seed2_lo else np.uint64(0)
        seed2_hi = seed2_hi + neg2_hi + c
        seed2_lo = lo2
    h1_hi = np.uint64(0)
    h1_lo = np.uint64(0)
    for m1 in range(0, M + 1):
        if m1 > 0:
            lo2 = h1_lo + alpha_lo[0]
            c = np.uint64(1) if lo2 < h1_lo else np.uint64(0)
            h1_hi = h1_hi + alpha_hi[0] + c
            h1_lo = lo2
        lo2 = h1_lo + seed2_lo
        c = np.uint64(1) if lo2 < h1_lo else np.uint64(0)
        h2_hi = h1_hi + seed2_hi + c
        h2_lo = lo2
        for m2 in range(-M, M + 1):
            a1 = m1
            a2 = m2 if m2 >= 0 else -m2
            h12 = a1 if a1 > a2 else a2
            lo2 = h2_lo + seed_lo
            c = np.uint64(1) if lo2 < h2_lo else np.uint64(0)
            v_hi = h2_hi + seed_hi + c
            v_lo = lo2
            for m3 in range(-M, M + 1):
                if m1 != 0 or m2 != 0 or m3 != 0:
                    a3 = m3 if m3 >= 0 else -m3
                    shell = h12 if h12 > a3 else a3
                    dd = _dist(v_hi, v_lo)
                    if dd < out[shell]:
                        out[shell] = dd
                lo2 = v_lo + alpha_lo[2]
                c = np.uint64(1) if lo2 < v_lo else np.uint64(0)
                v_hi = v_hi + alpha_hi[2] + c
                v_lo = lo2
            lo2 = h2_lo + alpha_lo[1]
            c = np.uint64(1) if lo2 < h2_lo else np.uint64(0)
            h2_hi = h2_hi + alpha_hi[1] + c
            h2_lo = lo2


def shell_mins(alpha_hi, alpha_lo, M):
    out = np.full(M + 1, np.inf)
    _shell_mins_impl(np.asarray(alpha_hi, dtype=np.uint64),
                     np.asarray(alpha_lo, dtype=np.uint64), M, out)
    return out
