"""Compiled box-hit scan; same contract as the numpy kernel, with per-index
early exit across coordinates."""
import numba
import numpy as np


@numba.njit(cache=True)
def _scan_impl(base_hi, base_lo, off_hi, off_lo, eps_hi, eps_lo, m, out):
    d = base_hi.shape[0]
    cnt = 0
    for k in range(m):
        hit = True
        for i in range(d):
            lo = off_lo[i, k] + base_lo[i]
            carry = np.uint64(1) if lo < off_lo[i, k] else np.uint64(0)
            hi = off_hi[i, k] + base_hi[i] + carry
            if not (hi < eps_hi or (hi == eps_hi and lo < eps_lo)):
                hit = False
                break
        if hit:
            out[cnt] = k
            cnt += 1
    return cnt


def box_scan(base_hi, base_lo, off_hi, off_lo, eps_hi, eps_lo, m):
    bh = np.asarray(base_hi, dtype=np.uint64)
    bl = np.asarray(base_lo, dtype=np.uint64)
    oh = np.ascontiguousarray(np.vstack([o[:m] for o in off_hi]))
    ol = np.ascontiguousarray(np.vstack([o[:m] for o in off_lo]))
    out = np.empty(m, dtype=np.int64)
    cnt = _scan_impl(bh, bl, oh, ol, np.uint64(eps_hi), np.uint64(eps_lo),
                     m, out)
    return out[:cnt].copy()
