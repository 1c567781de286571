"""128-bit fixed-point fractional arithmetic for torus orbits.

A fraction x in [0,1) is stored as round(x * 2^128), a python int; orbit
steps are exact integer adds/multiplies mod 2^128. Kernels that need numpy
vectorization view the same value as two uint64 limbs (hi, lo).
"""
from __future__ import annotations

from fractions import Fraction
from functools import lru_cache

import mpmath as mp
import numpy as np

from .errors import PrecisionError

BITS = 128
MOD = 1 << BITS
MASK = MOD - 1
U64 = 1 << 64


@lru_cache(maxsize=4096)
def frac_log_fixed(p: int) -> int:
    """round(frac(log p) * 2^128), computed at 300-bit precision and
    revalidated at 360 bits."""
    def compute(prec: int) -> int:
        with mp.workprec(prec):
            x = mp.frac(mp.log(p))
            return int(mp.floor(x * MOD + mp.mpf("0.5")))
    a, b = compute(300), compute(360)
    if a != b:
        raise PrecisionError(f"frac(log {p}) fixed-point value unstable across precisions")
    return a % MOD


@lru_cache(maxsize=4096)
def int_log(p: int) -> int:
    with mp.workprec(300):
        return int(mp.floor(mp.log(p)))


def to_fixed(x) -> int:
    """round(frac(x) * 2^128) for Fraction, int, or float input (exact)."""
    f = Fraction(x) % 1
    num, den = f.numerator, f.denominator
    return ((num << (BITS + 1)) + den) // (2 * den) % MOD


def fixed_to_float(v: int) -> float:
    return v / MOD


def split_limbs(v: int) -> tuple[int, int]:
    """(hi, lo) uint64 limbs of a 128-bit value."""
    return (v >> 64) & (U64 - 1), v & (U64 - 1)


def chunk_offsets(a_fixed: int, count: int) -> tuple[np.ndarray, np.ndarray]:
    """(hi, lo) limb arrays of k*a mod 2^128 for k = 0..count-1.

    Built from uint64 wrap-around products plus a cumulative carry count;
    exact because each +a step wraps the low limb at most once.
    """
    a_hi, a_lo = split_limbs(a_fixed)
    k = np.arange(count, dtype=np.uint64)
    lo = k * np.uint64(a_lo)                      # exact mod 2^64
    carries = np.zeros(count, dtype=np.uint64)
    if count > 1:
        np.cumsum(lo[1:] < lo[:-1], dtype=np.uint64, out=carries[1:])
    hi = k * np.uint64(a_hi) + carries            # exact mod 2^64
    return hi, lo


def add_mod128(base_hi: int, base_lo: int, hi: np.ndarray, lo: np.ndarray):
    """(base + offsets) mod 2^128 limb-wise; returns (hi, lo) arrays."""
    lo2 = lo + np.uint64(base_lo)
    carry = (lo2 < lo).astype(np.uint64)
    hi2 = hi + np.uint64(base_hi) + carry
    return hi2, lo2


def mul_small_mod128(m: int, a_hi: np.ndarray | int, a_lo: np.ndarray | int):
    """m * a mod 2^128 for |m| < 2^31, a given as uint64 limbs."""
    neg = m < 0
    mm = np.uint64(abs(m))
    m32 = np.uint64(0xFFFFFFFF)
    with np.errstate(over="ignore"):  # uint64 wraparound is the arithmetic
        p0 = mm * (np.uint64(a_lo) & m32)
        p1 = mm * (np.uint64(a_lo) >> np.uint64(32))
        lo = p0 + ((p1 & m32) << np.uint64(32))
        carry = (p1 >> np.uint64(32)) + (lo < p0).astype(np.uint64) \
            if isinstance(lo, np.ndarray) \
            else (p1 >> np.uint64(32)) + np.uint64(1 if lo < p0 else 0)
        hi = mm * np.uint64(a_hi) + carry
        if neg:
            lo_n = (np.uint64(0) - lo)
            borrow = (lo != np.uint64(0)).astype(np.uint64) \
                if isinstance(lo, np.ndarray) \
                else np.uint64(1 if lo != 0 else 0)
            hi = np.uint64(0) - hi - borrow
            lo = lo_n
    return hi, lo
