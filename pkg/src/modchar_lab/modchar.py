"""Modified characters f: a primitive base character with finitely many
prime values replaced by unimodular phases, evaluated pointwise or streamed
as partial sums M(x) by a segmented sieve.

The sieve works in integer phase indices (exact) and converts to complex
once per block in shared driver code, so both kernel backends produce
bit-identical traces.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from math import gcd, isqrt

import numpy as np

from . import backend
from .characters import DirichletCharacter, RationalPhase
from .errors import (CompositeModulusKeyError, DomainError,
                     NonPrimitiveBaseError, PhaseCollisionError,
                     ResourceLimitError, ValidationError)

SENTINEL = 1 << 40
DEFAULT_BLOCK = 1 << 22
MAX_KEPT_VALUES = 1 << 24  # largest X for which the full M array is retained


def _is_prime(n: int) -> bool:
    if n < 2:
        return False
    for p in (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31):
        if n % p == 0:
            return n == p
    d, i = 37, 4
    # 2,4-wheel trial division
    while d * d <= n:
        if n % d == 0:
            return False
        d += (2, 4)[i % 2]
        i += 1
    return True


@dataclass(frozen=True)
class ModifiedCharacter:
    """Completely multiplicative f with f(p) = e^{2*pi*i*theta_p} on a finite
    prime set S and f(p) = chi(p) elsewhere."""
    base: DirichletCharacter
    modifications: tuple  # sorted tuple of (prime, theta); theta Fraction or float

    @property
    def s_primes(self) -> tuple:
        return tuple(p for p, _ in self.modifications)

    @property
    def s_size(self) -> int:
        return len(self.modifications)

    def theta(self, p: int):
        for pp, th in self.modifications:
            if pp == p:
                return th
        raise KeyError(p)

    def value_at_prime(self, p: int) -> complex:
        for pp, th in self.modifications:
            if pp == p:
                if isinstance(th, Fraction):
                    return RationalPhase.make(th).to_complex()
                return complex(math.cos(2 * math.pi * th), math.sin(2 * math.pi * th))
        return self.base.value_complex(p)

    def all_theta_rational(self) -> bool:
        return all(isinstance(th, Fraction) for _, th in self.modifications)

    def descriptor(self) -> str:
        mods = ",".join(f"{p}:{th}" for p, th in self.modifications)
        return f"modulus={self.base.modulus};mods={mods}"


def make_modified(chi: DirichletCharacter, mods: dict) -> ModifiedCharacter:
    """Validated modified character; raises a distinct error per violation."""
    if not chi.is_primitive():
        raise NonPrimitiveBaseError(
            f"base character must be primitive (conductor {chi.conductor} "
            f"!= modulus {chi.modulus})")
    if not mods:
        raise ValidationError("modification set S must be non-empty")
    cleaned = []
    for p, th in sorted(mods.items()):
        if not isinstance(p, int) or not _is_prime(p):
            raise CompositeModulusKeyError(f"modification key {p} is not prime")
        if isinstance(th, float):
            theta = th % 1.0
        else:
            theta = Fraction(th) % 1
        chi_p = chi(p)
        if chi_p is not None and Fraction(theta) % 1 == chi_p.fraction:
            raise PhaseCollisionError(
                f"theta_{p}={th} reproduces chi({p}); modification must change the value")
        cleaned.append((p, theta))
    return ModifiedCharacter(chi, tuple(cleaned))


def _phase_parts(f: ModifiedCharacter, n: int):
    """(chi phase index sum over L, S-exponent list) of n by trial division."""
    chi = f.base
    L = chi.order()
    tbl = chi.phase_index_table(L)
    s_primes = f.s_primes
    e = [0] * len(s_primes)
    k = 0
    m = n
    for i, p in enumerate(s_primes):
        while m % p == 0:
            m //= p
            e[i] += 1
    d = 2
    while d * d <= m:
        while m % d == 0:
            m //= d
            t = tbl[d % chi.modulus]
            k = SENTINEL if (t < 0 or k >= SENTINEL) else k + t
        d += 1
    if m > 1:
        t = tbl[m % chi.modulus]
        k = SENTINEL if (t < 0 or k >= SENTINEL) else k + t
    return k if k < SENTINEL else -1, e


def _s_factor_tables(f: ModifiedCharacter):
    """Per modified prime: (complex table indexed by exponent mod den) for
    rational theta, or (None, float theta) for the non-exact path."""
    out = []
    for p, th in f.modifications:
        if isinstance(th, Fraction):
            den = th.denominator
            tab = np.array([RationalPhase.make(j * th).to_complex() for j in range(den)],
                           dtype=np.complex128)
            out.append((tab, den, None))
        else:
            out.append((None, 0, float(th)))
    return out


def eval_f(f: ModifiedCharacter, n: int) -> complex:
    """f(n) by trial division with exact phase accumulation."""
    if n <= 0:
        raise DomainError(f"f is defined on positive integers, got {n}")
    k, e = _phase_parts(f, n)
    if k < 0:
        return 0j
    L = f.base.order()
    val = RationalPhase.make(Fraction(k % L, L)).to_complex()
    for (tab, den, th_f), a in zip(_s_factor_tables(f), e):
        if tab is not None:
            val = val * tab[a % den]
        else:
            val = val * np.exp(2j * np.pi * th_f * a)
    return complex(val)


@dataclass
class PartialSumTrace:
    """Streamed record of M(x) = sum_{n<=x} f(n)."""
    X_max: int
    stride: int
    sample_x: np.ndarray          # int64 sample positions
    sample_M: np.ndarray          # complex M at samples
    running_sup: np.ndarray       # sup_{y<=x} |M(y)| at the same positions
    values: np.ndarray | None     # full M array (index n-1) when retained
    meta: dict = field(default_factory=dict)

    def samples(self):
        return list(zip(self.sample_x.tolist(), self.sample_M.tolist()))


def partial_sums(f: ModifiedCharacter, X: int, stride: int = 1,
                 block: int = DEFAULT_BLOCK, keep_values: bool | None = None,
                 max_kept: int = MAX_KEPT_VALUES) -> PartialSumTrace:
    """Exact M(n) for all n <= X via a segmented sieve in O(X log log X).

    keep_values=None retains the full complex M array when X <= max_kept;
    requesting it beyond that raises a resource error (advice: raise
    max_kept or lower X; the sieve itself only ever holds one block).
    """
    if X < 1:
        raise DomainError(f"X must be >= 1, got {X}")
    if stride < 1:
        raise ValidationError(f"stride must be >= 1, got {stride}")
    if keep_values is None:
        keep_values = X <= max_kept
    elif keep_values and X > max_kept:
        raise ResourceLimitError(
            f"cannot retain {X} complex values (cap {max_kept}); raise "
            f"max_kept explicitly or increase the block count instead")

    chi = f.base
    q = chi.modulus
    L = chi.order()
    chi_idx_raw = chi.phase_index_table(L)
    chi_idx = np.where(chi_idx_raw < 0, SENTINEL, chi_idx_raw).astype(np.int64)
    chi_table = np.array([RationalPhase.make(Fraction(k, L)).to_complex()
                          for k in range(L)], dtype=np.complex128)
    s_tables = _s_factor_tables(f)
    s_primes = list(f.s_primes)

    plist = _primes_upto(max(isqrt(X), max(s_primes))) if X > 1 else np.array(s_primes)
    plist = np.unique(np.concatenate([plist, np.array(s_primes, dtype=np.int64)]))
    s_slot = np.array([s_primes.index(int(p)) if int(p) in s_primes else -1
                       for p in plist], dtype=np.int64)

    kernel = backend.dispatch(_numpy_kernel, _numba_kernel)()

    n_samples = X // stride + (1 if X % stride else 0)
    sample_x, sample_M, sample_sup = [], [], []
    values = np.empty(X, dtype=np.complex128) if keep_values else None

    carry = 0.0 + 0.0j
    comp = 0.0 + 0.0j
    sup_carry = 0.0
    env_carry = 0.0
    pos = 0
    for lo in range(1, X + 1, block):
        hi = min(lo + block, X + 1)
        m = hi - lo
        idx, e = kernel(lo, hi, plist, s_slot, chi_idx, q, len(s_primes))
        zero = idx >= SENTINEL
        safe = np.where(zero, 0, idx % L)
        vals = np.where(zero, 0, chi_table[safe])
        for (tab, den, th_f), erow in zip(s_tables, e):
            if tab is not None:
                vals = vals * tab[erow % den]
            else:
                vals = vals * np.exp(2j * np.pi * th_f * erow)
        c = np.cumsum(vals)
        Mb = c + carry
        if values is not None:
            values[pos:pos + m] = Mb
        sup_b = np.maximum.accumulate(np.abs(Mb))
        np.maximum(sup_b, sup_carry, out=sup_b)
        n_here = np.arange(lo, hi, dtype=np.int64)
        env_lo = 1 if lo == 1 else 0
        if m > env_lo:
            env_blk = np.abs(Mb[env_lo:]) / np.log(n_here[env_lo:]) ** f.s_size
            env_carry = max(env_carry, float(np.max(env_blk)))
        first = ((lo + stride - 1) // stride) * stride
        if first < hi:
            sel = np.arange(first - lo, m, stride)
            sample_x.append(n_here[sel])
            sample_M.append(Mb[sel])
            sample_sup.append(sup_b[sel])
        # Neumaier update of the block carry
        last = complex(c[-1])
        t = carry + last
        if abs(carry) >= abs(last):
            comp += (carry - t) + last
        else:
            comp += (last - t) + carry
        carry = t
        sup_carry = float(sup_b[-1])
        pos += m

    sx = np.concatenate(sample_x) if sample_x else np.empty(0, dtype=np.int64)
    sM = np.concatenate(sample_M) if sample_M else np.empty(0, dtype=np.complex128)
    ss = np.concatenate(sample_sup) if sample_sup else np.empty(0)
    if len(sx) == 0 or sx[-1] != X:
        sx = np.append(sx, X)
        sM = np.append(sM, carry)
        ss = np.append(ss, sup_carry)
    eps = np.finfo(np.float64).eps
    trace = PartialSumTrace(
        X_max=X, stride=stride, sample_x=sx, sample_M=sM, running_sup=ss,
        values=values,
        meta={
            "backend": backend.get_backend(),
            "block": block,
            "f": f.descriptor(),
            "s_size": f.s_size,
            "sup_abs_M": sup_carry,
            "c_envelope_raw": env_carry,
            "kahan_comp": comp,
            "M_final": carry + comp,
            "sum_error_bound": eps * X * (1.0 + sup_carry),
        })
    assert abs(sM[0] - 1) < 1e-12 or sx[0] != 1
    return trace


def _primes_upto(n: int) -> np.ndarray:
    sieve = np.ones(max(n + 1, 3), dtype=bool)
    sieve[:2] = False
    for p in range(2, isqrt(n) + 1):
        if sieve[p]:
            sieve[p * p::p] = False
    return np.flatnonzero(sieve).astype(np.int64)


def _numpy_kernel():
    from . import _sieve_numpy
    return _sieve_numpy.sieve_block


def _numba_kernel():
    from . import _sieve_numba
    return _sieve_numba.sieve_block


def exponents(f: ModifiedCharacter) -> tuple[int, int, Fraction]:
    """(T, N, D): sign bookkeeping of how the modification shifts the count
    of primes with value exactly 1, and the growth exponent it implies."""
    chi = f.base
    n_f_one = 0
    n_chi_one = 0
    for p, th in f.modifications:
        if Fraction(th) % 1 == 0:
            n_f_one += 1
        v = chi(p)
        if v is not None and v.is_one():
            n_chi_one += 1
    T = n_f_one - n_chi_one
    if chi.parity == -1:
        N = max(0, T)
    else:
        N = max(0, T - 1)
    D = max(Fraction(1), Fraction(N), Fraction(f.s_size - 3, 2))
    return T, N, D


def growth_record(f: ModifiedCharacter, X: int, D) -> list:
    """(x, sup_{y<=x}|M(y)| / (log x)^D) at checkpoints x = 10^k."""
    if X < 10:
        raise DomainError(f"X must be >= 10, got {X}")
    if D < 0:
        raise DomainError(f"D must be >= 0, got {D}")
    if X > MAX_KEPT_VALUES:
        raise ResourceLimitError(
            f"growth_record needs the full value array; X <= {MAX_KEPT_VALUES}")
    trace = partial_sums(f, X, stride=1, keep_values=True)
    sup = np.maximum.accumulate(np.abs(trace.values))
    out = []
    x = 10
    while x <= X:
        out.append((x, float(sup[x - 1]) / math.log(x) ** float(D)))
        x *= 10
    return out
