"""Dirichlet characters mod q as exact root-of-unity value tables.

Characters are enumerated through the CRT decomposition of (Z/qZ)* into
cyclic factors; values are stored as exact reduced fractions of a turn
(RationalPhase), so multiplicativity and orthogonality hold without float
drift until an explicit complex conversion is requested.
"""
from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from math import gcd

import numpy as np

from .errors import DomainError

__all__ = [
    "RationalPhase", "DirichletCharacter", "enumerate_characters",
    "eval_char", "conductor", "parity", "gauss_sum", "conjugate_character",
]


@dataclass(frozen=True)
class RationalPhase:
    """The unimodular number e^{2*pi*i*num/den}, with num/den reduced mod 1."""
    num: int
    den: int

    @staticmethod
    def make(frac: Fraction | int) -> "RationalPhase":
        f = Fraction(frac) % 1
        return RationalPhase(f.numerator, f.denominator)

    @property
    def fraction(self) -> Fraction:
        return Fraction(self.num, self.den)

    def __mul__(self, other: "RationalPhase") -> "RationalPhase":
        return RationalPhase.make(self.fraction + other.fraction)

    def __pow__(self, k: int) -> "RationalPhase":
        return RationalPhase.make(k * self.fraction)

    def conjugate(self) -> "RationalPhase":
        return RationalPhase.make(-self.fraction)

    def is_one(self) -> bool:
        return self.num == 0

    def to_complex(self) -> complex:
        # exact at the four quarter turns, cmath elsewhere
        if self.den == 1:
            return 1 + 0j
        if self.den == 2:
            return -1 + 0j
        if self.den == 4:
            return 1j if self.num == 1 else -1j
        return cmath.exp(2j * cmath.pi * self.num / self.den)


IDENTITY_PHASE = RationalPhase(0, 1)


@dataclass(frozen=True)
class DirichletCharacter:
    """Character mod q: value table (None marks zero), conductor, parity."""
    modulus: int
    values: tuple  # length q, entries RationalPhase | None
    conductor: int
    parity: int    # chi(-1) as +-1

    def __call__(self, n: int) -> RationalPhase | None:
        return self.values[n % self.modulus]

    def is_principal(self) -> bool:
        return all(v is None or v.is_one() for v in self.values)

    def is_primitive(self) -> bool:
        return self.conductor == self.modulus

    def order(self) -> int:
        o = 1
        for v in self.values:
            if v is not None:
                o = o * v.den // gcd(o, v.den)
        return o

    def value_complex(self, n: int) -> complex:
        v = self(n)
        return 0j if v is None else v.to_complex()

    def phase_index_table(self, L: int | None = None) -> np.ndarray:
        """Integer index table: entry k means e^{2*pi*i*k/L}, -1 marks zero."""
        if L is None:
            L = self.order()
        out = np.empty(self.modulus, dtype=np.int64)
        for n, v in enumerate(self.values):
            if v is None:
                out[n] = -1
            else:
                if L % v.den != 0:
                    raise DomainError(f"L={L} not a multiple of phase denominator {v.den}")
                out[n] = v.num * (L // v.den)
        return out


def _prime_power_factors(q: int) -> list[tuple[int, int]]:
    out = []
    m = q
    p = 2
    while p * p <= m:
        if m % p == 0:
            e = 0
            while m % p == 0:
                m //= p
                e += 1
            out.append((p, e))
        p += 1
    if m > 1:
        out.append((m, 1))
    return out


def _multiplicative_order(g: int, mod: int, group_order: int) -> int:
    o = group_order
    for p, _ in _prime_power_factors(group_order):
        while o % p == 0 and pow(g, o // p, mod) == 1:
            o //= p
    return o


def _cyclic_generators(pk: int, p: int, e: int) -> list[tuple[int, int]]:
    """Generators (with orders) of the unit group mod p^e."""
    if p == 2:
        if e == 1:
            return []
        if e == 2:
            return [(3, 2)]
        return [(pk - 1, 2), (5, 1 << (e - 2))]
    phi = pk // p * (p - 1)
    g = 2
    while _multiplicative_order(g % pk, pk, phi) != phi:
        g += 1
    return [(g, phi)]


@lru_cache(maxsize=256)
def _unit_group(q: int) -> tuple[tuple[int, int], ...]:
    """CRT-lifted generators of (Z/qZ)* with their orders, fixed order."""
    gens = []
    for p, e in _prime_power_factors(q):
        pk = p ** e
        rest = q // pk
        for g, d in _cyclic_generators(pk, p, e):
            if rest == 1:
                lifted = g % q
            else:
                # n = g mod p^e, n = 1 mod rest
                inv = pow(rest % pk, -1, pk)
                lifted = (1 + rest * ((g - 1) * inv % pk)) % q
            gens.append((lifted, d))
    return tuple(gens)


def _phi(q: int) -> int:
    out = q
    for p, _ in _prime_power_factors(q):
        out = out // p * (p - 1)
    return out


def _compute_conductor(modulus: int, values: tuple) -> int:
    # smallest d | q with chi(n) = 1 whenever n coprime to q, n = 1 mod d
    q = modulus
    divisors = sorted(d for d in range(1, q + 1) if q % d == 0)
    for d in divisors:
        ok = True
        for n in range(1, q + 1):
            if gcd(n, q) == 1 and n % d == 1 % d:
                v = values[n % q]
                if v is None or not v.is_one():
                    ok = False
                    break
        if ok:
            return d
    return q


def _finish(modulus: int, values: list) -> DirichletCharacter:
    vt = tuple(values)
    cond = _compute_conductor(modulus, vt)
    pv = vt[(modulus - 1) % modulus]
    if pv is None or pv.den not in (1, 2):
        raise DomainError(f"character value at -1 is not +-1 (modulus {modulus})")
    par = 1 if pv.is_one() else -1
    return DirichletCharacter(modulus, vt, cond, par)


def enumerate_characters(q: int) -> list[DirichletCharacter]:
    """All phi(q) characters mod q; principal first, lexicographic generator
    exponents after that."""
    if q < 1:
        raise DomainError(f"modulus must be >= 1, got {q}")
    if q == 1:
        return [_finish(1, [IDENTITY_PHASE])]
    gens = _unit_group(q)
    orders = [d for _, d in gens]
    # enumerate group elements once: residue and its exponent vector
    elements = [(1, ())]
    for g, d in gens:
        new = []
        for (n, ex) in elements:
            gp = 1
            for a in range(d):
                new.append((n * gp % q, ex + (a,)))
                gp = gp * g % q
        elements = new
    assert len(elements) == _phi(q)

    out = []
    from itertools import product
    for char_ex in product(*(range(d) for d in orders)):
        values: list = [None] * q
        for n, ex in elements:
            f = Fraction(0)
            for a, e, d in zip(ex, char_ex, orders):
                f += Fraction(a * e, d)
            values[n] = RationalPhase.make(f)
        out.append(_finish(q, values))
    return out


def eval_char(chi: DirichletCharacter, n: int) -> RationalPhase | None:
    """chi(n) with reduction mod q; None encodes the zero value."""
    return chi(n)


def conductor(chi: DirichletCharacter) -> int:
    return chi.conductor


def parity(chi: DirichletCharacter) -> int:
    return chi.parity


def conjugate_character(chi: DirichletCharacter) -> DirichletCharacter:
    vals = tuple(None if v is None else v.conjugate() for v in chi.values)
    return DirichletCharacter(chi.modulus, vals, chi.conductor, chi.parity)


def gauss_sum(chi: DirichletCharacter) -> complex:
    """tau(chi) = sum_a chi(a) e^{2*pi*i*a/q}; requires chi primitive."""
    if not chi.is_primitive():
        raise DomainError(
            f"gauss_sum needs a primitive character (conductor "
            f"{chi.conductor} != modulus {chi.modulus})")
    q = chi.modulus
    tot = 0j
    for a in range(1, q + 1):
        v = chi.values[a % q]
        if v is not None:
            tot += v.to_complex() * cmath.exp(2j * math.pi * a / q)
    return tot
