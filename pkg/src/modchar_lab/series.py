"""Two independent routes to F(s) = sum f(n) n^{-s}: the finite Euler-factor
correction of L(s, chi), and the piecewise integral of the exact partial
sums. Their agreement within reported bounds is the cross-check everything
downstream leans on, so the routes deliberately share no code.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np
import scipy.special as sps

from . import fixedpoint
from .errors import (DomainError, PoleError, ResourceLimitError,
                     ValidationError)
from .lfunction import (DEFAULT_SETTINGS, BoundedValue, EvalSettings,
                        l_function)
from .modchar import ModifiedCharacter, PartialSumTrace

_EPS = float(np.finfo(np.float64).eps)
POLE_TOL = 1e-13
DEFAULT_SAFETY = 4.0
_CHUNK = 1 << 20


@dataclass(frozen=True)
class EulerFactors:
    E_f_value: complex
    E_chi_value: complex
    factors: tuple  # (p, 1 - f(p) p^{-s}, 1 - chi(p) p^{-s}) per p in S

    def remultiply_gap(self) -> float:
        """Relative defect of the stored products vs re-multiplication."""
        pf = 1 + 0j
        pc = 1 + 0j
        for _, ff, cf in self.factors:
            pf *= ff
            pc *= cf
        gf = abs(pf - self.E_f_value) / max(abs(pf), 1e-300)
        gc = abs(pc - self.E_chi_value) / max(abs(pc), 1e-300)
        return max(gf, gc)


@dataclass(frozen=True)
class PoleLocation:
    p: int
    z: int
    t: float


def euler_factors(f: ModifiedCharacter, s: complex) -> EulerFactors:
    """E_f(s) and E_chi(s) as finite products over the modified primes."""
    s = complex(s)
    facs = []
    ef = 1 + 0j
    ec = 1 + 0j
    for p, _ in f.modifications:
        ps = np.exp(-s * math.log(p))
        fp = f.value_at_prime(p)
        cp = f.base.value_complex(p)
        ff = 1 - fp * ps
        cf = 1 - cp * ps
        ef *= ff
        ec *= cf
        facs.append((p, complex(ff), complex(cf)))
    return EulerFactors(complex(ef), complex(ec), tuple(facs))


def nearest_pole(f: ModifiedCharacter, t: float) -> PoleLocation:
    """Closest point of the 1/E_f pole lattice to ordinate t."""
    best = None
    for p, th in f.modifications:
        logp = math.log(p)
        th_f = float(th)
        z = round(t * logp / (2 * math.pi) - th_f)
        for dz in (-1, 0, 1):
            tp = 2 * math.pi * (z + dz + th_f) / logp
            cand = PoleLocation(p, z + dz, tp)
            if best is None or abs(tp - t) < abs(best.t - t):
                best = cand
    return best


def F_euler(f: ModifiedCharacter, s: complex,
            settings: EvalSettings = DEFAULT_SETTINGS,
            best_effort: bool = False) -> BoundedValue:
    """F(s) = E_chi(s)/E_f(s) * L(s, chi)."""
    s = complex(s)
    E = euler_factors(f, s)
    if abs(E.E_f_value) < POLE_TOL:
        loc = nearest_pole(f, s.imag)
        raise PoleError(
            f"s = {s} lies on the pole lattice of 1/E_f "
            f"(nearest: p={loc.p}, z={loc.z}, t={loc.t!r})")
    L = l_function(s, f.base, settings, best_effort=best_effort)
    ratio = E.E_chi_value / E.E_f_value
    value = ratio * L.value
    err = abs(ratio) * L.abs_error + abs(value) * _EPS * (4 * f.s_size + 8)
    return BoundedValue(complex(value), float(err))


def _tail_bound(s_abs: float, sigma: float, c_f: float, d: int, X: int) -> float:
    """|s| * C_f * integral_X^inf (log x)^d x^{-1-sigma} dx, in closed form."""
    u = sigma * math.log(X)
    inc = float(sps.gammaincc(d + 1, u) * sps.gamma(d + 1))
    return s_abs * c_f * inc / sigma ** (d + 1)


def F_integral(f: ModifiedCharacter, s: complex, trace: PartialSumTrace,
               safety: float = DEFAULT_SAFETY,
               target_abs_error: float | None = None,
               with_details: bool = False):
    """F(s) from the exact step function M: head sum over [1, X], tail bound
    from the empirical (log x)^{|S|} envelope inflated by `safety`.

    The envelope constant is measured, not proved; the inflation and the
    heuristic flag in the details make that explicit.
    """
    s = complex(s)
    sigma = s.real
    if sigma <= 0:
        raise DomainError(f"F_integral needs Re(s) > 0, got {sigma}")
    if trace.values is None:
        raise ValidationError("trace must retain full values (keep_values)")
    X = trace.X_max
    d = f.s_size
    c_f = safety * trace.meta["c_envelope_raw"]
    tail = _tail_bound(abs(s), sigma, c_f, d, X)
    if target_abs_error is not None and tail > target_abs_error:
        Xr = X
        while Xr < 2 ** 62 and _tail_bound(abs(s), sigma, c_f, d, Xr) > target_abs_error:
            Xr *= 2
        raise ResourceLimitError(
            f"tail bound {tail:.3g} exceeds target {target_abs_error:.3g} "
            f"at X={X}; required X ~ {Xr}")
    M = trace.values
    head = 0j
    absmass = 0.0
    for lo in range(1, X + 1, _CHUNK):
        hi = min(lo + _CHUNK, X + 1)
        n = np.arange(lo, hi + 1, dtype=np.float64)  # one extra for n+1 powers
        pw = np.exp(-s * np.log(n))
        blk = M[lo - 1:hi - 1]
        upto = hi - lo if hi <= X else hi - lo - 1
        head += np.sum(blk[:upto] * (pw[:upto] - pw[1:upto + 1]))
        absmass += float(np.sum(np.abs(blk[:upto]) * (np.abs(pw[:upto])
                                                      + np.abs(pw[1:upto + 1]))))
        if hi > X:
            head += blk[-1] * pw[upto]
            absmass += abs(blk[-1]) * abs(pw[upto])
    err_round = _EPS * absmass * (4.0 + abs(s) * math.log(X + 1))
    bv = BoundedValue(complex(head), float(tail + err_round))
    if with_details:
        return bv, {
            "X": X,
            "tail_bound": tail,
            "rounding_bound": err_round,
            "c_envelope": c_f,
            "safety": safety,
            "heuristics": ["tail-envelope-empirical-x%g" % safety],
        }
    return bv


def poles_of_inverse_Ef(f: ModifiedCharacter, t_lo: float, t_hi: float) -> list:
    """All lattice ordinates t = 2 pi (z + theta_p)/log p inside [t_lo, t_hi]."""
    if not t_lo < t_hi:
        if t_lo == t_hi:
            return []
        raise ValidationError(f"need t_lo < t_hi, got [{t_lo}, {t_hi}]")
    out = []
    for p, th in f.modifications:
        logp = math.log(p)
        th_f = float(th)
        z_lo = math.ceil(t_lo * logp / (2 * math.pi) - th_f - 1e-12)
        z_hi = math.floor(t_hi * logp / (2 * math.pi) - th_f + 1e-12)
        for z in range(z_lo, z_hi + 1):
            t = 2 * math.pi * (z + th_f) / logp
            if t_lo <= t <= t_hi:
                out.append(PoleLocation(p, z, t))
    out.sort(key=lambda loc: (loc.t, loc.p))
    return out


def euler_factors_at_spike(f: ModifiedCharacter, sigma: float, n: int,
                           r: float = 0.0) -> EulerFactors:
    """Euler factors at s = sigma + i(2 pi n + r) with the phase n log p mod 1
    taken from the shared 128-bit table; double-precision t = 2 pi n would
    lose the phase entirely at large n. r is a small real offset (|r| < 1).
    """
    if n < 1:
        raise DomainError(f"n must be >= 1, got {n}")
    facs = []
    ef = 1 + 0j
    ec = 1 + 0j
    for p, th in f.modifications:
        hi, lo = fixedpoint.split_limbs(fixedpoint.frac_log_fixed(p))
        ph_hi, ph_lo = fixedpoint.mul_small_mod128(n, hi, lo)
        phase = fixedpoint.fixed_to_float(
            (int(ph_hi) << 64) | int(ph_lo))  # frac(n log p)
        ps_mag = p ** (-sigma)
        fp = f.value_at_prime(p)
        cp = f.base.value_complex(p)
        ang = 2 * math.pi * phase + r * math.log(p)
        rot = complex(math.cos(ang), -math.sin(ang))
        ff = 1 - fp * ps_mag * rot
        cf = 1 - cp * ps_mag * rot
        ef *= ff
        ec *= cf
        facs.append((p, complex(ff), complex(cf)))
    return EulerFactors(complex(ef), complex(ec), tuple(facs))
