"""Quantitative pipeline on top of the series and torus layers: both sides
of the weighted-mean identity for |M|^2, the log-moment integral, spike
diagnostics at box hits, hit-sum accumulation over ordinate windows, and the
sigma-scaling exponent fit.

Every tail or envelope constant that is extrapolated from data (rather than
proved) is inflated x4 and the report carries a heuristic flag naming it.
"""
import math
from dataclasses import dataclass, field

import numpy as np
import scipy.special as sps

from . import quadrature
from .characters import conjugate_character
from .errors import (DomainError, ResourceLimitError, ValidationError)
from .lfunction import DEFAULT_SETTINGS, BoundedValue, EvalSettings, l_function_vec
from .modchar import ModifiedCharacter, PartialSumTrace
from .reports import FitReport, power_law_fit
from .series import euler_factors_at_spike, poles_of_inverse_Ef
from .torus import TorusConfig, box_hits

ENVELOPE_INFLATION = 4.0
_SPIKE_BATCH = 256


def _torus_config(f: ModifiedCharacter) -> TorusConfig:
    primes = tuple(p for p, _ in f.modifications)
    theta = tuple(th for _, th in f.modifications)
    return TorusConfig.from_primes(primes, theta)


def gamma_moment(N: float, sigma: float) -> tuple:
    """int_1^inf (log x)^N x^{-1-sigma} dx two ways: adaptive quadrature of
    u^N e^{-u} after u = sigma log x, against Gamma(N+1)/sigma^{N+1}.
    Returns (numeric, closed_form).
    """
    N = float(N)
    sigma = float(sigma)
    if sigma <= 0:
        raise DomainError(f"sigma must be positive, got {sigma}")
    if N < 0:
        raise DomainError(f"N must be non-negative, got {N}")
    closed = math.gamma(N + 1) / sigma ** (N + 1)
    U = 60.0 + 10.0 * N          # remaining mass < U^N e^-U, far below target

    def g(u):
        vals = u ** N * np.exp(-u)
        return vals, np.zeros_like(vals)

    r = quadrature.integrate_piecewise(
        g, [0.0, 1.0, 10.0, U], target_abs_error=1e-12 * math.gamma(N + 1))
    return r.value / sigma ** (N + 1), closed


def _envelope_tail(c_env: float, d: int, sigma2: float, X: int) -> float:
    """int_X^inf (log x)^d x^{-1-sigma2} dx scaled by c_env, via the upper
    incomplete gamma."""
    u = sigma2 * math.log(X)
    g = float(sps.gammaincc(d + 1, u)) * math.gamma(d + 1)
    return c_env * g / sigma2 ** (d + 1)


def plancherel_lhs(f: ModifiedCharacter, sigma: float,
                   trace: PartialSumTrace) -> BoundedValue:
    """int_1^inf |M(x)|^2 x^{-1-2 sigma} dx: exact head over [1, X) where M
    is piecewise constant, then an envelope tail from the trace's empirical
    sup |M(n)|/(log n)^{|S|}, inflated x4 (heuristic)."""
    if sigma <= 0:
        raise DomainError(f"sigma must be positive, got {sigma}")
    if trace.values is None:
        raise ValidationError(
            "trace did not keep M values; rerun partial_sums with X below "
            "the value-retention cap")
    M = np.asarray(trace.values)
    X = len(M)
    s2 = 2.0 * sigma
    if X >= 2:
        n = np.arange(1, X + 1, dtype=np.float64)
        w = (n[:-1] ** -s2 - n[1:] ** -s2) / s2
        head = float(np.sum(np.abs(M[:-1]) ** 2 * w))
    else:
        head = 0.0
    c_raw = float(trace.meta.get("c_envelope_raw", 0.0))
    if X < 2 or c_raw <= 0:
        # no envelope data beyond the head: the bound is vacuous, not zero
        return BoundedValue(head, math.inf)
    c_env = ENVELOPE_INFLATION * c_raw
    tail = _envelope_tail(c_env * c_env, 2 * f.s_size, s2, X)
    err_round = 64 * np.finfo(float).eps * head
    return BoundedValue(head, tail + err_round)


def plancherel_rhs(f: ModifiedCharacter, sigma: float, T_cut: float,
                   settings: EvalSettings = DEFAULT_SETTINGS,
                   target_abs_error: float = 1e-5,
                   with_details: bool = False):
    """(1/2pi) int over |t| <= T_cut of |F(sigma+it)|^2/|sigma+it|^2 dt by
    adaptive panels split at the near-zero lattice of E_f and at t = 2 pi n,
    plus a x4-inflated envelope tail (heuristic). Integrated two-sided; no
    conjugate symmetry is assumed.
    """
    if sigma <= 0:
        raise DomainError(f"sigma must be positive, got {sigma}")
    if T_cut <= 0:
        raise ValidationError(f"T_cut must be positive, got {T_cut}")
    T = float(T_cut)
    chi = f.base
    plist = [(p, math.log(p), f.value_at_prime(p), chi.value_complex(p))
             for p, _ in f.modifications]

    def g(t):
        s = sigma + 1j * np.asarray(t, dtype=np.float64)
        Lv, Le = l_function_vec(s, chi, settings)
        ratio = np.ones_like(s)
        for _, logp, fp, cp in plist:
            ps = np.exp(-s * logp)
            ratio *= (1 - cp * ps) / (1 - fp * ps)
        F = ratio * Lv
        s2 = sigma * sigma + np.asarray(t) ** 2
        absF = np.abs(F)
        errF = np.abs(ratio) * Le + absF * 1e-14
        vals = absF ** 2 / s2
        errs = (2 * absF * errF + errF ** 2) / s2
        return vals, errs

    bps = {-T, 0.0, T}
    for loc in poles_of_inverse_Ef(f, -T, T):
        if -T < loc.t < T:
            bps.add(loc.t)
    k = 1
    while 2 * math.pi * k < T:
        bps.add(2 * math.pi * k)
        bps.add(-2 * math.pi * k)
        k += 1
    r = quadrature.integrate_piecewise(g, sorted(bps), target_abs_error)
    ts = np.linspace(T / 2, T, 64)
    c_hi = float(np.max(ts ** 2 * g(ts)[0]))
    c_lo = float(np.max(ts ** 2 * g(-ts)[0]))
    tail = ENVELOPE_INFLATION * (c_hi + c_lo) / T
    value = r.value / (2 * math.pi)
    err = (r.error_estimate + r.integrand_error + tail) / (2 * math.pi)
    bv = BoundedValue(value, err)
    if not with_details:
        return bv
    details = {
        "panels": r.panels,
        "quadrature_error_estimate": r.error_estimate / (2 * math.pi),
        "l_eval_error": r.integrand_error / (2 * math.pi),
        "tail_bound": tail / (2 * math.pi),
        "T_cut": T,
        "heuristics": ["tail-envelope-empirical-x4", "gk15-error-estimate"],
    }
    return bv, details


@dataclass(frozen=True)
class PlancherelReport:
    sigma: float
    lhs: BoundedValue
    rhs: BoundedValue
    relative_gap: float
    X_used: int
    T_used: float
    flags: tuple = ()
    metadata: dict = field(default_factory=dict)


def plancherel_check(f: ModifiedCharacter, sigma: float,
                     trace: PartialSumTrace, T_cut: float,
                     settings: EvalSettings = DEFAULT_SETTINGS,
                     slack: float = 0.02) -> PlancherelReport:
    """Both sides at one sigma, with the agreement verdict recorded (never
    enforced here; failing runs must still produce a report)."""
    lhs = plancherel_lhs(f, sigma, trace)
    rhs, details = plancherel_rhs(f, sigma, T_cut, settings, with_details=True)
    scale = max(abs(lhs.value), abs(rhs.value))
    gap = abs(lhs.value - rhs.value) / scale if scale > 0 else 0.0
    budget = (lhs.abs_error + rhs.abs_error) / scale if scale > 0 else math.inf
    return PlancherelReport(
        sigma=sigma, lhs=lhs, rhs=rhs, relative_gap=gap,
        X_used=len(trace.values) if trace.values is not None else trace.X_max,
        T_used=float(T_cut),
        flags=("tail-envelope-empirical-x4", "gk15-error-estimate"),
        metadata={
            "passed": bool(gap <= budget + slack),
            "slack": slack,
            "error_budget_relative": budget,
            "panels": details["panels"],
        })


@dataclass(frozen=True)
class SpikeReport:
    sigma: float
    T: float                  # e^{1/sigma}
    hits: tuple               # (n, sigma^{|S|}/|E_f|, |E_chi|, normalized ratio)
    window: tuple
    flags: tuple = ()
    metadata: dict = field(default_factory=dict)


def spike_scan(f: ModifiedCharacter, sigma: float, window,
               eps: float = None, r_average: bool = False,
               with_l: bool = True,
               settings: EvalSettings = DEFAULT_SETTINGS) -> SpikeReport:
    """Evaluate the spike diagnostics at every box hit n in the window:
    the scaled inverse Euler factor sigma^{|S|}/|E_f(sigma+2 pi i n)|, the
    companion |E_chi|, and |F|^2/|s|^2 normalized by n^{1+2 sigma}
    (log n)^2 sigma^{2|S|}.

    The box side defaults to sigma (the hit cube has side 1/log T with
    T = e^{1/sigma}); an explicit eps >= 1 is rejected. r_average replaces
    the r=0 evaluation of the normalized ratio by a 3-point average over
    r in {0, sigma/2, sigma} (flagged).
    """
    if not 0 < sigma <= 0.3:
        raise DomainError(f"sigma must be in (0, 0.3], got {sigma}")
    n_lo, n_hi = int(window[0]), int(window[1])
    if n_lo < 2:
        raise DomainError(f"window must start at n >= 2, got {n_lo}")
    if eps is None:
        eps = sigma
    elif eps >= 1:
        raise ValidationError(
            f"box side eps = {eps} >= 1: the box must be a proper subset "
            "of the torus")
    T = math.exp(1.0 / sigma)
    cfg = _torus_config(f)
    ns = box_hits(cfg, n_lo, n_hi, float(eps))
    flags = []
    if r_average:
        flags.append("r-averaged-3pt")
    if not with_l:
        flags.append("l-fields-skipped")
    if len(ns) == 0:
        return SpikeReport(
            sigma=sigma, T=T, hits=(), window=(n_lo, n_hi),
            flags=tuple(flags + ["empty-window"]),
            metadata={"eps": float(eps), "hit_count": 0})
    d = f.s_size
    r_offsets = (0.0, sigma / 2, sigma) if r_average else (0.0,)
    inv_ef = np.empty(len(ns))
    abs_ec = np.empty(len(ns))
    ratios = {r: [] for r in r_offsets}       # E_chi/E_f per hit per offset
    for i, n in enumerate(ns):
        for r_off in r_offsets:
            fac = euler_factors_at_spike(f, sigma, int(n), r_off)
            ratios[r_off].append(fac.E_chi_value / fac.E_f_value)
            if r_off == 0.0:
                inv_ef[i] = sigma ** d / abs(fac.E_f_value)
                abs_ec[i] = abs(fac.E_chi_value)
    norm_ratio = np.full(len(ns), math.nan)
    lemma1_lhs = np.full(len(ns), math.nan)
    l_err_max = 0.0
    if with_l:
        chi = f.base
        chi_bar = conjugate_character(chi)
        nf = ns.astype(np.float64)
        logn = np.log(nf)
        acc = np.zeros(len(ns))
        for r_off in r_offsets:
            t = 2 * math.pi * nf + r_off
            sq = sigma * sigma + t * t
            for lo in range(0, len(ns), _SPIKE_BATCH):
                sl = slice(lo, min(lo + _SPIKE_BATCH, len(ns)))
                s_batch = sigma + 1j * t[sl]
                Lv, Le = l_function_vec(s_batch, chi, settings)
                Fv = np.array(ratios[r_off][sl]) * Lv
                acc[sl] += np.abs(Fv) ** 2 / sq[sl]
                l_err_max = max(l_err_max, float(np.max(Le)))
        acc /= len(r_offsets)
        norm_ratio = acc * nf ** (1 + 2 * sigma) * logn ** 2 * sigma ** (2 * d)
        for lo in range(0, len(ns), _SPIKE_BATCH):
            sl = slice(lo, min(lo + _SPIKE_BATCH, len(ns)))
            s_ref = (1 - sigma) - 2j * math.pi * nf[sl]
            Lrv, Lre = l_function_vec(s_ref, chi_bar, settings)
            lemma1_lhs[sl] = np.abs(Lrv) * logn[sl]
            l_err_max = max(l_err_max, float(np.max(Lre)))
    hits = tuple(
        (int(n), float(inv_ef[i]), float(abs_ec[i]), float(norm_ratio[i]))
        for i, n in enumerate(ns))
    meta = {
        "eps": float(eps),
        "hit_count": len(ns),
        "min_inv_Ef_scaled": float(np.min(inv_ef)),
        "median_inv_Ef_scaled": float(np.median(inv_ef)),
        "min_abs_E_chi": float(np.min(abs_ec)),
        "lemma1_lhs": lemma1_lhs.tolist(),
        "l_abs_error_max": l_err_max,
        "r_offsets": list(r_offsets),
    }
    if with_l:
        meta["min_normalized_ratio"] = float(np.min(norm_ratio))
        meta["median_normalized_ratio"] = float(np.median(norm_ratio))
    return SpikeReport(
        sigma=sigma, T=T, hits=hits, window=(n_lo, n_hi),
        flags=tuple(flags), metadata=meta)


@dataclass(frozen=True)
class MomentResult:
    total: float
    predicted_scale: float    # sigma^{|S|+1}
    ratio: float
    window_t: tuple
    window_n: tuple
    hit_count: int
    policy: dict
    flags: tuple = ()
    metadata: dict = field(default_factory=dict)


def moment_accumulate(f: ModifiedCharacter, sigma: float,
                      kappa_w: float = 5.0, max_n: int = 10 ** 9,
                      eps: float = None) -> MomentResult:
    """Sum n^{-1-2 sigma} (log n)^{-2} over box hits with ordinate
    2 pi n in [T, T^kappa_w], T = e^{1/sigma}, by full enumeration.

    kappa_w = 5 is the paper window; smaller values are declared truncations
    and are recorded in the policy. Windows whose top exceeds max_n raise
    with the maximum feasible sigma for the requested policy.
    """
    if sigma <= 0:
        raise DomainError(f"sigma must be positive, got {sigma}")
    if not 1 < kappa_w <= 5:
        raise ValidationError(f"kappa_w must be in (1, 5], got {kappa_w}")
    T = math.exp(1.0 / sigma)
    t_lo, t_hi = T, T ** kappa_w
    n_lo = max(2, math.ceil(t_lo / (2 * math.pi)))
    n_hi = math.floor(t_hi / (2 * math.pi))
    if n_hi > max_n:
        sigma_min = kappa_w / math.log(2 * math.pi * max_n)
        raise ResourceLimitError(
            f"window [T, T^{kappa_w}] reaches n = {n_hi:.3g} > budget "
            f"{max_n}; the smallest feasible sigma for this policy is "
            f"{sigma_min:.4f}")
    if eps is None:
        eps = min(sigma, 1.0)     # hit cube side 1/log T
    policy = {"T": T, "kappa_w": kappa_w, "eps": float(eps)}
    flags = []
    if f.s_size <= 3:
        # (|S|-3)/2 <= 0: the growth conclusion this sum feeds is vacuous
        flags.append("theorem-vacuous-at-this-S")
    predicted = sigma ** (f.s_size + 1)
    if n_hi < n_lo:
        return MomentResult(
            0.0, predicted, 0.0, (t_lo, t_hi), (n_lo, n_hi), 0, policy,
            tuple(flags + ["empty-window"]), {})
    cfg = _torus_config(f)
    ns = box_hits(cfg, n_lo, n_hi, float(eps))
    if len(ns) == 0:
        return MomentResult(
            0.0, predicted, 0.0, (t_lo, t_hi), (n_lo, n_hi), 0, policy,
            tuple(flags + ["empty-window"]), {})
    nf = ns.astype(np.float64)
    total = float(np.sum(nf ** (-1 - 2 * sigma) * np.log(nf) ** -2.0))
    return MomentResult(
        total, predicted, total / predicted, (t_lo, t_hi),
        (n_lo, int(n_hi)), len(ns), policy, tuple(flags),
        {"first_hits": [int(v) for v in ns[:16]]})


def omega_fit(sigma_grid, lhs_values) -> FitReport:
    """Least-squares slope of log(lhs) against log(1/sigma): the fitted
    exponent estimates N+1 in a lhs ~ c/sigma^{N+1} scaling. The implied
    partial-sum log-exponent (for squared sums) is (slope - 1)/2."""
    sig = np.asarray(sigma_grid, dtype=np.float64)
    vals = np.asarray(lhs_values, dtype=np.float64)
    if np.any(sig <= 0):
        raise DomainError("sigma grid must be positive")
    if len(sig) >= 2:
        span = float(np.max(sig) / np.min(sig))
        if span < 2.0 * (1 - 1e-12):
            raise ValidationError(
                f"sigma grid spans only a factor {span:.3f}; need >= 2")
    fit = power_law_fit(1.0 / sig, vals)
    slope = fit.exponent
    meta = dict(fit.metadata)
    meta.update({
        "fitted_N_plus_1": slope,
        "fitted_N": slope - 1.0,
        "implied_partial_sum_log_exponent": (slope - 1.0) / 2.0,
    })
    return FitReport(
        exponent=slope, intercept=fit.intercept, residuals=fit.residuals,
        inputs=fit.inputs, r_squared=fit.r_squared, flags=fit.flags,
        metadata=meta)
