"""The orbit n*alpha - theta on the d-torus, alpha_i = log p_i, in 128-bit
fixed point: box hits, exact star discrepancy, the Erdos-Turan-Koksma
bound, closed-form exponential sums, and empirical approximation profiles.

Fixed point is load-bearing: double precision loses frac(n log p) to
rounding already for n around 10^6, which would silently corrupt every
box count downstream.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from . import backend, fixedpoint
from .errors import (CapabilityError, DomainError, PrecisionError,
                     ResourceLimitError, ValidationError)
from .modchar import _is_prime
from .reports import FitReport, power_law_fit

MOD = fixedpoint.MOD
PRECISION_BUDGET = 10 ** 17     # keeps n * 2^-127 below 1e-20
MAX_EXACT_1D = 10 ** 7
MAX_EXACT_ND = 5000
_CHUNK = 1 << 19

# Admissible constant for the Koksma-Szusz form of the Erdos-Turan-Koksma
# inequality, dominating the (3/2)^d (2/(H+1) + ...) shape of
# Drmota & Tichy, "Sequences, Discrepancies and Applications", Thm 1.21.
C_D_SOURCE = ("2*(3/2)^d, admissible for the Koksma-Szusz form; "
              "Drmota-Tichy, Sequences, Discrepancies and Applications, "
              "Theorem 1.21")


def default_c_d(d: int) -> float:
    return 2.0 * 1.5 ** d


@dataclass(frozen=True)
class TorusConfig:
    primes: tuple            # () when built from an injected alpha
    theta: tuple             # per-coordinate phase, Fraction or float
    alpha_fixed: tuple       # frac(alpha_i) * 2^128, rounded to nearest
    alpha_int: tuple         # integer parts, irrelevant mod 1

    @property
    def d(self) -> int:
        return len(self.alpha_fixed)

    def theta_fixed(self) -> tuple:
        return tuple(fixedpoint.to_fixed(t) for t in self.theta)

    @staticmethod
    def from_primes(primes, theta=None) -> "TorusConfig":
        primes = tuple(int(p) for p in primes)
        if not primes:
            raise ValidationError("need at least one prime")
        if len(set(primes)) != len(primes):
            raise ValidationError(f"primes must be distinct: {primes}")
        for p in primes:
            if not _is_prime(p):
                raise ValidationError(f"{p} is not prime")
        if theta is None:
            theta = (Fraction(0),) * len(primes)
        theta = tuple(theta)
        if len(theta) != len(primes):
            raise ValidationError(
                f"theta length {len(theta)} != prime count {len(primes)}")
        alpha = tuple(fixedpoint.frac_log_fixed(p) for p in primes)
        aint = tuple(fixedpoint.int_log(p) for p in primes)
        return TorusConfig(primes, theta, alpha, aint)

    @staticmethod
    def from_alpha(alpha_fixed, theta=None) -> "TorusConfig":
        """Injection hook for tests: arbitrary fixed-point alphas."""
        alpha = tuple(int(a) for a in alpha_fixed)
        for a in alpha:
            if not 0 <= a < MOD:
                raise ValidationError(f"alpha entry {a} outside [0, 2^128)")
        if theta is None:
            theta = (Fraction(0),) * len(alpha)
        theta = tuple(theta)
        if len(theta) != len(alpha):
            raise ValidationError("theta length mismatch")
        return TorusConfig((), theta, alpha, (0,) * len(alpha))


@dataclass(frozen=True)
class TorusPoint:
    coords_fixed: tuple
    n: int
    err_bound: float         # per-coordinate, from alpha quantization

    def floats(self) -> np.ndarray:
        return np.array([c / MOD for c in self.coords_fixed])


@dataclass
class DiscrepancyReport:
    n_points: int
    exact_Dstar: float | None = None
    et_bound: float | None = None
    y_cutoff: int | None = None
    worst_box: tuple | None = None
    per_m_terms: tuple | None = None
    metadata: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.exact_Dstar is not None and not 0 < self.exact_Dstar <= 1:
            raise ValidationError(
                f"exact star discrepancy must lie in (0, 1], got {self.exact_Dstar}")


def orbit_point(cfg: TorusConfig, n: int) -> TorusPoint:
    """frac(n * alpha - theta), exact in fixed point given the stored alpha."""
    if n < 0:
        raise DomainError(f"n must be >= 0, got {n}")
    if n > PRECISION_BUDGET:
        raise PrecisionError(
            f"n = {n} exceeds the fixed-point budget {PRECISION_BUDGET}")
    th = cfg.theta_fixed()
    coords = tuple((n * a - t) % MOD for a, t in zip(cfg.alpha_fixed, th))
    return TorusPoint(coords, n, n * 2.0 ** -127)


def _eps_threshold(eps) -> int:
    if isinstance(eps, float) and not 0 < eps <= 1:
        raise ValidationError(f"eps must be in (0, 1], got {eps}")
    frac = Fraction(eps)
    if not 0 < frac <= 1:
        raise ValidationError(f"eps must be in (0, 1], got {eps}")
    if frac == 1:
        return MOD
    return (frac.numerator * 2 * MOD + frac.denominator) // (2 * frac.denominator)


def _numpy_scan():
    from . import _torus_numpy
    return _torus_numpy.box_scan


def _numba_scan():
    from . import _torus_numba
    return _torus_numba.box_scan


def _scan(cfg: TorusConfig, n_lo: int, n_hi: int, eps, collect: bool,
          chunk: int = _CHUNK):
    if n_lo < 0:
        raise DomainError(f"n_lo must be >= 0, got {n_lo}")
    if n_hi < n_lo:
        raise ValidationError(f"empty range [{n_lo}, {n_hi}]")
    if n_hi > PRECISION_BUDGET:
        raise PrecisionError(
            f"n_hi = {n_hi} exceeds the fixed-point budget {PRECISION_BUDGET}")
    eps_fixed = _eps_threshold(eps)
    if eps_fixed >= MOD:
        if collect:
            return np.arange(n_lo, n_hi + 1, dtype=np.int64)
        return n_hi - n_lo + 1
    eps_hi, eps_lo = fixedpoint.split_limbs(eps_fixed)
    th = cfg.theta_fixed()
    L = min(chunk, n_hi - n_lo + 1)
    off_hi, off_lo = [], []
    for a in cfg.alpha_fixed:
        oh, ol = fixedpoint.chunk_offsets(a, L)
        off_hi.append(oh)
        off_lo.append(ol)
    scan = backend.dispatch(_numpy_scan, _numba_scan)()
    hits = []
    count = 0
    for m0 in range(n_lo, n_hi + 1, L):
        m = min(L, n_hi + 1 - m0)
        bh, bl = [], []
        for a, t in zip(cfg.alpha_fixed, th):
            base = (m0 * a - t) % MOD
            h, l = fixedpoint.split_limbs(base)
            bh.append(h)
            bl.append(l)
        idx = scan(bh, bl, off_hi, off_lo, eps_hi, eps_lo, m)
        if collect:
            hits.append(idx + m0)
        else:
            count += len(idx)
    if collect:
        return np.concatenate(hits) if hits else np.empty(0, dtype=np.int64)
    return count


def box_hits(cfg: TorusConfig, n_lo: int, n_hi: int, eps) -> np.ndarray:
    """All n in [n_lo, n_hi] with every orbit coordinate in [0, eps)."""
    return _scan(cfg, n_lo, n_hi, eps, collect=True)


def count_Q(cfg: TorusConfig, x: int, eps) -> tuple:
    """(count over n <= x, expected x*eps^d, |count - expected|)."""
    if x < 1:
        raise DomainError(f"x must be >= 1, got {x}")
    count = _scan(cfg, 1, x, eps, collect=False)
    expected = x * float(eps) ** cfg.d
    return count, expected, abs(count - expected)


def _as_float_points(points) -> np.ndarray:
    if isinstance(points, np.ndarray):
        pts = points
    elif points and isinstance(points[0], TorusPoint):
        pts = np.array([p.floats() for p in points])
    else:
        pts = np.asarray(points, dtype=np.float64)
    if pts.ndim == 1:
        pts = pts[:, None]
    if pts.size == 0:
        raise ValidationError("need at least one point")
    if np.any(pts < 0) or np.any(pts >= 1):
        raise ValidationError("points must lie in [0, 1)^d")
    return pts


def exact_star_discrepancy(points) -> DiscrepancyReport:
    """Exact sup over boxes [0, beta) of |count/n - vol|.

    d=1 uses the sorted two-sided formula; d in {2, 3} enumerates the
    candidate corner grid (cost O(n^2) resp. O(n^3), hence the point cap).
    """
    pts = _as_float_points(points)
    n, d = pts.shape
    if d == 1:
        if n > MAX_EXACT_1D:
            raise CapabilityError(
                f"d=1 exact discrepancy capped at {MAX_EXACT_1D} points; "
                f"use et_bound")
        return _exact_d1(pts[:, 0])
    if d in (2, 3):
        if n > MAX_EXACT_ND:
            raise CapabilityError(
                f"d={d} exact discrepancy capped at {MAX_EXACT_ND} points; "
                f"use et_bound")
        return _exact_d2(pts) if d == 2 else _exact_d3(pts)
    raise CapabilityError(
        f"exact discrepancy implemented for d <= 3 only (got d={d}); "
        f"use et_bound")


def _exact_d1(x: np.ndarray) -> DiscrepancyReport:
    n = len(x)
    xs = np.sort(x)
    i = np.arange(1, n + 1)
    up = i / n - xs          # box closing just above x_(i)
    down = xs - (i - 1) / n  # box [0, x_(i))
    k_up = int(np.argmax(up))
    k_down = int(np.argmax(down))
    if up[k_up] >= down[k_down]:
        dstar, beta = float(up[k_up]), (float(xs[k_up]),)
    else:
        dstar, beta = float(down[k_down]), (float(xs[k_down]),)
    return DiscrepancyReport(n_points=n, exact_Dstar=dstar, worst_box=beta,
                             metadata={"method": "sorted-1d"})


def _exact_d2(pts: np.ndarray) -> DiscrepancyReport:
    n = len(pts)
    order = np.argsort(pts[:, 0], kind="stable")
    xs = pts[order, 0]
    ys = pts[order, 1]
    bvals = np.unique(np.append(pts[:, 1], 1.0))
    yrank = np.searchsorted(bvals, ys)
    nb = len(bvals)
    hist = np.zeros(nb, dtype=np.int64)
    best = -1.0
    best_box = None
    j = 0
    avals = np.unique(np.append(xs, 1.0))
    for a in avals:
        # open in x: everything inserted so far has x < a
        cum_closed_y = np.cumsum(hist)           # y <= b counts
        cum_open_y = cum_closed_y - hist         # y < b counts
        vol = a * bvals
        term2 = vol - cum_open_y / n
        k2 = int(np.argmax(term2))
        if term2[k2] > best:
            best = float(term2[k2])
            best_box = (float(a), float(bvals[k2]))
        while j < n and xs[j] <= a:
            hist[yrank[j]] += 1
            j += 1
        cum_closed_y = np.cumsum(hist)
        term1 = cum_closed_y / n - vol
        k1 = int(np.argmax(term1))
        if term1[k1] > best:
            best = float(term1[k1])
            best_box = (float(a), float(bvals[k1]))
    return DiscrepancyReport(n_points=n, exact_Dstar=best, worst_box=best_box,
                             metadata={"method": "corner-sweep-2d"})


def _exact_d3(pts: np.ndarray) -> DiscrepancyReport:
    n = len(pts)
    order = np.argsort(pts[:, 2], kind="stable")
    p = pts[order]
    avals = np.unique(np.append(pts[:, 0], 1.0))
    bvals = np.unique(np.append(pts[:, 1], 1.0))
    xr = np.searchsorted(avals, p[:, 0])
    yr = np.searchsorted(bvals, p[:, 1])
    na, nb = len(avals), len(bvals)
    hist = np.zeros((na, nb), dtype=np.int64)
    vol_ab = np.multiply.outer(avals, bvals)
    best = -1.0
    best_box = None
    j = 0
    cvals = np.unique(np.append(p[:, 2], 1.0))
    for c in cvals:
        # open in both x and y: the closed grid shifted one step per axis
        closed = np.cumsum(np.cumsum(hist, axis=0), axis=1)
        open_xy = np.zeros_like(closed)
        open_xy[1:, 1:] = closed[:-1, :-1]
        term2 = c * vol_ab - open_xy / n
        k2 = int(np.argmax(term2))
        if term2.flat[k2] > best:
            best = float(term2.flat[k2])
            best_box = (float(avals[k2 // nb]), float(bvals[k2 % nb]), float(c))
        while j < n and p[j, 2] <= c:
            hist[xr[j], yr[j]] += 1
            j += 1
        closed = np.cumsum(np.cumsum(hist, axis=0), axis=1)
        term1 = closed / n - c * vol_ab
        k1 = int(np.argmax(term1))
        if term1.flat[k1] > best:
            best = float(term1.flat[k1])
            best_box = (float(avals[k1 // nb]), float(bvals[k1 % nb]), float(c))
    return DiscrepancyReport(n_points=n, exact_Dstar=best, worst_box=best_box,
                             metadata={"method": "corner-sweep-3d"})


def _m_tables(cfg: TorusConfig, y: int):
    """Per coordinate: (2y+1) fixed-point values of m*alpha_i, m in [-y, y]."""
    tabs = []
    for a in cfg.alpha_fixed:
        t = np.empty(2 * y + 1, dtype=object)
        for m in range(-y, y + 1):
            t[m + y] = (m * a) % MOD
        tabs.append(t)
    return tabs


def _dist_and_fracx(v_hi: np.ndarray, v_lo: np.ndarray, x: int):
    """(||v||, frac(x*v)) as floats from limb arrays; exact integer products."""
    vf = v_hi * 2.0 ** -64 + v_lo * 2.0 ** -128
    dist = np.minimum(vf, 1.0 - vf)
    xh, xl = fixedpoint.mul_small_mod128(x, v_hi, v_lo)
    fx = xh * 2.0 ** -64 + xl * 2.0 ** -128
    return dist, fx


def et_bound(cfg: TorusConfig, x: int, y_cutoff: int,
             c_d: float | None = None, per_m: bool = False) -> DiscrepancyReport:
    """Erdos-Turan-Koksma bound on the star discrepancy of n*alpha - theta,
    n <= x, with the exponential sums in closed geometric form.
    """
    y = int(y_cutoff)
    if y < 1:
        raise ValidationError(f"y_cutoff must be >= 1, got {y_cutoff}")
    if x < 1:
        raise DomainError(f"x must be >= 1, got {x}")
    d = cfg.d
    total = (2 * y + 1) ** d - 1
    if total > 2 * 10 ** 7:
        raise ResourceLimitError(
            f"{total} lattice points at y={y}, d={d}; lower y_cutoff")
    cd = default_c_d(d) if c_d is None else float(c_d)
    grids = np.meshgrid(*[np.arange(-y, y + 1)] * d, indexing="ij")
    mflat = np.stack([g.ravel() for g in grids], axis=1)
    mflat = mflat[np.any(mflat != 0, axis=1)]
    # combine per-coordinate tables into exact 128-bit sums
    acc_hi = np.zeros(len(mflat), dtype=np.uint64)
    acc_lo = np.zeros(len(mflat), dtype=np.uint64)
    for i, a in enumerate(cfg.alpha_fixed):
        tab = np.empty((2 * y + 1, 2), dtype=np.uint64)
        for m in range(-y, y + 1):
            v = (m * a) % MOD
            tab[m + y, 0], tab[m + y, 1] = fixedpoint.split_limbs(v)
        sel = mflat[:, i] + y
        hi_i = tab[sel, 0]
        lo_i = tab[sel, 1]
        with np.errstate(over="ignore"):
            lo2 = acc_lo + lo_i
            carry = (lo2 < lo_i).astype(np.uint64)
            acc_hi = acc_hi + hi_i + carry
            acc_lo = lo2
    dist, fx = _dist_and_fracx(acc_hi, acc_lo, x)
    num = np.abs(np.sin(np.pi * fx))
    den = np.sin(np.pi * dist)
    with np.errstate(divide="ignore", invalid="ignore"):
        ratio = np.where(den > 0, num / den, float(x))
    ratio = np.minimum(ratio, float(x))
    r_m = np.prod(np.maximum(1, np.abs(mflat)), axis=1).astype(np.float64)
    terms = ratio / r_m
    one_over_y = 1.0 / y
    value = cd * (one_over_y + float(np.sum(terms)) / x)
    report = DiscrepancyReport(
        n_points=x, et_bound=value, y_cutoff=y,
        per_m_terms=(mflat, terms) if per_m else None,
        metadata={
            "c_d": cd,
            "c_d_source": C_D_SOURCE,
            "one_over_y_term": cd * one_over_y,
            "sum_term": cd * float(np.sum(terms)) / x,
        })
    return report


@dataclass(frozen=True)
class ExpSumResult:
    value: complex
    bound: float
    dist: float              # ||m . alpha||


def exp_sum(cfg: TorusConfig, m, x: int) -> ExpSumResult:
    """Closed-form sum over n <= x of e^{2 pi i m.(n alpha - theta)} with the
    geometric-sum bound 2/|e^{2 pi i m.alpha} - 1|."""
    m = tuple(int(v) for v in m)
    if len(m) != cfg.d:
        raise ValidationError(f"m has length {len(m)}, config is d={cfg.d}")
    if all(v == 0 for v in m):
        raise DomainError("m must be non-zero")
    if x < 1:
        raise DomainError(f"x must be >= 1, got {x}")
    v = 0
    for mi, a in zip(m, cfg.alpha_fixed):
        v = (v + mi * a) % MOD
    dist = min(v, MOD - v) / MOD
    # m . theta exactly when all phases rational
    if all(isinstance(t, Fraction) for t in cfg.theta):
        mtheta = float(sum(Fraction(mi) * t for mi, t in zip(m, cfg.theta)) % 1)
    else:
        mtheta = math.fsum(mi * float(t) for mi, t in zip(m, cfg.theta)) % 1.0
    rot = complex(math.cos(2 * math.pi * mtheta), -math.sin(2 * math.pi * mtheta))
    if v == 0:
        return ExpSumResult(x * rot, math.inf, 0.0)
    w = complex(math.cos(2 * math.pi * v / MOD), math.sin(2 * math.pi * v / MOD))
    xh, xl = fixedpoint.mul_small_mod128(x, *fixedpoint.split_limbs(v))
    fx = (int(xh) << 64 | int(xl)) / MOD
    wx = complex(math.cos(2 * math.pi * fx), math.sin(2 * math.pi * fx))
    value = rot * w * (wx - 1) / (w - 1)
    bound = 2.0 / abs(w - 1)
    return ExpSumResult(value, bound, dist)


def _baker_shell_mins_numpy(cfg: TorusConfig, M: int) -> np.ndarray:
    """min ||m . alpha|| over the shell |m|_inf = k, for k = 1..M."""
    d = cfg.d
    shell_min = np.full(M + 1, np.inf)
    if d == 1:
        oh, ol = fixedpoint.chunk_offsets(cfg.alpha_fixed[0], M + 1)
        vf = oh[1:] * 2.0 ** -64 + ol[1:] * 2.0 ** -128
        dist = np.minimum(vf, 1.0 - vf)
        shell_min[1:] = dist
        return shell_min
    # half grid (m_1 >= 0, skip the global sign flip) in vectorized slices
    ax_last = cfg.alpha_fixed[-1]
    oh, ol = fixedpoint.chunk_offsets(ax_last, M + 1)
    neg_hi = np.zeros_like(oh)
    neg_lo = np.zeros_like(ol)
    with np.errstate(over="ignore"):
        neg_lo[1:] = np.uint64(0) - ol[1:]
        borrow = (ol[1:] != 0).astype(np.uint64)
        neg_hi[1:] = np.uint64(0) - oh[1:] - borrow
    last_hi = np.concatenate([neg_hi[:0:-1], oh])       # m_d from -M..M
    last_lo = np.concatenate([neg_lo[:0:-1], ol])
    last_m = np.arange(-M, M + 1)
    heads = [np.arange(0, M + 1)] if d == 2 else \
        [np.arange(0, M + 1), np.arange(-M, M + 1)]
    grids = np.meshgrid(*heads, indexing="ij")
    head_list = np.stack([g.ravel() for g in grids], axis=1)
    for hm in head_list:
        base = 0
        for mi, a in zip(hm, cfg.alpha_fixed[:-1]):
            base = (base + int(mi) * a) % MOD
        h_split, l_split = fixedpoint.split_limbs(base)
        bh = np.uint64(h_split)
        bl = np.uint64(l_split)
        with np.errstate(over="ignore"):
            lo2 = last_lo + bl
            carry = (lo2 < last_lo).astype(np.uint64)
            hi2 = last_hi + bh + carry
        vf = hi2 * 2.0 ** -64 + lo2 * 2.0 ** -128
        dist = np.minimum(vf, 1.0 - vf)
        h = int(np.max(np.abs(hm)))
        # block |m_d| <= h lands in shell h; |m_d| = k > h in shell k.
        # h = 0 has only the excluded zero vector in its center block.
        if h >= 1:
            cmin = float(np.min(dist[M - h:M + h + 1]))
            if cmin < shell_min[h]:
                shell_min[h] = cmin
        if h < M:
            tail_pos = dist[M + h + 1:]
            tail_neg = dist[M - h - 1::-1]
            upd = np.minimum(tail_pos, tail_neg)
            seg = shell_min[h + 1:M + 1]
            np.minimum(seg, upd, out=seg)
    return shell_min


def _baker_shell_mins_numba(cfg: TorusConfig, M: int) -> np.ndarray:
    from . import _baker_numba
    limbs = [fixedpoint.split_limbs(a) for a in cfg.alpha_fixed]
    alpha_hi = np.array([h for h, _ in limbs], dtype=np.uint64)
    alpha_lo = np.array([l for _, l in limbs], dtype=np.uint64)
    return _baker_numba.shell_mins(alpha_hi, alpha_lo, M)


def baker_profile(cfg: TorusConfig, M: int, method: str = "auto") -> FitReport:
    """Record minima of ||m . alpha|| against |m|_inf, with a power-law fit
    of the decay exponent. Always empirical; m_0 is reduced to the nearest
    integer (recorded), so ||.|| is distance to the integer lattice.
    """
    if M < 1:
        raise ValidationError(f"M must be >= 1, got {M}")
    d = cfg.d
    if method == "auto":
        method = "exhaustive" if d <= 3 else "lll"
    if method == "exhaustive":
        if d > 3:
            raise CapabilityError("exhaustive enumeration capped at d <= 3; "
                                  "use method='lll'")
        if (2 * M + 1) ** max(d - 1, 1) > 2 * 10 ** 8:
            raise ResourceLimitError(f"M = {M} too large for exhaustive d={d}")
        kernel = backend.dispatch(lambda: _baker_shell_mins_numpy,
                                  lambda: _baker_shell_mins_numba)()
        shell_min = kernel(cfg, M)
        flags = ["EMPIRICAL"]
    elif method == "lll":
        if d > 6:
            raise CapabilityError("lattice shortlist capped at d <= 6")
        shell_min = _baker_shell_mins_lll(cfg, M)
        flags = ["EMPIRICAL", "lll-shortlist-not-exhaustive"]
    else:
        raise ValidationError(f"unknown method {method!r}")
    running = np.minimum.accumulate(shell_min[1:])
    finite = np.isfinite(running)
    records = []
    cur = math.inf
    for k in range(1, M + 1):
        if finite[k - 1] and running[k - 1] < cur:
            cur = float(running[k - 1])
            records.append((k, cur))
    sizes = [r[0] for r in records]
    dists = [r[1] for r in records]
    if len(records) >= 3:
        fit = power_law_fit(sizes, dists, flags=flags)
        kappa = -fit.exponent
        fit.metadata.update({
            "kappa_hat": kappa,
            "records": records,
            "m0_convention": "nearest integer",
            "method": method,
        })
        fit.exponent = kappa
        return fit
    return FitReport(
        exponent=float("nan"), intercept=float("nan"), residuals=[],
        inputs=(sizes, dists), r_squared=float("nan"),
        flags=flags + ["too-few-records-for-fit"],
        metadata={"records": records, "m0_convention": "nearest integer",
                  "method": method})


def _lll_reduce(basis: list, delta: float = 0.75) -> list:
    """Integer LLL on row vectors (lists of ints), classic textbook loop."""
    import copy
    b = [list(map(int, row)) for row in basis]
    n = len(b)

    def dot(u, v):
        return sum(x * y for x, y in zip(u, v))

    def gso():
        bs = [[float(x) for x in row] for row in b]
        mu = [[0.0] * n for _ in range(n)]
        norm = [0.0] * n
        for i in range(n):
            for j in range(i):
                if norm[j] > 0:
                    mu[i][j] = sum(b[i][k] * bs[j][k] for k in range(len(b[i]))) / norm[j]
                for k in range(len(bs[i])):
                    bs[i][k] -= mu[i][j] * bs[j][k]
            norm[i] = sum(x * x for x in bs[i])
        return mu, norm

    k = 1
    guard = 0
    while k < n and guard < 10000:
        guard += 1
        mu, norm = gso()
        for j in range(k - 1, -1, -1):
            q = round(mu[k][j])
            if q:
                b[k] = [x - q * y for x, y in zip(b[k], b[j])]
                mu, norm = gso()
        if norm[k] >= (delta - mu[k][k - 1] ** 2) * norm[k - 1]:
            k += 1
        else:
            b[k], b[k - 1] = b[k - 1], b[k]
            k = max(k - 1, 1)
    return b


def _baker_shell_mins_lll(cfg: TorusConfig, M: int) -> np.ndarray:
    """Candidate m vectors from LLL-reduced approximation lattices at a
    ladder of scales; exact distances only for the shortlisted m."""
    d = cfg.d
    shell_min = np.full(M + 1, np.inf)
    candidates = set()
    for shift in range(16, 121, 8):
        Q = 1 << shift
        rows = []
        for i, a in enumerate(cfg.alpha_fixed):
            row = [0] * (d + 1)
            row[i] = 1
            row[d] = (a * Q) >> 128
            rows.append(row)
        rows.append([0] * d + [Q])
        red = _lll_reduce(rows)
        for row in red:
            m = tuple(row[:d])
            if any(m) and max(abs(v) for v in m) <= M:
                candidates.add(m)
                candidates.add(tuple(-v for v in m))
    # small combinations of the shortlist widen coverage across shells
    base = list(candidates)
    for u in base:
        for v in base:
            w = tuple(a + b for a, b in zip(u, v))
            if any(w) and max(abs(c) for c in w) <= M:
                candidates.add(w)
    for m in candidates:
        v = 0
        for mi, a in zip(m, cfg.alpha_fixed):
            v = (v + mi * a) % MOD
        dist = min(v, MOD - v) / MOD
        shell = max(abs(c) for c in m)
        if dist < shell_min[shell]:
            shell_min[shell] = dist
    return shell_min


def discrepancy_decay_fit(cfg: TorusConfig, x_grid, mode: str = "auto",
                          y_cutoff: int = 1000,
                          injected_values=None) -> FitReport:
    """delta-hat from log D vs log x; D per point is exact when feasible,
    otherwise the ET bound, and the source is recorded per point."""
    xs = [int(x) for x in x_grid]
    if len(xs) < 4:
        raise ValidationError(f"x_grid needs >= 4 points, got {len(xs)}")
    if any(b <= a for a, b in zip(xs, xs[1:])):
        raise ValidationError("x_grid must be strictly increasing")
    values = []
    sources = []
    if injected_values is not None:
        values = [float(v) for v in injected_values]
        if len(values) != len(xs):
            raise ValidationError("injected values length mismatch")
        sources = ["injected"] * len(xs)
    else:
        for x in xs:
            use_exact = mode == "exact" or (
                mode == "auto" and (
                    (cfg.d == 1 and x <= MAX_EXACT_1D)
                    or (cfg.d in (2, 3) and x <= MAX_EXACT_ND)))
            if use_exact:
                pts = np.array([orbit_point(cfg, n).floats()
                                for n in range(1, x + 1)])
                rep = exact_star_discrepancy(pts)
                values.append(rep.exact_Dstar)
                sources.append("exact")
            else:
                rep = et_bound(cfg, x, y_cutoff)
                values.append(rep.et_bound)
                sources.append("et")
    fit = power_law_fit(xs, values, min_points=4)
    delta = -fit.exponent
    fit.exponent = delta
    fit.metadata.update({"sources": sources, "delta_hat": delta})
    if delta <= 0.02:
        fit.flags.append("no-decay")
    return fit
