from __future__ import annotations

import cmath
import math
from fractions import Fraction

import pytest

from modchar_lab import (
    DomainError,
    PoleError,
    F_euler,
    F_integral,
    enumerate_characters,
    euler_factors,
    euler_factors_at_spike,
    eval_f,
    make_modified,
    nearest_pole,
    partial_sums,
    poles_of_inverse_Ef,
)

CATALAN = 0.915965594177219015054603514932


def test_euler_route_spot_value(f34):
    # E_chi/E_f at s=2: (1 - (-1)/9) / (1 - 1/9) = 10/8 = 1.25
    bv = F_euler(2.0, f34) if False else F_euler(f34, 2.0)
    assert abs(bv.value - 1.25 * CATALAN) < 1e-9


def test_euler_factors_shape(f34):
    ef = euler_factors(f34, 2.0 + 0j)
    assert [p for p, _, _ in ef.factors] == [3]
    assert abs(ef.E_f_value - (1 - 1 / 9)) < 1e-14
    assert abs(ef.E_chi_value - (1 + 1 / 9)) < 1e-14


def test_dirichlet_series_partial_sum_consistency(f34):
    # F(s) should be close to the truncated series at large Re(s)
    s = 6.0
    direct = sum(eval_f(f34, n) / n**s for n in range(1, 2000))
    bv = F_euler(f34, s, best_effort=True)
    assert abs(bv.value - direct) <= bv.abs_error + 1e-12
    assert abs(bv.value - direct) < 1e-9


def test_integral_route_agrees_small(f34):
    trace = partial_sums(f34, 10**5)
    for s in (2.0, 1.5 + 3j, 1.2 - 10j):
        e = F_euler(f34, s, best_effort=True)
        i, details = F_integral(f34, s, trace, with_details=True)
        assert abs(e.value - i.value) <= e.abs_error + i.abs_error, s
        assert details["heuristics"]


def test_integral_route_respects_target(f34):
    trace = partial_sums(f34, 10**5)
    bv = F_integral(f34, 2.0, trace, target_abs_error=1e-6)
    assert bv.abs_error <= 1e-6


def test_integral_needs_positive_sigma(f34):
    trace = partial_sums(f34, 1000)
    with pytest.raises(DomainError):
        F_integral(f34, -0.1 + 1j, trace)


class TestPoles:
    def test_rational_phase_lattice(self):
        chi0 = enumerate_characters(1)[0]
        g = make_modified(chi0, {3: Fraction(1, 2)})
        locs = poles_of_inverse_Ef(g, 0.0, 10.0)
        # 1 - e^{i pi} 3^{-it} = 0 at t = (2k+1) pi / log 3
        expect = [math.pi / math.log(3), 3 * math.pi / math.log(3)]
        got = sorted(c.t for c in locs)
        assert len(got) == len(expect)
        for a, b in zip(got, expect):
            assert abs(a - b) < 1e-12

    def test_empty_interval(self, f34):
        assert poles_of_inverse_Ef(f34, 2.0, 2.0) == []

    def test_nearest_pole_brackets(self):
        chi0 = enumerate_characters(1)[0]
        g = make_modified(chi0, {3: Fraction(1, 2)})
        p = nearest_pole(g, 3.0)
        assert abs(p.t - math.pi / math.log(3)) < 1e-12
        assert p.p == 3

    def test_f34_poles_offset_from_chi(self, f34):
        # f(3) = +1 puts zeros of E_f at t = 2k pi / log 3, k != 0
        locs = poles_of_inverse_Ef(f34, 0.1, 12.0)
        expect = [2 * math.pi / math.log(3), 4 * math.pi / math.log(3)]
        got = sorted(c.t for c in locs)
        assert got == pytest.approx(expect, abs=1e-12)


class TestSpikeFactors:
    def test_matches_generic_at_r0(self, f34):
        # exact frac(n log p) phase vs direct complex evaluation
        for n in (3, 17, 1000):
            s = 0.25 + 2j * math.pi * n
            a = euler_factors_at_spike(f34, 0.25, n)
            b = euler_factors(f34, s)
            assert abs(a.E_f_value - b.E_f_value) < 1e-9, n
            assert abs(a.E_chi_value - b.E_chi_value) < 1e-9, n

    def test_r_offset_rotates(self, f34):
        a = euler_factors_at_spike(f34, 0.25, 40, r=0.0)
        b = euler_factors_at_spike(f34, 0.25, 40, r=0.1)
        assert a.E_f_value != b.E_f_value
        expect = 1 - (1 - a.E_f_value) * cmath.exp(-0.1j * math.log(3))
        assert abs(b.E_f_value - expect) < 1e-12

    def test_large_n_stays_exact(self, f34):
        # generic route loses the phase at huge t; the spike route must not
        n = 10**9
        a = euler_factors_at_spike(f34, 0.25, n)
        assert abs(a.E_f_value) <= 1 + 3 ** (-0.25) + 1e-12
        assert abs(a.E_f_value) > 1e-12


def test_euler_pole_hit_raises():
    # zeros of E_f sit on Re(s) = 0; hitting one exactly must refuse
    chi0 = enumerate_characters(1)[0]
    g = make_modified(chi0, {3: Fraction(1, 2)})
    t = math.pi / math.log(3)
    with pytest.raises(PoleError):
        F_euler(g, complex(0.0, t))
