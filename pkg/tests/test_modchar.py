from __future__ import annotations

import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from modchar_lab import (
    CompositeModulusKeyError,
    DomainError,
    PhaseCollisionError,
    ResourceLimitError,
    ValidationError,
    enumerate_characters,
    eval_f,
    exponents,
    growth_record,
    make_modified,
    partial_sums,
)


def _naive_M(f, x):
    return sum(eval_f(f, n) for n in range(1, x + 1))


class TestConstruction:
    def test_composite_key_rejected(self, chi4):
        with pytest.raises(CompositeModulusKeyError):
            make_modified(chi4, {6: Fraction(1, 2)})

    def test_phase_collision_rejected(self, chi4):
        # theta_3 = 1/2 reproduces chi(3) = -1, so f would equal chi
        with pytest.raises(PhaseCollisionError):
            make_modified(chi4, {3: Fraction(1, 2)})

    def test_collision_only_at_exact_phase(self, chi4):
        make_modified(chi4, {3: Fraction(1, 3)})
        make_modified(chi4, {3: 0.4999})

    def test_prime_dividing_modulus_allowed(self, chi4):
        # chi(2) = 0 but theta_2 replaces it with a unimodular value
        g = make_modified(chi4, {2: Fraction(1, 4)})
        assert abs(eval_f(g, 2) - 1j) < 1e-15
        assert abs(abs(eval_f(g, 4)) - 1.0) < 1e-15

    def test_descriptor_round_trips_content(self, f34):
        d = f34.descriptor()
        assert "modulus=4" in d and "3:0" in d

    def test_s_primes_sorted(self, chi4):
        g = make_modified(chi4, {7: Fraction(1, 3), 3: 0})
        assert g.s_primes == (3, 7)
        assert g.s_size == 2


class TestValues:
    def test_hand_table(self, f34):
        expect = {1: 1, 2: 0, 3: 1, 4: 0, 5: 1, 6: 0, 7: -1, 8: 0, 9: 1,
                  10: 0, 11: -1, 12: 0, 13: 1, 15: 1, 21: -1, 27: 1}
        for n, v in expect.items():
            assert abs(eval_f(f34, n) - v) < 1e-15

    def test_unmodified_prime_agrees_with_chi(self, chi4, f34):
        for p in (5, 7, 11, 13, 17):
            assert eval_f(f34, p) == chi4.value_complex(p)

    @settings(deadline=None, max_examples=50)
    @given(st.integers(1, 5000), st.integers(1, 5000))
    def test_completely_multiplicative(self, m, n):
        chi = enumerate_characters(4)[1]
        f = make_modified(chi, {3: Fraction(0)})
        a = eval_f(f, m) * eval_f(f, n)
        b = eval_f(f, m * n)
        assert abs(a - b) < 1e-12

    def test_irrational_theta(self, chi4):
        g = make_modified(chi4, {3: 0.123456789})
        v = eval_f(g, 3)
        assert abs(v - complex(math.cos(2 * math.pi * 0.123456789),
                               math.sin(2 * math.pi * 0.123456789))) < 1e-15
        assert not g.all_theta_rational()


class TestPartialSums:
    def test_small_sums_match_naive(self, f34):
        # trace.values holds M(n) itself, index n-1
        trace = partial_sums(f34, 200, stride=1, keep_values=True)
        for x in (1, 2, 3, 10, 37, 100, 200):
            assert abs(trace.values[x - 1] - _naive_M(f34, x)) < 1e-12

    def test_M10_is_3(self, f34):
        trace = partial_sums(f34, 10)
        assert abs(trace.sample_M[-1] - 3) < 1e-12

    def test_stride_samples_subset_of_full(self, f34):
        full = partial_sums(f34, 1000, stride=1)
        coarse = partial_sums(f34, 1000, stride=100)
        for i, x in enumerate(coarse.sample_x.tolist()):
            j = np.searchsorted(full.sample_x, x)
            assert full.sample_x[j] == x
            assert full.sample_M[j] == coarse.sample_M[i]

    def test_running_sup_monotone(self, f34):
        trace = partial_sums(f34, 5000, stride=7)
        sup = np.asarray(trace.running_sup)
        assert np.all(np.diff(sup) >= 0)
        assert trace.meta["sup_abs_M"] == sup[-1]

    def test_sup_dominates_samples(self, f34):
        trace = partial_sums(f34, 3000, stride=11)
        assert np.all(np.abs(trace.sample_M) <= np.asarray(trace.running_sup)
                      + 1e-12)

    def test_bad_args(self, f34):
        with pytest.raises(DomainError):
            partial_sums(f34, 0)
        with pytest.raises(ValidationError):
            partial_sums(f34, 100, stride=0)

    def test_keep_values_cap(self, f34):
        with pytest.raises(ResourceLimitError):
            partial_sums(f34, 10**7, keep_values=True, max_kept=10**6)

    def test_blocked_equals_unblocked(self, f34):
        a = partial_sums(f34, 30000, stride=997, block=1 << 12)
        b = partial_sums(f34, 30000, stride=997)
        assert np.array_equal(a.sample_M, b.sample_M)
        assert np.array_equal(a.running_sup, b.running_sup)

    @settings(deadline=None, max_examples=25)
    @given(st.integers(2, 3000))
    def test_increment_is_f(self, x):
        chi = enumerate_characters(4)[1]
        f = make_modified(chi, {3: Fraction(0)})
        trace = partial_sums(f, x, keep_values=True)
        inc = trace.values[x - 1] - trace.values[x - 2]
        assert abs(inc - eval_f(f, x)) < 1e-12


class TestExponents:
    def test_modulus4_example(self, f34):
        T, N, D = exponents(f34)
        assert (T, N, D) == (1, 1, Fraction(1))

    def test_nontrivial_phase_does_not_count(self, chi4):
        # T counts primes where f(p) = 1 minus primes where chi(p) = 1
        g = make_modified(chi4, {3: Fraction(1, 3)})
        assert exponents(g) == (0, 0, Fraction(1))

    def test_even_character_loses_one(self):
        chi0 = [c for c in enumerate_characters(1)][0]
        g = make_modified(chi0, {3: Fraction(1, 2)})
        T, N, D = exponents(g)
        assert T == -1 and N == 0 and D == Fraction(1)

    def test_large_s_drives_D(self, chi4):
        mods = {p: Fraction(1, 3) for p in (3, 7, 11, 13, 17, 19, 23)}
        _, _, D = exponents(make_modified(chi4, mods))
        assert D == Fraction(7 - 3, 2)


class TestGrowthRecord:
    def test_checkpoints(self, f34):
        rec = growth_record(f34, 10**4, 1)
        assert [x for x, _ in rec] == [10, 100, 1000, 10**4]
        assert all(v > 0 for _, v in rec)

    def test_matches_trace_sup(self, f34):
        rec = growth_record(f34, 100, 0)
        trace = partial_sums(f34, 100, keep_values=True)
        sup100 = np.max(np.abs(trace.values))
        assert abs(rec[-1][1] - sup100) < 1e-12

    def test_domain(self, f34):
        with pytest.raises(DomainError):
            growth_record(f34, 5, 1)
