from __future__ import annotations

import math
from fractions import Fraction
from itertools import product

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from modchar_lab import (
    DomainError,
    ValidationError,
    TorusConfig,
    baker_profile,
    box_hits,
    count_Q,
    default_c_d,
    discrepancy_decay_fit,
    et_bound,
    exact_star_discrepancy,
    exp_sum,
    orbit_point,
)
from modchar_lab import fixedpoint


def _brute_star_discrepancy(points):
    """All-corners enumeration; exponential in d, fine for tiny sets."""
    pts = np.atleast_2d(np.asarray(points, dtype=float))
    n, d = pts.shape
    corners = [sorted(set(pts[:, j]) | {1.0}) for j in range(d)]
    worst = 0.0
    for box in product(*corners):
        vol = math.prod(box)
        inside = np.all(pts < np.asarray(box), axis=1).sum()
        inside_closed = np.all(pts <= np.asarray(box), axis=1).sum()
        worst = max(worst, abs(inside / n - vol), abs(inside_closed / n - vol))
    return worst


@pytest.fixture(scope="module")
def cfg2():
    return TorusConfig.from_primes((2,), (Fraction(0),))


@pytest.fixture(scope="module")
def cfg23():
    return TorusConfig.from_primes((2, 3), (Fraction(0), Fraction(0)))


class TestConfig:
    def test_composite_rejected(self):
        with pytest.raises(ValidationError):
            TorusConfig.from_primes((4,), (0,))

    def test_duplicate_rejected(self):
        with pytest.raises(ValidationError):
            TorusConfig.from_primes((2, 2), (0, 0))

    def test_dimension(self, cfg23):
        assert cfg23.d == 2

    def test_alpha_is_frac_log(self, cfg2):
        a = fixedpoint.fixed_to_float(cfg2.alpha_fixed[0])
        assert abs(a - (math.log(2) % 1)) < 1e-15


class TestOrbit:
    def test_first_point(self, cfg2):
        pt = orbit_point(cfg2, 1)
        assert abs(pt.floats()[0] - (math.log(2) % 1)) < 1e-15

    def test_theta_shift(self):
        cfg = TorusConfig.from_primes((2,), (Fraction(1, 4),))
        # 0*alpha - 1/4 mod 1 = 3/4
        pt = orbit_point(cfg, 0)
        assert abs(pt.floats()[0] - 0.75) < 1e-15

    def test_against_256bit_oracle(self, cfg23, rng):
        import mpmath
        with mpmath.workprec(300):
            logs = [mpmath.log(2), mpmath.log(3)]
            for n in rng.integers(1, 10**9, size=20):
                n = int(n)
                pt = orbit_point(cfg23, n)
                for j, lg in enumerate(logs):
                    ref = float(mpmath.frac(n * lg))
                    got = pt.floats()[j]
                    diff = abs(got - ref)
                    diff = min(diff, 1 - diff)
                    assert diff <= n * 2.0**-126 + 1e-15, (n, j)

    def test_err_bound_scales_with_n(self, cfg2):
        assert orbit_point(cfg2, 10**9).err_bound <= 10**9 * 2.0**-127


class TestBoxHits:
    def test_worked_example(self, cfg2):
        hits = box_hits(cfg2, 1, 10, 0.5)
        assert hits.tolist() == [2, 3, 5, 6, 9]

    def test_count_consistent_with_hits(self, cfg23):
        hits = box_hits(cfg23, 1, 500, 0.3)
        count, expected, dev = count_Q(cfg23, 500, 0.3)
        assert len(hits) == count
        assert expected == pytest.approx(500 * 0.3**2)
        assert dev == abs(count - expected)

    @settings(deadline=None, max_examples=20)
    @given(st.integers(20, 2000), st.integers(1, 15))
    def test_window_additivity(self, x, lo):
        cfg = TorusConfig.from_primes((2,), (Fraction(0),))
        if lo >= x:
            lo = 1
        full = box_hits(cfg, 1, x, 0.25)
        head = box_hits(cfg, 1, lo, 0.25)
        tail = box_hits(cfg, lo + 1, x, 0.25)
        assert np.array_equal(full, np.concatenate([head, tail]))

    def test_eps_one_is_full_box(self, cfg2):
        assert box_hits(cfg2, 1, 10, 1.0).tolist() == list(range(1, 11))

    def test_empty_window(self, cfg2):
        assert box_hits(cfg2, 1, 1, 1e-9).size == 0


class TestExactDiscrepancy:
    def test_single_point_half(self):
        rep = exact_star_discrepancy([[0.5]])
        assert rep.exact_Dstar == 0.5

    def test_quarter(self):
        rep = exact_star_discrepancy([[0.75]])
        assert rep.exact_Dstar == 0.75

    def test_d2_worked(self):
        rep = exact_star_discrepancy([[0.5, 0.5]])
        assert rep.exact_Dstar == 0.75
        assert rep.worst_box is not None

    def test_centered_grid_optimum(self):
        # centered n-point grid attains the 1d minimum 1/(2n)
        pts = [[(2 * i + 1) / 20] for i in range(10)]
        rep = exact_star_discrepancy(pts)
        assert rep.exact_Dstar == pytest.approx(1 / 20, abs=1e-12)

    def test_matches_brute_force_d1(self, rng):
        for _ in range(10):
            pts = rng.random((25, 1))
            rep = exact_star_discrepancy(pts)
            assert rep.exact_Dstar == pytest.approx(
                _brute_star_discrepancy(pts), abs=1e-12)

    def test_matches_brute_force_d2(self, rng):
        for _ in range(5):
            pts = rng.random((30, 2))
            rep = exact_star_discrepancy(pts)
            assert rep.exact_Dstar == pytest.approx(
                _brute_star_discrepancy(pts), abs=1e-12)

    def test_matches_brute_force_d3(self, rng):
        pts = rng.random((12, 3))
        rep = exact_star_discrepancy(pts)
        assert rep.exact_Dstar == pytest.approx(
            _brute_star_discrepancy(pts), abs=1e-12)

    def test_rejects_out_of_range(self):
        with pytest.raises(ValidationError):
            exact_star_discrepancy([[1.5]])


class TestEtBound:
    def test_dominates_exact(self, cfg2):
        for x in (100, 400, 1000):
            pts = np.array([orbit_point(cfg2, n).floats()
                            for n in range(1, x + 1)])
            exact = exact_star_discrepancy(pts).exact_Dstar
            bound = et_bound(cfg2, x, 60).et_bound
            assert bound >= exact

    def test_c_d_constants(self):
        assert default_c_d(1) == pytest.approx(3.0)
        assert default_c_d(2) == pytest.approx(4.5)
        assert default_c_d(3) == pytest.approx(6.75)

    def test_per_m_terms_reconstruct_bound(self, cfg23):
        rep = et_bound(cfg23, 1000, 8, per_m=True)
        mvecs, terms = rep.per_m_terms
        assert mvecs.shape == (17 * 17 - 1, 2)
        total = default_c_d(2) * (1 / 8 + float(np.sum(terms)) / 1000)
        assert rep.et_bound == pytest.approx(total, rel=1e-12)
        assert rep.metadata["one_over_y_term"] + rep.metadata["sum_term"] \
            == pytest.approx(rep.et_bound, rel=1e-12)

    def test_informative_at_large_x(self, cfg2):
        rep = et_bound(cfg2, 10**5, 40)
        assert rep.et_bound < 0.2

    def test_more_frequencies_tighten_or_keep(self, cfg2):
        b1 = et_bound(cfg2, 10**4, 10).et_bound
        b2 = et_bound(cfg2, 10**4, 80).et_bound
        assert b2 <= b1 * 1.5


class TestExpSum:
    def _loop(self, cfg, m, x):
        total = 0.0 + 0.0j
        th = cfg.theta_fixed()
        for n in range(1, x + 1):
            phase = sum(mi * (n * fixedpoint.fixed_to_float(a)
                              - fixedpoint.fixed_to_float(t))
                        for mi, a, t in zip(m, cfg.alpha_fixed, th))
            total += complex(math.cos(2 * math.pi * phase),
                             math.sin(2 * math.pi * phase))
        return total

    def test_closed_form_matches_loop(self, cfg2):
        r = exp_sum(cfg2, (3,), 500)
        brute = self._loop(cfg2, (3,), 500)
        assert abs(r.value - brute) < 1e-7
        assert abs(r.value) <= r.bound + 1e-12

    def test_frozen_geometric_bound(self, cfg2):
        # sup_x |sum| for m=1 is 1/sin(pi * frac(log 2))
        r = exp_sum(cfg2, (1,), 10**6)
        assert r.bound == pytest.approx(1.2173108943835339, abs=1e-12)

    def test_zero_vector_rejected(self, cfg23):
        with pytest.raises((DomainError, ValidationError)):
            exp_sum(cfg23, (0, 0), 100)

    @settings(deadline=None, max_examples=15)
    @given(st.integers(-6, 6).filter(lambda v: v != 0), st.integers(2, 800))
    def test_property_closed_form(self, m, x):
        cfg = TorusConfig.from_primes((3,), (Fraction(1, 4),))
        r = exp_sum(cfg, (m,), x)
        brute = self._loop(cfg, (m,), x)
        assert abs(r.value - brute) < 1e-6


class TestBaker:
    def test_d1_records_at_convergents(self, cfg2):
        fit = baker_profile(cfg2, 100)
        ms = [int(k) for k, _ in fit.metadata["records"]]
        assert ms == [1, 3, 10, 13, 88]

    def test_record_values_decrease(self, cfg23):
        fit = baker_profile(cfg23, 60)
        vals = [v for _, v in fit.metadata["records"]]
        assert all(b < a for a, b in zip(vals, vals[1:]))

    def test_kappa_positive(self, cfg2):
        fit = baker_profile(cfg2, 200)
        assert fit.metadata["kappa_hat"] > 0

    def test_lll_route_runs_high_d(self):
        cfg = TorusConfig.from_primes((2, 3, 5, 7))
        fit = baker_profile(cfg, 25, method="lll")
        vals = [v for _, v in fit.metadata["records"]]
        assert all(b < a for a, b in zip(vals, vals[1:]))
        assert fit.metadata["method"] == "lll"
        assert "lll-shortlist-not-exhaustive" in fit.flags

    def test_methods_agree_small(self, cfg23):
        a = baker_profile(cfg23, 30, method="exhaustive")
        b = baker_profile(cfg23, 30, method="lll")
        ra = {int(k): v for k, v in a.metadata["records"]}
        rb = {int(k): v for k, v in b.metadata["records"]}
        for k in set(ra) & set(rb):
            assert ra[k] == pytest.approx(rb[k], rel=1e-9)


class TestDecayFit:
    def test_lemma2_probe_positive_delta(self, cfg23):
        # fit.exponent already carries delta-hat (decay is positive)
        fit = discrepancy_decay_fit(cfg23, [250, 500, 1000, 2000])
        assert fit.exponent > 0
        assert fit.metadata["delta_hat"] == fit.exponent
        assert set(fit.metadata["sources"]) == {"exact"}

    def test_injected_flat_flags_no_decay(self, cfg23):
        fit = discrepancy_decay_fit(cfg23, [100, 200, 400, 800],
                                    injected_values=[0.5, 0.5, 0.5, 0.5])
        assert "no-decay" in fit.flags

    def test_too_few_points_rejected(self, cfg23):
        with pytest.raises(ValidationError):
            discrepancy_decay_fit(cfg23, [100, 200, 400])
