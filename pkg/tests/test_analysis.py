from __future__ import annotations

import math

import numpy as np
import pytest

from modchar_lab import (
    DomainError,
    ResourceLimitError,
    ValidationError,
    gamma_moment,
    moment_accumulate,
    omega_fit,
    partial_sums,
    plancherel_check,
    plancherel_lhs,
    plancherel_rhs,
    power_law_fit,
    spike_scan,
)


class TestGammaMoment:
    def test_matches_closed_form(self):
        for N in (0, 1, 3):
            for sigma in (0.5, 0.1):
                numeric, closed = gamma_moment(N, sigma)
                assert abs(numeric - closed) <= 1e-9 * closed

    def test_non_integer_N(self):
        numeric, closed = gamma_moment(2.5, 0.3)
        assert closed == pytest.approx(math.gamma(3.5) / 0.3**3.5)
        assert abs(numeric - closed) <= 1e-9 * closed

    def test_domain(self):
        with pytest.raises(DomainError):
            gamma_moment(-0.5, 0.5)
        with pytest.raises(DomainError):
            gamma_moment(1, 0.0)


class TestPlancherelLhs:
    def test_tiny_X_hand_value(self, f34):
        # head only: X=5, M(1..4) = 1,1,2,2 -> sum |M|^2 (n^-2s-(n+1)^-2s)/(2s)
        trace = partial_sums(f34, 5, keep_values=True)
        sigma = 0.5
        head = sum(abs(m) ** 2 * (n**-1.0 - (n + 1) ** -1.0)
                   for n, m in zip(range(1, 5), [1, 1, 2, 2]))
        bv = plancherel_lhs(f34, sigma, trace)
        assert bv.value == pytest.approx(head, rel=1e-12)

    def test_error_shrinks_with_X(self, f34):
        t1 = partial_sums(f34, 10**3)
        t2 = partial_sums(f34, 10**5)
        b1 = plancherel_lhs(f34, 0.5, t1)
        b2 = plancherel_lhs(f34, 0.5, t2)
        assert b2.abs_error < b1.abs_error

    def test_values_converge(self, f34):
        t1 = partial_sums(f34, 10**5)
        t2 = partial_sums(f34, 10**6)
        b1 = plancherel_lhs(f34, 0.5, t1)
        b2 = plancherel_lhs(f34, 0.5, t2)
        assert abs(b1.value - b2.value) <= b1.abs_error + b2.abs_error

    def test_sigma_domain(self, f34):
        trace = partial_sums(f34, 100)
        with pytest.raises(DomainError):
            plancherel_lhs(f34, 0.0, trace)


class TestPlancherelIdentity:
    def test_sigma_half_small_cut(self, f34, trace_1e6):
        rep = plancherel_check(f34, 0.5, trace_1e6, 200.0)
        assert rep.metadata["passed"], rep.relative_gap
        assert rep.relative_gap < 0.02
        assert rep.X_used == 10**6
        assert rep.T_used == 200.0
        assert "tail-envelope-empirical-x4" in rep.flags

    def test_failing_run_still_reports(self, f34):
        # starved cut: identity cannot close, report must say so, not raise
        trace = partial_sums(f34, 10**4)
        rep = plancherel_check(f34, 0.5, trace, 5.0, slack=0.0)
        assert rep.metadata["passed"] in (True, False)

    def test_rhs_details(self, f34):
        val, details = plancherel_rhs(f34, 0.5, 100.0, with_details=True)
        assert details["panels"] > 0
        assert details["tail_bound"] >= 0
        assert val.abs_error >= details["tail_bound"]


class TestSpikeScan:
    def test_sigma_cap(self, f34):
        with pytest.raises(DomainError):
            spike_scan(f34, 0.35, (2, 100))

    def test_n_lo_floor(self, f34):
        with pytest.raises(DomainError):
            spike_scan(f34, 0.25, (1, 100))

    def test_eps_cap(self, f34):
        with pytest.raises(ValidationError):
            spike_scan(f34, 0.25, (2, 100), eps=1.0)

    def test_default_eps_is_sigma(self, f34):
        rep = spike_scan(f34, 0.25, (2, 80), with_l=False)
        assert rep.metadata["eps"] == 0.25
        assert rep.T == pytest.approx(math.exp(4.0))

    def test_hits_scaled_inverse_factor(self, f34):
        rep = spike_scan(f34, 0.25, (2, 300), with_l=False)
        assert rep.metadata["hit_count"] == len(rep.hits)
        assert rep.metadata["min_inv_Ef_scaled"] > 0
        assert "l-fields-skipped" in rep.flags

    def test_r_average_flag(self, f34):
        rep = spike_scan(f34, 0.3, (2, 60), r_average=True, with_l=False)
        assert "r-averaged-3pt" in rep.flags
        assert rep.metadata["r_offsets"] == [0.0, 0.15, 0.3]

    def test_empty_window_flagged(self, f34):
        rep = spike_scan(f34, 0.25, (2, 3), eps=1e-6, with_l=False)
        assert "empty-window" in rep.flags
        assert rep.metadata["hit_count"] == 0

    def test_l_fields_present(self, f34):
        rep = spike_scan(f34, 0.25, (2, 60))
        lemma1 = rep.metadata["lemma1_lhs"]
        assert len(lemma1) == rep.metadata["hit_count"]
        assert all(v > 0 for v in lemma1)


class TestMoment:
    def test_window_and_ratio(self, f34):
        res = moment_accumulate(f34, 0.6)
        T = math.exp(1 / 0.6)
        assert res.window_t[0] == pytest.approx(T)
        assert res.window_t[1] == pytest.approx(T**5)
        assert res.window_n[0] == max(2, math.ceil(T / (2 * math.pi)))
        assert res.total > 0
        assert res.ratio == pytest.approx(res.total / 0.6**2)
        assert "theorem-vacuous-at-this-S" in res.flags

    def test_stability_band(self, f34):
        ratios = [moment_accumulate(f34, s).ratio for s in (0.6, 0.55, 0.5)]
        assert all(r > 0 for r in ratios)
        assert max(ratios) / min(ratios) < 10

    def test_infeasible_sigma_names_threshold(self, f34):
        with pytest.raises(ResourceLimitError) as ei:
            moment_accumulate(f34, 0.12)
        assert "smallest feasible sigma" in str(ei.value)

    def test_kappa_domain(self, f34):
        with pytest.raises(ValidationError):
            moment_accumulate(f34, 0.6, kappa_w=1.0)
        with pytest.raises(ValidationError):
            moment_accumulate(f34, 0.6, kappa_w=5.5)


class TestOmegaFit:
    def test_recovers_cubic(self):
        sigmas = [0.5, 0.4, 0.3, 0.25, 0.2]
        vals = [1 / s**3 for s in sigmas]
        fit = omega_fit(sigmas, vals)
        assert fit.exponent == pytest.approx(3.0, abs=1e-9)
        assert fit.metadata["fitted_N"] == pytest.approx(2.0, abs=1e-9)

    def test_recovers_scaled_three_halves(self):
        sigmas = [0.6, 0.45, 0.3, 0.25]
        vals = [5 / s**1.5 for s in sigmas]
        fit = omega_fit(sigmas, vals)
        assert fit.exponent == pytest.approx(1.5, abs=1e-9)
        assert math.exp(fit.intercept) == pytest.approx(5.0, rel=1e-9)

    def test_implied_partial_sum_exponent(self):
        sigmas = [0.5, 0.4, 0.3, 0.2]
        fit = omega_fit(sigmas, [1 / s**3 for s in sigmas])
        assert fit.metadata["implied_partial_sum_log_exponent"] \
            == pytest.approx(1.0, abs=1e-9)

    def test_narrow_grid_rejected(self):
        with pytest.raises(ValidationError):
            omega_fit([0.5, 0.45, 0.4, 0.35], [1, 2, 3, 4])


class TestPowerLawFit:
    def test_exact_line(self):
        grid = [1.0, 2.0, 4.0, 8.0]
        vals = [3 * g**2 for g in grid]
        fit = power_law_fit(grid, vals)
        assert fit.exponent == pytest.approx(2.0, abs=1e-12)
        assert fit.r_squared == pytest.approx(1.0, abs=1e-12)
        assert max(abs(r) for r in fit.residuals) < 1e-12

    def test_min_points(self):
        with pytest.raises(ValidationError):
            power_law_fit([1.0, 2.0], [1.0, 2.0])

    def test_nonpositive_rejected(self):
        with pytest.raises((DomainError, ValidationError)):
            power_law_fit([1.0, 2.0, 3.0], [1.0, -2.0, 3.0])
