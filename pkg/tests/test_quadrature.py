from __future__ import annotations

import math

import numpy as np
import pytest

from modchar_lab.errors import ConvergenceError
from modchar_lab.quadrature import (
    integrate_adaptive,
    integrate_piecewise,
    kronrod_panel,
)


def _clean(g):
    def f(x):
        return g(x), np.zeros_like(x)
    return f


def test_polynomial_exact():
    # degree 7 is inside the G7 exactness range
    res = integrate_adaptive(_clean(lambda x: x**7), 0.0, 1.0, 1e-12)
    assert abs(res.value - 1 / 8) < 1e-14


def test_smooth_transcendental():
    res = integrate_adaptive(_clean(np.exp), 0.0, 1.0, 1e-12)
    assert abs(res.value - (math.e - 1)) < 1e-12
    assert res.error_estimate <= 1e-12


def test_oscillatory():
    # non-period interval, so the scheme must actually refine
    res = integrate_adaptive(_clean(lambda x: np.sin(50 * x)), 0.0, 1.0,
                             1e-10)
    assert abs(res.value - (1 - math.cos(50)) / 50) < 1e-9
    assert res.panels > 1


def test_peaked_integrand():
    # Lorentzian of width 1e-3 centered mid-interval
    w = 1e-3

    def g(x):
        return w / (w**2 + (x - 0.3)**2)

    res = integrate_adaptive(_clean(g), 0.0, 1.0, 1e-9)
    expect = math.atan(0.7 / w) + math.atan(0.3 / w)
    assert abs(res.value - expect) < 1e-8


def test_depth_cap_raises_with_panel_location():
    def nasty(x):
        return np.where(x > 0.123456, 1.0, -1.0) / np.sqrt(
            np.abs(x - 0.123456) + 1e-300), np.zeros_like(x)

    with pytest.raises(ConvergenceError) as ei:
        integrate_adaptive(nasty, 0.0, 1.0, 1e-14, max_depth=6)
    assert "panel [" in str(ei.value)


def test_integrand_error_propagates():
    # constant reported evaluation error c integrates to ~c * length
    c = 1e-6

    def f(x):
        return np.ones_like(x), np.full_like(x, c)

    res = integrate_adaptive(f, 0.0, 2.0, 1e-12)
    assert res.integrand_error == pytest.approx(2 * c, rel=1e-6)


def test_piecewise_splits_at_breakpoints():
    def f(x):
        return np.abs(x - 0.5), np.zeros_like(x)

    res = integrate_piecewise(f, [0.0, 0.5, 1.0], 1e-12)
    assert abs(res.value - 0.25) < 1e-13


def test_piecewise_handles_duplicates_and_order():
    res = integrate_piecewise(_clean(np.cos), [1.0, 0.0, 1.0, 0.5], 1e-12)
    assert abs(res.value - math.sin(1.0)) < 1e-12


def test_kronrod_panel_components():
    k15, err, ie = kronrod_panel(_clean(lambda x: x**2), 0.0, 1.0)
    assert abs(k15 - 1 / 3) < 1e-15
    assert err >= 0 and ie == 0.0
