"""Shared report types for fitted quantities.

Fits here are diagnostics over computed data. Nothing in a FitReport is a
proved statement, and consumers are expected to surface the flags verbatim.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import ValidationError


@dataclass
class FitReport:
    exponent: float
    intercept: float
    residuals: list
    inputs: tuple          # (grid, values) as given
    r_squared: float
    flags: list = field(default_factory=list)
    metadata: dict = field(default_factory=dict)


def power_law_fit(grid, values, min_points: int = 3,
                  flags: list | None = None) -> FitReport:
    """Least squares of log(values) against log(grid).

    exponent is the slope; callers negate or shift per their convention.
    """
    g = np.asarray(grid, dtype=np.float64)
    v = np.asarray(values, dtype=np.float64)
    if g.size != v.size:
        raise ValidationError(f"grid and values differ in length: {g.size} vs {v.size}")
    if g.size < min_points:
        raise ValidationError(f"fit needs >= {min_points} points, got {g.size}")
    if np.any(g <= 0) or np.any(v <= 0):
        raise ValidationError("power-law fit needs strictly positive grid and values")
    lx = np.log(g)
    ly = np.log(v)
    A = np.vstack([lx, np.ones_like(lx)]).T
    (slope, intercept), *_ = np.linalg.lstsq(A, ly, rcond=None)
    pred = slope * lx + intercept
    resid = ly - pred
    ss_res = float(np.sum(resid ** 2))
    ss_tot = float(np.sum((ly - ly.mean()) ** 2))
    r2 = 1.0 - ss_res / ss_tot if ss_tot > 0 else 1.0
    return FitReport(
        exponent=float(slope),
        intercept=float(intercept),
        residuals=resid.tolist(),
        inputs=(g.tolist(), v.tolist()),
        r_squared=r2,
        flags=list(flags or []),
    )
