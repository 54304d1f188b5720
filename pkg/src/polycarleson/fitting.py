"""Weighted least squares on log-log data for power-law exponents."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


class FitRefused(RuntimeError):
    pass


@dataclass(frozen=True)
class LogLogFit:
    slope: float
    intercept: float
    slope_stderr: float
    max_abs_residual: float


def loglog_wls(x_values, y_values, y_rel_sigma) -> LogLogFit:
    """Fit log y = intercept + slope * log x, weighting by relative errors.

    ``y_rel_sigma`` is sigma(y)/y per point, which is the standard deviation of
    log y to first order.  Zero sigmas (deterministic values) get a uniform
    tiny weight floor so exact data still fits.
    """
    x = np.log(np.asarray(x_values, dtype=float))
    y = np.log(np.asarray(y_values, dtype=float))
    s = np.asarray(y_rel_sigma, dtype=float)
    if x.shape != y.shape or x.shape != s.shape:
        raise ValueError("mismatched fit inputs")
    if len(x) < 2:
        raise FitRefused("need at least two points to fit a slope")
    s = np.maximum(s, 1e-12)
    w = 1.0 / (s * s)
    xbar = np.sum(w * x) / np.sum(w)
    ybar = np.sum(w * y) / np.sum(w)
    sxx = np.sum(w * (x - xbar) ** 2)
    if sxx <= 0:
        raise FitRefused("degenerate abscissa grid")
    slope = float(np.sum(w * (x - xbar) * (y - ybar)) / sxx)
    intercept = float(ybar - slope * xbar)
    resid = y - (intercept + slope * x)
    return LogLogFit(
        slope=slope,
        intercept=intercept,
        slope_stderr=float(1.0 / np.sqrt(sxx)),
        max_abs_residual=float(np.max(np.abs(resid))),
    )
