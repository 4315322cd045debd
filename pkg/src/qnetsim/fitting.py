"""Scaling-law regression: log-log power fits, region/piecewise analysis,
power-vs-exponential model selection, and the constant-offset power law.

All logarithms are natural. The exponent of Y = C * N^beta comes from least
squares on (ln N, ln Y); information criteria use the Gaussian likelihood of
the log-residuals with k = 3 (intercept, slope, residual variance).
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np
from scipy.optimize import curve_fit

from .errors import FitError

REGION_SETS = {
    "low": frozenset({8, 16, 32}),
    "mid": frozenset({32, 64, 128}),
}
HIGH_MIN = 128
MODEL_PARAMS = 3  # alpha, beta, residual variance
_ZERO_VAR = 1e-24


@dataclass(frozen=True)
class FitResult:
    alpha: float
    beta: float
    r_squared: float
    region: str
    model: str
    aic: float
    bic: float
    points: int
    degenerate: bool = False


def region_filter(points: Sequence[tuple[float, float]], region: str) -> list[tuple[float, float]]:
    if region == "all":
        sel = list(points)
    elif region == "high":
        sel = [(n, y) for n, y in points if n >= HIGH_MIN]
    elif region in REGION_SETS:
        marks = REGION_SETS[region]
        sel = [(n, y) for n, y in points if n in marks]
    else:
        raise FitError(f"unknown region {region!r}")
    if not sel:
        raise FitError(f"region {region!r} is empty for this data")
    return sel


def _validate(points: Sequence[tuple[float, float]], minimum: int) -> tuple[np.ndarray, np.ndarray]:
    if len(points) < minimum:
        raise FitError(f"need at least {minimum} points, got {len(points)}")
    n = np.asarray([p[0] for p in points], dtype=float)
    y = np.asarray([p[1] for p in points], dtype=float)
    if np.any(y <= 0):
        raise FitError("all Y values must be positive for log-space fits")
    if np.any(n <= 0):
        raise FitError("all N values must be positive")
    return n, y


def _linfit(x: np.ndarray, ly: np.ndarray) -> tuple[float, float, float, float, bool]:
    """Least squares ly = alpha + beta x; returns (alpha, beta, r2, loglik, degenerate)."""
    m = len(x)
    design = np.column_stack([np.ones(m), x])
    coef, *_ = np.linalg.lstsq(design, ly, rcond=None)
    alpha, beta = float(coef[0]), float(coef[1])
    resid = ly - design @ coef
    ss_res = float(resid @ resid)
    ss_tot = float(np.sum((ly - ly.mean()) ** 2))
    degenerate = ss_tot < _ZERO_VAR
    if degenerate:
        # zero-variance data: perfect fit by convention, flagged
        r2 = 1.0
    else:
        r2 = 1.0 - ss_res / ss_tot
    sigma2 = max(ss_res / m, _ZERO_VAR)
    loglik = -0.5 * m * (math.log(2 * math.pi * sigma2) + 1.0)
    return alpha, beta, r2, loglik, degenerate


def _criteria(loglik: float, m: int) -> tuple[float, float]:
    aic = 2 * MODEL_PARAMS - 2 * loglik
    bic = MODEL_PARAMS * math.log(m) - 2 * loglik
    return aic, bic


def fit_power_law(
    points: Sequence[tuple[float, float]], region: str = "all"
) -> FitResult:
    """ln Y = alpha + beta ln N on the selected region (>= 3 points)."""
    sel = region_filter(points, region)
    n, y = _validate(sel, 3)
    alpha, beta, r2, loglik, degen = _linfit(np.log(n), np.log(y))
    aic, bic = _criteria(loglik, len(n))
    return FitResult(alpha, beta, r2, region, "power_law", aic, bic, len(n), degen)


def fit_exponential(
    points: Sequence[tuple[float, float]], region: str = "all"
) -> FitResult:
    """ln Y = alpha + beta N (exponential growth model)."""
    sel = region_filter(points, region)
    n, y = _validate(sel, 3)
    alpha, beta, r2, loglik, degen = _linfit(n, np.log(y))
    aic, bic = _criteria(loglik, len(n))
    return FitResult(alpha, beta, r2, region, "exponential", aic, bic, len(n), degen)


@dataclass(frozen=True)
class PiecewiseFit:
    below: FitResult
    above: FitResult
    combined_r_squared: float
    breakpoint: float


def fit_piecewise(points: Sequence[tuple[float, float]], breakpoint_n: float) -> PiecewiseFit:
    """Independent power laws below and at/above the breakpoint."""
    n_all, _ = _validate(points, 2)
    if breakpoint_n <= float(n_all.min()) or breakpoint_n > float(n_all.max()):
        raise FitError(f"breakpoint {breakpoint_n} outside data range")
    lo = [(n, y) for n, y in points if n < breakpoint_n]
    hi = [(n, y) for n, y in points if n >= breakpoint_n]
    if len(lo) < 3 or len(hi) < 3:
        raise FitError("need at least 3 points on each side of the breakpoint")
    below = fit_power_law(lo, "all")
    above = fit_power_law(hi, "all")
    # pooled residuals against the pooled mean of ln Y
    ly = np.log([y for _, y in points])
    ss_tot = float(np.sum((ly - ly.mean()) ** 2))
    ss_res = 0.0
    for subset, fit in ((lo, below), (hi, above)):
        ln = np.log([n for n, _ in subset])
        lys = np.log([y for _, y in subset])
        ss_res += float(np.sum((lys - (fit.alpha + fit.beta * ln)) ** 2))
    combined = 1.0 if ss_tot < _ZERO_VAR else 1.0 - ss_res / ss_tot
    return PiecewiseFit(below, above, combined, breakpoint_n)


@dataclass(frozen=True)
class ModelComparison:
    power: FitResult
    exponential: FitResult
    delta_aic: float  # power - exponential; negative prefers the power law
    delta_bic: float
    preferred: str


def compare_models(points: Sequence[tuple[float, float]], region: str = "all") -> ModelComparison:
    """Power law vs exponential by information criteria (>= 4 points)."""
    sel = region_filter(points, region)
    _validate(sel, 4)
    power = fit_power_law(sel, "all")
    expo = fit_exponential(sel, "all")
    delta_aic = power.aic - expo.aic
    delta_bic = power.bic - expo.bic
    preferred = "power_law" if delta_aic <= 0 else "exponential"
    return ModelComparison(power, expo, delta_aic, delta_bic, preferred)


@dataclass(frozen=True)
class ConstPlusPowerFit:
    a: float
    b: float
    k: float
    r_squared: float
    converged: bool
    degenerate: bool = False


def fit_const_plus_power(points: Sequence[tuple[float, float]]) -> ConstPlusPowerFit:
    """Nonlinear fit Y = a + b N^k, grid-seeded over k then locally refined."""
    n, y = _validate(points, 4)
    if float(np.var(y)) < _ZERO_VAR:
        # constant data: k is unidentifiable
        return ConstPlusPowerFit(float(y.mean()), 0.0, 0.0, 1.0, True, degenerate=True)

    def sse_for(k: float) -> tuple[float, float, float]:
        design = np.column_stack([np.ones_like(n), n**k])
        coef, *_ = np.linalg.lstsq(design, y, rcond=None)
        resid = y - design @ coef
        return float(resid @ resid), float(coef[0]), float(coef[1])

    grid = np.arange(0.5, 4.0 + 1e-9, 0.5)
    best = min((sse_for(k) + (k,) for k in grid), key=lambda t: t[0])
    _, a0, b0, k0 = best

    def model(nn, a, b, k):
        return a + b * np.power(nn, k)

    converged = True
    try:
        popt, _ = curve_fit(
            model, n, y, p0=[a0, b0, k0], maxfev=20000, bounds=([-np.inf, -np.inf, 0.0], [np.inf, np.inf, 10.0])
        )
        a, b, k = (float(v) for v in popt)
    except RuntimeError:
        a, b, k = a0, b0, k0
        converged = False
    resid = y - model(n, a, b, k)
    ss_res = float(resid @ resid)
    ss_tot = float(np.sum((y - y.mean()) ** 2))
    r2 = 1.0 - ss_res / ss_tot
    return ConstPlusPowerFit(a, b, k, r2, converged)


def weighted_power_fit(
    points: Sequence[tuple[float, float]], sigmas: Sequence[float], region: str = "all"
) -> FitResult:
    """Optional 1/sigma^2-weighted variant of the log-log fit."""
    sel = region_filter(points, region)
    n, y = _validate(sel, 3)
    sig = np.asarray(sigmas, dtype=float)
    if len(sig) != len(points):
        raise FitError("need one sigma per point")
    sig = np.asarray([s for (p, s) in zip(points, sig) if p in sel])
    if np.any(sig <= 0):
        raise FitError("sigmas must be positive")
    w = 1.0 / sig**2
    x, ly = np.log(n), np.log(y)
    design = np.column_stack([np.ones_like(x), x])
    wsqrt = np.sqrt(w)
    coef, *_ = np.linalg.lstsq(design * wsqrt[:, None], ly * wsqrt, rcond=None)
    alpha, beta = float(coef[0]), float(coef[1])
    resid = ly - design @ coef
    ss_res = float(resid @ resid)
    ss_tot = float(np.sum((ly - ly.mean()) ** 2))
    r2 = 1.0 if ss_tot < _ZERO_VAR else 1.0 - ss_res / ss_tot
    m = len(x)
    sigma2 = max(ss_res / m, _ZERO_VAR)
    loglik = -0.5 * m * (math.log(2 * math.pi * sigma2) + 1.0)
    aic, bic = _criteria(loglik, m)
    return FitResult(alpha, beta, r2, region, "power_law", aic, bic, m)


def envelope_power_fits(
    points: Sequence[tuple[float, float]], sigmas: Sequence[float], region: str = "all"
) -> tuple[FitResult, FitResult]:
    """Fits of mean-sigma and mean+sigma (exponent envelope)."""
    lower = [(n, max(y - s, 1e-12)) for (n, y), s in zip(points, sigmas)]
    upper = [(n, y + s) for (n, y), s in zip(points, sigmas)]
    return fit_power_law(lower, region), fit_power_law(upper, region)
