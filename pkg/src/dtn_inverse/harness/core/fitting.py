# Copyright 2021 - 2024 Universität Tübingen, DKFZ, EMBL, and Universität zu Köln
# for the German Human Genome-Phenome Archive (GHGA)
#
# Licensed under the Apache License, Version 2.0 (the "License");
# you may not use this file except in compliance with the License.
# You may obtain a copy of the License at
#
#     http://www.apache.org/licenses/LICENSE-2.0
#
# Unless required by applicable law or agreed to in writing, software
# distributed under the License is distributed on an "AS IS" BASIS,
# WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
# See the License for the specific language governing permissions and
# limitations under the License.

"""Regression helpers for decay rates and stability shapes."""

import logging
import math
from collections.abc import Sequence
from typing import NamedTuple

import numpy as np
from scipy import optimize, stats

__all__ = [
    "FitError",
    "LogSlopeFit",
    "StabilityFit",
    "fit_log_power",
    "fit_log_slope",
    "fit_stability_shape",
    "fit_triple_log",
]

log = logging.getLogger(__name__)

MIN_POINTS = 3


class FitError(ValueError):
    """Raised when data cannot be fitted."""

    def __init__(self, *, details: str):
        super().__init__(f"Cannot fit data: {details}")


class LogSlopeFit(NamedTuple):
    """Least squares line through (log x, log y)."""

    slope: float
    intercept: float
    r_squared: float


class StabilityFit(NamedTuple):
    """Parameters of a eta^(1/2) + b |log eta|^(-c) and its fit quality."""

    a: float
    b: float
    c: float
    r_squared: float


def _checked(xs: Sequence[float], ys: Sequence[float]) -> tuple[np.ndarray, np.ndarray]:
    x = np.asarray(xs, dtype=float)
    y = np.asarray(ys, dtype=float)
    if x.shape != y.shape or x.ndim != 1:
        raise FitError(details="xs and ys need the same one-dimensional shape")
    if len(x) < MIN_POINTS:
        raise FitError(details=f"at least {MIN_POINTS} points are needed")
    if not (np.all(np.isfinite(x)) and np.all(np.isfinite(y))):
        raise FitError(details="values must be finite")
    return x, y


def _r_squared(observed: np.ndarray, predicted: np.ndarray) -> float:
    residual = float(np.sum((observed - predicted) ** 2))
    total = float(np.sum((observed - observed.mean()) ** 2))
    if total == 0:
        return 1.0 if residual == 0 else math.nan
    return 1.0 - residual / total


def fit_log_slope(xs: Sequence[float], ys: Sequence[float]) -> LogSlopeFit:
    """Ordinary least squares on (log x, log y).

    May raise a FitError.
    """
    x, y = _checked(xs, ys)
    if np.any(x <= 0) or np.any(y <= 0):
        raise FitError(details="log-log fits need positive values")
    if np.ptp(x) == 0:
        raise FitError(details="xs must not all be equal")
    result = stats.linregress(np.log(x), np.log(y))
    return LogSlopeFit(
        slope=float(result.slope),
        intercept=float(result.intercept),
        r_squared=float(result.rvalue**2),
    )


def fit_stability_shape(
    etas: Sequence[float], errors: Sequence[float]
) -> StabilityFit:
    """Fit errors against a eta^(1/2) + b |log eta|^(-c) with a, b, c >= 0.

    May raise a FitError.
    """
    eta, error = _checked(etas, errors)
    if np.any(eta <= 0) or np.any(eta >= 1):
        raise FitError(details="noise levels must lie in (0, 1)")

    def shape(x: np.ndarray, a: float, b: float, c: float) -> np.ndarray:
        return a * np.sqrt(x) + b * np.abs(np.log(x)) ** (-c)

    start = (max(float(error[0]), 1e-12), max(float(error.max()), 1e-12), 1.0)
    try:
        parameters, _ = optimize.curve_fit(
            shape,
            eta,
            error,
            p0=start,
            bounds=([0.0, 0.0, 0.0], [np.inf, np.inf, 20.0]),
            maxfev=20000,
        )
    except (RuntimeError, ValueError) as failure:
        raise FitError(details=str(failure)) from failure
    a, b, c = (float(p) for p in parameters)
    return StabilityFit(
        a=a, b=b, c=c, r_squared=_r_squared(error, shape(eta, a, b, c))
    )


def fit_triple_log(etas: Sequence[float], errors: Sequence[float]) -> float:
    """R^2 of a linear fit of the errors against |log|log|log eta|||^(-1).

    May raise a FitError.
    """
    eta, error = _checked(etas, errors)
    if np.any(eta <= 0) or np.any(eta >= 1):
        raise FitError(details="noise levels must lie in (0, 1)")
    with np.errstate(divide="ignore", invalid="ignore"):
        inner = np.log(np.abs(np.log(np.abs(np.log(eta)))))
        x = 1.0 / np.abs(inner)
    if not np.all(np.isfinite(x)):
        raise FitError(details="the triple logarithm vanishes at one noise level")
    if np.ptp(x) == 0:
        raise FitError(details="all abscissae coincide")
    result = stats.linregress(x, error)
    return float(result.rvalue**2)


def fit_log_power(etas: Sequence[float], errors: Sequence[float]) -> LogSlopeFit:
    """Fit the errors against |log eta|^(-c), i.e. a line in log-log coordinates.

    May raise a FitError.
    """
    eta, _ = _checked(etas, errors)
    if np.any(eta <= 0) or np.any(eta >= 1):
        raise FitError(details="noise levels must lie in (0, 1)")
    return fit_log_slope(np.abs(np.log(eta)), errors)
