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

"""Test the curve fits."""

import math

import numpy as np
import pytest

from dtn_inverse.harness.core.fitting import (
    FitError,
    fit_log_power,
    fit_log_slope,
    fit_stability_shape,
    fit_triple_log,
)

ETAS = [10.0**-k for k in range(1, 9)]


def test_log_slope_of_exact_power_laws():
    """Test slope, intercept and R^2 of exact power laws."""
    xs = [1.0, 2.0, 4.0, 8.0]
    fit = fit_log_slope(xs, [1 / x for x in xs])
    assert fit.slope == pytest.approx(-1.0)
    assert fit.r_squared == pytest.approx(1.0)

    fit = fit_log_slope(xs, [3 * x**2 for x in xs])
    assert fit.slope == pytest.approx(2.0)
    assert fit.intercept == pytest.approx(math.log(3.0))


def test_log_slope_with_noise():
    """Test that a seeded perturbation keeps the slope close."""
    rng = np.random.default_rng(7)
    xs = np.geomspace(1, 100, 20)
    ys = xs**-1.5 * np.exp(0.01 * rng.standard_normal(20))
    fit = fit_log_slope(xs, ys)
    assert fit.slope == pytest.approx(-1.5, abs=0.02)
    assert fit.r_squared > 0.99


@pytest.mark.parametrize(
    "xs, ys",
    [
        ([1.0, 2.0], [1.0, 2.0]),
        ([1.0, 2.0, 3.0], [1.0, 2.0]),
        ([1.0, 2.0, 3.0], [1.0, -2.0, 3.0]),
        ([1.0, 2.0, math.nan], [1.0, 2.0, 3.0]),
        ([2.0, 2.0, 2.0], [1.0, 2.0, 3.0]),
    ],
    ids=["too_few", "shape", "negative", "nan", "constant"],
)
def test_log_slope_rejects(xs, ys):
    """Test the data a log-log fit refuses."""
    with pytest.raises(FitError):
        fit_log_slope(xs, ys)


def test_log_power():
    """Test that |log eta|^(-2) gives the exponent -2."""
    errors = [abs(math.log(eta)) ** -2 for eta in ETAS]
    fit = fit_log_power(ETAS, errors)
    assert fit.slope == pytest.approx(-2.0)
    assert fit.r_squared == pytest.approx(1.0)


def test_noise_levels_must_lie_in_the_unit_interval():
    """Test that every shape fit rejects eta outside (0, 1)."""
    etas = [0.5, 1.0, 2.0]
    for fit in (fit_log_power, fit_triple_log, fit_stability_shape):
        with pytest.raises(FitError):
            fit(etas, [1.0, 2.0, 3.0])


def test_stability_shape():
    """Test a fit of a smooth curve of the fitted family."""
    etas = np.asarray(ETAS)
    errors = 0.5 * np.sqrt(etas) + 2.0 * np.abs(np.log(etas)) ** -1.5
    fit = fit_stability_shape(etas, errors)
    assert min(fit.a, fit.b, fit.c) >= 0
    assert fit.r_squared > 0.99


def test_triple_log_of_an_exact_line():
    """Test R^2 = 1 for errors linear in the triple logarithm."""
    etas = [1e-2, 1e-4, 1e-8, 1e-16]
    errors = [
        0.1 + 1 / abs(math.log(abs(math.log(abs(math.log(eta)))))) for eta in etas
    ]
    assert fit_triple_log(etas, errors) == pytest.approx(1.0)
