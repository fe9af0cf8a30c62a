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

"""Test the parameter rules of the reconstructions."""

import logging
import math

import pytest

from dtn_inverse.recon.core.rules import (
    alpha_for_eta,
    choose_cutoff,
    sequential_map,
    sigma_for_eta,
)


@pytest.mark.parametrize(
    "sigma, n, expected",
    [(128.0, 3, 4.0), (1.0, 3, 1.0), (16.0, 4, 2.0)],
)
def test_choose_cutoff(sigma: float, n: int, expected: float):
    """Test that the cutoff is sigma^(2/(n+4))."""
    assert choose_cutoff(sigma, n) == pytest.approx(expected, rel=1e-14)


@pytest.mark.parametrize("sigma", [0.0, -1.0])
def test_choose_cutoff_rejects_non_positive_sigma(sigma: float):
    """Test that sigma must be positive."""
    with pytest.raises(ValueError):
        choose_cutoff(sigma, 3)


def test_sigma_rule_clips_to_bounds(caplog):
    """Test that sigma = c |log eta| is clipped and that clipping is logged."""
    caplog.set_level(logging.INFO)
    assert sigma_for_eta(0.0, rule=1.0, sigma_min=4.0, sigma_cap=12.0) == 12.0
    assert sigma_for_eta(1e-3, rule=1.0, sigma_min=4.0, sigma_cap=12.0) == (
        pytest.approx(3 * math.log(10))
    )
    assert sigma_for_eta(0.5, rule=1.0, sigma_min=4.0, sigma_cap=12.0) == 4.0
    assert sigma_for_eta(1e-8, rule=1.0, sigma_min=4.0, sigma_cap=12.0) == 12.0
    assert sum("Clamped sigma" in r.getMessage() for r in caplog.records) == 2


def test_alpha_rule_grows_slowly_and_is_capped():
    """Test the iterated logarithm of the alpha rule and its cap."""
    eta = 1e-4
    expected = 8.0 * math.log1p(math.log1p(abs(math.log(eta))))
    assert alpha_for_eta(eta, rule=8.0, fraction=0.9, sigma=100.0) == (
        pytest.approx(expected)
    )
    assert alpha_for_eta(eta, rule=8.0, fraction=0.9, sigma=10.0) == 9.0
    assert alpha_for_eta(0.0, rule=8.0, fraction=0.9, sigma=10.0) == 9.0
    smaller = alpha_for_eta(1e-2, rule=8.0, fraction=0.9, sigma=100.0)
    assert smaller < expected


def test_sequential_map_keeps_order():
    """Test that the sequential map returns the results in input order."""
    assert sequential_map(lambda x: x * x, [3, 1, 2]) == [9, 1, 4]
