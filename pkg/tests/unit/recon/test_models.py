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

"""Test the validation of reconstruction samples and cones."""

import numpy as np
import pytest
from pydantic import ValidationError

from dtn_inverse.field_core.models import ScalarSpaceTimeField, VectorField
from dtn_inverse.recon.models import (
    CoefficientPair,
    CurlSample,
    FourierSampleSet,
    FrequencyCone,
    QSample,
    QSampleSet,
)
from tests.fixtures.fields import make_grid

TWO_PI = 2 * np.pi


def curl_sample(xi, pair=(0, 1), value: complex = 1 + 1j) -> CurlSample:
    """A curl sample with placeholder diagnostics."""
    return CurlSample(
        xi=xi,
        pair=pair,
        value=value,
        sigma=8.0,
        directional=(0j, 0j),
        time_weight=1.0,
        probe_norms=(1.0, 1.0),
    )


def q_sample(xi, tau: float, value: complex = 1.0) -> QSample:
    """A q sample with the y belonging to (xi, tau)."""
    xi = np.asarray(xi, dtype=float)
    return QSample(
        xi=tuple(xi),
        tau=tau,
        y=tuple(tau * xi / (2 * xi @ xi)),
        value=value,
        tau_effective=tau,
        sigma=8.0,
        probe_norm=1.0,
    )


def test_coefficient_pair_needs_one_grid():
    """Test that A and q must share the grid."""
    with pytest.raises(ValidationError):
        CoefficientPair(
            potential=VectorField.zeros(make_grid(n_x=8)),
            q=ScalarSpaceTimeField.zeros(make_grid(n_x=10)),
        )


@pytest.mark.parametrize("pair", [(1, 1), (0, 3), (-1, 2)])
def test_curl_sample_rejects_invalid_pairs(pair: tuple[int, int]):
    """Test that the index pair must be distinct and in range."""
    with pytest.raises(ValidationError):
        curl_sample((TWO_PI, 0.0, 0.0), pair=pair)


def test_curl_sample_rejects_non_finite_values():
    """Test that samples must be finite."""
    with pytest.raises(ValidationError):
        curl_sample((TWO_PI, 0.0, 0.0), value=complex(np.nan, 0))


def test_sample_set_radius_and_lookup():
    """Test the radius check and the antisymmetric lookup."""
    xi = (TWO_PI, 0.0, 0.0)
    samples = FourierSampleSet(
        radius=7.0, samples=(curl_sample(xi, (0, 1), 2 - 1j),)
    )
    assert samples.lookup(xi, (0, 1)) == 2 - 1j
    assert samples.lookup(xi, (1, 0)) == -2 + 1j
    assert samples.lookup(xi, (1, 2)) is None
    assert samples.max_abs() == pytest.approx(abs(2 - 1j))
    with pytest.raises(ValidationError):
        FourierSampleSet(radius=6.0, samples=(curl_sample(xi),))


def test_sample_set_defects():
    """Test the antisymmetry and Hermitian defects of a sample set."""
    xi = (TWO_PI, 0.0, 0.0)
    minus = (-TWO_PI, 0.0, 0.0)
    samples = FourierSampleSet(
        radius=7.0,
        samples=(
            curl_sample(xi, (0, 1), 1 + 2j),
            curl_sample(xi, (1, 0), -1 - 2j + 0.5),
            curl_sample(minus, (0, 1), 1 - 2j),
        ),
    )
    assert samples.antisymmetry_defect() == pytest.approx(0.5)

    mirrored = FourierSampleSet(
        radius=7.0,
        samples=(
            curl_sample(xi, (0, 1), 1 + 2j),
            curl_sample(minus, (0, 1), 1 - 1.5j),
        ),
    )
    assert mirrored.antisymmetry_defect() == 0
    assert mirrored.hermitian_defect() == pytest.approx(0.5)


def test_q_sample_y_formula():
    """Test that xi = (0, 0, 1) and tau = 1 give y = (0, 0, 1/2)."""
    sample = q_sample((0.0, 0.0, 1.0), 1.0)
    np.testing.assert_allclose(sample.y, (0.0, 0.0, 0.5))
    assert 2 * np.dot(sample.y, sample.xi) == pytest.approx(sample.tau)


@pytest.mark.parametrize(
    "xi, tau, y",
    [
        ((0.0, 0.0, 1.0), 1.0, (0.0, 0.0, 0.4)),
        ((0.0, 0.0, 0.0), 1.0, (0.0, 0.0, 0.0)),
        ((0.0, 0.0, 1.0), 2.5, (0.0, 0.0, 1.25)),
    ],
)
def test_q_sample_rejects_inconsistent_y(xi, tau: float, y):
    """Test that y must match the formula, xi must not vanish and |y| < 1."""
    with pytest.raises(ValidationError):
        QSample(
            xi=xi,
            tau=tau,
            y=y,
            value=0j,
            tau_effective=tau,
            sigma=8.0,
            probe_norm=1.0,
        )


def test_q_sample_set_checks_cone_membership():
    """Test that samples outside the cone of alpha are rejected."""
    QSampleSet(alpha=4.0, samples=(q_sample((TWO_PI, 0.0, 0.0), TWO_PI),))
    with pytest.raises(ValidationError):
        QSampleSet(alpha=3.0, samples=(q_sample((TWO_PI, 0.0, 0.0), TWO_PI),))


def test_q_sample_set_hermitian_defect():
    """Test the Hermitian defect of q samples at opposite points."""
    samples = QSampleSet(
        alpha=4.0,
        samples=(
            q_sample((TWO_PI, 0.0, 0.0), TWO_PI, 1 + 1j),
            q_sample((-TWO_PI, 0.0, 0.0), -TWO_PI, 1 - 0.75j),
        ),
    )
    assert samples.hermitian_defect() == pytest.approx(0.25)


def test_frequency_cone_rejects_outside_points():
    """Test the strict inequalities of the cone."""
    FrequencyCone(alpha=4.0, points=[[TWO_PI, 0.0, 0.0, 0.0]])
    with pytest.raises(ValidationError):
        FrequencyCone(alpha=4.0, points=[[TWO_PI, 0.0, 0.0, 2 * TWO_PI]])
    with pytest.raises(ValidationError):
        FrequencyCone(alpha=4.0, points=[[0.0, 0.0, 0.0, 0.0]])
    assert FrequencyCone(alpha=1.0, points=np.zeros((0, 4))).empty
