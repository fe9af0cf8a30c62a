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

"""Test the difference operators and the admissible potentials."""

import numpy as np
import pytest
from pydantic import ValidationError

from dtn_inverse.field_core.core.admissible import (
    AdmissibilityError,
    make_admissible_potential,
)
from dtn_inverse.field_core.core.gauge import gauge_conjugation_residual
from dtn_inverse.field_core.core.operators import (
    curl,
    divergence,
    gradient,
    laplacian,
    magnetic_laplacian,
)
from dtn_inverse.field_core.models import BumpSpec, CurlField, VectorField
from tests.fixtures.fields import (
    gaussian,
    make_grid,
    sextic_phase,
    solenoidal_pair,
)


def test_empty_recipe():
    """Test that an empty recipe gives the vanishing potential."""
    grid = make_grid()
    field = make_admissible_potential(grid, [])
    assert not np.any(field.components)
    assert field.vanishes_on_boundary()


def test_single_bump():
    """Test the peak value and the support of a single bump."""
    grid = make_grid()
    bump = BumpSpec(center=(0.5, 0.5, 0.5), radius=0.2, amplitude=0.1)
    field = make_admissible_potential(grid, [bump])
    magnitude = np.sqrt(field.squared_magnitude())
    assert magnitude.max() == pytest.approx(0.1, rel=1e-12)
    assert magnitude[8, 8, 8] == pytest.approx(0.1, rel=1e-12)
    distance = np.linalg.norm(grid.mesh() - 0.5, axis=0)
    assert not np.any(magnitude[distance >= 0.2])
    assert field.vanishes_on_boundary()


def test_bump_direction():
    """Test that a plain bump points along its normalized direction."""
    grid = make_grid()
    bump = BumpSpec(
        center=(0.5, 0.5, 0.5), radius=0.2, amplitude=0.2, direction=(0, 3, 4)
    )
    field = make_admissible_potential(grid, [bump])
    np.testing.assert_allclose(
        field.components[:, 8, 8, 8], [0.0, 0.12, 0.16], atol=1e-12
    )


@pytest.mark.parametrize(
    "center, radius",
    [((0.1, 0.5, 0.5), 0.2), ((0.5, 0.5, 0.8), 0.15), ((0.5, 0.5, 0.5), 0.45)],
)
def test_bump_touching_boundary(center, radius):
    """Test that bumps reaching the boundary are rejected."""
    grid = make_grid()
    bump = BumpSpec(center=center, radius=radius)
    with pytest.raises(AdmissibilityError):
        make_admissible_potential(grid, [bump])


def test_divergence_free_recipe():
    """Test that the solenoidal construction has vanishing discrete divergence."""
    grid = make_grid()
    field = solenoidal_pair(grid)
    assert np.abs(field.components).max() > 0.05
    assert np.abs(divergence(field)).max() < 1e-12
    assert field.vanishes_on_boundary()


def test_curl_of_zero():
    """Test that the curl of the zero field vanishes."""
    grid = make_grid()
    assert not np.any(curl(VectorField.zeros(grid)).components)


def test_curl_of_gradient():
    """Test that the discrete curl annihilates discrete gradients in the interior."""
    grid = make_grid()
    mesh = grid.mesh()
    potential = mesh[0] ** 3 * mesh[1] + mesh[1] ** 2 * mesh[2] - mesh[0] * mesh[2]
    field = VectorField(grid=grid, components=gradient(potential, grid))
    result = curl(field)
    inner = (slice(None), slice(None)) + (slice(1, -1),) * 3
    np.testing.assert_allclose(result.components[inner], 0.0, atol=1e-9)


def test_curl_antisymmetry():
    """Test that curls are exactly antisymmetric with a vanishing diagonal."""
    grid = make_grid()
    components = np.random.default_rng(7).normal(size=(3, *grid.shape))
    result = curl(VectorField(grid=grid, components=components))
    matrix = result.components
    assert np.all(matrix + np.swapaxes(matrix, 0, 1) == 0)
    assert not np.any(matrix[[0, 1, 2], [0, 1, 2]])


def test_curl_of_rotation():
    """Test the curl of the rotation field (-x2, x1, 0)."""
    grid = make_grid()
    mesh = grid.mesh()
    components = np.stack([-mesh[1], mesh[0], np.zeros(grid.shape)])
    result = curl(VectorField(grid=grid, components=components))
    np.testing.assert_allclose(result.components[0, 1], 2.0, atol=1e-12)
    np.testing.assert_allclose(result.components[1, 0], -2.0, atol=1e-12)
    np.testing.assert_allclose(result.components[0, 2], 0.0, atol=1e-12)


def test_curl_field_rejects_symmetric_part():
    """Test that matrix fields that are not antisymmetric are rejected."""
    grid = make_grid()
    components = np.ones((3, 3, *grid.shape))
    with pytest.raises(ValidationError):
        CurlField(grid=grid, components=components)


def test_divergence_of_linear_field():
    """Test that div (x1, 0, 0) = 1 on every node."""
    grid = make_grid()
    mesh = grid.mesh()
    components = np.stack([mesh[0], np.zeros(grid.shape), np.zeros(grid.shape)])
    result = divergence(VectorField(grid=grid, components=components))
    np.testing.assert_allclose(result, 1.0, atol=1e-12)


def test_laplacian_of_quadratic():
    """Test that the seven-point Laplacian is exact for quadratics."""
    grid = make_grid()
    mesh = grid.mesh()
    values = np.sum(mesh**2, axis=0)
    result = laplacian(values, grid)
    np.testing.assert_allclose(result[1:-1, 1:-1, 1:-1], 6.0, rtol=1e-10)
    assert not np.any(result[0])


def test_magnetic_laplacian_without_potential():
    """Test that the magnetic Laplacian reduces to the Laplacian for A = 0."""
    grid = make_grid()
    values = gaussian(grid) * (1 + 0.5j)
    result = magnetic_laplacian(values, np.zeros((3, *grid.shape)), grid)
    np.testing.assert_allclose(result, laplacian(values, grid), atol=1e-12)


def test_vector_field_rejects_complex_values():
    """Test that vector potentials must be real."""
    grid = make_grid()
    with pytest.raises(ValidationError):
        VectorField(grid=grid, components=np.zeros((3, *grid.shape), dtype=complex))


def test_gauge_residual_trivial_cases():
    """Test the gauge residual for a vanishing phase or a vanishing state."""
    grid = make_grid()
    field = solenoidal_pair(grid)
    values = gaussian(grid).astype(complex)
    zero_phase = np.zeros(grid.shape)
    assert gauge_conjugation_residual(field, zero_phase, values) == 0.0
    zero_state = np.zeros(grid.shape, dtype=complex)
    assert gauge_conjugation_residual(field, sextic_phase(grid), zero_state) == 0.0


def test_gauge_residual_is_second_order():
    """Test that the gauge residual drops by about four when h is halved."""
    residuals = []
    for n_x in (16, 32):
        grid = make_grid(n_x=n_x)
        field = VectorField.zeros(grid)
        values = gaussian(grid).astype(complex)
        residuals.append(
            gauge_conjugation_residual(field, sextic_phase(grid), values)
        )
    assert residuals[0] > 0
    assert residuals[0] / residuals[1] >= 3
