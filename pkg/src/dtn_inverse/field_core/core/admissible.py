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

"""Admissible magnetic potentials built from smooth bumps."""

import logging
from collections.abc import Sequence

import numpy as np

from dtn_inverse.field_core.core.operators import partial
from dtn_inverse.field_core.models import BumpSpec, Grid, VectorField

__all__ = ["AdmissibilityError", "bump_profile", "make_admissible_potential"]

log = logging.getLogger(__name__)

# max of |d/dr (1 - r^2)^4|, reached at r = 1/sqrt(7)
_PROFILE_SLOPE = 8 / np.sqrt(7) * (6 / 7) ** 3


class AdmissibilityError(ValueError):
    """Raised when a coefficient would not vanish near the boundary."""

    def __init__(self, *, bump: BumpSpec, details: str):
        super().__init__(
            f"Bump at {bump.center} with radius {bump.radius} is not admissible:"
            f" {details}"
        )


def bump_profile(grid: Grid, bump: BumpSpec) -> np.ndarray:
    """Nodal values of (1 - |x - c|^2 / R^2)^4 inside the ball, zero outside."""
    center = np.asarray(bump.center, dtype=float).reshape((-1,) + (1,) * grid.n)
    scaled = np.sum((grid.mesh() - center) ** 2, axis=0) / bump.radius**2
    return np.where(scaled < 1.0, (1.0 - scaled) ** 4, 0.0)


def _check_bump(grid: Grid, bump: BumpSpec, divergence_free: bool) -> None:
    if len(bump.center) != grid.n:
        raise AdmissibilityError(bump=bump, details=f"center is not in R^{grid.n}")
    margin = 2 * grid.h
    center = np.asarray(bump.center)
    if np.any(center - bump.radius <= margin) or np.any(
        center + bump.radius >= 1.0 - margin
    ):
        raise AdmissibilityError(
            bump=bump, details=f"support comes within {margin} of the boundary"
        )
    if divergence_free:
        j, k = bump.plane
        if j == k or not (0 <= j < grid.n and 0 <= k < grid.n):
            raise AdmissibilityError(bump=bump, details=f"invalid plane {bump.plane}")
    elif bump.direction is not None and (
        len(bump.direction) != grid.n or not np.any(bump.direction)
    ):
        raise AdmissibilityError(bump=bump, details="invalid direction")


def make_admissible_potential(
    grid: Grid, recipe: Sequence[BumpSpec], *, divergence_free: bool = False
) -> VectorField:
    """Sum the bumps of the recipe into a compactly supported potential.

    Plain bumps contribute amplitude * profile * direction (the first axis
    when no direction is given), so |A| peaks at the amplitude. With
    `divergence_free` each bump instead defines a stream function psi in its
    plane (j, k) and contributes A_j = D_k psi, A_k = -D_j psi with the grid's
    central differences, so the discrete divergence cancels identically.
    """
    components = np.zeros((grid.n, *grid.shape))
    for bump in recipe:
        _check_bump(grid, bump, divergence_free)
        profile = bump_profile(grid, bump)
        if divergence_free:
            j, k = bump.plane
            stream = bump.amplitude * bump.radius / _PROFILE_SLOPE * profile
            components[j] += partial(stream, grid, k)
            components[k] -= partial(stream, grid, j)
        else:
            direction = np.zeros(grid.n)
            if bump.direction is None:
                direction[0] = 1.0
            else:
                direction = np.asarray(bump.direction, dtype=float)
                direction /= np.linalg.norm(direction)
            components += bump.amplitude * direction.reshape(
                (-1,) + (1,) * grid.n
            ) * profile
    log.debug(
        "Built potential from %d bumps (divergence free: %s)",
        len(recipe),
        divergence_free,
    )
    return VectorField(grid=grid, components=components)
