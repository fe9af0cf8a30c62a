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

"""Inverse of the complex transport operator N_omega = omega . grad.

The inverse is the Cauchy-type convolution

    phi(x) = 1/(2 pi) int_R2 g(x - y1 omega_R - y2 omega_I) / (y1 + i y2) dy,

evaluated in polar coordinates y = r (cos t, sin t), where the Jacobian
cancels the singular kernel:

    phi(x) = 1/(2 pi) int_0^diam int_0^2pi e^{-it} g(x - r(cos t omega_R
             + sin t omega_I)) dt dr.
"""

import logging
from typing import Annotated

import numpy as np
from pydantic import Field
from pydantic_settings import BaseSettings
from scipy import ndimage

from dtn_inverse.field_core.core.operators import interior_slices, partial
from dtn_inverse.field_core.core.quadrature import node_weights
from dtn_inverse.field_core.models import Grid, VectorField
from dtn_inverse.transport.models import (
    CancellationCheck,
    ComplexDirection,
    PhaseField,
)

__all__ = ["TransportConfig", "TransportOperator"]

log = logging.getLogger(__name__)


class TransportConfig(BaseSettings):
    """Configuration parameters for the polar quadrature of the transport inverse."""

    transport_angles: Annotated[
        int,
        Field(ge=8, le=1024, description="Number of angular quadrature nodes"),
    ] = 64
    transport_radial_step: Annotated[
        float,
        Field(
            gt=0,
            le=1,
            description="Radial quadrature step as a fraction of the grid spacing",
        ),
    ] = 0.5


class TransportOperator:
    """Evaluates N_omega^{-1} and the identities built on it."""

    class SupportError(ValueError):
        """Raised when a source does not vanish on the boundary of the cube."""

        def __init__(self, *, boundary_max: float):
            super().__init__(
                f"Transport source is not compactly supported in the cube:"
                f" max |g| on the boundary is {boundary_max:.3e}"
            )

    class FrameOrthogonalityError(ValueError):
        """Raised when a frequency is not orthogonal to the direction."""

        def __init__(self, *, defect: float):
            super().__init__(
                f"Frequency is not orthogonal to the complex direction"
                f" (defect {defect:.3e})"
            )

    def __init__(self, config: TransportConfig):
        self._config = config

    def _angles(self) -> np.ndarray:
        count = self._config.transport_angles
        return 2 * np.pi * np.arange(count) / count

    def _radii(self, grid: Grid) -> tuple[np.ndarray, float]:
        step = self._config.transport_radial_step * grid.h
        count = int(np.ceil(np.sqrt(grid.n) / step))
        return (np.arange(count) + 0.5) * step, step

    def transport_residual_of(
        self,
        values: np.ndarray,
        target: np.ndarray,
        direction: ComplexDirection,
        grid: Grid,
    ) -> float:
        """max |omega . grad(values) - target| over the interior nodes."""
        derivative = sum(
            component * partial(values, grid, axis)
            for axis, component in enumerate(direction.vector)
        )
        inner = interior_slices(values, grid)
        return float(np.max(np.abs(derivative - target)[inner], initial=0.0))

    def n_omega_inverse(
        self, direction: ComplexDirection, source: np.ndarray, grid: Grid
    ) -> PhaseField:
        """Apply the inverse transport operator to a compactly supported source.

        May raise a SupportError.
        """
        source = np.asarray(source, dtype=complex)
        if source.shape != grid.shape:
            raise ValueError(f"Source of shape {source.shape} does not fit {grid}")
        boundary_max = float(np.max(np.abs(source[grid.boundary_mask()])))
        if boundary_max > 0:
            raise self.SupportError(boundary_max=boundary_max)

        values = np.zeros(grid.shape, dtype=complex)
        source_max = float(np.max(np.abs(source)))
        if source_max == 0:
            return PhaseField(
                grid=grid,
                direction=direction,
                values=values,
                source=source,
                residual=0.0,
                bound_ratio=float("nan"),
            )

        angles = self._angles()
        radii, step = self._radii(grid)
        # unit vectors of the disk spanned by omega_R, omega_I, in node units
        offsets = (
            np.outer(np.cos(angles), direction.real)
            + np.outer(np.sin(angles), direction.imag)
        ) / grid.h
        weights = np.exp(-1j * angles)
        nodes = np.indices(grid.shape, dtype=float)
        expand = (slice(None), slice(None)) + (None,) * grid.n
        for radius in radii:
            coordinates = nodes[None] - radius * offsets[expand]
            coordinates = np.moveaxis(coordinates, 1, 0)
            sampled = np.zeros((len(angles), *grid.shape), dtype=complex)
            for part, factor in ((source.real, 1.0), (source.imag, 1j)):
                if not np.any(part):
                    continue
                sampled += factor * ndimage.map_coordinates(
                    part, coordinates, order=1, mode="grid-constant", cval=0.0
                )
            values += step * np.tensordot(weights, sampled, axes=1)
        values /= len(angles)

        residual = self.transport_residual_of(values, source, direction, grid)
        log.debug("Transport inverse residual %.3e", residual)
        return PhaseField(
            grid=grid,
            direction=direction,
            values=values,
            source=source,
            residual=residual,
            bound_ratio=float(np.max(np.abs(values))) / source_max,
        )

    def transport_residual(
        self, phase: PhaseField, field: VectorField, direction: ComplexDirection
    ) -> float:
        """max |omega . grad(phi) + omega . A| over the interior nodes."""
        return self.transport_residual_of(
            phase.values, -direction.apply(field.components), direction, field.grid
        )

    def phase_cancellation_check(
        self, field: VectorField, direction: ComplexDirection, xi: np.ndarray
    ) -> CancellationCheck:
        """Compare int omega.A e^{i phi} e^{i x.xi} with int omega.A e^{i x.xi}.

        The phase is phi = N_omega^{-1}(-omega . A).

        May raise a FrameOrthogonalityError.
        """
        grid = field.grid
        xi = np.asarray(xi, dtype=float)
        defect = max(
            abs(float(xi @ np.asarray(direction.real))),
            abs(float(xi @ np.asarray(direction.imag))),
        )
        if defect > 1e-10 * max(1.0, float(np.linalg.norm(xi))):
            raise self.FrameOrthogonalityError(defect=defect)

        projected = direction.apply(field.components)
        phase = self.n_omega_inverse(direction, -projected, grid)
        wave = np.exp(1j * np.tensordot(xi, grid.mesh(), axes=1))
        weights = node_weights(grid)
        rhs = complex(np.sum(weights * projected * wave))
        lhs = complex(np.sum(weights * projected * np.exp(1j * phase.values) * wave))
        return CancellationCheck(lhs=lhs, rhs=rhs, gap=abs(lhs - rhs))
