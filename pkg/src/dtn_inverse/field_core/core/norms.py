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

"""Discrete norms of grid fields.

The W^{k,inf} and H^k norms are grid surrogates built from the same
difference stencils as the operators. H^-1 is evaluated on the periodic
part of the samples (the last node of every axis dropped).
"""

import numpy as np

from dtn_inverse.field_core.core.operators import partial
from dtn_inverse.field_core.core.quadrature import node_weights, time_weights
from dtn_inverse.field_core.models import (
    CurlField,
    FieldModel,
    Grid,
    NormId,
    ScalarField,
    ScalarSpaceTimeField,
    VectorField,
)

__all__ = ["UnknownNormError", "discrete_norm"]


class UnknownNormError(ValueError):
    """Raised when a norm identifier is not supported."""

    def __init__(self, *, norm_id: object):
        supported = ", ".join(item.value for item in NormId)
        super().__init__(f"Unknown norm {norm_id!r}, expected one of: {supported}")


def _unpack(
    field: FieldModel | np.ndarray, grid: Grid | None
) -> tuple[np.ndarray, Grid]:
    """Return samples shaped (components, [time,] spatial...) and the grid."""
    match field:
        case VectorField():
            return field.components, field.grid
        case CurlField():
            return field.upper(), field.grid
        case ScalarField() | ScalarSpaceTimeField():
            return field.values[None], field.grid
        case np.ndarray():
            if grid is None:
                raise ValueError("A grid is needed to measure a bare array")
            return field[None], grid
    raise TypeError(f"Cannot measure an object of type {type(field).__name__}")


def _weights(values: np.ndarray, grid: Grid) -> np.ndarray:
    weights = node_weights(grid)
    if values.ndim - 1 > grid.n:
        weights = time_weights(grid).reshape((-1,) + (1,) * grid.n) * weights
    return weights


def _l2_squared(values: np.ndarray, grid: Grid) -> float:
    return float(np.sum(_weights(values, grid) * np.abs(values) ** 2))


def _derivatives(values: np.ndarray, grid: Grid) -> list[np.ndarray]:
    return [partial(values, grid, axis) for axis in range(grid.n)]


def _sobolev_squared(values: np.ndarray, grid: Grid, order: int) -> float:
    total = _l2_squared(values, grid)
    layer = [values]
    for _ in range(order):
        layer = [d for item in layer for d in _derivatives(item, grid)]
        total += sum(_l2_squared(item, grid) for item in layer)
    return total


def _hminus1_squared(values: np.ndarray, grid: Grid) -> float:
    space_time = values.ndim - 1 > grid.n
    periodic = values[(slice(None),) + (slice(0, -1),) * (values.ndim - 1)]
    axes = tuple(range(1, periodic.ndim))
    count = np.prod([periodic.shape[axis] for axis in axes])
    coefficients = np.fft.fftn(periodic, axes=axes) / count
    frequencies = [2 * np.pi * np.fft.fftfreq(grid.n_x, d=grid.h)] * grid.n
    volume = 1.0
    if space_time:
        frequencies = [2 * np.pi * np.fft.fftfreq(grid.n_t, d=grid.dt), *frequencies]
        volume = grid.horizon
    squares = np.meshgrid(*[freq**2 for freq in frequencies], indexing="ij")
    weight = 1.0 / (1.0 + sum(squares))
    return float(volume * np.sum(weight[None] * np.abs(coefficients) ** 2))


def discrete_norm(
    field: FieldModel | np.ndarray,
    norm_id: NormId | str,
    grid: Grid | None = None,
) -> float:
    """Measure a field in one of the supported discrete norms.

    Bare arrays need the grid and are read as spatial samples when they
    have n axes and as space-time samples when they have n + 1 axes.
    Space-time samples are measured in L^2 in time for the Sobolev norms
    and over the whole space-time box for H^-1.
    """
    try:
        norm = NormId(norm_id)
    except ValueError as error:
        raise UnknownNormError(norm_id=norm_id) from error

    values, grid = _unpack(field, grid)
    if values.size == 0 or not np.any(values):
        return 0.0

    match norm:
        case NormId.L2:
            return float(np.sqrt(_l2_squared(values, grid)))
        case NormId.LINF:
            return float(np.max(np.abs(values)))
        case NormId.W1INF:
            derivative_max = max(
                float(np.max(np.abs(d))) for d in _derivatives(values, grid)
            )
            return max(float(np.max(np.abs(values))), derivative_max)
        case NormId.H1:
            return float(np.sqrt(_sobolev_squared(values, grid, 1)))
        case NormId.H2:
            return float(np.sqrt(_sobolev_squared(values, grid, 2)))
        case NormId.HMINUS1:
            return float(np.sqrt(_hminus1_squared(values, grid)))
    raise UnknownNormError(norm_id=norm_id)
