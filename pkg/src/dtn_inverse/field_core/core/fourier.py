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

"""Fourier transforms at lattice points and band-limited synthesis.

Frequencies of spatial fields are vectors xi, frequencies of space-time
fields are (xi, tau) with tau last. The spatial lattice is 2*pi*Z^n and the
time lattice is (2*pi/T)*Z, both cut at the Nyquist index of the grid.
"""

import itertools

import numpy as np

from dtn_inverse.field_core.core.quadrature import time_weights
from dtn_inverse.field_core.models import Grid

__all__ = [
    "LatticeMismatchError",
    "fourier_transform_at",
    "lattice_indices",
    "space_time_lattice",
    "spatial_lattice",
    "synthesize",
]


class LatticeMismatchError(ValueError):
    """Raised when frequencies do not belong to the lattice of the grid."""

    def __init__(self, *, frequency: tuple[float, ...], details: str):
        super().__init__(f"Frequency {frequency} does not fit the grid: {details}")


def _axis_factors(grid: Grid, space_time: bool) -> list[tuple[np.ndarray, np.ndarray]]:
    """Coordinates and 1D trapezoid weights of every axis (time first)."""
    nodes = grid.nodes()
    spatial = np.full(grid.n_x + 1, grid.h)
    spatial[[0, -1]] /= 2
    factors = [(nodes, spatial)] * grid.n
    if space_time:
        factors = [(grid.times(), time_weights(grid)), *factors]
    return factors


def _reorder(frequency: np.ndarray, space_time: bool) -> np.ndarray:
    # stored as (xi, tau); arrays carry time first
    return np.roll(frequency, 1) if space_time else frequency


def fourier_transform_at(
    values: np.ndarray, grid: Grid, frequencies: np.ndarray
) -> np.ndarray:
    """Trapezoid approximation of the integral of f(x[,t]) e^{-i(x.xi [+ t tau])}.

    Complex frequencies are accepted and evaluate the analytic continuation.
    """
    frequencies = np.atleast_2d(np.asarray(frequencies))
    if not np.iscomplexobj(frequencies):
        frequencies = frequencies.astype(float)
    space_time = values.ndim == grid.n + 1
    factors = _axis_factors(grid, space_time)
    out = np.empty(len(frequencies), dtype=complex)
    for index, frequency in enumerate(frequencies):
        accumulated = values
        for (coords, weights), component in zip(
            factors, _reorder(frequency, space_time), strict=True
        ):
            kernel = weights * np.exp(-1j * coords * component)
            accumulated = np.tensordot(kernel, accumulated, axes=(0, 0))
        out[index] = accumulated
    return out


def synthesize(
    grid: Grid, frequencies: np.ndarray, coefficients: np.ndarray
) -> np.ndarray:
    """Evaluate sum_f c_f e^{i(x.xi_f [+ t tau_f])} / volume on the grid.

    Frequencies with n components give a spatial field (volume 1), with
    n + 1 components a space-time field (volume T).
    """
    frequencies = np.atleast_2d(np.asarray(frequencies, dtype=float))
    space_time = frequencies.shape[1] == grid.n + 1
    shape = grid.space_time_shape if space_time else grid.shape
    volume = grid.horizon if space_time else 1.0
    out = np.zeros(shape, dtype=complex)
    if frequencies.shape[1] == 0 or len(coefficients) == 0:
        return out
    factors = _axis_factors(grid, space_time)
    for frequency, coefficient in zip(frequencies, coefficients, strict=True):
        if coefficient == 0:
            continue
        waves = [
            np.exp(1j * coords * component)
            for (coords, _), component in zip(
                factors, _reorder(frequency, space_time), strict=True
            )
        ]
        term = waves[0]
        for wave in waves[1:]:
            term = np.multiply.outer(term, wave)
        out += coefficient * term
    return out / volume


def lattice_indices(
    grid: Grid, frequencies: np.ndarray, *, tolerance: float = 1e-9
) -> np.ndarray:
    """Integer lattice indices of the given frequencies.

    Raises a LatticeMismatchError for points off the lattice or beyond the
    Nyquist index of the grid.
    """
    frequencies = np.atleast_2d(np.asarray(frequencies, dtype=float))
    space_time = frequencies.shape[1] == grid.n + 1
    scale = np.full(frequencies.shape[1], 2 * np.pi)
    limits = np.full(frequencies.shape[1], grid.n_x // 2)
    if space_time:
        scale[-1] = 2 * np.pi / grid.horizon
        limits[-1] = grid.n_t // 2
    scaled = frequencies / scale
    indices = np.rint(scaled)
    for frequency, raw, rounded in zip(frequencies, scaled, indices, strict=True):
        if np.max(np.abs(raw - rounded), initial=0.0) > tolerance:
            raise LatticeMismatchError(
                frequency=tuple(frequency), details="not a lattice point"
            )
        if np.any(np.abs(rounded) >= limits):
            raise LatticeMismatchError(
                frequency=tuple(frequency), details="beyond the Nyquist index"
            )
    return indices.astype(int)


def spatial_lattice(grid: Grid, radius: float) -> np.ndarray:
    """All xi in 2*pi*Z^n with |xi| <= radius below the Nyquist index."""
    limit = grid.n_x // 2 - 1
    span = min(limit, int(np.floor(radius / (2 * np.pi))))
    points = [
        2 * np.pi * np.asarray(k, dtype=float)
        for k in itertools.product(range(-span, span + 1), repeat=grid.n)
    ]
    kept = [xi for xi in points if np.linalg.norm(xi) <= radius * (1 + 1e-12)]
    return np.asarray(kept, dtype=float).reshape(-1, grid.n)


def space_time_lattice(grid: Grid, radius: float) -> np.ndarray:
    """All (xi, tau) on the space-time lattice with |(xi, tau)| < radius."""
    time_step = 2 * np.pi / grid.horizon
    time_span = min(grid.n_t // 2 - 1, int(np.floor(radius / time_step)))
    points = []
    for xi in spatial_lattice(grid, radius):
        for m in range(-time_span, time_span + 1):
            point = np.append(xi, m * time_step)
            if np.linalg.norm(point) < radius:
                points.append(point)
    return np.asarray(points, dtype=float).reshape(-1, grid.n + 1)

