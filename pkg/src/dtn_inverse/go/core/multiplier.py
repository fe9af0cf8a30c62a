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

"""Inverses of the conjugated Schroedinger symbol on a periodic box.

Fields on Q = [0,1]^n x [0,T] are zero padded into a periodic box twice as
long in every axis. There i d_t + Lap_rho, with Lap_rho = Lap - 2i rho.grad,
is diagonal with symbol p(xi, tau) = -tau - |xi|^2 + 2 rho.xi. Where
|p| < shift * sigma the divisor is moved off the real axis to
p + i sign(Im p) shift sigma, with sign +1 for real p.
"""

import logging
from functools import lru_cache

import numpy as np

from dtn_inverse.field_core.models import Grid, VectorField
from dtn_inverse.go.models import ComplexFrequency, MultiplierResult

__all__ = [
    "NonContractionError",
    "PeriodicBox",
    "SymbolSingularError",
    "multiplier_inverse_E",
    "periodic_box",
    "picard_iterate_G",
]

log = logging.getLogger(__name__)


class SymbolSingularError(ZeroDivisionError):
    """Raised when the symbol vanishes on the lattice and no shift is allowed."""

    def __init__(self, *, modes: int):
        super().__init__(f"The symbol vanishes on {modes} lattice modes and shift=0")


class NonContractionError(RuntimeError):
    """Raised when the Picard updates grow."""

    def __init__(self, *, factor: float, iteration: int):
        super().__init__(
            f"Picard iteration does not contract: update grew by {factor:.3f}"
            f" at iteration {iteration}"
        )


class PeriodicBox:
    """Zero-padded periodic extension of the space-time grid."""

    def __init__(self, grid: Grid):
        self.grid = grid
        self.shape = (2 * grid.n_t, *((2 * grid.n_x,) * grid.n))
        tau = 2 * np.pi * np.fft.fftfreq(2 * grid.n_t, d=grid.dt)
        xi = 2 * np.pi * np.fft.fftfreq(2 * grid.n_x, d=grid.h)
        axes = np.meshgrid(tau, *([xi] * grid.n), indexing="ij", sparse=True)
        self.tau = axes[0]
        self.xi = axes[1:]
        self._domain = (slice(0, grid.n_t + 1), *((slice(0, grid.n_x + 1),) * grid.n))

    def embed(self, values: np.ndarray) -> np.ndarray:
        """Place space-time samples in the box, zero elsewhere."""
        box = np.zeros(self.shape, dtype=complex)
        box[self._domain] = values
        return box

    def embed_static(self, components: np.ndarray) -> np.ndarray:
        """Place time independent components in the box for all box times.

        The result is shaped (components, 1, 2N, ..., 2N).
        """
        box = np.zeros((components.shape[0], *self.shape[1:]))
        box[(slice(None), *self._domain[1:])] = components
        return box[:, None]

    def restrict(self, box: np.ndarray) -> np.ndarray:
        """The samples of a box field on the space-time grid."""
        return box[self._domain]

    def symbol(self, rho: np.ndarray) -> np.ndarray:
        """p(xi, tau) = -tau - |xi|^2 + 2 rho.xi on the box lattice."""
        out = -self.tau + 0j
        for xi_k, rho_k in zip(self.xi, rho, strict=True):
            out = out - xi_k**2 + 2 * rho_k * xi_k
        return np.broadcast_to(out, self.shape)

    def divisor(
        self, frequency: ComplexFrequency, shift: float
    ) -> tuple[np.ndarray, int]:
        """The regularized symbol and the number of shifted modes.

        May raise a SymbolSingularError.
        """
        symbol = self.symbol(frequency.rho)
        if shift == 0:
            scale = 1 + float(np.real(frequency.rho @ np.conj(frequency.rho)))
            vanishing = int(np.count_nonzero(np.abs(symbol) <= 1e-12 * scale))
            if vanishing:
                raise SymbolSingularError(modes=vanishing)
            return symbol, 0
        floor = shift * frequency.sigma
        small = np.abs(symbol) < floor
        sign = np.where(symbol.imag >= 0, 1.0, -1.0)
        divisor = np.where(small, symbol + 1j * sign * floor, symbol)
        return divisor, int(np.count_nonzero(small))

    def solve(
        self, frequency: ComplexFrequency, padded: np.ndarray, shift: float
    ) -> tuple[np.ndarray, int]:
        """Apply the regularized inverse to a box field.

        May raise a SymbolSingularError.
        """
        divisor, floored = self.divisor(frequency, shift)
        return np.fft.ifftn(np.fft.fftn(padded) / divisor), floored

    def gradient(self, values: np.ndarray) -> list[np.ndarray]:
        """Spectral spatial derivatives of a box field."""
        spectrum = np.fft.fftn(values)
        return [np.fft.ifftn(1j * xi_k * spectrum) for xi_k in self.xi]

    def apply(self, multiplier: np.ndarray, values: np.ndarray) -> np.ndarray:
        """Apply a Fourier multiplier to a box field."""
        return np.fft.ifftn(multiplier * np.fft.fftn(values))


@lru_cache(maxsize=8)
def periodic_box(grid: Grid) -> PeriodicBox:
    """The (cached) periodic box of a grid."""
    return PeriodicBox(grid)


def _relative(difference: np.ndarray, reference: np.ndarray) -> float:
    size = float(np.linalg.norm(reference))
    return float(np.linalg.norm(difference)) / size if size > 0 else 0.0


def multiplier_inverse_E(
    frequency: ComplexFrequency, source: np.ndarray, shift: float, grid: Grid
) -> MultiplierResult:
    """Divide the spectrum of the padded source by the regularized symbol.

    `residual` compares p(D) applied to the result with the source on the
    domain nodes; it only picks up the shifted modes.

    May raise a SymbolSingularError.
    """
    source = np.asarray(source, dtype=complex)
    if not np.any(source):
        return MultiplierResult(
            grid=grid, values=np.zeros(grid.space_time_shape), residual=0.0
        )
    box = periodic_box(grid)
    values, floored = box.solve(frequency, box.embed(source), shift)
    applied = box.apply(box.symbol(frequency.rho), values)
    residual = _relative(box.restrict(applied) - source, source)
    log.debug("Symbol inverse shifted %d modes, residual %.2e", floored, residual)
    return MultiplierResult(
        grid=grid,
        values=box.restrict(values),
        residual=residual,
        iterations=1,
        floored=floored,
    )


def picard_iterate_G(
    frequency: ComplexFrequency,
    potential: VectorField,
    source: np.ndarray,
    *,
    shift: float,
    tolerance: float = 1e-8,
    max_iterations: int = 50,
    zeroth: np.ndarray | None = None,
) -> MultiplierResult:
    """Solve (i d_t + Lap_rho + 2i A.grad_rho + h) g = f by fixed-point iteration.

    Starts from g = E f and iterates g <- E(f - 2i A.grad(g) - 2 (rho.A) g - h g)
    until the relative update drops below the tolerance. The zeroth order
    coefficient h is a space-time field on the grid and defaults to zero.
    The regularized residual measures the equation with the shifted symbol,
    which is the operator the iteration inverts.

    May raise a NonContractionError or a SymbolSingularError.
    """
    grid = potential.grid
    source = np.asarray(source, dtype=complex)
    if not np.any(source):
        return MultiplierResult(
            grid=grid, values=np.zeros(grid.space_time_shape), residual=0.0
        )
    box = periodic_box(grid)
    divisor, floored = box.divisor(frequency, shift)
    padded = box.embed(source)
    components = box.embed_static(potential.components)
    rho_dot_a = np.tensordot(frequency.rho, components, axes=1)
    lower = 2 * rho_dot_a
    if zeroth is not None:
        lower = lower + box.embed(np.broadcast_to(zeroth, grid.space_time_shape))

    def coupling(values: np.ndarray) -> np.ndarray:
        magnetic = sum(
            a_k * d_k
            for a_k, d_k in zip(components, box.gradient(values), strict=True)
        )
        return 2j * magnetic + lower * values

    values = box.apply(1 / divisor, padded)
    previous_update: float | None = None
    contraction = 0.0
    iterations = 1
    for iterations in range(1, max_iterations + 1):
        updated = box.apply(1 / divisor, padded - coupling(values))
        update = float(np.linalg.norm(updated - values))
        size = float(np.linalg.norm(updated))
        values = updated
        if update <= tolerance * size:
            break
        if previous_update:
            factor = update / previous_update
            contraction = max(contraction, factor)
            if factor > 1:
                log.warning(
                    "Picard update grew by %.3f at iteration %d", factor, iterations
                )
                raise NonContractionError(factor=factor, iteration=iterations)
        previous_update = update
    else:
        log.warning(
            "Picard iteration stopped after %d iterations without reaching %.1e",
            max_iterations,
            tolerance,
        )

    coupled = coupling(values)
    exact = box.apply(box.symbol(frequency.rho), values) + coupled
    regularized = box.apply(divisor, values) + coupled
    return MultiplierResult(
        grid=grid,
        values=box.restrict(values),
        residual=_relative(box.restrict(exact) - source, source),
        regularized_residual=_relative(box.restrict(regularized) - source, source),
        iterations=iterations,
        contraction=contraction,
        floored=floored,
    )
