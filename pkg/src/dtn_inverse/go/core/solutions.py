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

"""Geometrical optics solutions of the magnetic Schroedinger equation.

The carrier e^{-i((rho.rho) t + (x - x_c).rho)} is replaced by the plane
wave that the time stepper propagates exactly: its spatial part keeps
e^{-i (x - x_c).rho} and its factor per step is the Crank-Nicolson rate of
the discrete symbol of the Laplacian.

A GO solution is the discrete solution with the initial and lateral data of
the principal part carrier e^{i phi}, found by one sourced forward solve
with vanishing data. The remainder w of the ansatz carrier (e^{i phi} + w)
solves the conjugated equation with the source L on the periodic box, where
the regularized symbol bounds it by C / sigma.
"""

import logging
from typing import Annotated

import numpy as np
from pydantic import Field
from pydantic_settings import BaseSettings

from dtn_inverse.field_core.core.norms import discrete_norm
from dtn_inverse.field_core.core.operators import (
    divergence,
    gradient,
    interior_slices,
    laplacian,
    magnetic_laplacian,
)
from dtn_inverse.field_core.models import (
    Grid,
    NormId,
    ScalarSpaceTimeField,
    VectorField,
)
from dtn_inverse.forward.models import BoundaryInput
from dtn_inverse.forward.ports.solver import ForwardSolverPort
from dtn_inverse.go.core.frames import make_rho
from dtn_inverse.go.core.multiplier import (
    NonContractionError,
    SymbolSingularError,
    picard_iterate_G,
)
from dtn_inverse.go.models import (
    ComplexFrequency,
    FrequencyFrame,
    GoRemainder,
    GoSolution,
    RemainderNorms,
)
from dtn_inverse.transport.core.n_omega import TransportOperator
from dtn_inverse.transport.models import PhaseField

__all__ = ["CARRIER_CENTER", "GoBuilder", "GoConfig", "discrete_carrier"]

log = logging.getLogger(__name__)

CARRIER_CENTER = 0.5


class GoConfig(BaseSettings):
    """Configuration parameters for geometrical optics solutions."""

    go_sigma_min: Annotated[
        float, Field(gt=0, description="Smallest admissible sigma (sigma_0)")
    ] = 4.0
    go_sigma_cap: Annotated[
        float, Field(gt=0, description="Largest admissible sigma")
    ] = 12.0
    go_symbol_shift: Annotated[
        float,
        Field(
            gt=0, description="Symbol floor of the free multiplier in units of sigma"
        ),
    ] = 1e-3
    go_picard_shift: Annotated[
        float,
        Field(
            gt=0,
            description="Symbol floor of the remainder equation in units of sigma",
        ),
    ] = 1.0
    go_picard_tolerance: Annotated[
        float, Field(gt=0, description="Relative update ending the Picard iteration")
    ] = 1e-8
    go_picard_max_iterations: Annotated[
        int, Field(ge=1, description="Iteration limit of the Picard iteration")
    ] = 50
    go_contraction_warning: Annotated[
        float,
        Field(gt=0, description="Warn when 2 ||A||_W1inf exceeds this value"),
    ] = 0.5
    go_residual_tolerance: Annotated[
        float,
        Field(
            gt=0,
            description=(
                "Relative residual above which a poorly contracting"
                " construction is rejected"
            ),
        ),
    ] = 1e-4


def discrete_carrier(
    frequency: ComplexFrequency, grid: Grid
) -> tuple[np.ndarray, complex, complex]:
    """The discrete plane wave of a complex frequency.

    Returns the space-time samples, the discrete symbol s of the Laplacian
    on e^{-i x.rho} and the factor per time step.
    """
    rho = frequency.rho
    centered = grid.mesh() - CARRIER_CENTER
    spatial = np.exp(-1j * np.tensordot(rho, centered, axes=1))
    symbol = complex(np.sum((2 * np.cos(rho * grid.h) - 2) / grid.h**2))
    rate = (1j / grid.dt - symbol / 2) / (1j / grid.dt + symbol / 2)
    steps = np.arange(grid.n_t + 1).reshape(-1, *([1] * grid.n))
    return rate**steps * spatial[None], symbol, complex(rate)


def _zeroth_order(potential: VectorField, q: ScalarSpaceTimeField) -> np.ndarray:
    """h = i div A - |A|^2 + q."""
    static = 1j * divergence(potential) - potential.squared_magnitude()
    return static[None] + q.values


def _analytic_source(
    phase: PhaseField,
    potential: VectorField,
    q: ScalarSpaceTimeField,
    y: np.ndarray,
) -> np.ndarray:
    """-e^{i phi}(i Lap(phi) - grad(phi).grad(phi) + 2y.grad(phi) + 2A.y
    - 2A.grad(phi) + h) with h = i div A - |A|^2 + q.
    """
    grid = potential.grid
    phi = phase.values
    grad_phi = gradient(phi, grid)
    components = potential.components
    static = (
        1j * laplacian(phi, grid)
        - np.sum(grad_phi * grad_phi, axis=0)
        + 2 * np.tensordot(y, grad_phi, axes=1)
        + 2 * np.tensordot(y, components, axes=1)
        - 2 * np.sum(components * grad_phi, axis=0)
    )
    return -np.exp(1j * phi)[None] * (static[None] + _zeroth_order(potential, q))


def _principal_source(
    principal: np.ndarray,
    carrier: np.ndarray,
    symbol: complex,
    potential: VectorField,
    q: ScalarSpaceTimeField,
) -> np.ndarray:
    """Minus the scheme applied to the principal part, per time level."""
    start = principal[0]
    spatial = (
        magnetic_laplacian(start, potential.components, potential.grid)
        - symbol * start
    )
    return -(carrier / carrier[0]) * (spatial[None] + q.values * start[None])


def _scheme_residual(
    solver: ForwardSolverPort,
    potential: VectorField,
    q: ScalarSpaceTimeField,
    values: np.ndarray,
    sigma: float,
) -> float:
    scale = sigma**2 * float(np.max(np.abs(values)))
    residual = solver.step_residual(potential, q, values)
    return float(np.max(np.abs(residual))) / scale


class GoBuilder:
    """Builds GO solutions and their remainders for given coefficients."""

    class GoConstructionError(RuntimeError):
        """Raised when a GO solution cannot be built or certified."""

        def __init__(self, *, sigma: float, details: str):
            super().__init__(f"No GO solution for sigma={sigma}: {details}")

    def __init__(
        self,
        *,
        config: GoConfig,
        transport: TransportOperator,
        solver: ForwardSolverPort,
    ):
        self._config = config
        self._transport = transport
        self._solver = solver

    @property
    def config(self) -> GoConfig:
        """The configuration of the builder."""
        return self._config

    def build_go_solution(
        self,
        potential: VectorField,
        q: ScalarSpaceTimeField,
        frame: FrequencyFrame,
    ) -> GoSolution:
        """Construct the GO solution of the given frame for (A, q).

        May raise a GoConstructionError.
        """
        config = self._config
        sigma = frame.sigma
        if not config.go_sigma_min <= sigma <= config.go_sigma_cap:
            raise self.GoConstructionError(
                sigma=sigma,
                details=(
                    f"sigma must lie in [{config.go_sigma_min}, {config.go_sigma_cap}]"
                ),
            )
        grid = potential.grid
        frequency = make_rho(frame)
        direction = frequency.direction
        try:
            phase = self._transport.n_omega_inverse(
                direction, -direction.apply(potential.components), grid
            )
        except TransportOperator.SupportError as error:
            raise self.GoConstructionError(sigma=sigma, details=str(error)) from error

        carrier, symbol, rate = discrete_carrier(frequency, grid)
        principal = carrier * np.exp(1j * phase.values)[None]
        source = _principal_source(principal, carrier, symbol, potential, q)
        try:
            correction = self._solver.solve_ibvp(
                potential,
                q,
                BoundaryInput.zero(grid),
                ScalarSpaceTimeField(grid=grid, values=source),
            ).values
        except ForwardSolverPort.ForwardSolverError as error:
            log.error("Correction solve failed for sigma=%s: %s", sigma, error)
            raise self.GoConstructionError(sigma=sigma, details=str(error)) from error

        values = principal + correction
        residual = _scheme_residual(self._solver, potential, q, values, sigma)
        contraction = 2 * discrete_norm(potential, NormId.W1INF)
        if contraction > config.go_contraction_warning:
            log.warning(
                "Contraction factor %.3f exceeds %.3f for sigma=%s",
                contraction,
                config.go_contraction_warning,
                sigma,
            )
            if residual > config.go_residual_tolerance:
                raise self.GoConstructionError(
                    sigma=sigma,
                    details=(
                        f"contraction factor {contraction:.3f} with residual"
                        f" {residual:.2e}"
                    ),
                )
        log.debug(
            "GO solution sigma=%s side=%d: residual=%.2e", sigma, frame.side, residual
        )
        return GoSolution(
            frequency=frequency,
            phase=phase,
            carrier=carrier,
            carrier_rate=rate,
            carrier_symbol=symbol,
            values=values,
            residual=residual,
            contraction=contraction,
        )

    def build_remainder(
        self,
        potential: VectorField,
        q: ScalarSpaceTimeField,
        solution: GoSolution,
    ) -> GoRemainder:
        """The remainder w of the GO ansatz of a solution built for (A, q).

        w solves (i d_t + Lap_rho + 2i A.grad_rho + h) w = L by the Picard
        iteration of the regularized symbol inverse, with L the source of
        the principal part and h = i div A - |A|^2 + q.

        May raise a GoConstructionError.
        """
        config = self._config
        grid = solution.grid
        frequency = solution.frequency
        sigma = frequency.sigma
        analytic = _analytic_source(
            solution.phase, potential, q, np.asarray(frequency.frame.y)
        )
        try:
            result = picard_iterate_G(
                frequency,
                potential,
                analytic,
                shift=config.go_picard_shift,
                tolerance=config.go_picard_tolerance,
                max_iterations=config.go_picard_max_iterations,
                zeroth=_zeroth_order(potential, q),
            )
        except (NonContractionError, SymbolSingularError) as error:
            log.error("Remainder equation failed for sigma=%s: %s", sigma, error)
            raise self.GoConstructionError(sigma=sigma, details=str(error)) from error

        w = result.values
        carrier = solution.carrier
        assembled = carrier * (np.exp(1j * solution.phase.values)[None] + w)
        residual = _scheme_residual(self._solver, potential, q, assembled, sigma)

        source = _principal_source(
            solution.principal, carrier, solution.carrier_symbol, potential, q
        )
        inner = interior_slices(w, grid, depth=2)
        defect = np.abs(source / carrier - analytic)[inner]
        reference = float(np.max(np.abs(analytic[inner]), initial=0.0))
        source_defect = float(np.max(defect, initial=0.0)) / (reference or 1.0)

        norms = _remainder_norms(w, grid)
        log.debug(
            "GO remainder sigma=%s: |w|_L2H1=%.3e after %d iterations",
            sigma,
            norms.l2_h1,
            result.iterations,
        )
        return GoRemainder(
            grid=grid,
            sigma=sigma,
            values=w,
            norms=norms,
            residual=residual,
            equation_residual=result.regularized_residual,
            source_defect=source_defect,
            iterations=result.iterations,
            floored=result.floored,
        )


def _remainder_norms(w: np.ndarray, grid: Grid) -> RemainderNorms:
    first = np.gradient(w, grid.dt, axis=0)
    second = np.gradient(first, grid.dt, axis=0)
    return RemainderNorms(
        l2_h1=discrete_norm(w, NormId.H1, grid),
        l2_h2=discrete_norm(w, NormId.H2, grid),
        dt_l2_h1=discrete_norm(first, NormId.H1, grid),
        dtt_l2_h1=discrete_norm(second, NormId.H1, grid),
    )
