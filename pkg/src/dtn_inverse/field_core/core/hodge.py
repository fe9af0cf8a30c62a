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

"""Hodge projection of magnetic potentials onto their solenoidal part."""

import logging
from enum import Enum
from typing import Annotated

import numpy as np
from pydantic import Field
from pydantic_settings import BaseSettings

from dtn_inverse.field_core.core.norms import discrete_norm
from dtn_inverse.field_core.core.operators import curl, divergence, gradient
from dtn_inverse.field_core.models import HodgeResult, NormId, VectorField
from dtn_inverse.field_core.ports.poisson import PoissonSolverPort

__all__ = ["HodgeConfig", "HodgeProjector", "PoissonMethod"]

log = logging.getLogger(__name__)


class PoissonMethod(str, Enum):
    """Linear solver used for the Dirichlet Poisson problem"""

    DIRECT = "direct"
    CG = "cg"


class HodgeConfig(BaseSettings):
    """Configuration parameters for the Hodge projection."""

    hodge_method: PoissonMethod = Field(
        default=PoissonMethod.DIRECT,
        description="Solver for the discrete Poisson problem",
    )
    hodge_tolerance: Annotated[
        float,
        Field(
            gt=0,
            le=1e-4,
            description="Relative residual required from the Poisson solve",
        ),
    ] = 1e-10
    hodge_max_iterations: Annotated[
        int,
        Field(ge=1, description="Iteration limit of the conjugate-gradient solve"),
    ] = 10_000


class HodgeProjector:
    """Splits a potential into A = A' + grad(phi) with phi = 0 on the boundary."""

    def __init__(self, *, poisson_solver: PoissonSolverPort):
        self._poisson_solver = poisson_solver

    def hodge_project(self, field: VectorField, p: float = np.inf) -> HodgeResult:
        """Solve Lap(phi) = div A and subtract the gradient.

        The exponent p is recorded only; the estimate needs p > n and the
        diagnostics always use the max-norm surrogate.

        May raise a PoissonSolverError.
        """
        grid = field.grid
        if p <= grid.n:
            log.warning("Hodge estimate needs p > n, got p=%s for n=%d", p, grid.n)
        if not field.vanishes_on_boundary():
            log.warning("Projecting a potential that does not vanish on the boundary")

        try:
            solution = self._poisson_solver.solve_dirichlet(divergence(field), grid)
        except PoissonSolverPort.PoissonSolverError as error:
            log.error("Hodge projection failed: %s", error)
            raise

        potential = solution.values
        solenoidal = VectorField(
            grid=grid, components=field.components - gradient(potential, grid)
        )
        inner = grid.interior_mask(depth=2)
        max_divergence = float(
            np.max(np.abs(divergence(solenoidal)[inner]), initial=0.0)
        )
        curl_size = discrete_norm(curl(solenoidal), NormId.LINF)
        ratio = (
            discrete_norm(solenoidal, NormId.W1INF) / curl_size
            if curl_size > 0
            else float("nan")
        )
        return HodgeResult(
            potential=potential,
            solenoidal=solenoidal,
            max_divergence=max_divergence,
            ratio=ratio,
            poisson_residual=solution.residual,
        )
