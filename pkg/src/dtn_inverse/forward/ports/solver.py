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

"""Port for solvers of the initial boundary value problem."""

from abc import ABC, abstractmethod

import numpy as np

from dtn_inverse.field_core.models import ScalarSpaceTimeField, VectorField
from dtn_inverse.forward.models import BoundaryInput, SpaceTimeSolution

__all__ = ["ForwardSolverPort"]


class ForwardSolverPort(ABC):
    """Solves (i d_t + Lap_A + q) u = F in the cube with Dirichlet data."""

    class ForwardSolverError(RuntimeError):
        """Raised when a forward solve cannot be carried out."""

    class SolverBreakdownError(ForwardSolverError):
        """Raised when the linear solve of a time step fails."""

        def __init__(self, *, step: int, info: int, residual: float):
            super().__init__(
                f"Linear solve of time step {step} broke down (info={info},"
                f" relative residual {residual:.3e})"
            )

    @abstractmethod
    def solve_ibvp(
        self,
        potential: VectorField,
        q: ScalarSpaceTimeField,
        data: BoundaryInput,
        source: ScalarSpaceTimeField | None = None,
    ) -> SpaceTimeSolution:
        """Solve the initial boundary value problem for the given data.

        May raise a ForwardSolverError or a SolverBreakdownError.
        """
        ...

    @abstractmethod
    def step_residual(
        self,
        potential: VectorField,
        q: ScalarSpaceTimeField,
        values: np.ndarray,
        source: ScalarSpaceTimeField | None = None,
    ) -> np.ndarray:
        """Residual of the discrete scheme for the given space-time samples.

        Returns one array per time step, zero on the boundary nodes.
        """
        ...
