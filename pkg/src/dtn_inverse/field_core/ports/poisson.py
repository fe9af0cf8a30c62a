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

"""Port for the Dirichlet Poisson solver used by the Hodge projection."""

from abc import ABC, abstractmethod

import numpy as np

from dtn_inverse.field_core.models import Grid, PoissonSolution

__all__ = ["PoissonSolverPort"]


class PoissonSolverPort(ABC):
    """Solves the discrete Poisson problem with zero Dirichlet data."""

    class PoissonSolverError(RuntimeError):
        """Raised when the Poisson solve does not reach its tolerance."""

        def __init__(self, *, residual: float, iterations: int | None = None):
            message = f"Poisson solve stopped at relative residual {residual:.3e}"
            if iterations is not None:
                message += f" after {iterations} iterations"
            super().__init__(message)

    @abstractmethod
    def solve_dirichlet(self, rhs: np.ndarray, grid: Grid) -> PoissonSolution:
        """Find phi with Lap(phi) = rhs on the interior nodes and phi = 0 on the
        boundary nodes.

        May raise a PoissonSolverError.
        """
        ...
