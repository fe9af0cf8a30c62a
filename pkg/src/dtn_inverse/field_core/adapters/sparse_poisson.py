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

"""Sparse finite-difference Poisson solver."""

import logging

import numpy as np
from scipy import sparse
from scipy.sparse import linalg

from dtn_inverse.field_core.core.hodge import HodgeConfig, PoissonMethod
from dtn_inverse.field_core.models import Grid, PoissonSolution
from dtn_inverse.field_core.ports.poisson import PoissonSolverPort

__all__ = ["SparsePoissonSolver"]

log = logging.getLogger(__name__)


def interior_laplacian(grid: Grid) -> sparse.csr_matrix:
    """Seven-point Laplacian on the interior nodes with zero Dirichlet data."""
    m = grid.n_x - 1
    second = sparse.diags([1.0, -2.0, 1.0], [-1, 0, 1], shape=(m, m)) / grid.h**2
    identity = sparse.identity(m, format="csr")
    total = sparse.csr_matrix((m**grid.n, m**grid.n))
    for axis in range(grid.n):
        factor = second if axis == 0 else identity
        for k in range(1, grid.n):
            factor = sparse.kron(factor, second if k == axis else identity, "csr")
        total = total + factor
    return total.tocsr()


class SparsePoissonSolver(PoissonSolverPort):
    """Direct or conjugate-gradient solve of the interior Poisson system."""

    def __init__(self, config: HodgeConfig):
        self._config = config

    def solve_dirichlet(self, rhs: np.ndarray, grid: Grid) -> PoissonSolution:
        """Find phi with Lap(phi) = rhs on the interior nodes, zero on the faces.

        May raise a PoissonSolverError.
        """
        inner = (slice(1, -1),) * grid.n
        values = np.zeros(grid.shape)
        b = np.asarray(rhs, dtype=float)[inner].ravel()
        b_norm = np.linalg.norm(b)
        if b_norm == 0:
            return PoissonSolution(values=values, residual=0.0, iterations=0)

        matrix = interior_laplacian(grid)
        iterations = None
        if self._config.hodge_method is PoissonMethod.CG:
            counter = {"count": 0}

            def count(_: np.ndarray) -> None:
                counter["count"] += 1

            # the negative Laplacian is symmetric positive definite
            x, info = linalg.cg(
                -matrix,
                -b,
                rtol=self._config.hodge_tolerance,
                maxiter=self._config.hodge_max_iterations,
                callback=count,
            )
            iterations = counter["count"]
            if info != 0:
                residual = float(np.linalg.norm(matrix @ x - b) / b_norm)
                raise self.PoissonSolverError(
                    residual=residual, iterations=iterations
                )
        else:
            x = linalg.spsolve(matrix.tocsc(), b)

        residual = float(np.linalg.norm(matrix @ x - b) / b_norm)
        if not np.isfinite(residual) or residual > 10 * self._config.hodge_tolerance:
            raise self.PoissonSolverError(residual=residual, iterations=iterations)
        log.debug("Poisson solve finished with residual %.2e", residual)
        values[inner] = x.reshape((grid.n_x - 1,) * grid.n)
        return PoissonSolution(values=values, residual=residual, iterations=iterations)
