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

"""Crank-Nicolson time stepping for the magnetic Schroedinger equation.

The discrete Hamiltonian is H = Lap + i sum_k (a_k D_k + D_k a_k) - |a|^2 + q
with the seven-point Laplacian and skew-symmetric central differences D_k.
For real coefficients H is Hermitian, so every step is unitary when the
Dirichlet data and the source vanish. The potential q enters every step as
the average of its values at both ends of the step.
"""

import hashlib
import logging
import threading
from collections import OrderedDict
from collections.abc import Callable
from enum import Enum
from typing import Annotated, NamedTuple

import numpy as np
from pydantic import Field
from pydantic_settings import BaseSettings
from scipy import sparse
from scipy.sparse import linalg

from dtn_inverse.field_core.core.operators import difference_operators
from dtn_inverse.field_core.core.norms import discrete_norm
from dtn_inverse.field_core.core.quadrature import fill_faces
from dtn_inverse.field_core.models import (
    Grid,
    NormId,
    ScalarSpaceTimeField,
    VectorField,
)
from dtn_inverse.forward.models import BoundaryInput, SpaceTimeSolution
from dtn_inverse.forward.ports.solver import ForwardSolverPort

__all__ = ["CrankNicolsonSolver", "ForwardConfig", "LinearSolver", "PreparedSystem"]

log = logging.getLogger(__name__)


class LinearSolver(str, Enum):
    """Solver for the linear system of one time step"""

    DIRECT = "direct"
    BICGSTAB = "bicgstab"
    GMRES = "gmres"


class ForwardConfig(BaseSettings):
    """Configuration parameters for the forward solver."""

    forward_linear_solver: LinearSolver = Field(
        default=LinearSolver.DIRECT,
        description="Sparse LU factorisation or a preconditioned Krylov method",
    )
    forward_tolerance: Annotated[
        float,
        Field(gt=0, le=1e-6, description="Relative residual required per step"),
    ] = 1e-10
    forward_max_iterations: Annotated[
        int, Field(ge=1, description="Iteration limit of the Krylov methods")
    ] = 2000
    forward_jacobi: bool = Field(
        default=True, description="Use diagonal preconditioning for Krylov methods"
    )
    forward_cache_size: Annotated[
        int,
        Field(ge=1, description="Number of coefficient pairs kept prepared"),
    ] = 4
    forward_step_cache: Annotated[
        int,
        Field(
            ge=0,
            description=(
                "Factorised steps kept per coefficient pair when q depends on time"
            ),
        ),
    ] = 64


class _StepSystem(NamedTuple):
    rows: sparse.csr_matrix
    coupling: sparse.csr_matrix
    matrix: sparse.csr_matrix
    solve: Callable[[np.ndarray, np.ndarray], tuple[np.ndarray, int]]


def _fingerprint(potential: VectorField, q: ScalarSpaceTimeField) -> str:
    digest = hashlib.blake2b(digest_size=16)
    digest.update(potential.grid.model_dump_json().encode())
    digest.update(np.ascontiguousarray(potential.components).tobytes())
    digest.update(np.ascontiguousarray(q.values).tobytes())
    digest.update(str(q.values.dtype).encode())
    return digest.hexdigest()


class PreparedSystem:
    """Step matrices of one coefficient pair, built on first use.

    Factorisations are cached per step (a single entry when q does not depend
    on time) and may be shared by concurrent solves.
    """

    def __init__(
        self, potential: VectorField, q: ScalarSpaceTimeField, config: ForwardConfig
    ):
        grid = potential.grid
        self.grid = grid
        self._config = config
        lap, derivatives = difference_operators(grid)
        mixed = sum(
            (
                sparse.diags(a_k.ravel()) @ d_k + d_k @ sparse.diags(a_k.ravel())
                for a_k, d_k in zip(potential.components, derivatives, strict=True)
            ),
            start=sparse.csr_matrix(lap.shape),
        )
        self._static = (
            lap + 1j * mixed - sparse.diags(potential.squared_magnitude().ravel())
        ).tocsr()
        mask = grid.interior_mask().ravel()
        self.inner = np.flatnonzero(mask)
        self.outer = np.flatnonzero(~mask)
        self._q = q.values.reshape(grid.n_t + 1, -1)
        self._time_independent = q.is_time_independent()
        self._steps: dict[int, _StepSystem] = {}
        self._lock = threading.Lock()

    def hamiltonian(self, step: int) -> sparse.csr_matrix:
        """H with q averaged over [t_step, t_step+1]."""
        q_bar = 0.5 * (self._q[step] + self._q[step + 1])
        return (self._static + sparse.diags(q_bar)).tocsr()

    def step(self, step: int) -> _StepSystem:
        """The interior system of the given step."""
        key = 0 if self._time_independent else step
        with self._lock:
            cached = self._steps.get(key)
        if cached is not None:
            return cached
        built = self._build(step)
        if self._time_independent or len(self._steps) < self._config.forward_step_cache:
            with self._lock:
                built = self._steps.setdefault(key, built)
        return built

    def rows(self, step: int) -> sparse.csr_matrix:
        """Interior rows of H for the given step, without factorising."""
        key = 0 if self._time_independent else step
        with self._lock:
            cached = self._steps.get(key)
        if cached is not None:
            return cached.rows
        return self.hamiltonian(step)[self.inner]

    def _build(self, step: int) -> _StepSystem:
        rows = self.hamiltonian(step)[self.inner]
        interior = rows[:, self.inner]
        size = len(self.inner)
        matrix = (
            (1j / self.grid.dt) * sparse.identity(size, format="csr") + 0.5 * interior
        ).tocsr()
        return _StepSystem(
            rows=rows,
            coupling=rows[:, self.outer].tocsr(),
            matrix=matrix,
            solve=self._solver_for(matrix),
        )

    def _solver_for(
        self, matrix: sparse.csr_matrix
    ) -> Callable[[np.ndarray, np.ndarray], tuple[np.ndarray, int]]:
        config = self._config
        if config.forward_linear_solver is LinearSolver.DIRECT:
            factor = linalg.splu(matrix.tocsc())
            return lambda rhs, _: (factor.solve(rhs), 0)

        preconditioner = None
        if config.forward_jacobi:
            inverse_diagonal = 1.0 / matrix.diagonal()
            preconditioner = linalg.LinearOperator(
                matrix.shape, matvec=lambda x: inverse_diagonal * x, dtype=complex
            )
        method = (
            linalg.bicgstab
            if config.forward_linear_solver is LinearSolver.BICGSTAB
            else linalg.gmres
        )

        def solve(rhs: np.ndarray, guess: np.ndarray) -> tuple[np.ndarray, int]:
            return method(
                matrix,
                rhs,
                x0=guess,
                rtol=config.forward_tolerance,
                atol=0.0,
                maxiter=config.forward_max_iterations,
                M=preconditioner,
            )

        return solve


class CrankNicolsonSolver(ForwardSolverPort):
    """Implicit midpoint time stepping with Dirichlet data written each step."""

    def __init__(self, config: ForwardConfig):
        self._config = config
        self._prepared: OrderedDict[str, PreparedSystem] = OrderedDict()
        self._lock = threading.Lock()

    def prepare(
        self, potential: VectorField, q: ScalarSpaceTimeField
    ) -> PreparedSystem:
        """Return the (possibly cached) step matrices of a coefficient pair."""
        if q.grid != potential.grid:
            raise self.ForwardSolverError("A and q live on different grids")
        key = _fingerprint(potential, q)
        with self._lock:
            if key in self._prepared:
                self._prepared.move_to_end(key)
                return self._prepared[key]
        system = PreparedSystem(potential, q, self._config)
        with self._lock:
            system = self._prepared.setdefault(key, system)
            while len(self._prepared) > self._config.forward_cache_size:
                self._prepared.popitem(last=False)
        return system

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
        grid = data.grid
        if potential.grid != grid or (source is not None and source.grid != grid):
            raise self.ForwardSolverError(
                "Coefficients and data live on different grids"
            )
        system = self.prepare(potential, q)
        forcing = _flat_source(source, grid)

        values = np.zeros((grid.n_t + 1, int(np.prod(grid.shape))), dtype=complex)
        values[0] = data.initial.ravel()
        for step in range(grid.n_t):
            values[step + 1] = self._advance(system, values[step], data, forcing, step)

        samples = values.reshape(grid.space_time_shape)
        log.debug(
            "Solved IBVP on %s with %s solver", grid, self._config.forward_linear_solver
        )
        return SpaceTimeSolution(
            grid=grid,
            values=samples,
            l2_norms=[discrete_norm(u, NormId.L2, grid) for u in samples],
            h1_norms=[discrete_norm(u, NormId.H1, grid) for u in samples],
        )

    def _advance(
        self,
        system: PreparedSystem,
        current: np.ndarray,
        data: BoundaryInput,
        forcing: np.ndarray | None,
        step: int,
    ) -> np.ndarray:
        grid = data.grid
        parts = system.step(step)
        boundary = fill_faces(np.zeros(grid.shape), data.faces[:, step + 1], grid)
        boundary_next = boundary.ravel()[system.outer]

        rhs = (1j / grid.dt) * current[system.inner] - 0.5 * (
            parts.rows @ current + parts.coupling @ boundary_next
        )
        if forcing is not None:
            rhs += 0.5 * (forcing[step] + forcing[step + 1])[system.inner]

        following = np.zeros_like(current)
        following[system.outer] = boundary_next
        rhs_norm = float(np.linalg.norm(rhs))
        if rhs_norm == 0:
            return following

        solution, info = parts.solve(rhs, current[system.inner])
        residual = float(np.linalg.norm(parts.matrix @ solution - rhs) / rhs_norm)
        if info != 0 or not np.isfinite(residual) or (
            residual > 10 * self._config.forward_tolerance
        ):
            log.warning(
                "Step %d failed: info=%d, relative residual %.3e",
                step + 1,
                info,
                residual,
            )
            raise self.SolverBreakdownError(step=step + 1, info=info, residual=residual)
        following[system.inner] = solution
        return following

    def step_residual(
        self,
        potential: VectorField,
        q: ScalarSpaceTimeField,
        values: np.ndarray,
        source: ScalarSpaceTimeField | None = None,
    ) -> np.ndarray:
        """Residual of the scheme, (i/dt)(u^{m+1} - u^m) + H(u^{m+1} + u^m)/2 - F.

        F is the average of the source at both ends of the step. The result
        is shaped (N_t, N+1, ..., N+1) and vanishes on the boundary nodes.
        """
        grid = potential.grid
        system = self.prepare(potential, q)
        forcing = _flat_source(source, grid)
        flat = np.asarray(values, dtype=complex).reshape(grid.n_t + 1, -1)
        out = np.zeros((grid.n_t, flat.shape[1]), dtype=complex)
        for step in range(grid.n_t):
            rows = system.rows(step)
            residual = (1j / grid.dt) * (
                flat[step + 1, system.inner] - flat[step, system.inner]
            ) + 0.5 * (rows @ (flat[step + 1] + flat[step]))
            if forcing is not None:
                residual -= 0.5 * (forcing[step] + forcing[step + 1])[system.inner]
            out[step, system.inner] = residual
        return out.reshape((grid.n_t, *grid.shape))


def _flat_source(source: ScalarSpaceTimeField | None, grid: Grid) -> np.ndarray | None:
    if source is None or not np.any(source.values):
        return None
    return source.values.reshape(grid.n_t + 1, -1)
