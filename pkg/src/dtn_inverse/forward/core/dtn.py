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

"""Boundary measurements of forward solutions."""

import logging

import numpy as np

from dtn_inverse.field_core.core.norms import discrete_norm
from dtn_inverse.field_core.core.quadrature import (
    face_index,
    face_weights,
    time_weights,
)
from dtn_inverse.field_core.models import (
    Grid,
    NormId,
    ScalarSpaceTimeField,
    VectorField,
)
from dtn_inverse.forward.models import (
    BoundaryInput,
    DtnRecord,
    EnergyReport,
    ProbeMetadata,
    SpaceTimeSolution,
    face_norm,
)
from dtn_inverse.forward.ports.solver import ForwardSolverPort

__all__ = [
    "boundary_data_norm",
    "dtn_apply",
    "energy_report",
    "magnetic_neumann_trace",
]

log = logging.getLogger(__name__)


def magnetic_neumann_trace(
    solution: SpaceTimeSolution, potential: VectorField
) -> np.ndarray:
    """(d_nu + i A.nu) u on every face and time level.

    The normal derivative uses the one-sided second-order stencil
    (3 u_0 - 4 u_1 + u_2) / 2h towards the interior. Faces are stored in
    the order of `face_index`.
    """
    grid = solution.grid
    values = solution.values
    h = grid.h
    faces = []
    for axis, index in face_index(grid):
        inward = 1 if index == 0 else -1
        layers = [np.take(values, index + inward * k, axis=1 + axis) for k in range(3)]
        # derivative along the outward normal
        normal = (3 * layers[0] - 4 * layers[1] + layers[2]) / (2 * h)
        magnetic = np.take(potential.components[axis], index, axis=axis)
        trace = normal - inward * 1j * magnetic * layers[0]
        faces.append(trace.reshape(grid.n_t + 1, -1))
    return np.stack(faces)


def dtn_apply(
    solver: ForwardSolverPort,
    potential: VectorField,
    q: ScalarSpaceTimeField,
    data: BoundaryInput,
    *,
    probe: ProbeMetadata | None = None,
) -> DtnRecord:
    """Measure (u(., T), (d_nu + i A.nu) u) for the probe g = (u0, f).

    May raise the errors of the forward solver.
    """
    solution = solver.solve_ibvp(potential, q, data)
    return DtnRecord(
        grid=data.grid,
        final_state=solution.final_state,
        trace=magnetic_neumann_trace(solution, potential),
        probe_norm=data.norm(),
        probe=probe,
    )


def _face_derivatives(face: np.ndarray, grid: Grid) -> list[np.ndarray]:
    """Tangential derivatives of one face shaped (N_t + 1, N+1, ..., N+1)."""
    return [
        np.gradient(face, grid.h, axis=axis, edge_order=1)
        for axis in range(1, face.ndim)
    ]


def boundary_data_norm(data: BoundaryInput) -> float:
    """Grid surrogate of the H^{2,1} norm of the Dirichlet data.

    Sums the squared L2 norms of f, d_t f and of the tangential derivatives
    of f up to second order.
    """
    grid = data.grid
    weights = time_weights(grid).reshape(-1, *([1] * (grid.n - 1))) * face_weights(
        grid
    ).reshape((grid.n_x + 1,) * (grid.n - 1))
    total = 0.0
    for face in data.faces:
        face = face.reshape(grid.n_t + 1, *((grid.n_x + 1,) * (grid.n - 1)))
        terms = [face, np.gradient(face, grid.dt, axis=0, edge_order=1)]
        first = _face_derivatives(face, grid)
        terms += first
        terms += [d for item in first for d in _face_derivatives(item, grid)]
        total += sum(float(np.sum(weights * np.abs(term) ** 2)) for term in terms)
    return float(np.sqrt(total))


def energy_report(solution: SpaceTimeSolution, data: BoundaryInput) -> EnergyReport:
    """Both sides of the energy estimate and the drift of the L2 norm."""
    grid = solution.grid
    normal = magnetic_neumann_trace(solution, VectorField.zeros(grid))
    lhs = float(np.max(solution.h1_norms)) + face_norm(normal, grid)
    rhs = discrete_norm(data.initial, NormId.H2, grid) + boundary_data_norm(data)

    degenerate = lhs == 0 and rhs == 0
    if degenerate:
        ratio = float("nan")
    elif rhs == 0:
        ratio = float("inf")
    else:
        ratio = lhs / rhs

    start = float(solution.l2_norms[0])
    if start > 0:
        drift = float(np.max(np.abs(solution.l2_norms - start)) / start)
    else:
        drift = 0.0 if not np.any(solution.l2_norms) else float("nan")
    if degenerate:
        log.debug("Energy report of a vanishing solution")
    return EnergyReport(
        lhs=lhs, rhs=rhs, ratio=ratio, degenerate=degenerate, l2_drift=drift
    )
