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

"""Discrete check of the gauge identity.

e^{-i phi} Lap_A e^{i phi} = Lap_{A + grad phi} for phi vanishing on the boundary.
"""

import logging

import numpy as np

from dtn_inverse.field_core.core.operators import (
    gradient,
    interior_slices,
    magnetic_laplacian,
)
from dtn_inverse.field_core.models import VectorField

__all__ = ["gauge_conjugation_residual"]

log = logging.getLogger(__name__)


def gauge_conjugation_residual(
    field: VectorField, phase: np.ndarray, values: np.ndarray
) -> float:
    """Largest conjugation defect over the nodes two steps inside the cube.

    Nodes next to a face are skipped since the one-sided gradient of the
    phase enters the shifted potential there.
    """
    grid = field.grid
    phase = np.asarray(phase, dtype=float)
    if np.any(phase[grid.boundary_mask()]):
        log.warning("Gauge phase does not vanish on the boundary")
    conjugation = np.exp(1j * phase)
    lhs = np.conj(conjugation) * magnetic_laplacian(
        conjugation * values, field.components, grid
    )
    shifted = field.components + gradient(phase, grid)
    rhs = magnetic_laplacian(values, shifted, grid)
    inner = interior_slices(lhs, grid, depth=2)
    return float(np.max(np.abs(lhs - rhs)[inner], initial=0.0))
