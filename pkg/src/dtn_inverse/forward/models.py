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

"""Boundary inputs, solutions and DtN records of the forward problem."""

from typing import Any, Self

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

from dtn_inverse.field_core.core.quadrature import (
    extract_faces,
    face_weights,
    node_weights,
    time_weights,
)
from dtn_inverse.field_core.models import FieldModel, Grid, frozen_array

__all__ = [
    "BoundaryInput",
    "DtnRecord",
    "EnergyReport",
    "ProbeMetadata",
    "SpaceTimeSolution",
    "face_norm",
    "state_norm",
]

CONSISTENCY_TOLERANCE = 1e-10


def state_norm(values: np.ndarray, grid: Grid) -> float:
    """Trapezoid L2 norm of a spatial sample."""
    return float(np.sqrt(np.sum(node_weights(grid) * np.abs(values) ** 2)))


def face_norm(faces: np.ndarray, grid: Grid) -> float:
    """Trapezoid L2 norm of face data over the lateral boundary."""
    weights = time_weights(grid)[:, None] * face_weights(grid)[None, :]
    return float(np.sqrt(np.sum(weights[None] * np.abs(faces) ** 2)))


def _as_complex(value: Any) -> np.ndarray:
    return frozen_array(np.asarray(value, dtype=complex))


class BoundaryInput(FieldModel):
    """Probe data g = (u0, f): an initial state and Dirichlet data on the sides.

    Faces are shaped (2n, N_t + 1, (N+1)^(n-1)). The data must be consistent,
    f(., 0) = u0 on the boundary, which is enforced. Whether the data also
    starts at rest, f(., 0) = d_t f(., 0) = 0, is only reported.
    """

    grid: Grid
    initial: np.ndarray
    faces: np.ndarray

    @field_validator("initial", "faces", mode="before")
    @classmethod
    def freeze_data(cls, value: Any) -> np.ndarray:
        """Store the data as read-only complex arrays."""
        return _as_complex(value)

    @model_validator(mode="after")
    def check_data(self) -> Self:
        """Check shapes and the consistency of the initial and boundary data."""
        grid = self.grid
        if self.initial.shape != grid.shape:
            raise ValueError(f"Initial state must have shape {grid.shape}")
        expected = (2 * grid.n, grid.n_t + 1, grid.face_size)
        if self.faces.shape != expected:
            raise ValueError(f"Face data must have shape {expected}")
        if not (np.all(np.isfinite(self.initial)) and np.all(np.isfinite(self.faces))):
            raise ValueError("Boundary input must be finite")
        if not self.consistent:
            raise ValueError("Dirichlet data at t = 0 does not match the initial state")
        return self

    @property
    def consistent(self) -> bool:
        """Whether f(., 0) agrees with u0 on the boundary."""
        mismatch = np.abs(self.faces[:, 0] - extract_faces(self.initial, self.grid))
        scale = max(1.0, float(np.max(np.abs(self.faces), initial=0.0)))
        return float(np.max(mismatch, initial=0.0)) <= CONSISTENCY_TOLERANCE * scale

    @property
    def starts_at_rest(self) -> bool:
        """Whether f(., 0) = d_t f(., 0) = 0 to tolerance."""
        scale = max(1.0, float(np.max(np.abs(self.faces), initial=0.0)))
        first = np.max(np.abs(self.faces[:, 0]), initial=0.0)
        derivative = (
            -3 * self.faces[:, 0] + 4 * self.faces[:, 1] - self.faces[:, 2]
        ) / (2 * self.grid.dt)
        slope = np.max(np.abs(derivative), initial=0.0)
        return max(first, slope) <= CONSISTENCY_TOLERANCE * scale

    @classmethod
    def zero(cls, grid: Grid) -> Self:
        """The vanishing probe."""
        return cls(
            grid=grid,
            initial=np.zeros(grid.shape),
            faces=np.zeros((2 * grid.n, grid.n_t + 1, grid.face_size)),
        )

    @classmethod
    def from_space_time(cls, grid: Grid, values: np.ndarray) -> Self:
        """Take u0 and f from the samples of a space-time function."""
        return cls(grid=grid, initial=values[0], faces=extract_faces(values, grid))

    def norm(self) -> float:
        """Discrete L2 pairing norm of the probe."""
        return float(
            np.hypot(
                state_norm(self.initial, self.grid), face_norm(self.faces, self.grid)
            )
        )

    def __add__(self, other: "BoundaryInput") -> "BoundaryInput":
        return BoundaryInput(
            grid=self.grid,
            initial=self.initial + other.initial,
            faces=self.faces + other.faces,
        )


class SpaceTimeSolution(FieldModel):
    """Nodal values of a solution at every time level with per-step norms."""

    grid: Grid
    values: np.ndarray
    l2_norms: np.ndarray
    h1_norms: np.ndarray

    @field_validator("values", "l2_norms", "h1_norms", mode="before")
    @classmethod
    def freeze_values(cls, value: Any) -> np.ndarray:
        """Store the samples as read-only arrays."""
        return frozen_array(value)

    @model_validator(mode="after")
    def check_shape(self) -> Self:
        """Check the samples against the grid."""
        if self.values.shape != self.grid.space_time_shape:
            raise ValueError(f"Solution must have shape {self.grid.space_time_shape}")
        return self

    @property
    def final_state(self) -> np.ndarray:
        """u(., T)."""
        return self.values[-1]


class ProbeMetadata(BaseModel):
    """Complex frequency parameters of the GO solution a probe was built from."""

    model_config = ConfigDict(extra="forbid", frozen=True)

    sigma: float
    xi: tuple[float, ...]
    y: tuple[float, ...]
    side: int = Field(..., ge=1, le=2)
    omega_real: tuple[float, ...] | None = None
    omega_imag: tuple[float, ...] | None = None

    def matches(self, other: "ProbeMetadata", tolerance: float = 1e-12) -> bool:
        """Whether both describe the same frequency data, ignoring the side."""
        pairs = [
            ((self.sigma,), (other.sigma,)),
            (self.xi, other.xi),
            (self.y, other.y),
            (self.omega_real or (), other.omega_real or ()),
            (self.omega_imag or (), other.omega_imag or ()),
        ]
        return all(
            len(left) == len(right)
            and np.allclose(left, right, rtol=tolerance, atol=tolerance)
            for left, right in pairs
        )


class DtnRecord(FieldModel):
    """The measured pair (u(., T), (d_nu + i A.nu) u on the lateral boundary)."""

    grid: Grid
    final_state: np.ndarray
    trace: np.ndarray
    probe_norm: float = Field(..., ge=0)
    probe: ProbeMetadata | None = None

    @field_validator("final_state", "trace", mode="before")
    @classmethod
    def freeze_record(cls, value: Any) -> np.ndarray:
        """Store both components as read-only complex arrays."""
        return _as_complex(value)

    @model_validator(mode="after")
    def check_shape(self) -> Self:
        """Check that the record has one value per boundary node and step."""
        grid = self.grid
        expected = (2 * grid.n, grid.n_t + 1, grid.face_size)
        if self.final_state.shape != grid.shape or self.trace.shape != expected:
            raise ValueError("DtN record does not fit its grid")
        if not (
            np.all(np.isfinite(self.final_state)) and np.all(np.isfinite(self.trace))
        ):
            raise ValueError("DtN record must be finite")
        return self

    def difference(self, other: "DtnRecord") -> "DtnRecord":
        """Componentwise self - other, keeping the probe bookkeeping."""
        if other.grid != self.grid:
            raise ValueError("Records live on different grids")
        return self.model_copy(
            update={
                "final_state": frozen_array(self.final_state - other.final_state),
                "trace": frozen_array(self.trace - other.trace),
            }
        )

    def norm(self) -> float:
        """Discrete L2 norm of both components."""
        return float(
            np.hypot(
                state_norm(self.final_state, self.grid),
                face_norm(self.trace, self.grid),
            )
        )

    def operational_norm(self) -> float:
        """Norm of the record relative to the norm of its probe."""
        if self.probe_norm == 0:
            return 0.0 if self.norm() == 0 else float("inf")
        return self.norm() / self.probe_norm


class EnergyReport(BaseModel):
    """Both sides of the energy estimate of the forward problem."""

    model_config = ConfigDict(extra="forbid", frozen=True)

    lhs: float = Field(..., description="max_t ||u(t)||_H1 + ||d_nu u||_L2(boundary)")
    rhs: float = Field(..., description="||u0||_H2 + ||f||_H21(boundary)")
    ratio: float
    degenerate: bool = Field(
        ..., description="Set when both sides vanish and the ratio is undefined."
    )
    l2_drift: float = Field(
        ..., description="max_t | ||u(t)||_L2 - ||u0||_L2 | / ||u0||_L2"
    )
