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

"""Frequency frames, complex frequencies and geometrical optics solutions."""

from typing import Any, Self

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

from dtn_inverse.field_core.models import FieldModel, Grid, frozen_array
from dtn_inverse.forward.models import BoundaryInput, ProbeMetadata
from dtn_inverse.transport.models import ComplexDirection, PhaseField

__all__ = [
    "ComplexFrequency",
    "FrequencyFrame",
    "GoRemainder",
    "GoSolution",
    "MultiplierResult",
    "RemainderNorms",
]

FRAME_TOLERANCE = 1e-12


class FrequencyFrame(BaseModel):
    """xi with an orthonormal pair omega_R, omega_I orthogonal to it."""

    model_config = ConfigDict(extra="forbid", frozen=True)

    xi: tuple[float, ...]
    omega_real: tuple[float, ...]
    omega_imag: tuple[float, ...]
    y: tuple[float, ...]
    sigma: float = Field(..., gt=0)
    side: int = Field(..., ge=1, le=2)

    @model_validator(mode="after")
    def check_frame(self) -> Self:
        """Check orthogonality, unit lengths and the admissible range of sigma."""
        xi, real, imag, y = (
            np.asarray(v) for v in (self.xi, self.omega_real, self.omega_imag, self.y)
        )
        if not len(xi) == len(real) == len(imag) == len(y):
            raise ValueError("All vectors of a frame need the same dimension")
        if len(xi) < 3:
            raise ValueError("A frame needs at least three dimensions")
        products = (real @ imag, xi @ real, xi @ imag)
        scale = max(1.0, float(np.linalg.norm(xi)))
        if max(abs(p) for p in products) > FRAME_TOLERANCE * scale:
            raise ValueError("omega_R, omega_I and xi must be mutually orthogonal")
        if max(abs(real @ real - 1), abs(imag @ imag - 1)) > FRAME_TOLERANCE:
            raise ValueError("omega_R and omega_I must be unit vectors")
        if np.linalg.norm(y) >= 1:
            raise ValueError("|y| must be below 1")
        if self.sigma <= np.linalg.norm(xi) / 2:
            raise ValueError("sigma must exceed |xi| / 2")
        return self

    @property
    def dimension(self) -> int:
        """The spatial dimension n."""
        return len(self.xi)

    def with_side(self, side: int) -> "FrequencyFrame":
        """The same frame for the other GO solution of a pair."""
        return self.model_copy(update={"side": side})


class ComplexFrequency(BaseModel):
    """rho = sigma omega* + y for one side of a frame."""

    model_config = ConfigDict(extra="forbid", frozen=True)

    frame: FrequencyFrame
    rho_real: tuple[float, ...]
    rho_imag: tuple[float, ...]
    partner_gap_real: tuple[float, ...] = Field(
        ..., description="Real part of rho_2 - conj(rho_1)."
    )
    partner_gap_imag: tuple[float, ...]
    phase_shift: complex = Field(
        ..., description="rho_2 . rho_2 - conj(rho_1 . rho_1), equal to 2 y . xi."
    )

    @property
    def rho(self) -> np.ndarray:
        """The complex vector rho."""
        return np.asarray(self.rho_real) + 1j * np.asarray(self.rho_imag)

    @property
    def sigma(self) -> float:
        """Size of the complex frequency."""
        return self.frame.sigma

    @property
    def side(self) -> int:
        """Side of the frame rho belongs to."""
        return self.frame.side

    @property
    def rho_dot_rho(self) -> complex:
        """The bilinear square rho . rho, zero when y = 0."""
        return complex(self.rho @ self.rho)

    @property
    def partner_gap(self) -> np.ndarray:
        """rho_2 - conj(rho_1), equal to xi."""
        return np.asarray(self.partner_gap_real) + 1j * np.asarray(
            self.partner_gap_imag
        )

    @property
    def direction(self) -> ComplexDirection:
        """The unit complex direction omega* = (rho - y) / sigma."""
        return ComplexDirection.from_vector(
            (self.rho - np.asarray(self.frame.y)) / self.sigma
        )

    def probe_metadata(self) -> ProbeMetadata:
        """Bookkeeping data attached to DtN records of this frequency."""
        frame = self.frame
        return ProbeMetadata(
            sigma=frame.sigma,
            xi=frame.xi,
            y=frame.y,
            side=frame.side,
            omega_real=frame.omega_real,
            omega_imag=frame.omega_imag,
        )


class MultiplierResult(FieldModel):
    """Output of the symbol inverse or of its Picard iteration."""

    grid: Grid
    values: np.ndarray
    residual: float = Field(
        ..., description="Relative residual of the applied operator on the domain."
    )
    regularized_residual: float = Field(
        default=0.0,
        description="Relative residual with the shifted symbol in place of p.",
    )
    iterations: int = 0
    contraction: float = Field(
        default=0.0, description="Largest ratio of successive Picard updates."
    )
    floored: int = Field(
        default=0, description="Number of modes whose symbol was shifted."
    )

    @field_validator("values", mode="before")
    @classmethod
    def freeze_values(cls, value: Any) -> np.ndarray:
        """Store the samples read-only."""
        return frozen_array(np.asarray(value, dtype=complex))


class RemainderNorms(BaseModel):
    """Discrete norms of the remainder w."""

    model_config = ConfigDict(extra="forbid", frozen=True)

    l2_h1: float
    l2_h2: float
    dt_l2_h1: float
    dtt_l2_h1: float = Field(
        ..., description="Reported only, second differences amplify noise."
    )


class GoSolution(FieldModel):
    """Discrete solution sharing its data with the GO principal part.

    The principal part is carrier e^{i phi} with the carrier
    e^{-i((rho.rho) t + (x - x_c).rho)}.

    The carrier is the discrete plane wave of the time stepper, so its
    temporal factor is the per-step `carrier_rate` rather than
    e^{-i (rho.rho) dt}. `values` solves the scheme and shares its initial
    and lateral data with carrier e^{i phi}; the remainder of the GO ansatz
    carrier (e^{i phi} + w) is built separately as a GoRemainder.
    """

    frequency: ComplexFrequency
    phase: PhaseField
    carrier: np.ndarray
    carrier_rate: complex
    carrier_symbol: complex = Field(
        ..., description="Discrete symbol of the Laplacian on the spatial carrier."
    )
    values: np.ndarray
    residual: float = Field(
        ..., description="max |scheme residual of u| / (sigma^2 max |u|)."
    )
    contraction: float = Field(..., description="2 ||A||_W1inf")

    @field_validator("carrier", "values", mode="before")
    @classmethod
    def freeze_arrays(cls, value: Any) -> np.ndarray:
        """Store the samples read-only."""
        return frozen_array(np.asarray(value, dtype=complex))

    @property
    def grid(self) -> Grid:
        """The grid the solution is sampled on."""
        return self.phase.grid

    @property
    def principal(self) -> np.ndarray:
        """carrier e^{i phi}."""
        return self.carrier * np.exp(1j * self.phase.values)[None]

    def boundary_input(self) -> BoundaryInput:
        """The probe g = (u(., 0), u on the lateral boundary)."""
        return BoundaryInput.from_space_time(self.grid, self.values)

    def probe_metadata(self) -> ProbeMetadata:
        """Bookkeeping data of the underlying frequency."""
        return self.frequency.probe_metadata()


class GoRemainder(FieldModel):
    """The remainder w of the GO ansatz carrier (e^{i phi} + w).

    w solves (i d_t + Lap_rho + 2i A.grad_rho + h) w = L on the periodic box.
    """

    grid: Grid
    sigma: float = Field(..., gt=0)
    values: np.ndarray
    norms: RemainderNorms
    residual: float = Field(
        ...,
        description=(
            "max |scheme residual of carrier (e^{i phi} + w)|"
            " / (sigma^2 max |carrier (e^{i phi} + w)|)."
        ),
    )
    equation_residual: float = Field(
        ...,
        description="Relative residual of the remainder equation with shifted symbol.",
    )
    source_defect: float = Field(
        ...,
        description="Relative gap between the discrete source and the analytic L.",
    )
    iterations: int = Field(..., ge=0)
    floored: int = Field(
        default=0, description="Number of box modes whose symbol was shifted."
    )

    @field_validator("values", mode="before")
    @classmethod
    def freeze_values(cls, value: Any) -> np.ndarray:
        """Store the samples read-only."""
        return frozen_array(np.asarray(value, dtype=complex))
