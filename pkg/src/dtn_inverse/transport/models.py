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

"""Complex directions and transport phases."""

from typing import NamedTuple, Self

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, model_validator

from dtn_inverse.field_core.models import FieldModel, Grid, frozen_array

__all__ = ["CancellationCheck", "ComplexDirection", "PhaseField"]

_UNIT_TOLERANCE = 1e-12


class ComplexDirection(BaseModel):
    """A complex direction omega = omega_R + i omega_I with orthonormal parts."""

    model_config = ConfigDict(extra="forbid", frozen=True)

    real: tuple[float, ...]
    imag: tuple[float, ...]

    @model_validator(mode="after")
    def check_orthonormal(self) -> Self:
        """Reject parts that are not orthonormal."""
        real, imag = np.asarray(self.real), np.asarray(self.imag)
        if real.shape != imag.shape:
            raise ValueError("Real and imaginary parts differ in dimension")
        if max(abs(real @ real - 1), abs(imag @ imag - 1)) > _UNIT_TOLERANCE:
            raise ValueError("Both parts of a complex direction must be unit vectors")
        if abs(real @ imag) > _UNIT_TOLERANCE:
            raise ValueError("The parts of a complex direction must be orthogonal")
        return self

    @classmethod
    def from_vector(cls, vector: np.ndarray) -> Self:
        """Split a complex vector into its parts."""
        vector = np.asarray(vector, dtype=complex)
        return cls(real=tuple(vector.real), imag=tuple(vector.imag))

    @property
    def vector(self) -> np.ndarray:
        """The complex vector omega."""
        return np.asarray(self.real) + 1j * np.asarray(self.imag)

    def apply(self, components: np.ndarray) -> np.ndarray:
        """Nodal values of omega . v for a vector of stacked components."""
        return np.tensordot(self.vector, components, axes=1)

    def reflected(self) -> Self:
        """The direction -omega_R + i omega_I."""
        return type(self)(real=tuple(-np.asarray(self.real)), imag=self.imag)


class PhaseField(FieldModel):
    """phi = N_omega^{-1} g together with its source and diagnostics."""

    grid: Grid
    direction: ComplexDirection
    values: np.ndarray
    source: np.ndarray
    residual: float = Field(
        ..., description="max |omega . grad(phi) - g| over the interior nodes."
    )
    bound_ratio: float = Field(
        ..., description="||phi||_Linf / ||g||_Linf, NaN for a vanishing source."
    )

    @model_validator(mode="before")
    @classmethod
    def freeze_arrays(cls, data: dict) -> dict:
        """Store both arrays read-only."""
        if isinstance(data, dict):
            for key in ("values", "source"):
                if key in data:
                    data[key] = frozen_array(np.asarray(data[key], dtype=complex))
        return data


class CancellationCheck(NamedTuple):
    """Both sides of the phase cancellation identity and their gap."""

    lhs: complex
    rhs: complex
    gap: float
