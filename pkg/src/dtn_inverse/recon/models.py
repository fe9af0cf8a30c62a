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

"""Fourier samples, frequency cones and reconstructions of the coefficients."""

import cmath
from collections.abc import Sequence
from typing import Any, Self

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

from dtn_inverse.field_core.models import (
    CurlField,
    FieldModel,
    Grid,
    ScalarSpaceTimeField,
    VectorField,
    frozen_array,
)

__all__ = [
    "BallExtension",
    "CoefficientPair",
    "CurlReconstruction",
    "CurlSample",
    "ElectricReconstruction",
    "FourierSampleSet",
    "FrequencyCone",
    "QSample",
    "QSampleSet",
]

_MEMBERSHIP_TOLERANCE = 1e-12


def _finite(*values: complex) -> bool:
    return all(cmath.isfinite(value) for value in values)


class CoefficientPair(FieldModel):
    """The coefficients (A, q) of one magnetic Schroedinger operator."""

    potential: VectorField
    q: ScalarSpaceTimeField

    @model_validator(mode="after")
    def check_grid(self) -> Self:
        """Both coefficients must live on the same grid."""
        if self.potential.grid != self.q.grid:
            raise ValueError("A and q live on different grids")
        return self

    @property
    def grid(self) -> Grid:
        """The common grid."""
        return self.potential.grid


class CurlSample(BaseModel):
    """One sample of sigma_jk at xi built from a pair of reflected probes."""

    model_config = ConfigDict(extra="forbid", frozen=True)

    xi: tuple[float, ...]
    pair: tuple[int, int]
    value: complex
    sigma: float = Field(..., gt=0)
    directional: tuple[complex, complex] = Field(
        ..., description="Normalised boundary functionals of the +omega/-omega frames."
    )
    time_weight: complex = Field(
        ..., description="Time quadrature of the discrete carrier product."
    )
    probe_norms: tuple[float, float] = Field(
        ..., description="Norms of the two probes g."
    )

    @model_validator(mode="after")
    def check_sample(self) -> Self:
        """Values must be finite and the index pair distinct."""
        j, k = self.pair
        if j == k or min(j, k) < 0 or max(j, k) >= len(self.xi):
            raise ValueError(f"Invalid index pair {self.pair}")
        if not _finite(self.value, *self.directional, self.time_weight):
            raise ValueError("Curl samples must be finite")
        return self


class FourierSampleSet(BaseModel):
    """Samples of the magnetic field on a frequency lattice cut at a radius."""

    model_config = ConfigDict(extra="forbid", frozen=True)

    target: str = "curl"
    radius: float = Field(..., ge=0)
    samples: tuple[CurlSample, ...] = ()

    @model_validator(mode="after")
    def check_radius(self) -> Self:
        """Every sample must lie in the declared ball."""
        for sample in self.samples:
            if np.linalg.norm(sample.xi) > self.radius * (1 + _MEMBERSHIP_TOLERANCE):
                raise ValueError(f"Sample at {sample.xi} lies beyond {self.radius}")
        return self

    def lookup(self, xi: Sequence[float], pair: tuple[int, int]) -> complex | None:
        """The sampled value of sigma_jk at xi, using antisymmetry if needed."""
        j, k = pair
        for sample in self.samples:
            if not np.allclose(sample.xi, xi, atol=1e-9):
                continue
            if sample.pair == (j, k):
                return sample.value
            if sample.pair == (k, j):
                return -sample.value
        return None

    def values_for(self, pair: tuple[int, int]) -> tuple[np.ndarray, np.ndarray]:
        """Frequencies and values sampled for one ordered index pair."""
        chosen = [s for s in self.samples if s.pair == pair]
        xis = np.asarray([s.xi for s in chosen], dtype=float)
        values = np.asarray([s.value for s in chosen], dtype=complex)
        return xis, values

    def antisymmetry_defect(self) -> float:
        """Largest |sigma_jk(xi) + sigma_kj(xi)| over pairs sampled both ways."""
        defect = 0.0
        for sample in self.samples:
            j, k = sample.pair
            for other in self.samples:
                if other.pair == (k, j) and np.allclose(other.xi, sample.xi):
                    defect = max(defect, abs(sample.value + other.value))
        return defect

    def hermitian_defect(self) -> float:
        """Largest |sigma_jk(-xi) - conj(sigma_jk(xi))| over sampled pairs."""
        defect = 0.0
        for sample in self.samples:
            mirrored = self.lookup(-np.asarray(sample.xi), sample.pair)
            if mirrored is not None:
                defect = max(defect, abs(mirrored - np.conj(sample.value)))
        return defect

    def max_abs(self) -> float:
        """Largest sampled magnitude."""
        return max((abs(s.value) for s in self.samples), default=0.0)


class QSample(BaseModel):
    """One sample of the Fourier transform of q at (xi, tau)."""

    model_config = ConfigDict(extra="forbid", frozen=True)

    xi: tuple[float, ...]
    tau: float
    y: tuple[float, ...]
    value: complex
    tau_effective: complex = Field(
        ...,
        description=(
            "Time frequency actually probed by the discrete carriers, at which"
            " the value approximates the transform."
        ),
    )
    sigma: float = Field(..., gt=0)
    probe_norm: float = Field(..., ge=0)

    @model_validator(mode="after")
    def check_y(self) -> Self:
        """y = tau xi / (2 |xi|^2) with |y| < 1."""
        xi = np.asarray(self.xi)
        squared = float(xi @ xi)
        if squared == 0:
            raise ValueError("xi must not vanish")
        expected = self.tau * xi / (2 * squared)
        if not np.allclose(self.y, expected, rtol=1e-10, atol=1e-12):
            raise ValueError("y does not match tau xi / (2 |xi|^2)")
        if np.linalg.norm(self.y) >= 1:
            raise ValueError("|y| must be below 1")
        if not _finite(self.value, self.tau_effective):
            raise ValueError("q samples must be finite")
        return self

    @property
    def point(self) -> np.ndarray:
        """(xi, tau) as one vector."""
        return np.append(np.asarray(self.xi), self.tau)

    @property
    def effective_point(self) -> np.ndarray:
        """(xi, tau_effective) as one complex vector."""
        return np.append(np.asarray(self.xi, dtype=complex), self.tau_effective)


class QSampleSet(BaseModel):
    """Samples of the electric potential on a frequency cone."""

    model_config = ConfigDict(extra="forbid", frozen=True)

    alpha: float = Field(..., gt=0)
    samples: tuple[QSample, ...] = ()

    @model_validator(mode="after")
    def check_membership(self) -> Self:
        """Every sample must lie in the cone of the set."""
        for sample in self.samples:
            norm = float(np.linalg.norm(sample.xi))
            if not (norm < 2 * self.alpha and abs(sample.tau) < 2 * norm):
                raise ValueError(
                    f"({sample.xi}, {sample.tau}) lies outside the cone of"
                    f" alpha={self.alpha}"
                )
        return self

    def hermitian_defect(self) -> float:
        """Largest |q(-xi, -tau) - conj(q(xi, tau))| over sampled points."""
        defect = 0.0
        for sample in self.samples:
            for other in self.samples:
                if np.allclose(other.point, -sample.point, atol=1e-9):
                    defect = max(defect, abs(other.value - np.conj(sample.value)))
        return defect


class FrequencyCone(FieldModel):
    """Lattice points (xi, tau) with xi != 0, |xi| < 2 alpha and |tau| < 2 |xi|."""

    alpha: float = Field(..., gt=0)
    points: np.ndarray = Field(..., description="Points shaped (count, n + 1).")

    @field_validator("points", mode="before")
    @classmethod
    def freeze_points(cls, value: Any) -> np.ndarray:
        """Store the points read-only."""
        return frozen_array(np.asarray(value, dtype=float))

    @model_validator(mode="after")
    def check_points(self) -> Self:
        """Every point must satisfy both strict inequalities."""
        if self.points.ndim != 2:
            raise ValueError("Cone points must be a two-dimensional array")
        for point in self.points:
            norm = float(np.linalg.norm(point[:-1]))
            if norm == 0 or not norm < 2 * self.alpha or not abs(point[-1]) < 2 * norm:
                raise ValueError(f"{tuple(point)} lies outside the cone")
        return self

    @property
    def empty(self) -> bool:
        """Whether the lattice misses the cone."""
        return len(self.points) == 0


class BallExtension(FieldModel):
    """Polynomial extension of cone samples evaluated on a ball lattice."""

    alpha: float = Field(..., gt=0)
    points: np.ndarray
    values: np.ndarray
    degree: int = Field(..., ge=0)
    residual: float = Field(..., description="Relative residual of the fit.")
    rank: int
    condition: float
    sampled: int = Field(
        default=0, ge=0, description="Ball points taken directly from cone samples."
    )

    @field_validator("points", "values", mode="before")
    @classmethod
    def freeze_arrays(cls, value: Any) -> np.ndarray:
        """Store the arrays read-only."""
        return frozen_array(value)

    @model_validator(mode="after")
    def check_values(self) -> Self:
        """One value per point."""
        if len(self.points) != len(self.values):
            raise ValueError("Ball extension needs one value per point")
        return self


class CurlReconstruction(FieldModel):
    """A band-limited magnetic field together with its samples."""

    field: CurlField
    samples: FourierSampleSet
    sigma: float
    radius: float


class ElectricReconstruction(FieldModel):
    """A band-limited electric potential together with its cone samples."""

    field: ScalarSpaceTimeField
    samples: QSampleSet
    extension: BallExtension | None
    sigma: float
    alpha: float
