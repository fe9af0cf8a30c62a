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

"""Grids and the coefficient fields sampled on them."""

from collections.abc import Callable
from enum import Enum
from typing import Annotated, Any, Self

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

__all__ = [
    "BumpSpec",
    "CurlField",
    "FieldModel",
    "Grid",
    "HodgeResult",
    "NormId",
    "PoissonSolution",
    "ScalarField",
    "ScalarSpaceTimeField",
    "VectorField",
    "frozen_array",
]


def frozen_array(value: Any) -> np.ndarray:
    """Return a read-only copy of the given array-like."""
    array = np.array(value, copy=True)
    array.setflags(write=False)
    return array


class NormId(str, Enum):
    """Discrete norms understood by the norm evaluator."""

    L2 = "L2"
    LINF = "Linf"
    W1INF = "W1inf"
    HMINUS1 = "H-1"
    H1 = "H1"
    H2 = "H2"


class Grid(BaseModel):
    """Uniform node grid on the unit cube together with a time grid on [0, T].

    Nodes are numbered 0..N along every axis, so the spacing is h = 1/N.
    Spatial arrays are indexed [x1, ..., xn], space-time arrays carry the
    time index first.
    """

    model_config = ConfigDict(extra="forbid", frozen=True)

    n: Annotated[int, Field(ge=3, description="Spatial dimension.")] = 3
    n_x: Annotated[
        int, Field(ge=8, description="Number of spatial intervals per axis.")
    ] = 16
    n_t: Annotated[int, Field(ge=16, description="Number of time steps.")] = 64
    horizon: Annotated[
        float, Field(gt=0, allow_inf_nan=False, description="Final time T.")
    ] = 1.0

    @property
    def h(self) -> float:
        """Spatial step."""
        return 1.0 / self.n_x

    @property
    def dt(self) -> float:
        """Time step."""
        return self.horizon / self.n_t

    @property
    def shape(self) -> tuple[int, ...]:
        """Shape of a spatial node array."""
        return (self.n_x + 1,) * self.n

    @property
    def space_time_shape(self) -> tuple[int, ...]:
        """Shape of a space-time node array."""
        return (self.n_t + 1, *self.shape)

    @property
    def face_size(self) -> int:
        """Number of nodes on one face of the cube."""
        return (self.n_x + 1) ** (self.n - 1)

    def nodes(self) -> np.ndarray:
        """Node coordinates along one axis."""
        return np.linspace(0.0, 1.0, self.n_x + 1)

    def times(self) -> np.ndarray:
        """Time levels t_0, ..., t_Nt."""
        return np.linspace(0.0, self.horizon, self.n_t + 1)

    def mesh(self) -> np.ndarray:
        """Coordinates of all nodes, shaped (n, N+1, ..., N+1)."""
        return np.stack(np.meshgrid(*([self.nodes()] * self.n), indexing="ij"))

    def interior_mask(self, depth: int = 1) -> np.ndarray:
        """Mask of the nodes with at least `depth` nodes to every face."""
        mask = np.zeros(self.shape, dtype=bool)
        mask[(slice(depth, self.n_x + 1 - depth),) * self.n] = True
        return mask

    def boundary_mask(self) -> np.ndarray:
        """Mask of the nodes on the boundary of the cube."""
        return ~self.interior_mask()


class FieldModel(BaseModel):
    """Base model for immutable containers of sampled values."""

    model_config = ConfigDict(
        extra="forbid", frozen=True, arbitrary_types_allowed=True
    )


class _SampledField(FieldModel):
    grid: Grid
    values: np.ndarray

    @field_validator("values", mode="before")
    @classmethod
    def freeze_values(cls, value: Any) -> np.ndarray:
        """Store the samples as a read-only array."""
        return frozen_array(value)

    def _check(self, expected: tuple[int, ...]) -> None:
        if self.values.shape != expected:
            raise ValueError(
                f"Expected samples of shape {expected}, got {self.values.shape}"
            )
        if not np.all(np.isfinite(self.values)):
            raise ValueError("Samples must be finite")


class ScalarField(_SampledField):
    """A real or complex scalar sampled at the spatial nodes."""

    @model_validator(mode="after")
    def check_shape(self) -> Self:
        """Check the samples against the grid."""
        self._check(self.grid.shape)
        return self


class VectorField(FieldModel):
    """A real vector potential A sampled at the spatial nodes."""

    grid: Grid
    components: np.ndarray = Field(
        ..., description="Samples shaped (n, N+1, ..., N+1)."
    )

    @field_validator("components", mode="before")
    @classmethod
    def freeze_components(cls, value: Any) -> np.ndarray:
        """Store the samples as a read-only real array."""
        array = np.asarray(value)
        if np.iscomplexobj(array):
            raise ValueError("A vector potential must be real")
        return frozen_array(array.astype(float))

    @model_validator(mode="after")
    def check_shape(self) -> Self:
        """Check the samples against the grid."""
        expected = (self.grid.n, *self.grid.shape)
        if self.components.shape != expected:
            raise ValueError(
                f"Expected components of shape {expected},"
                f" got {self.components.shape}"
            )
        if not np.all(np.isfinite(self.components)):
            raise ValueError("Components must be finite")
        return self

    @classmethod
    def zeros(cls, grid: Grid) -> Self:
        """The vanishing potential."""
        return cls(grid=grid, components=np.zeros((grid.n, *grid.shape)))

    @property
    def support(self) -> np.ndarray:
        """Mask of the nodes where some component does not vanish."""
        return np.any(self.components != 0, axis=0)

    def vanishes_on_boundary(self) -> bool:
        """Whether every component is zero on the boundary nodes."""
        return not np.any(self.support & self.grid.boundary_mask())

    def squared_magnitude(self) -> np.ndarray:
        """Nodal values of |A|^2."""
        return np.sum(self.components**2, axis=0)

    def __sub__(self, other: "VectorField") -> "VectorField":
        if other.grid != self.grid:
            raise ValueError("Fields live on different grids")
        return VectorField(
            grid=self.grid, components=self.components - other.components
        )


class ScalarSpaceTimeField(_SampledField):
    """A scalar sampled on the space-time grid, shaped (N_t+1, N+1, ..., N+1).

    Electric potentials q are real. Complex values are accepted for sources
    of the forward problem.
    """

    @model_validator(mode="after")
    def check_shape(self) -> Self:
        """Check the samples against the grid."""
        self._check(self.grid.space_time_shape)
        return self

    @classmethod
    def zeros(cls, grid: Grid) -> Self:
        """The vanishing field."""
        return cls(grid=grid, values=np.zeros(grid.space_time_shape))

    @classmethod
    def from_function(
        cls, grid: Grid, function: Callable[[np.ndarray, np.ndarray], np.ndarray]
    ) -> Self:
        """Sample `function(x, t)` where x is shaped like `Grid.mesh()`."""
        mesh = grid.mesh()
        values = np.stack([function(mesh, np.asarray(t)) for t in grid.times()])
        return cls(grid=grid, values=values)

    @property
    def is_real(self) -> bool:
        """Whether the samples are real."""
        return not np.iscomplexobj(self.values)

    def vanishes_on_boundary(self) -> bool:
        """Whether the field is zero on the lateral boundary at all times."""
        return not np.any(self.values[:, self.grid.boundary_mask()])

    def is_time_independent(self) -> bool:
        """Whether all time slices agree."""
        return bool(np.all(self.values == self.values[:1]))


class CurlField(FieldModel):
    """The antisymmetric matrix field of a curl, shaped (n, n, N+1, ..., N+1)."""

    grid: Grid
    components: np.ndarray

    @field_validator("components", mode="before")
    @classmethod
    def freeze_components(cls, value: Any) -> np.ndarray:
        """Store the samples as a read-only array."""
        return frozen_array(value)

    @model_validator(mode="after")
    def check_antisymmetry(self) -> Self:
        """Reject matrix fields that are not exactly antisymmetric."""
        n = self.grid.n
        expected = (n, n, *self.grid.shape)
        if self.components.shape != expected:
            raise ValueError(
                f"Expected components of shape {expected},"
                f" got {self.components.shape}"
            )
        if np.any(self.components + np.swapaxes(self.components, 0, 1)):
            raise ValueError("A curl field must be antisymmetric")
        return self

    @classmethod
    def from_upper(cls, grid: Grid, upper: dict[tuple[int, int], np.ndarray]) -> Self:
        """Assemble the matrix field from the entries above the diagonal."""
        components = np.zeros((grid.n, grid.n, *grid.shape), dtype=float)
        for (j, k), values in upper.items():
            if not j < k:
                raise ValueError(f"Index pair {(j, k)} is not above the diagonal")
            components[j, k] = values
            components[k, j] = -np.asarray(values)
        return cls(grid=grid, components=components)

    def upper(self) -> np.ndarray:
        """Entries with j < k stacked along the first axis."""
        rows, cols = np.triu_indices(self.grid.n, k=1)
        return self.components[rows, cols]


class BumpSpec(BaseModel):
    """A smooth compactly supported bump (1 - |x - c|^2 / R^2)^4.

    `direction` orients plain potentials. `plane` selects the axes (j, k)
    of the stream function used for divergence-free potentials.
    """

    model_config = ConfigDict(extra="forbid", frozen=True)

    center: tuple[float, ...]
    radius: Annotated[float, Field(gt=0, allow_inf_nan=False)]
    amplitude: Annotated[float, Field(allow_inf_nan=False)] = 1.0
    direction: tuple[float, ...] | None = None
    plane: tuple[int, int] = (0, 1)


class PoissonSolution(FieldModel):
    """Solution of a Dirichlet Poisson problem with its relative residual."""

    values: np.ndarray
    residual: float
    iterations: int | None = None


class HodgeResult(FieldModel):
    """Solenoidal projection A' = A - grad(phi) and its diagnostics."""

    potential: np.ndarray = Field(..., description="The gauge potential phi.")
    solenoidal: VectorField
    max_divergence: float = Field(
        ..., description="Largest |div A'| over the nodes two steps inside."
    )
    ratio: float = Field(
        ..., description="||A'||_W1inf / ||curl A'||_Linf, NaN for a curl-free A."
    )
    poisson_residual: float
