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

"""Finite-difference operators on the node grid.

Arrays either hold one spatial sample (n axes) or carry extra leading axes
(time, components). The spatial axes are always the trailing n axes.
Derivatives are central in the interior and one-sided first order on faces.
"""

from functools import reduce

import numpy as np
from scipy import sparse

from dtn_inverse.field_core.models import CurlField, Grid, VectorField

__all__ = [
    "curl",
    "difference_operators",
    "divergence",
    "gradient",
    "interior_slices",
    "laplacian",
    "magnetic_laplacian",
    "partial",
]


def _offset(values: np.ndarray, grid: Grid) -> int:
    offset = values.ndim - grid.n
    if offset < 0:
        raise ValueError(f"Array with {values.ndim} axes is not a field on {grid}")
    return offset


def interior_slices(values: np.ndarray, grid: Grid, depth: int = 1) -> tuple:
    """Index selecting the nodes at least `depth` steps away from every face."""
    offset = _offset(values, grid)
    stop = grid.n_x + 1 - depth
    return (slice(None),) * offset + (slice(depth, stop),) * grid.n


def partial(values: np.ndarray, grid: Grid, axis: int) -> np.ndarray:
    """Derivative along spatial `axis`."""
    offset = _offset(values, grid)
    return np.gradient(values, grid.h, axis=offset + axis, edge_order=1)


def gradient(values: np.ndarray, grid: Grid) -> np.ndarray:
    """All spatial derivatives, stacked along a new leading axis."""
    return np.stack([partial(values, grid, axis) for axis in range(grid.n)])


def divergence(field: VectorField) -> np.ndarray:
    """Central-difference divergence of a vector potential."""
    return sum(
        (
            partial(field.components[k], field.grid, k)
            for k in range(field.grid.n)
        ),
        start=np.zeros(field.grid.shape),
    )


def curl(field: VectorField) -> CurlField:
    """The matrix field sigma_jk = d_j a_k - d_k a_j."""
    grid = field.grid
    upper = {}
    for j in range(grid.n):
        for k in range(j + 1, grid.n):
            upper[(j, k)] = partial(field.components[k], grid, j) - partial(
                field.components[j], grid, k
            )
    return CurlField.from_upper(grid, upper)


def laplacian(values: np.ndarray, grid: Grid) -> np.ndarray:
    """Seven-point (2n+1-point) Laplacian; zero on the boundary nodes."""
    offset = _offset(values, grid)
    inner = interior_slices(values, grid)
    out = np.zeros_like(values)
    for axis in range(grid.n):
        forward = list(inner)
        backward = list(inner)
        forward[offset + axis] = slice(2, None)
        backward[offset + axis] = slice(None, -2)
        out[inner] += (
            values[tuple(forward)] - 2 * values[inner] + values[tuple(backward)]
        )
    return out / grid.h**2


def magnetic_laplacian(
    values: np.ndarray, components: np.ndarray, grid: Grid
) -> np.ndarray:
    """Apply the symmetric discretisation of the magnetic Laplacian.

    Computes Lap(u) + i sum_k (a_k D_k u + D_k(a_k u)) - |a|^2 u, which is
    the same operator the forward solver assembles as a sparse matrix.
    Values are meaningful on the interior nodes only.
    """
    out = laplacian(values, grid).astype(complex)
    for k in range(grid.n):
        a_k = components[k]
        out += 1j * (a_k * partial(values, grid, k) + partial(a_k * values, grid, k))
    return out - np.sum(components**2, axis=0) * values


def _axis_operator(
    grid: Grid, stencil: sparse.spmatrix, axis: int
) -> sparse.csr_matrix:
    identity = sparse.identity(grid.n_x + 1, format="csr")
    factors = [stencil if k == axis else identity for k in range(grid.n)]
    return reduce(lambda left, right: sparse.kron(left, right, format="csr"), factors)


def difference_operators(
    grid: Grid,
) -> tuple[sparse.csr_matrix, list[sparse.csr_matrix]]:
    """Sparse Laplacian and central first-difference matrices on all nodes.

    The first differences are skew-symmetric: rows of boundary nodes simply
    drop the missing neighbour. Only interior rows enter the time stepper.
    """
    m = grid.n_x + 1
    second = sparse.diags([1.0, -2.0, 1.0], [-1, 0, 1], shape=(m, m)) / grid.h**2
    first = sparse.diags([-1.0, 1.0], [-1, 1], shape=(m, m)) / (2 * grid.h)
    lap = sum(
        (_axis_operator(grid, second, axis) for axis in range(grid.n)),
        start=sparse.csr_matrix((m**grid.n, m**grid.n)),
    )
    derivatives = [_axis_operator(grid, first, axis) for axis in range(grid.n)]
    return lap.tocsr(), derivatives
