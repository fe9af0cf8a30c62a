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

"""Trapezoid weights and access to the faces of the cube.

Face data is stored as an array shaped (2n, ..., (N+1)^(n-1)): faces are
ordered axis 0 low, axis 0 high, axis 1 low and so on, and the nodes of a
face are flattened in row-major order.
"""

from functools import reduce

import numpy as np

from dtn_inverse.field_core.models import Grid

__all__ = [
    "extract_faces",
    "face_index",
    "face_weights",
    "fill_faces",
    "node_weights",
    "space_time_pairing",
    "surface_pairing",
    "time_weights",
    "volume_pairing",
]


def _trapezoid(count: int, step: float) -> np.ndarray:
    weights = np.full(count, step)
    weights[[0, -1]] = step / 2
    return weights


def _outer(vectors: list[np.ndarray]) -> np.ndarray:
    return reduce(np.multiply.outer, vectors)


def node_weights(grid: Grid) -> np.ndarray:
    """Trapezoid weights of the spatial nodes."""
    return _outer([_trapezoid(grid.n_x + 1, grid.h)] * grid.n)


def time_weights(grid: Grid) -> np.ndarray:
    """Trapezoid weights of the time levels."""
    return _trapezoid(grid.n_t + 1, grid.dt)


def face_weights(grid: Grid) -> np.ndarray:
    """Trapezoid weights of the flattened nodes of one face."""
    return _outer([_trapezoid(grid.n_x + 1, grid.h)] * (grid.n - 1)).ravel()


def face_index(grid: Grid) -> list[tuple[int, int]]:
    """(axis, node index) of every face in storage order."""
    return [(axis, index) for axis in range(grid.n) for index in (0, grid.n_x)]


def extract_faces(values: np.ndarray, grid: Grid) -> np.ndarray:
    """Collect the boundary values of a spatial or space-time array."""
    offset = values.ndim - grid.n
    faces = []
    for axis, index in face_index(grid):
        face = np.take(values, index, axis=offset + axis)
        faces.append(face.reshape((*face.shape[:offset], -1)))
    return np.stack(faces)


def fill_faces(values: np.ndarray, faces: np.ndarray, grid: Grid) -> np.ndarray:
    """Return a copy of `values` with its boundary overwritten by `faces`."""
    offset = values.ndim - grid.n
    out = np.array(values, dtype=np.result_type(values, faces), copy=True)
    for face, (axis, index) in zip(faces, face_index(grid), strict=True):
        selector = [slice(None)] * out.ndim
        selector[offset + axis] = index
        target = tuple(selector)
        out[target] = face.reshape(out[target].shape)
    return out


def volume_pairing(left: np.ndarray, right: np.ndarray, grid: Grid) -> complex:
    """Bilinear trapezoid pairing over the cube (no conjugation)."""
    return complex(np.sum(node_weights(grid) * left * right))


def surface_pairing(left: np.ndarray, right: np.ndarray, grid: Grid) -> complex:
    """Bilinear trapezoid pairing of two face arrays over the lateral boundary."""
    weights = time_weights(grid)[:, None] * face_weights(grid)[None, :]
    return complex(np.sum(weights[None] * left * right))


def space_time_pairing(left: np.ndarray, right: np.ndarray, grid: Grid) -> complex:
    """Bilinear trapezoid pairing over the space-time box (no conjugation)."""
    weights = time_weights(grid).reshape((-1,) + (1,) * grid.n) * node_weights(grid)
    return complex(np.sum(weights * left * right))
