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

"""Binary field files: a JSON header line followed by float64 samples.

Samples are little endian with x1 varying fastest. Leading axes (components,
time) vary slowest. Complex fields store the real block, then the imaginary
block.
"""

import logging
from pathlib import Path
from typing import Literal

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, ValidationError

from dtn_inverse.field_core.models import (
    CurlField,
    Grid,
    ScalarField,
    ScalarSpaceTimeField,
    VectorField,
)
from dtn_inverse.field_core.ports.field_store import FieldStorePort, StoredField

__all__ = ["FieldFileStore", "FieldHeader", "decode_blocks", "encode_blocks"]

log = logging.getLogger(__name__)

FieldKind = Literal["vector", "scalar", "scalar_space_time", "curl"]


class FieldHeader(BaseModel):
    """Header line of a field file."""

    model_config = ConfigDict(extra="forbid", frozen=True, populate_by_name=True)

    n: int
    n_x: int = Field(..., alias="N_x")
    n_t: int = Field(..., alias="N_t")
    horizon: float = Field(..., alias="T")
    kind: FieldKind
    shape: tuple[int, ...]
    complex: bool = False

    def grid(self) -> Grid:
        """The grid the samples live on."""
        return Grid(n=self.n, n_x=self.n_x, n_t=self.n_t, horizon=self.horizon)


def _storage_axes(ndim: int, n: int) -> tuple[int, ...]:
    lead = ndim - n
    return (*range(lead), *reversed(range(lead, ndim)))


def encode_blocks(values: np.ndarray, n: int) -> bytes:
    """Serialise an array with x1 fastest, real block before imaginary block."""
    ordered = np.transpose(values, _storage_axes(values.ndim, n))
    blocks = [ordered.real]
    if np.iscomplexobj(values):
        blocks.append(ordered.imag)
    return b"".join(
        np.ascontiguousarray(block, dtype="<f8").tobytes() for block in blocks
    )


def decode_blocks(
    raw: bytes, shape: tuple[int, ...], n: int, *, is_complex: bool
) -> np.ndarray:
    """Inverse of encode_blocks."""
    axes = _storage_axes(len(shape), n)
    stored_shape = tuple(shape[axis] for axis in axes)
    count = int(np.prod(shape))
    data = np.frombuffer(raw, dtype="<f8")
    expected = count * (2 if is_complex else 1)
    if data.size != expected:
        raise ValueError(f"expected {expected} values, found {data.size}")
    values = data[:count].reshape(stored_shape).astype(float)
    if is_complex:
        values = values + 1j * data[count:].reshape(stored_shape)
    return np.transpose(values, axes)


def _kind_of(field: StoredField) -> tuple[FieldKind, np.ndarray]:
    match field:
        case VectorField():
            return "vector", field.components
        case CurlField():
            return "curl", field.components
        case ScalarSpaceTimeField():
            return "scalar_space_time", field.values
        case ScalarField():
            return "scalar", field.values
    raise TypeError(f"Cannot store an object of type {type(field).__name__}")


class FieldFileStore(FieldStorePort):
    """Reads and writes .fld files."""

    def save(self, path: Path, field: StoredField) -> None:
        """Write the field to the given path."""
        kind, values = _kind_of(field)
        grid = field.grid
        header = FieldHeader(
            n=grid.n,
            n_x=grid.n_x,
            n_t=grid.n_t,
            horizon=grid.horizon,
            kind=kind,
            shape=values.shape,
            complex=bool(np.iscomplexobj(values)),
        )
        with path.open("wb") as stream:
            stream.write(header.model_dump_json(by_alias=True).encode() + b"\n")
            stream.write(encode_blocks(values, grid.n))
        log.debug("Wrote %s field to %s", kind, path)

    def load(self, path: Path) -> StoredField:
        """Read a field from the given path.

        May raise a FieldFormatError.
        """
        try:
            raw = path.read_bytes()
            newline = raw.index(b"\n")
            header = FieldHeader.model_validate_json(raw[:newline])
            values = decode_blocks(
                raw[newline + 1 :],
                header.shape,
                header.n,
                is_complex=header.complex,
            )
            grid = header.grid()
            match header.kind:
                case "vector":
                    return VectorField(grid=grid, components=values)
                case "curl":
                    return CurlField(grid=grid, components=values)
                case "scalar_space_time":
                    return ScalarSpaceTimeField(grid=grid, values=values)
                case _:
                    return ScalarField(grid=grid, values=values)
        except (OSError, ValueError, ValidationError) as error:
            log.error("Could not load field from %s: %s", path, error)
            raise self.FieldFormatError(path=path, details=str(error)) from error
