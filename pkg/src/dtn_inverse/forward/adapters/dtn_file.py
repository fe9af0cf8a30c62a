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

"""Binary DtN record files.

A JSON header line carries the grid, the probe norm and the probe metadata.
It is followed by the final state and then the per-face Neumann trace, each
as complex float64 blocks laid out like field files.
"""

import logging
from pathlib import Path

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, ValidationError

from dtn_inverse.field_core.adapters.fld_file import decode_blocks, encode_blocks
from dtn_inverse.field_core.models import Grid
from dtn_inverse.forward.models import DtnRecord, ProbeMetadata
from dtn_inverse.forward.ports.record_store import RecordStorePort

__all__ = ["DtnFileStore", "DtnHeader"]

log = logging.getLogger(__name__)


class DtnHeader(BaseModel):
    """Header line of a DtN record file."""

    model_config = ConfigDict(extra="forbid", frozen=True, populate_by_name=True)

    n: int
    n_x: int = Field(..., alias="N_x")
    n_t: int = Field(..., alias="N_t")
    horizon: float = Field(..., alias="T")
    probe_norm: float
    probe: ProbeMetadata | None = None
    final_shape: tuple[int, ...]
    trace_shape: tuple[int, ...]

    def grid(self) -> Grid:
        """The grid the record was measured on."""
        return Grid(n=self.n, n_x=self.n_x, n_t=self.n_t, horizon=self.horizon)


class DtnFileStore(RecordStorePort):
    """Reads and writes .dtn files."""

    def save(self, path: Path, record: DtnRecord) -> None:
        """Write the record to the given path."""
        grid = record.grid
        header = DtnHeader(
            n=grid.n,
            n_x=grid.n_x,
            n_t=grid.n_t,
            horizon=grid.horizon,
            probe_norm=record.probe_norm,
            probe=record.probe,
            final_shape=record.final_state.shape,
            trace_shape=record.trace.shape,
        )
        with path.open("wb") as stream:
            stream.write(header.model_dump_json(by_alias=True).encode() + b"\n")
            stream.write(encode_blocks(record.final_state, grid.n))
            # the trace has a single flattened face axis
            stream.write(encode_blocks(record.trace, 1))
        log.debug("Wrote DtN record to %s", path)

    def load(self, path: Path) -> DtnRecord:
        """Read a record from the given path.

        May raise a RecordFormatError.
        """
        try:
            raw = path.read_bytes()
            newline = raw.index(b"\n")
            header = DtnHeader.model_validate_json(raw[:newline])
            body = raw[newline + 1 :]
            split = 16 * int(np.prod(header.final_shape))
            final_state = decode_blocks(
                body[:split], header.final_shape, header.n, is_complex=True
            )
            trace = decode_blocks(body[split:], header.trace_shape, 1, is_complex=True)
            return DtnRecord(
                grid=header.grid(),
                final_state=final_state,
                trace=trace,
                probe_norm=header.probe_norm,
                probe=header.probe,
            )
        except (OSError, ValueError, ValidationError) as error:
            log.error("Could not load DtN record from %s: %s", path, error)
            raise self.RecordFormatError(path=path, details=str(error)) from error
