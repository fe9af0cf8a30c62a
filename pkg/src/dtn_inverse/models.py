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

"""Curve tables shared by the stability sweeps and the harness."""

import math
from typing import Self

import pandas as pd
from ghga_service_commons.utils.utc_dates import UTCDatetime, now_as_utc
from pydantic import BaseModel, ConfigDict, Field, model_validator

from dtn_inverse.field_core.models import Grid

__all__ = ["CurveTable", "Provenance"]


class Provenance(BaseModel):
    """Where a curve table came from."""

    model_config = ConfigDict(extra="forbid", frozen=True)

    config_hash: str = Field(..., min_length=1)
    seed: int = Field(..., ge=0)
    grid: Grid
    created: UTCDatetime = Field(default_factory=now_as_utc)


class CurveTable(BaseModel):
    """Rows of named numeric columns with their provenance and fitted shapes."""

    model_config = ConfigDict(extra="forbid", frozen=True)

    name: str
    columns: tuple[str, ...] = Field(..., min_length=1)
    rows: tuple[tuple[float, ...], ...] = ()
    provenance: Provenance
    fits: dict[str, float] = Field(
        default_factory=dict, description="Fitted exponents and fit qualities."
    )

    @model_validator(mode="after")
    def check_rows(self) -> Self:
        """Every row needs one value per column."""
        width = len(self.columns)
        for index, row in enumerate(self.rows):
            if len(row) != width:
                raise ValueError(
                    f"Row {index} has {len(row)} values for {width} columns"
                )
        return self

    def column(self, name: str) -> list[float]:
        """All values of one column."""
        position = self.columns.index(name)
        return [row[position] for row in self.rows]

    def with_row(self, **values: float) -> "CurveTable":
        """A copy with one more row given by column name."""
        missing = set(self.columns) - set(values)
        if missing:
            raise ValueError(f"Missing columns: {sorted(missing)}")
        row = tuple(float(values[name]) for name in self.columns)
        return self.model_copy(update={"rows": (*self.rows, row)})

    def to_frame(self) -> pd.DataFrame:
        """The rows as a data frame."""
        return pd.DataFrame(list(self.rows), columns=list(self.columns))

    def finite_fits(self) -> dict[str, float]:
        """Fits with NaN entries dropped."""
        return {key: value for key, value in self.fits.items() if math.isfinite(value)}
