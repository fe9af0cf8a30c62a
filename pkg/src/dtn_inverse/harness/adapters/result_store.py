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

"""Writes curve tables, summaries and the configuration echo of a run."""

import logging
import math
from pathlib import Path

from dtn_inverse.harness.models import RunSummary, TableSummary
from dtn_inverse.models import CurveTable

__all__ = ["FLOAT_FORMAT", "RunDirectory"]

log = logging.getLogger(__name__)

FLOAT_FORMAT = "%.12e"


class RunDirectory:
    """The folder out/{run-id} of one run."""

    def __init__(self, root: Path, run_id: str):
        self.path = root / run_id
        self.path.mkdir(parents=True, exist_ok=True)

    def write_table(self, table: CurveTable, file_name: str) -> TableSummary:
        """Write the rows as CSV with a fixed float format."""
        target = self.path / file_name
        table.to_frame().to_csv(
            target, index=False, float_format=FLOAT_FORMAT, lineterminator="\n"
        )
        log.info("Wrote %d rows to %s", len(table.rows), target)
        return TableSummary(
            name=table.name,
            file=file_name,
            rows=len(table.rows),
            fits={
                key: (value if math.isfinite(value) else None)
                for key, value in table.fits.items()
            },
        )

    def write_summary(self, summary: RunSummary) -> Path:
        """Write the summary as JSON."""
        target = self.path / "summary.json"
        target.write_text(summary.model_dump_json(indent=2), encoding="utf-8")
        return target

    def write_config_echo(self, text: str) -> Path:
        """Copy the experiment description verbatim."""
        target = self.path / "config-echo.toml"
        target.write_text(text, encoding="utf-8")
        return target
