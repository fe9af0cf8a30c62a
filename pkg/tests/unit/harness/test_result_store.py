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

"""Test the run directory writer."""

import math
from pathlib import Path

import pytest

from dtn_inverse.harness.adapters.result_store import RunDirectory
from dtn_inverse.harness.models import CheckOutcome, RunStatus, RunSummary
from dtn_inverse.models import CurveTable, Provenance
from tests.fixtures.fields import make_grid


@pytest.fixture(name="table")
def create_table() -> CurveTable:
    """A two-row table with one unfitted shape."""
    provenance = Provenance(config_hash="abc", seed=1, grid=make_grid(n_x=8))
    table = CurveTable(
        name="magnetic",
        columns=("eta", "err_Hminus1"),
        provenance=provenance,
        fits={"a": 0.5, "c": math.nan},
    )
    return table.with_row(eta=0.0, err_Hminus1=0.125).with_row(
        eta=0.1, err_Hminus1=1 / 3
    )


def test_tables_are_byte_identical(tmp_path: Path, table: CurveTable):
    """Test that the same table always produces the same bytes."""
    first = RunDirectory(tmp_path, "first")
    second = RunDirectory(tmp_path, "second")
    first.write_table(table, "curves.csv")
    second.write_table(table, "curves.csv")
    content = (first.path / "curves.csv").read_bytes()
    assert content == (second.path / "curves.csv").read_bytes()
    lines = content.decode().splitlines()
    assert lines[0] == "eta,err_Hminus1"
    assert lines[1] == "0.000000000000e+00,1.250000000000e-01"
    assert len(lines) == 3


def test_table_summary_drops_nan_fits(tmp_path: Path, table: CurveTable):
    """Test that unfitted shapes are reported as null."""
    summary = RunDirectory(tmp_path, "run").write_table(table, "curves.csv")
    assert summary.rows == 2
    assert summary.fits == {"a": 0.5, "c": None}


def test_summary_and_echo(tmp_path: Path, table: CurveTable):
    """Test that the summary reads back and the echo is verbatim."""
    directory = RunDirectory(tmp_path, "run")
    summary = RunSummary(
        run_id="run",
        mode="magnetic",
        status=RunStatus.SUCCEEDED,
        provenance=table.provenance,
        finished=table.provenance.created,
        tables=(directory.write_table(table, "curves.csv"),),
        checks=(CheckOutcome(name="x", passed=True, value=0.0, threshold=1.0),),
    )
    path = directory.write_summary(summary)
    assert RunSummary.model_validate_json(path.read_text()) == summary

    echo = 'mode = "magnetic"\nseed = 1\n'
    assert directory.write_config_echo(echo).read_text() == echo
