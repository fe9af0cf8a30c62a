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

"""Test the binary field files."""

from pathlib import Path

import numpy as np
import pytest

from dtn_inverse.field_core.adapters.fld_file import FieldFileStore, FieldHeader
from dtn_inverse.field_core.core.operators import curl
from dtn_inverse.field_core.models import ScalarField, ScalarSpaceTimeField
from dtn_inverse.field_core.ports.field_store import FieldStorePort
from tests.fixtures.fields import gaussian, make_grid, solenoidal_pair


@pytest.fixture(name="store")
def create_store() -> FieldFileStore:
    """Create a field file store."""
    return FieldFileStore()


def test_vector_field_file(store: FieldFileStore, tmp_path: Path):
    """Test that a stored potential is read back unchanged."""
    field = solenoidal_pair(make_grid(n_x=12))
    path = tmp_path / "potential.fld"
    store.save(path, field)
    loaded = store.load(path)
    assert loaded.grid == field.grid
    np.testing.assert_array_equal(loaded.components, field.components)


def test_complex_space_time_file(store: FieldFileStore, tmp_path: Path):
    """Test that complex space-time samples keep real and imaginary parts."""
    grid = make_grid(n_x=8)
    values = np.random.default_rng(5).normal(size=grid.space_time_shape) * (1 - 2j)
    path = tmp_path / "source.fld"
    store.save(path, ScalarSpaceTimeField(grid=grid, values=values))
    loaded = store.load(path)
    assert isinstance(loaded, ScalarSpaceTimeField)
    np.testing.assert_array_equal(loaded.values, values)


def test_curl_file(store: FieldFileStore, tmp_path: Path):
    """Test that curl fields can be stored."""
    field = curl(solenoidal_pair(make_grid(n_x=12)))
    path = tmp_path / "curl.fld"
    store.save(path, field)
    np.testing.assert_array_equal(store.load(path).components, field.components)


def test_layout(store: FieldFileStore, tmp_path: Path):
    """Test the header line and that x1 varies fastest."""
    grid = make_grid(n_x=8)
    path = tmp_path / "coordinate.fld"
    store.save(path, ScalarField(grid=grid, values=grid.mesh()[0]))
    raw = path.read_bytes()
    newline = raw.index(b"\n")
    header = FieldHeader.model_validate_json(raw[:newline])
    assert header.kind == "scalar"
    assert header.n_x == 8
    assert b'"N_x":8' in raw[:newline]
    data = np.frombuffer(raw[newline + 1 :], dtype="<f8")
    np.testing.assert_allclose(data[:9], grid.nodes())
    assert data.size == 9**3


def test_gaussian_scalar(store: FieldFileStore, tmp_path: Path):
    """Test a real spatial scalar field."""
    grid = make_grid(n_x=8)
    path = tmp_path / "bell.fld"
    store.save(path, ScalarField(grid=grid, values=gaussian(grid)))
    np.testing.assert_array_equal(store.load(path).values, gaussian(grid))


@pytest.mark.parametrize(
    "content",
    [b"", b"not json\n", b'{"n": 3}\n', b"no newline at all"],
)
def test_corrupt_file(store: FieldFileStore, tmp_path: Path, content: bytes):
    """Test that undecodable files raise a format error."""
    path = tmp_path / "broken.fld"
    path.write_bytes(content)
    with pytest.raises(FieldStorePort.FieldFormatError):
        store.load(path)


def test_truncated_file(store: FieldFileStore, tmp_path: Path):
    """Test that a file with missing samples is rejected."""
    grid = make_grid(n_x=8)
    path = tmp_path / "short.fld"
    store.save(path, ScalarField(grid=grid, values=gaussian(grid)))
    path.write_bytes(path.read_bytes()[:-8])
    with pytest.raises(FieldStorePort.FieldFormatError):
        store.load(path)


def test_missing_file(store: FieldFileStore, tmp_path: Path):
    """Test that a missing file raises a format error."""
    with pytest.raises(FieldStorePort.FieldFormatError):
        store.load(tmp_path / "missing.fld")
