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

"""Port for reading and writing sampled fields."""

from abc import ABC, abstractmethod
from pathlib import Path

from dtn_inverse.field_core.models import (
    CurlField,
    ScalarField,
    ScalarSpaceTimeField,
    VectorField,
)

__all__ = ["FieldStorePort", "StoredField"]

StoredField = VectorField | ScalarField | ScalarSpaceTimeField | CurlField


class FieldStorePort(ABC):
    """Persists fields together with the grid they are sampled on."""

    class FieldFormatError(RuntimeError):
        """Raised when a stored field cannot be decoded."""

        def __init__(self, *, path: Path, details: str):
            super().__init__(f"Could not read field file {path}: {details}")

    @abstractmethod
    def save(self, path: Path, field: StoredField) -> None:
        """Write the field to the given path."""
        ...

    @abstractmethod
    def load(self, path: Path) -> StoredField:
        """Read a field from the given path.

        May raise a FieldFormatError.
        """
        ...
