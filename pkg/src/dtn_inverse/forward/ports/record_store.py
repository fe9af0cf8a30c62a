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

"""Port for persisting DtN records."""

from abc import ABC, abstractmethod
from pathlib import Path

from dtn_inverse.forward.models import DtnRecord

__all__ = ["RecordStorePort"]


class RecordStorePort(ABC):
    """Persists measured DtN records together with their probe metadata."""

    class RecordFormatError(RuntimeError):
        """Raised when a stored record cannot be decoded."""

        def __init__(self, *, path: Path, details: str):
            super().__init__(f"Could not read DtN record {path}: {details}")

    @abstractmethod
    def save(self, path: Path, record: DtnRecord) -> None:
        """Write the record to the given path."""
        ...

    @abstractmethod
    def load(self, path: Path) -> DtnRecord:
        """Read a record from the given path.

        May raise a RecordFormatError.
        """
        ...
