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

"""Port for providers of DtN map differences."""

from abc import ABC, abstractmethod

from dtn_inverse.field_core.models import Grid
from dtn_inverse.forward.models import BoundaryInput, DtnRecord, ProbeMetadata
from dtn_inverse.recon.models import CoefficientPair

__all__ = ["DtnOraclePort"]


class DtnOraclePort(ABC):
    """Answers probes g with the difference (Lambda_2 - Lambda_1)(g)."""

    class ProbeMismatchError(ValueError):
        """Raised when a record belongs to another probe than expected."""

        def __init__(
            self, *, expected: ProbeMetadata, received: ProbeMetadata | None
        ):
            super().__init__(
                f"Record of probe {received!r} does not match probe {expected!r}"
            )

    class ProbeFailedError(RuntimeError):
        """Raised when a probe cannot be answered."""

        def __init__(self, *, probe: ProbeMetadata, details: str):
            super().__init__(
                f"Probe sigma={probe.sigma}, xi={probe.xi} failed: {details}"
            )

    @property
    @abstractmethod
    def grid(self) -> Grid:
        """The grid all probes and records live on."""
        ...

    @abstractmethod
    def coefficients(self, side: int) -> CoefficientPair:
        """The coefficients GO solutions of the given side are built with."""
        ...

    @abstractmethod
    def measure(self, data: BoundaryInput, probe: ProbeMetadata) -> DtnRecord:
        """The record difference for the probe g, tagged with its metadata.

        May raise a ProbeFailedError.
        """
        ...
