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

"""DtN differences simulated with the forward solver, optionally perturbed."""

import logging

from dtn_inverse.field_core.models import Grid
from dtn_inverse.forward.core.dtn import dtn_apply
from dtn_inverse.forward.models import BoundaryInput, DtnRecord, ProbeMetadata
from dtn_inverse.forward.ports.solver import ForwardSolverPort
from dtn_inverse.harness.core.noise import inject_noise
from dtn_inverse.recon.models import CoefficientPair
from dtn_inverse.recon.ports.oracle import DtnOraclePort

__all__ = ["SimulatedDtnOracle"]

log = logging.getLogger(__name__)


class SimulatedDtnOracle(DtnOraclePort):
    """(Lambda_{A2,q2} - Lambda_{A1,q1})(g) with seeded noise of norm eta."""

    def __init__(
        self,
        *,
        solver: ForwardSolverPort,
        first: CoefficientPair,
        second: CoefficientPair,
        eta: float = 0.0,
        seed: int = 0,
    ):
        if first.grid != second.grid:
            raise ValueError("Both coefficient pairs need the same grid")
        if eta < 0:
            raise ValueError("eta must not be negative")
        self._solver = solver
        self._pairs = {1: first, 2: second}
        self._eta = eta
        self._seed = seed

    @property
    def grid(self) -> Grid:
        """The grid of both coefficient pairs."""
        return self._pairs[1].grid

    @property
    def eta(self) -> float:
        """The operational norm of the injected perturbation."""
        return self._eta

    def coefficients(self, side: int) -> CoefficientPair:
        """The coefficients of the given side."""
        return self._pairs[side]

    def with_eta(self, eta: float) -> "SimulatedDtnOracle":
        """The same oracle with another noise level."""
        return SimulatedDtnOracle(
            solver=self._solver,
            first=self._pairs[1],
            second=self._pairs[2],
            eta=eta,
            seed=self._seed,
        )

    def _apply(self, side: int, data: BoundaryInput, probe: ProbeMetadata) -> DtnRecord:
        pair = self._pairs[side]
        return dtn_apply(self._solver, pair.potential, pair.q, data, probe=probe)

    def measure(self, data: BoundaryInput, probe: ProbeMetadata) -> DtnRecord:
        """Both forward solves for the probe g and their difference.

        May raise a ProbeFailedError.
        """
        try:
            second = self._apply(2, data, probe)
            first = self._apply(1, data, probe)
        except ForwardSolverPort.ForwardSolverError as error:
            log.error("Forward solve failed for probe sigma=%s", probe.sigma)
            raise self.ProbeFailedError(probe=probe, details=str(error)) from error
        return inject_noise(second.difference(first), self._eta, self._seed)
