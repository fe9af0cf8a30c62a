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

"""Parameter rules shared by both reconstructions."""

import logging
import math
from collections.abc import Callable, Sequence
from typing import Annotated, Any

from pydantic import Field
from pydantic_settings import BaseSettings

from dtn_inverse.models import CurveTable

__all__ = [
    "MapJobs",
    "ReconConfig",
    "SweepInterruptedError",
    "alpha_for_eta",
    "choose_cutoff",
    "sequential_map",
    "sigma_for_eta",
]

log = logging.getLogger(__name__)

MapJobs = Callable[[Callable[[Any], Any], Sequence[Any]], list[Any]]


def sequential_map(job: Callable[[Any], Any], items: Sequence[Any]) -> list[Any]:
    """Run the jobs one after the other."""
    return [job(item) for item in items]


class ReconConfig(BaseSettings):
    """Configuration parameters for the reconstructions and their sweeps."""

    recon_cutoff_scale: Annotated[
        float,
        Field(
            gt=0,
            description="Factor kappa of the working cutoff kappa * sigma^(2/(n+4))",
        ),
    ] = 4.0
    recon_sigma_rule: Annotated[
        float, Field(gt=0, description="Constant c of sigma = c |log eta|")
    ] = 1.0
    recon_alpha_rule: Annotated[
        float,
        Field(gt=0, description="Constant a of alpha = a log(1 + log(1 + |log eta|))"),
    ] = 8.0
    recon_alpha_fraction: Annotated[
        float,
        Field(gt=0, lt=1, description="alpha is capped at this fraction of sigma"),
    ] = 0.9
    recon_max_degree: Annotated[
        int, Field(ge=0, description="Largest degree of the cone extension")
    ] = 6
    recon_floor_tolerance: Annotated[
        float,
        Field(
            ge=0,
            description=(
                "Relative distance to the noise-free error below which a sweep"
                " row is flagged as sitting on the floor"
            ),
        ),
    ] = 0.05
    recon_volume_correction: Annotated[
        bool,
        Field(
            description=(
                "Add the known volume term to the boundary functional"
                " (diagnostic mode, needs both coefficient pairs)"
            )
        ),
    ] = False


def choose_cutoff(sigma: float, n: int) -> float:
    """R with R^(n+2) / sigma^2 = 1 / R^2, that is R = sigma^(2/(n+4))."""
    if sigma <= 0:
        raise ValueError("sigma must be positive")
    return float(sigma ** (2 / (n + 4)))


def sigma_for_eta(
    eta: float, *, rule: float, sigma_min: float, sigma_cap: float
) -> float:
    """sigma = c |log eta| clipped to [sigma_min, sigma_cap]; eta = 0 gives the cap."""
    if eta == 0:
        return sigma_cap
    raw = rule * abs(math.log(eta))
    sigma = min(max(raw, sigma_min), sigma_cap)
    if sigma != raw:
        log.info("Clamped sigma=%.3f to %.3f for eta=%.1e", raw, sigma, eta)
    return sigma


def alpha_for_eta(eta: float, *, rule: float, fraction: float, sigma: float) -> float:
    """alpha = a log(1 + log(1 + |log eta|)) capped at fraction * sigma."""
    cap = fraction * sigma
    if eta == 0:
        return cap
    raw = rule * math.log1p(math.log1p(abs(math.log(eta))))
    if raw > cap:
        log.info("Clamped alpha=%.3f to %.3f for eta=%.1e", raw, cap, eta)
        return cap
    return raw


class SweepInterruptedError(RuntimeError):
    """Raised when a sweep stops early, carrying the rows computed so far."""

    def __init__(self, *, table: CurveTable, eta: float, details: str):
        super().__init__(f"Sweep stopped at eta={eta:.1e}: {details}")
        self.table = table
        self.eta = eta
