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

"""Experiment descriptions, check outcomes and run summaries."""

import tomllib
from enum import Enum
from pathlib import Path
from typing import Annotated, Self

from ghga_service_commons.utils.utc_dates import UTCDatetime
from pydantic import (
    BaseModel,
    ConfigDict,
    Field,
    ValidationError,
    field_validator,
    model_validator,
)
from pydantic_settings import BaseSettings, TomlConfigSettingsSource

from dtn_inverse.field_core.models import BumpSpec, Grid
from dtn_inverse.models import Provenance

__all__ = [
    "CheckOutcome",
    "CoefficientSpec",
    "ExperimentConfig",
    "ExperimentConfigError",
    "ExperimentMode",
    "HarnessConfig",
    "RunStatus",
    "RunSummary",
    "TableSummary",
    "load_experiment",
]


class HarnessConfig(BaseSettings):
    """Configuration parameters for experiment runs."""

    harness_output_dir: Path = Field(
        default=Path("out"), description="Directory receiving one folder per run"
    )
    harness_jobs: Annotated[
        int, Field(ge=1, description="Probe jobs run concurrently")
    ] = 1
    harness_check_points: Annotated[
        int, Field(ge=8, description="Grid points per axis of the check suite")
    ] = 8


class ExperimentConfigError(RuntimeError):
    """Raised when an experiment description cannot be loaded."""

    def __init__(self, *, path: Path, details: str):
        super().__init__(f"Invalid experiment description {path}: {details}")


class ExperimentMode(str, Enum):
    """What an experiment run computes."""

    MAGNETIC = "magnetic"
    ELECTRIC = "electric"
    COUPLED = "coupled"
    UNIT_CHECKS = "unit-checks"


class CoefficientSpec(BaseModel):
    """One coefficient pair (A, q), given by bumps and/or field files.

    The potential is the divergence-free sum of the bumps plus the field in
    potential_file. q is q_amplitude * bump(x) * cos(2 pi q_frequency t / T)
    for the bump (q_center, q_radius) plus the field in q_file. With
    q_pulse_width the cosine is replaced by a Gaussian pulse of that width
    centered at T / 2.
    """

    model_config = ConfigDict(extra="forbid", frozen=True)

    bumps: tuple[BumpSpec, ...] = ()
    potential_file: Path | None = None
    q_amplitude: float = 0.0
    q_center: tuple[float, ...] = (0.5, 0.5, 0.5)
    q_radius: Annotated[float, Field(gt=0)] = 0.3
    q_frequency: float = 1.0
    q_pulse_width: Annotated[float, Field(gt=0)] | None = None
    q_file: Path | None = None

    @field_validator("potential_file", "q_file")
    @classmethod
    def check_exists(cls, value: Path | None) -> Path | None:
        """Referenced files must exist at load."""
        if value is not None and not value.is_file():
            raise ValueError(f"File {value} does not exist")
        return value


class ExperimentConfig(BaseModel):
    """A complete experiment: grid, coefficients, parameters and output."""

    model_config = ConfigDict(extra="forbid", frozen=True)

    mode: ExperimentMode
    grid: Grid = Grid(n=3, n_x=16, n_t=64, horizon=1.0)
    first: CoefficientSpec = CoefficientSpec()
    second: CoefficientSpec = CoefficientSpec()
    sigma: Annotated[
        float, Field(gt=0, description="sigma of single reconstructions")
    ] = 8.0
    sigma_cap: Annotated[float, Field(gt=0)] | None = None
    sigmas: tuple[float, ...] = Field(
        default=(4.0, 6.0, 8.0, 12.0), description="sigma values of GO scans"
    )
    alpha: Annotated[float, Field(gt=0)] | None = None
    etas: tuple[float, ...] = ()
    include_floor: bool = Field(
        default=True, description="Start every sweep with the noise-free row"
    )
    seed: Annotated[int, Field(ge=0)] = 0
    output_dir: Path | None = None
    jobs: Annotated[int, Field(ge=1)] | None = None

    @field_validator("etas")
    @classmethod
    def check_etas(cls, value: tuple[float, ...]) -> tuple[float, ...]:
        """Noise levels must be positive."""
        if any(eta <= 0 for eta in value):
            raise ValueError("eta values must be positive")
        return value

    @model_validator(mode="after")
    def check_sigma(self) -> Self:
        """sigma values must respect the cap."""
        if self.sigma_cap is not None and (
            self.sigma > self.sigma_cap or any(s > self.sigma_cap for s in self.sigmas)
        ):
            raise ValueError(f"sigma values exceed the cap {self.sigma_cap}")
        return self


def load_experiment(path: Path) -> ExperimentConfig:
    """Read an experiment description from a TOML file.

    May raise an ExperimentConfigError.
    """
    if not path.is_file():
        raise ExperimentConfigError(path=path, details="file not found")
    try:
        values = TomlConfigSettingsSource(ExperimentConfig, toml_file=path)()
        return ExperimentConfig.model_validate(values)
    except (tomllib.TOMLDecodeError, ValidationError) as error:
        raise ExperimentConfigError(path=path, details=str(error)) from error


class CheckOutcome(BaseModel):
    """Result of one invariant check."""

    model_config = ConfigDict(extra="forbid", frozen=True)

    name: str
    passed: bool
    value: float
    threshold: float
    gating: bool = Field(
        default=True, description="Whether a failure fails the run"
    )


class TableSummary(BaseModel):
    """What the summary records about one curve table."""

    model_config = ConfigDict(extra="forbid", frozen=True)

    name: str
    file: str
    rows: int
    fits: dict[str, float | None]


class RunStatus(str, Enum):
    """Outcome of a run."""

    SUCCEEDED = "succeeded"
    FAILED = "failed"


class RunSummary(BaseModel):
    """Everything a run reports besides its curve tables."""

    model_config = ConfigDict(extra="forbid", frozen=True)

    run_id: str
    mode: str
    status: RunStatus
    failure: str | None = None
    provenance: Provenance
    finished: UTCDatetime
    tables: tuple[TableSummary, ...] = ()
    checks: tuple[CheckOutcome, ...] = ()
    diagnostics: dict[str, float | None] = Field(default_factory=dict)
