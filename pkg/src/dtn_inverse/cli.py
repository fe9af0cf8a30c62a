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

"""Command line interface of the experiment harness"""

from collections.abc import Callable
from pathlib import Path
from typing import Annotated

import typer

from dtn_inverse.config import get_config
from dtn_inverse.field_core.core.admissible import AdmissibilityError
from dtn_inverse.harness.core.runner import ExperimentRunner
from dtn_inverse.harness.models import (
    ExperimentConfig,
    ExperimentConfigError,
    ExperimentMode,
    RunStatus,
    RunSummary,
    load_experiment,
)
from dtn_inverse.prepare import prepare_components

EXIT_SUCCESS = 0
EXIT_STAGE_FAILURE = 1
EXIT_CONFIG_ERROR = 2

app = typer.Typer(
    help="Simulated DtN measurements and stability experiments.",
    no_args_is_help=True,
    add_completion=False,
)

ConfigOption = Annotated[
    Path,
    typer.Option("--config", help="Experiment description in TOML syntax."),
]
OutOption = Annotated[
    Path | None, typer.Option("--out", help="Directory receiving the run folder.")
]
SeedOption = Annotated[
    int | None, typer.Option("--seed", min=0, help="Master seed of the noise.")
]
JobsOption = Annotated[
    int | None, typer.Option("--jobs", min=1, help="Probe jobs run concurrently.")
]

Action = Callable[[ExperimentRunner, ExperimentConfig, str | None], RunSummary]


def echo_success(message: str):
    """Print a success message."""
    typer.echo(typer.style(text=message, fg=typer.colors.GREEN))


def echo_warning(message: str):
    """Print a warning message."""
    typer.echo(typer.style(text=message, fg=typer.colors.YELLOW))


def echo_failure(message: str):
    """Print a failure message."""
    typer.echo(typer.style(text=message, fg=typer.colors.RED), err=True)


def _override(
    experiment: ExperimentConfig,
    out: Path | None,
    seed: int | None,
    jobs: int | None,
) -> ExperimentConfig:
    updates = {
        key: value
        for key, value in (("output_dir", out), ("seed", seed), ("jobs", jobs))
        if value is not None
    }
    return experiment.model_copy(update=updates)


def _report(summary: RunSummary, root: Path) -> None:
    for check in summary.checks:
        message = f"{check.name}: {check.value:.3e} (threshold {check.threshold:.1e})"
        if check.passed:
            echo_success(message)
        elif check.gating:
            echo_failure(message)
        else:
            echo_warning(f"{message}, not gating")
    for table in summary.tables:
        typer.echo(f"{table.file}: {table.rows} rows")
    if summary.status is RunStatus.SUCCEEDED:
        echo_success(f"Run {summary.run_id} succeeded, results in {root}")
        return
    echo_failure(f"Run {summary.run_id} failed: {summary.failure or 'checks failed'}")
    raise typer.Exit(EXIT_STAGE_FAILURE)


def _execute(
    action: Action,
    config_path: Path | None,
    out: Path | None,
    seed: int | None,
    jobs: int | None,
) -> None:
    config = get_config()
    try:
        if config_path is None:
            experiment = ExperimentConfig(mode=ExperimentMode.UNIT_CHECKS)
            source_text = None
        else:
            experiment = load_experiment(config_path)
            source_text = config_path.read_text(encoding="utf-8")
        experiment = _override(experiment, out, seed, jobs)
        with prepare_components(config) as components:
            summary = action(
                ExperimentRunner(components=components), experiment, source_text
            )
    except (ExperimentConfigError, AdmissibilityError) as error:
        echo_failure(str(error))
        raise typer.Exit(EXIT_CONFIG_ERROR) from error
    root = experiment.output_dir or config.harness_output_dir
    _report(summary, root / summary.run_id)


@app.command()
def check(
    config_path: Annotated[
        Path | None,
        typer.Option("--config", help="Optional experiment description."),
    ] = None,
    out: OutOption = None,
    seed: SeedOption = None,
    jobs: JobsOption = None,
):
    """Run the invariant check suites; exits with 0 iff all gating checks pass."""
    _execute(ExperimentRunner.check, config_path, out, seed, jobs)


@app.command()
def forward(
    config_path: ConfigOption,
    out: OutOption = None,
    seed: SeedOption = None,
    jobs: JobsOption = None,
):
    """Measure both coefficient pairs and write the .dtn records."""
    _execute(ExperimentRunner.forward, config_path, out, seed, jobs)


@app.command("go-scan")
def go_scan(
    config_path: ConfigOption,
    out: OutOption = None,
    seed: SeedOption = None,
    jobs: JobsOption = None,
):
    """Tabulate GO remainder norms over the sigma list."""
    _execute(ExperimentRunner.go_scan, config_path, out, seed, jobs)


@app.command("recon-curl")
def recon_curl(
    config_path: ConfigOption,
    out: OutOption = None,
    seed: SeedOption = None,
    jobs: JobsOption = None,
):
    """Reconstruct the magnetic field difference at the configured sigma."""
    _execute(ExperimentRunner.reconstruct_curl, config_path, out, seed, jobs)


@app.command("recon-q")
def recon_q(
    config_path: ConfigOption,
    out: OutOption = None,
    seed: SeedOption = None,
    jobs: JobsOption = None,
):
    """Reconstruct the electric potential difference at the configured sigma."""
    _execute(ExperimentRunner.reconstruct_q, config_path, out, seed, jobs)


@app.command()
def sweep(
    config_path: ConfigOption,
    out: OutOption = None,
    seed: SeedOption = None,
    jobs: JobsOption = None,
):
    """Run the experiment in the mode its description names."""
    _execute(ExperimentRunner.run, config_path, out, seed, jobs)
