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

"""Dispatch of experiments to the pipelines and emission of their results."""

import hashlib
import logging
from typing import NamedTuple

import numpy as np
from ghga_service_commons.utils.utc_dates import now_as_utc

from dtn_inverse.field_core.adapters.fld_file import FieldFileStore
from dtn_inverse.field_core.core.fourier import fourier_transform_at
from dtn_inverse.field_core.core.norms import discrete_norm
from dtn_inverse.field_core.models import NormId, ScalarSpaceTimeField
from dtn_inverse.forward.adapters.dtn_file import DtnFileStore
from dtn_inverse.forward.core.dtn import energy_report, magnetic_neumann_trace
from dtn_inverse.forward.models import DtnRecord
from dtn_inverse.go.core.frames import build_frame
from dtn_inverse.harness.adapters.result_store import RunDirectory
from dtn_inverse.harness.adapters.simulated_oracle import SimulatedDtnOracle
from dtn_inverse.harness.core.checks import remainder_scan, run_checks
from dtn_inverse.harness.core.fitting import FitError, fit_log_slope
from dtn_inverse.harness.core.fixtures import (
    build_coefficients,
    electric_truth,
    magnetic_truth,
)
from dtn_inverse.harness.core.scheduler import JobScheduler
from dtn_inverse.harness.models import (
    CheckOutcome,
    ExperimentConfig,
    ExperimentMode,
    RunStatus,
    RunSummary,
    TableSummary,
)
from dtn_inverse.models import CurveTable, Provenance
from dtn_inverse.prepare import Components
from dtn_inverse.recon.core.electric import stability_sweep_electric
from dtn_inverse.recon.core.magnetic import (
    PIPELINE_ERRORS,
    curl_error,
    stability_sweep_magnetic,
)
from dtn_inverse.recon.core.rules import SweepInterruptedError
from dtn_inverse.recon.models import CoefficientPair

__all__ = ["ExperimentRunner", "config_hash"]

log = logging.getLogger(__name__)

GO_SCAN_FREQUENCY = 2 * np.pi


def config_hash(experiment: ExperimentConfig) -> str:
    """Digest of everything that determines the numbers of a run."""
    payload = experiment.model_dump_json(exclude={"jobs", "output_dir"})
    return hashlib.blake2b(payload.encode(), digest_size=16).hexdigest()


def _table_file(index: int, table: CurveTable) -> str:
    return "curves.csv" if index == 0 else f"curves-{table.name}.csv"


class _Outcome(NamedTuple):
    mode: str
    tables: list[CurveTable]
    failure: str | None = None
    checks: tuple[CheckOutcome, ...] = ()
    diagnostics: dict[str, float | None] | None = None


class ExperimentRunner:
    """Runs experiments with one set of configured components."""

    def __init__(self, *, components: Components):
        self._components = components
        self._field_store = FieldFileStore()
        self._record_store = DtnFileStore()

    def _provenance(self, experiment: ExperimentConfig) -> Provenance:
        return Provenance(
            config_hash=config_hash(experiment),
            seed=experiment.seed,
            grid=experiment.grid,
        )

    def _directory(self, experiment: ExperimentConfig, name: str) -> RunDirectory:
        root = experiment.output_dir or self._components.config.harness_output_dir
        return RunDirectory(root, f"{name}-{config_hash(experiment)[:12]}")

    def _scheduler(self, experiment: ExperimentConfig) -> JobScheduler:
        return JobScheduler(
            jobs=experiment.jobs or self._components.config.harness_jobs
        )

    def _coefficients(
        self, experiment: ExperimentConfig
    ) -> tuple[CoefficientPair, CoefficientPair]:
        """May raise an ExperimentConfigError or an AdmissibilityError."""
        grid = experiment.grid
        return (
            build_coefficients(experiment.first, grid, self._field_store),
            build_coefficients(experiment.second, grid, self._field_store),
        )

    def _finish(
        self,
        directory: RunDirectory,
        experiment: ExperimentConfig,
        outcome: _Outcome,
        source_text: str | None,
    ) -> RunSummary:
        summaries: list[TableSummary] = [
            directory.write_table(table, _table_file(index, table))
            for index, table in enumerate(outcome.tables)
        ]
        failed = outcome.failure is not None or any(
            check.gating and not check.passed for check in outcome.checks
        )
        summary = RunSummary(
            run_id=directory.path.name,
            mode=outcome.mode,
            status=RunStatus.FAILED if failed else RunStatus.SUCCEEDED,
            failure=outcome.failure,
            provenance=self._provenance(experiment),
            finished=now_as_utc(),
            tables=tuple(summaries),
            checks=outcome.checks,
            diagnostics=outcome.diagnostics or {},
        )
        directory.write_summary(summary)
        directory.write_config_echo(
            source_text
            if source_text is not None
            else f'mode = "{outcome.mode}"\nseed = {experiment.seed}\n'
        )
        log.info("Run %s finished: %s", summary.run_id, summary.status.value)
        return summary

    def run(
        self, experiment: ExperimentConfig, source_text: str | None = None
    ) -> RunSummary:
        """Run the experiment and write out/{run-id}.

        Stage failures are recorded in the summary next to the rows computed
        so far. May raise an ExperimentConfigError or an AdmissibilityError
        before anything is written.
        """
        if experiment.mode is ExperimentMode.UNIT_CHECKS:
            return self.check(experiment, source_text)
        first, second = self._coefficients(experiment)
        directory = self._directory(experiment, experiment.mode.value)
        tables: list[CurveTable] = []
        try:
            if experiment.mode in (ExperimentMode.MAGNETIC, ExperimentMode.COUPLED):
                tables.append(self._magnetic_sweep(experiment, first, second))
            if experiment.mode in (ExperimentMode.ELECTRIC, ExperimentMode.COUPLED):
                tables.append(self._electric_sweep(experiment, first, second))
        except SweepInterruptedError as error:
            log.error("Run stopped at eta=%.1e: %s", error.eta, error)
            tables.append(error.table)
            return self._finish(
                directory,
                experiment,
                _Outcome(
                    mode=experiment.mode.value,
                    tables=tables,
                    failure=str(error),
                ),
                source_text,
            )
        diagnostics: dict[str, float | None] = {}
        for table in tables:
            errors = table.column("err_Hminus1")
            if errors:
                diagnostics[f"{table.name}_first_err_Hminus1"] = errors[0]
                diagnostics[f"{table.name}_last_err_Hminus1"] = errors[-1]
        return self._finish(
            directory,
            experiment,
            _Outcome(
                mode=experiment.mode.value,
                tables=tables,
                diagnostics=diagnostics,
            ),
            source_text,
        )

    def _sigma_bounds(self, experiment: ExperimentConfig) -> tuple[float, float]:
        config = self._components.config
        return config.go_sigma_min, experiment.sigma_cap or config.go_sigma_cap

    def _oracle(
        self,
        experiment: ExperimentConfig,
        first: CoefficientPair,
        second: CoefficientPair,
    ) -> SimulatedDtnOracle:
        return SimulatedDtnOracle(
            solver=self._components.solver,
            first=first,
            second=second,
            seed=experiment.seed,
        )

    def _magnetic_sweep(
        self,
        experiment: ExperimentConfig,
        first: CoefficientPair,
        second: CoefficientPair,
    ) -> CurveTable:
        return stability_sweep_magnetic(
            self._components.magnetic,
            self._oracle(experiment, first, second).with_eta,
            etas=experiment.etas,
            truth=magnetic_truth(first, second),
            provenance=self._provenance(experiment),
            sigma_bounds=self._sigma_bounds(experiment),
            map_jobs=self._scheduler(experiment).map,
            include_floor=experiment.include_floor,
        )

    def _electric_sweep(
        self,
        experiment: ExperimentConfig,
        first: CoefficientPair,
        second: CoefficientPair,
    ) -> CurveTable:
        return stability_sweep_electric(
            self._components.electric,
            self._oracle(experiment, first, second).with_eta,
            etas=experiment.etas,
            truth=electric_truth(first, second),
            provenance=self._provenance(experiment),
            sigma_bounds=self._sigma_bounds(experiment),
            map_jobs=self._scheduler(experiment).map,
            include_floor=experiment.include_floor,
        )

    def check(
        self, experiment: ExperimentConfig, source_text: str | None = None
    ) -> RunSummary:
        """Run the invariant checks; gating failures fail the run."""
        outcomes = run_checks(
            self._components,
            self._components.config.harness_check_points,
            experiment.seed,
        )
        directory = self._directory(experiment, ExperimentMode.UNIT_CHECKS.value)
        return self._finish(
            directory,
            experiment,
            _Outcome(
                mode=ExperimentMode.UNIT_CHECKS.value,
                tables=[],
                checks=tuple(outcomes),
            ),
            source_text,
        )

    def forward(
        self, experiment: ExperimentConfig, source_text: str | None = None
    ) -> RunSummary:
        """Measure both coefficient pairs on the GO probe of xi = 0 at sigma.

        Writes first.dtn, second.dtn and the energy reports as diagnostics.
        """
        first, second = self._coefficients(experiment)
        directory = self._directory(experiment, "forward")
        grid = experiment.grid
        frame = build_frame(np.zeros(grid.n), np.zeros(grid.n), experiment.sigma, 1)
        diagnostics: dict[str, float | None] = {}
        try:
            for name, pair in (("first", first), ("second", second)):
                probe = self._components.go_builder.build_go_solution(
                    pair.potential, pair.q, frame
                )
                data = probe.boundary_input()
                solution = self._components.solver.solve_ibvp(
                    pair.potential, pair.q, data
                )
                report = energy_report(solution, data)
                record = DtnRecord(
                    grid=grid,
                    final_state=solution.final_state,
                    trace=magnetic_neumann_trace(solution, pair.potential),
                    probe_norm=data.norm(),
                    probe=probe.probe_metadata(),
                )
                self._record_store.save(directory.path / f"{name}.dtn", record)
                diagnostics[f"{name}_energy_ratio"] = report.ratio
                diagnostics[f"{name}_l2_drift"] = report.l2_drift
                diagnostics[f"{name}_probe_norm"] = record.probe_norm
        except PIPELINE_ERRORS as error:
            log.error("Forward run failed: %s", error)
            return self._finish(
                directory,
                experiment,
                _Outcome(
                    mode="forward",
                    tables=[],
                    failure=str(error),
                    diagnostics=diagnostics,
                ),
                source_text,
            )
        return self._finish(
            directory,
            experiment,
            _Outcome(
                mode="forward",
                tables=[],
                diagnostics=diagnostics,
            ),
            source_text,
        )

    def go_scan(
        self, experiment: ExperimentConfig, source_text: str | None = None
    ) -> RunSummary:
        """Remainder norms of the first pair's GO solution over the sigma list."""
        first, _ = self._coefficients(experiment)
        directory = self._directory(experiment, "go-scan")
        xi = (GO_SCAN_FREQUENCY,) + (0.0,) * (experiment.grid.n - 1)
        table = CurveTable(
            name="go-scan",
            columns=("sigma", "w_L2H1", "w_L2H2"),
            provenance=self._provenance(experiment),
        )
        try:
            rows = remainder_scan(self._components, first, xi, experiment.sigmas)
        except PIPELINE_ERRORS as error:
            log.error("GO scan failed: %s", error)
            return self._finish(
                directory,
                experiment,
                _Outcome(
                    mode="go-scan",
                    tables=[table],
                    failure=str(error),
                ),
                source_text,
            )
        for sigma, h1, h2 in rows:
            table = table.with_row(sigma=sigma, w_L2H1=h1, w_L2H2=h2)
        try:
            fit = fit_log_slope(table.column("sigma"), table.column("w_L2H1"))
            fits = {"slope": fit.slope, "r_squared": fit.r_squared}
        except FitError as error:
            log.warning("Remainder slope not fitted: %s", error)
            fits = {"slope": np.nan, "r_squared": np.nan}
        return self._finish(
            directory,
            experiment,
            _Outcome(
                mode="go-scan",
                tables=[table.model_copy(update={"fits": fits})],
            ),
            source_text,
        )

    def reconstruct_curl(
        self, experiment: ExperimentConfig, source_text: str | None = None
    ) -> RunSummary:
        """One noise-free magnetic reconstruction at sigma against its oracle.

        The samples table lists each sample next to the transform of the
        known curl difference. The reconstruction is written to curl.fld.
        """
        first, second = self._coefficients(experiment)
        directory = self._directory(experiment, "recon-curl")
        truth = magnetic_truth(first, second)
        columns = (
            *(f"xi_{axis + 1}" for axis in range(experiment.grid.n)),
            "j",
            "k",
            "value_re",
            "value_im",
            "oracle_re",
            "oracle_im",
        )
        table = CurveTable(
            name="curl-samples",
            columns=columns,
            provenance=self._provenance(experiment),
        )
        try:
            result = self._components.magnetic.reconstruct(
                self._oracle(experiment, first, second),
                experiment.sigma,
                self._scheduler(experiment).map,
            )
        except PIPELINE_ERRORS as error:
            log.error("Curl reconstruction failed: %s", error)
            return self._finish(
                directory,
                experiment,
                _Outcome(
                    mode="recon-curl",
                    tables=[table],
                    failure=str(error),
                ),
                source_text,
            )
        for sample in result.samples.samples:
            j, k = sample.pair
            oracle = fourier_transform_at(
                truth.components[j, k], truth.grid, np.asarray(sample.xi)
            )[0]
            table = table.with_row(
                **{f"xi_{axis + 1}": value for axis, value in enumerate(sample.xi)},
                j=j,
                k=k,
                value_re=sample.value.real,
                value_im=sample.value.imag,
                oracle_re=oracle.real,
                oracle_im=oracle.imag,
            )
        self._field_store.save(directory.path / "curl.fld", result.field)
        err_h, err_inf = curl_error(result.field, truth)
        return self._finish(
            directory,
            experiment,
            _Outcome(
                mode="recon-curl",
                tables=[table],
                diagnostics={
                    "radius": result.radius,
                    "err_Hminus1": err_h,
                    "err_Linf": err_inf,
                    "antisymmetry_defect": result.samples.antisymmetry_defect(),
                    "hermitian_defect": result.samples.hermitian_defect(),
                },
            ),
            source_text,
        )

    def reconstruct_q(
        self, experiment: ExperimentConfig, source_text: str | None = None
    ) -> RunSummary:
        """One noise-free electric reconstruction at (sigma, alpha).

        Without a configured alpha the largest admissible one, 0.9 sigma, is
        used. The reconstruction is written to q.fld.
        """
        first, second = self._coefficients(experiment)
        directory = self._directory(experiment, "recon-q")
        truth = electric_truth(first, second)
        config = self._components.config
        alpha = experiment.alpha or config.recon_alpha_fraction * experiment.sigma
        columns = (
            *(f"xi_{axis + 1}" for axis in range(experiment.grid.n)),
            "tau",
            "value_re",
            "value_im",
            "oracle_re",
            "oracle_im",
        )
        table = CurveTable(
            name="q-samples", columns=columns, provenance=self._provenance(experiment)
        )
        try:
            result = self._components.electric.reconstruct(
                self._oracle(experiment, first, second),
                experiment.sigma,
                alpha,
                self._scheduler(experiment).map,
            )
        except PIPELINE_ERRORS as error:
            log.error("q reconstruction failed: %s", error)
            return self._finish(
                directory,
                experiment,
                _Outcome(
                    mode="recon-q",
                    tables=[table],
                    failure=str(error),
                ),
                source_text,
            )
        for sample in result.samples.samples:
            oracle = fourier_transform_at(truth.values, truth.grid, sample.point)[0]
            table = table.with_row(
                **{f"xi_{axis + 1}": value for axis, value in enumerate(sample.xi)},
                tau=sample.tau,
                value_re=sample.value.real,
                value_im=sample.value.imag,
                oracle_re=oracle.real,
                oracle_im=oracle.imag,
            )
        self._field_store.save(directory.path / "q.fld", result.field)
        error_field = ScalarSpaceTimeField(
            grid=truth.grid, values=result.field.values - truth.values
        )
        extension = result.extension
        return self._finish(
            directory,
            experiment,
            _Outcome(
                mode="recon-q",
                tables=[table],
                diagnostics={
                    "alpha": alpha,
                    "n_samples": float(len(result.samples.samples)),
                    "err_Hminus1": discrete_norm(error_field, NormId.HMINUS1),
                    "hermitian_defect": result.samples.hermitian_defect(),
                    "fit_degree": float(extension.degree) if extension else None,
                    "fit_residual": extension.residual if extension else None,
                    "fit_condition": extension.condition if extension else None,
                },
            ),
            source_text,
        )
