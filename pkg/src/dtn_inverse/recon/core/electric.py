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

"""Recovery of the electric potential q from DtN data.

With y = tau xi / (2 |xi|^2) the product of the side-2 solution and the
conjugated side-1 solution oscillates like e^{-i(x.xi + t tau)}, so the
boundary functional yields the Fourier transform of q on the cone
|tau| < 2 |xi|. A polynomial fitted on the cone carries the samples to a
ball around the origin, where they are inverted.
"""

import cmath
import itertools
import logging
import math
from collections.abc import Callable, Sequence

import numpy as np

from dtn_inverse.field_core.core.fourier import (
    lattice_indices,
    space_time_lattice,
    spatial_lattice,
    synthesize,
)
from dtn_inverse.field_core.core.norms import discrete_norm
from dtn_inverse.field_core.models import Grid, NormId, ScalarSpaceTimeField
from dtn_inverse.go.core.frames import build_frame
from dtn_inverse.go.core.solutions import CARRIER_CENTER, GoBuilder
from dtn_inverse.harness.core.fitting import FitError, fit_log_power, fit_triple_log
from dtn_inverse.models import CurveTable, Provenance
from dtn_inverse.recon.core.magnetic import (
    PIPELINE_ERRORS,
    boundary_functional,
    center_phase,
)
from dtn_inverse.recon.core.rules import (
    MapJobs,
    ReconConfig,
    SweepInterruptedError,
    alpha_for_eta,
    sequential_map,
    sigma_for_eta,
)
from dtn_inverse.recon.models import (
    BallExtension,
    ElectricReconstruction,
    FrequencyCone,
    QSample,
    QSampleSet,
)
from dtn_inverse.recon.ports.oracle import DtnOraclePort

__all__ = [
    "ELECTRIC_COLUMNS",
    "ElectricReconstructor",
    "build_cone_lattice",
    "cone_y",
    "extend_to_ball",
    "invert_q",
    "monomial_exponents",
    "stability_sweep_electric",
]

log = logging.getLogger(__name__)

ELECTRIC_COLUMNS = (
    "eta",
    "alpha",
    "sigma",
    "n_samples",
    "fit_degree",
    "err_Hminus1",
    "fit_tripleLog_R2",
    "fit_logPower_R2",
)


def cone_y(xi: Sequence[float], tau: float) -> np.ndarray:
    """y = tau xi / (2 |xi|^2), so that 2 y.xi = tau."""
    xi_vector = np.asarray(xi, dtype=float)
    return tau * xi_vector / (2 * float(xi_vector @ xi_vector))


def build_cone_lattice(alpha: float, grid: Grid) -> FrequencyCone:
    """Lattice points (xi, tau) with xi != 0, |xi| < 2 alpha and |tau| < 2 |xi|."""
    if alpha <= 0:
        raise ValueError("alpha must be positive")
    time_step = 2 * np.pi / grid.horizon
    time_span = grid.n_t // 2 - 1
    points = []
    for xi in spatial_lattice(grid, 2 * alpha):
        norm = float(np.linalg.norm(xi))
        if norm == 0 or not norm < 2 * alpha:
            continue
        for m in range(-time_span, time_span + 1):
            tau = m * time_step
            if abs(tau) < 2 * norm:
                points.append(np.append(xi, tau))
    cone = FrequencyCone(
        alpha=alpha, points=np.asarray(points, dtype=float).reshape(-1, grid.n + 1)
    )
    if cone.empty:
        log.warning("The frequency lattice misses the cone of alpha=%s", alpha)
    return cone


def monomial_exponents(variables: int, degree: int) -> list[tuple[int, ...]]:
    """Exponents of all monomials up to the given total degree."""
    return [
        exponents
        for exponents in itertools.product(range(degree + 1), repeat=variables)
        if sum(exponents) <= degree
    ]


def _design(points: np.ndarray, exponents: list[tuple[int, ...]]) -> np.ndarray:
    return np.stack(
        [np.prod(points ** np.asarray(e), axis=1) for e in exponents], axis=1
    )


def _recentering(points: np.ndarray, center: np.ndarray | None) -> np.ndarray:
    """e^{i c.(xi, tau)}, which turns a transform into one about c."""
    if center is None:
        return np.ones(len(points), dtype=complex)
    return np.exp(1j * (points @ center))


def _lattice_key(point: np.ndarray) -> tuple[float, ...]:
    return tuple(np.round(np.asarray(point, dtype=float), 9))


def extend_to_ball(
    samples: QSampleSet,
    alpha: float,
    degree: int,
    grid: Grid,
    *,
    center: Sequence[float] | None = None,
) -> BallExtension:
    """Least squares polynomial in (xi, tau) / alpha, evaluated on |(xi, tau)| < alpha.

    The cone samples enter at their effective time frequencies. With a
    center c the polynomial fits e^{i c.(xi, tau)} times the samples, the
    transform about c, and the factor is removed again on the ball. Ball
    points that were sampled keep their samples. The degree is lowered until
    the fit is overdetermined and of full rank.
    """
    if not samples.samples:
        raise ValueError("Cannot extend an empty sample set")
    shift = None if center is None else np.asarray(center, dtype=float)
    effective = np.asarray([s.effective_point for s in samples.samples])
    values = np.asarray([s.value for s in samples.samples], dtype=complex)
    values = values * _recentering(effective, shift)
    points = effective / alpha
    ball = space_time_lattice(grid, alpha)

    for current in range(degree, -1, -1):
        exponents = monomial_exponents(grid.n + 1, current)
        design = _design(points, exponents)
        if design.shape[1] > len(values):
            log.warning(
                "Degree %d needs %d samples, got %d; lowering the degree",
                current,
                design.shape[1],
                len(values),
            )
            continue
        coefficients, _, rank, singular = np.linalg.lstsq(design, values, rcond=None)
        if rank < design.shape[1]:
            log.warning(
                "Rank-deficient fit of degree %d (rank %d of %d); lowering the degree",
                current,
                rank,
                design.shape[1],
            )
            continue
        break

    reference = float(np.linalg.norm(values))
    misfit = float(np.linalg.norm(design @ coefficients - values))
    condition = float(singular[0] / singular[-1]) if singular[-1] > 0 else math.inf
    extended = _design(ball / alpha, exponents) @ coefficients
    extended = extended / _recentering(ball, shift)

    measured = {_lattice_key(s.point): s.value for s in samples.samples}
    sampled = 0
    for index, point in enumerate(ball):
        value = measured.get(_lattice_key(point))
        if value is not None:
            extended[index] = value
            sampled += 1
    log.debug(
        "Extended %d samples to %d ball points (%d sampled), degree %d",
        len(values),
        len(ball),
        sampled,
        current,
    )
    return BallExtension(
        alpha=alpha,
        points=ball,
        values=extended,
        degree=current,
        residual=misfit / reference if reference else 0.0,
        rank=int(rank),
        condition=condition,
        sampled=sampled,
    )


def invert_q(extension: BallExtension, grid: Grid) -> ScalarSpaceTimeField:
    """Band-limited space-time synthesis of q from the ball values.

    May raise a LatticeMismatchError.
    """
    points = np.asarray(extension.points, dtype=float).reshape(-1, grid.n + 1)
    if len(points):
        lattice_indices(grid, points)
    values = synthesize(grid, points, extension.values).real
    return ScalarSpaceTimeField(grid=grid, values=values)


class ElectricReconstructor:
    """Samples q on a frequency cone, extends the samples and inverts them."""

    class ConeViolationError(ValueError):
        """Raised when (xi, tau) does not give an admissible y."""

        def __init__(self, *, xi: Sequence[float], tau: float, details: str):
            super().__init__(f"(xi={tuple(xi)}, tau={tau}) is not usable: {details}")

    def __init__(self, *, config: ReconConfig, go_builder: GoBuilder):
        self._config = config
        self._go_builder = go_builder

    @property
    def config(self) -> ReconConfig:
        """The reconstruction parameters."""
        return self._config

    def q_fourier_sample(
        self, oracle: DtnOraclePort, xi: Sequence[float], tau: float, sigma: float
    ) -> QSample:
        """Estimate the transform of q_2 - q_1 at (xi, tau).

        May raise a ConeViolationError, a FrameError, a GoConstructionError or
        a ProbeFailedError.
        """
        xi_vector = np.asarray(xi, dtype=float)
        if not np.any(xi_vector):
            raise self.ConeViolationError(xi=xi, tau=tau, details="xi vanishes")
        y = cone_y(xi_vector, tau)
        if np.linalg.norm(y) >= 1:
            raise self.ConeViolationError(xi=xi, tau=tau, details="|y| >= 1")

        frame = build_frame(xi_vector, y, sigma, 1)
        first, second = oracle.coefficients(1), oracle.coefficients(2)
        builder = self._go_builder
        u1 = builder.build_go_solution(first.potential, first.q, frame)
        u2 = builder.build_go_solution(second.potential, second.q, frame.with_side(2))
        record = oracle.measure(u2.boundary_input(), u2.probe_metadata())
        value = -boundary_functional(record, u1) * center_phase(xi_vector)
        rate = u2.carrier_rate * np.conj(u1.carrier_rate)
        return QSample(
            xi=tuple(xi_vector),
            tau=tau,
            y=tuple(y),
            value=value,
            tau_effective=1j * cmath.log(rate) / oracle.grid.dt,
            sigma=sigma,
            probe_norm=record.probe_norm,
        )

    def extend_to_ball(
        self, samples: QSampleSet, alpha: float, grid: Grid
    ) -> BallExtension:
        """Extension with the configured maximal degree about the grid center."""
        center = (CARRIER_CENTER,) * grid.n + (grid.horizon / 2,)
        return extend_to_ball(
            samples, alpha, self._config.recon_max_degree, grid, center=center
        )

    def reconstruct(
        self,
        oracle: DtnOraclePort,
        sigma: float,
        alpha: float,
        map_jobs: MapJobs = sequential_map,
    ) -> ElectricReconstruction:
        """Sample on the cone of alpha, extend to the ball and invert.

        An empty cone gives the vanishing field.
        """
        grid = oracle.grid
        cone = build_cone_lattice(alpha, grid)
        if cone.empty:
            return ElectricReconstruction(
                field=ScalarSpaceTimeField.zeros(grid),
                samples=QSampleSet(alpha=alpha),
                extension=None,
                sigma=sigma,
                alpha=alpha,
            )
        log.info(
            "Sampling q at %d cone points, sigma=%s, alpha=%.3f",
            len(cone.points),
            sigma,
            alpha,
        )
        samples = map_jobs(
            lambda point: self.q_fourier_sample(
                oracle, point[:-1], float(point[-1]), sigma
            ),
            list(cone.points),
        )
        sample_set = QSampleSet(alpha=alpha, samples=tuple(samples))
        extension = self.extend_to_ball(sample_set, alpha, grid)
        return ElectricReconstruction(
            field=invert_q(extension, grid),
            samples=sample_set,
            extension=extension,
            sigma=sigma,
            alpha=alpha,
        )


def stability_sweep_electric(
    reconstructor: ElectricReconstructor,
    oracle_for_eta: Callable[[float], DtnOraclePort],
    *,
    etas: Sequence[float],
    truth: ScalarSpaceTimeField,
    provenance: Provenance,
    sigma_bounds: tuple[float, float],
    map_jobs: MapJobs = sequential_map,
    include_floor: bool = True,
) -> CurveTable:
    """H^-1 errors of q over noise levels.

    With include_floor the sweep starts with the noise-free row eta = 0.

    May raise a SweepInterruptedError carrying the rows computed so far.
    """
    if any(eta <= 0 for eta in etas):
        raise ValueError("Noise levels of a sweep must be positive")
    config = reconstructor.config
    sigma_min, sigma_cap = sigma_bounds
    rows = []
    levels = (0.0, *etas) if include_floor else tuple(etas)
    for eta in levels:
        sigma = sigma_for_eta(
            eta, rule=config.recon_sigma_rule, sigma_min=sigma_min, sigma_cap=sigma_cap
        )
        alpha = alpha_for_eta(
            eta,
            rule=config.recon_alpha_rule,
            fraction=config.recon_alpha_fraction,
            sigma=sigma,
        )
        try:
            result = reconstructor.reconstruct(
                oracle_for_eta(eta), sigma, alpha, map_jobs
            )
        except PIPELINE_ERRORS as error:
            log.error("Electric sweep failed at eta=%.1e: %s", eta, error)
            raise SweepInterruptedError(
                table=_electric_table(rows, provenance), eta=eta, details=str(error)
            ) from error
        error_norm = discrete_norm(
            ScalarSpaceTimeField(
                grid=truth.grid, values=result.field.values - truth.values
            ),
            NormId.HMINUS1,
        )
        log.info("eta=%.1e alpha=%.2f: H^-1 error %.4e", eta, alpha, error_norm)
        rows.append(
            {
                "eta": eta,
                "alpha": alpha,
                "sigma": sigma,
                "n_samples": len(result.samples.samples),
                "fit_degree": (
                    result.extension.degree if result.extension else math.nan
                ),
                "err_Hminus1": error_norm,
            }
        )
    return _electric_table(rows, provenance)


def _electric_table(
    rows: list[dict[str, float]], provenance: Provenance
) -> CurveTable:
    noisy = [row for row in rows if row["eta"] > 0]
    etas = [row["eta"] for row in noisy]
    errors = [row["err_Hminus1"] for row in noisy]
    try:
        triple = fit_triple_log(etas, errors)
    except FitError as error:
        log.warning("Triple logarithmic shape not fitted: %s", error)
        triple = math.nan
    try:
        power = fit_log_power(etas, errors).r_squared
    except FitError as error:
        log.warning("Logarithmic power shape not fitted: %s", error)
        power = math.nan
    table = CurveTable(
        name="electric",
        columns=ELECTRIC_COLUMNS,
        provenance=provenance,
        fits={"tripleLog_R2": triple, "logPower_R2": power},
    )
    for row in rows:
        table = table.with_row(
            **row, fit_tripleLog_R2=triple, fit_logPower_R2=power
        )
    return table
