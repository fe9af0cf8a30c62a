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

"""Recovery of the magnetic field sigma_jk = d_j a_k - d_k a_j from DtN data.

Each sample pairs the difference of the DtN maps on the side-2 GO probe
with the conjugated side-1 solution. Two frames sharing omega_I with
opposite omega_R cancel the omega_R component of the leading term, and the
choice omega_I = (xi_j e_k - xi_k e_j) / m turns the remaining component
into sigma_jk(xi).
"""

import itertools
import logging
from collections.abc import Callable, Sequence

import numpy as np

from dtn_inverse.field_core.core.fourier import (
    lattice_indices,
    spatial_lattice,
    synthesize,
)
from dtn_inverse.field_core.core.norms import discrete_norm
from dtn_inverse.field_core.core.quadrature import (
    extract_faces,
    space_time_pairing,
    surface_pairing,
    time_weights,
    volume_pairing,
)
from dtn_inverse.field_core.models import CurlField, Grid, NormId
from dtn_inverse.forward.models import DtnRecord
from dtn_inverse.forward.ports.solver import ForwardSolverPort
from dtn_inverse.go.core.frames import FrameError, build_frame, reflect_frame
from dtn_inverse.go.core.solutions import CARRIER_CENTER, GoBuilder
from dtn_inverse.go.models import FrequencyFrame, GoSolution
from dtn_inverse.harness.core.fitting import FitError, fit_stability_shape
from dtn_inverse.models import CurveTable, Provenance
from dtn_inverse.recon.core.rules import (
    MapJobs,
    ReconConfig,
    SweepInterruptedError,
    choose_cutoff,
    sequential_map,
    sigma_for_eta,
)
from dtn_inverse.recon.models import (
    CoefficientPair,
    CurlReconstruction,
    CurlSample,
    FourierSampleSet,
)
from dtn_inverse.recon.ports.oracle import DtnOraclePort

__all__ = [
    "MAGNETIC_COLUMNS",
    "PAIR_TOLERANCE",
    "MagneticReconstructor",
    "boundary_functional",
    "carrier_time_weight",
    "center_phase",
    "curl_error",
    "invert_lowpass",
    "pair_frame",
    "pair_strength",
    "stability_sweep_magnetic",
    "volume_term",
]

log = logging.getLogger(__name__)

PAIR_TOLERANCE = 1e-8
MAGNETIC_COLUMNS = ("eta", "sigma", "R", "err_Hminus1", "err_Linf", "floor_flag")
PIPELINE_ERRORS = (
    GoBuilder.GoConstructionError,
    DtnOraclePort.ProbeFailedError,
    ForwardSolverPort.ForwardSolverError,
    FrameError,
)


def boundary_functional(dtn_diff: DtnRecord, u1: GoSolution) -> complex:
    """i <d(T), conj u1(T)>_Omega + <d_nu, conj u1>_Sigma for a record difference.

    The record must stem from the probe of the side-2 partner of u1.
    May raise a ProbeMismatchError.
    """
    expected = u1.probe_metadata()
    if dtn_diff.probe is None or not dtn_diff.probe.matches(expected):
        raise DtnOraclePort.ProbeMismatchError(
            expected=expected, received=dtn_diff.probe
        )
    grid = u1.grid
    if dtn_diff.grid != grid:
        raise ValueError("Record and GO solution live on different grids")
    conjugate = np.conj(u1.values)
    return 1j * volume_pairing(
        dtn_diff.final_state, conjugate[-1], grid
    ) + surface_pairing(dtn_diff.trace, extract_faces(conjugate, grid), grid)


def volume_term(
    first: CoefficientPair,
    second: CoefficientPair,
    u1: GoSolution,
    u2: GoSolution,
) -> complex:
    """The integral of (|A_1|^2 - |A_2|^2 + q_2 - q_1) u_2 conj(u_1) over Q."""
    grid = first.grid
    weight = (
        first.potential.squared_magnitude() - second.potential.squared_magnitude()
    )[None] + (second.q.values - first.q.values)
    return space_time_pairing(weight * u2.values, np.conj(u1.values), grid)


def carrier_time_weight(u1: GoSolution, u2: GoSolution) -> complex:
    """Trapezoid sum of lambda^m with lambda the step factor of u2 conj(u1)."""
    grid = u1.grid
    factor = u2.carrier_rate * np.conj(u1.carrier_rate)
    return complex(np.sum(time_weights(grid) * factor ** np.arange(grid.n_t + 1)))


def center_phase(xi: Sequence[float]) -> complex:
    """e^{-i x_c . xi} for the carrier center x_c."""
    return complex(np.exp(-1j * CARRIER_CENTER * float(np.sum(xi))))


def pair_strength(xi: Sequence[float], pair: tuple[int, int]) -> float:
    """|xi_j e_k - xi_k e_j|."""
    j, k = pair
    return float(np.hypot(xi[j], xi[k]))


def invert_lowpass(
    samples: FourierSampleSet, radius: float, grid: Grid
) -> CurlField:
    """Band-limited synthesis of sigma from the samples with |xi| <= radius.

    Samples of (k, j) enter as -sigma_jk and are averaged with samples of
    (j, k) at the same frequency. May raise a LatticeMismatchError.
    """
    kept = [
        s for s in samples.samples if np.linalg.norm(s.xi) <= radius * (1 + 1e-12)
    ]
    if kept:
        lattice_indices(grid, np.asarray([s.xi for s in kept]))
    upper = {}
    for pair in itertools.combinations(range(grid.n), 2):
        collected: dict[tuple[float, ...], list[complex]] = {}
        for sample in kept:
            if sample.pair == pair:
                value = sample.value
            elif sample.pair == pair[::-1]:
                value = -sample.value
            else:
                continue
            key = tuple(np.round(np.asarray(sample.xi) / (2 * np.pi)).astype(int))
            collected.setdefault(key, []).append(value)
        frequencies = 2 * np.pi * np.asarray(list(collected), dtype=float)
        coefficients = np.asarray([np.mean(v) for v in collected.values()])
        upper[pair] = synthesize(
            grid, frequencies.reshape(-1, grid.n), coefficients
        ).real
    return CurlField.from_upper(grid, upper)


def pair_frame(
    xi: np.ndarray, sigma: float, pair: tuple[int, int]
) -> tuple[FrequencyFrame, float]:
    """The side-1 frame with omega_I = (xi_j e_k - xi_k e_j) / m, and m.

    May raise a FrameError.
    """
    j, k = pair
    strength = pair_strength(xi, pair)
    if strength <= PAIR_TOLERANCE:
        raise FrameError(details=f"xi_j e_k - xi_k e_j vanishes for {pair}")
    direction = np.zeros_like(xi)
    direction[k] = xi[j]
    direction[j] = -xi[k]
    frame = build_frame(
        xi, np.zeros_like(xi), sigma, 1, omega_imag=direction / strength
    )
    return frame, strength


class MagneticReconstructor:
    """Samples and inverts the magnetic field of the coefficient difference."""

    def __init__(self, *, config: ReconConfig, go_builder: GoBuilder):
        self._config = config
        self._go_builder = go_builder

    @property
    def config(self) -> ReconConfig:
        """The reconstruction parameters."""
        return self._config

    def working_cutoff(self, sigma: float, n: int) -> float:
        """kappa * sigma^(2/(n+4))."""
        return self._config.recon_cutoff_scale * choose_cutoff(sigma, n)

    def frame_functional(
        self, oracle: DtnOraclePort, frame: FrequencyFrame
    ) -> tuple[complex, complex, float]:
        """Boundary functional, carrier time weight and probe norm of one frame."""
        first, second = oracle.coefficients(1), oracle.coefficients(2)
        builder = self._go_builder
        u1 = builder.build_go_solution(first.potential, first.q, frame.with_side(1))
        u2 = builder.build_go_solution(second.potential, second.q, frame.with_side(2))
        record = oracle.measure(u2.boundary_input(), u2.probe_metadata())
        value = boundary_functional(record, u1)
        if self._config.recon_volume_correction:
            value += volume_term(first, second, u1, u2)
        return value, carrier_time_weight(u1, u2), record.probe_norm

    def _directional(
        self, oracle: DtnOraclePort, frame: FrequencyFrame
    ) -> tuple[complex, complex, float]:
        value, weight, norm = self.frame_functional(oracle, frame)
        sample = value * center_phase(frame.xi) / (2 * frame.sigma * weight)
        return sample, weight, norm

    def curl_fourier_sample(
        self,
        oracle: DtnOraclePort,
        xi: Sequence[float],
        sigma: float,
        pair: tuple[int, int],
    ) -> CurlSample:
        """Estimate sigma_jk(xi) from the probes of omega and its reflection.

        May raise a FrameError, a GoConstructionError or a ProbeFailedError.
        """
        xi_vector = np.asarray(xi, dtype=float)
        j, k = pair
        frame, strength = pair_frame(xi_vector, sigma, pair)
        forward, weight, forward_norm = self._directional(oracle, frame)
        backward, _, backward_norm = self._directional(oracle, reflect_frame(frame))
        value = -(strength / 2) * (forward + backward)
        log.debug(
            "sigma_%d%d(%s) = %.4e%+.4ej at sigma=%s",
            j,
            k,
            xi_vector,
            value.real,
            value.imag,
            sigma,
        )
        return CurlSample(
            xi=tuple(xi_vector),
            pair=pair,
            value=value,
            sigma=sigma,
            directional=(forward, backward),
            time_weight=weight,
            probe_norms=(forward_norm, backward_norm),
        )

    def omega_continuity(
        self,
        oracle: DtnOraclePort,
        xi: Sequence[float],
        sigma: float,
        pair: tuple[int, int],
        angle: float,
    ) -> float:
        """|S(omega') - S(omega)| / angle for omega_I rotated towards omega_R.

        S is the normalised directional sample of a single frame.
        """
        if angle == 0:
            raise ValueError("The rotation angle must not vanish")
        frame, _ = pair_frame(np.asarray(xi, dtype=float), sigma, pair)
        real, imag = np.asarray(frame.omega_real), np.asarray(frame.omega_imag)
        tilted = FrequencyFrame(
            **{
                **frame.model_dump(),
                "omega_real": tuple(np.cos(angle) * real - np.sin(angle) * imag),
                "omega_imag": tuple(np.cos(angle) * imag + np.sin(angle) * real),
            }
        )
        base, _, _ = self._directional(oracle, frame)
        moved, _, _ = self._directional(oracle, tilted)
        return abs(moved - base) / abs(angle)

    def sample_jobs(
        self, grid: Grid, radius: float
    ) -> list[tuple[tuple[float, ...], tuple[int, int]]]:
        """(xi, pair) for every lattice point and pair with a non-degenerate frame."""
        return [
            (tuple(xi), pair)
            for xi in spatial_lattice(grid, radius)
            for pair in itertools.combinations(range(grid.n), 2)
            if pair_strength(xi, pair) > PAIR_TOLERANCE
        ]

    def reconstruct(
        self,
        oracle: DtnOraclePort,
        sigma: float,
        map_jobs: MapJobs = sequential_map,
    ) -> CurlReconstruction:
        """Sample sigma_jk on |xi| <= R and synthesize the band-limited field.

        May raise the errors of curl_fourier_sample.
        """
        grid = oracle.grid
        radius = self.working_cutoff(sigma, grid.n)
        jobs = self.sample_jobs(grid, radius)
        log.info(
            "Sampling the magnetic field at %d frequency pairs, sigma=%s, R=%.3f",
            len(jobs),
            sigma,
            radius,
        )
        samples = map_jobs(
            lambda job: self.curl_fourier_sample(oracle, job[0], sigma, job[1]), jobs
        )
        sample_set = FourierSampleSet(radius=radius, samples=tuple(samples))
        return CurlReconstruction(
            field=invert_lowpass(sample_set, radius, grid),
            samples=sample_set,
            sigma=sigma,
            radius=radius,
        )


def curl_error(reconstruction: CurlField, truth: CurlField) -> tuple[float, float]:
    """H^-1 and Linf norms of the reconstruction error."""
    difference = CurlField(
        grid=truth.grid, components=reconstruction.components - truth.components
    )
    return (
        discrete_norm(difference, NormId.HMINUS1),
        discrete_norm(difference, NormId.LINF),
    )


def stability_sweep_magnetic(
    reconstructor: MagneticReconstructor,
    oracle_for_eta: Callable[[float], DtnOraclePort],
    *,
    etas: Sequence[float],
    truth: CurlField,
    provenance: Provenance,
    sigma_bounds: tuple[float, float],
    map_jobs: MapJobs = sequential_map,
    include_floor: bool = True,
) -> CurveTable:
    """Reconstruction errors over noise levels.

    With include_floor the sweep starts with the noise-free row eta = 0.

    May raise a SweepInterruptedError carrying the rows computed so far.
    """
    if any(eta <= 0 for eta in etas):
        raise ValueError("Noise levels of a sweep must be positive")
    config = reconstructor.config
    sigma_min, sigma_cap = sigma_bounds
    table = CurveTable(
        name="magnetic", columns=MAGNETIC_COLUMNS, provenance=provenance
    )
    floor = None
    levels = (0.0, *etas) if include_floor else tuple(etas)
    for eta in levels:
        sigma = sigma_for_eta(
            eta, rule=config.recon_sigma_rule, sigma_min=sigma_min, sigma_cap=sigma_cap
        )
        try:
            result = reconstructor.reconstruct(oracle_for_eta(eta), sigma, map_jobs)
        except PIPELINE_ERRORS as error:
            log.error("Magnetic sweep failed at eta=%.1e: %s", eta, error)
            raise SweepInterruptedError(
                table=table, eta=eta, details=str(error)
            ) from error
        err_h, err_inf = curl_error(result.field, truth)
        if floor is None:
            floor = err_h
        on_floor = err_h <= floor * (1 + config.recon_floor_tolerance)
        log.info("eta=%.1e sigma=%.2f: H^-1 error %.4e", eta, sigma, err_h)
        table = table.with_row(
            eta=eta,
            sigma=sigma,
            R=result.radius,
            err_Hminus1=err_h,
            err_Linf=err_inf,
            floor_flag=float(on_floor),
        )
    return table.model_copy(update={"fits": _shape_fits(table)})


def _shape_fits(table: CurveTable) -> dict[str, float]:
    rows = [
        (eta, err)
        for eta, err in zip(
            table.column("eta"), table.column("err_Hminus1"), strict=True
        )
        if eta > 0
    ]
    try:
        fit = fit_stability_shape([r[0] for r in rows], [r[1] for r in rows])
    except FitError as error:
        log.warning("Stability shape not fitted: %s", error)
        return {"a": np.nan, "b": np.nan, "c": np.nan, "r_squared": np.nan}
    return fit._asdict()
