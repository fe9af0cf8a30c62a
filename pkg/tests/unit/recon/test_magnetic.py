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

"""Test the sampling and inversion of the magnetic field."""

import numpy as np
import pytest

from dtn_inverse.field_core.core.fourier import (
    LatticeMismatchError,
    fourier_transform_at,
    spatial_lattice,
)
from dtn_inverse.field_core.core.operators import divergence, partial
from dtn_inverse.field_core.core.quadrature import space_time_pairing
from dtn_inverse.field_core.models import (
    CurlField,
    Grid,
    ScalarSpaceTimeField,
    VectorField,
)
from dtn_inverse.forward.core.crank_nicolson import CrankNicolsonSolver
from dtn_inverse.forward.models import DtnRecord
from dtn_inverse.go.core.frames import FrameError, build_frame
from dtn_inverse.go.core.solutions import GoBuilder
from dtn_inverse.go.models import GoSolution
from dtn_inverse.harness.adapters.simulated_oracle import SimulatedDtnOracle
from dtn_inverse.recon.core.magnetic import (
    MagneticReconstructor,
    boundary_functional,
    center_phase,
    curl_error,
    invert_lowpass,
    pair_frame,
    volume_term,
)
from dtn_inverse.recon.core.rules import ReconConfig
from dtn_inverse.recon.models import CoefficientPair, CurlSample, FourierSampleSet
from dtn_inverse.recon.ports.oracle import DtnOraclePort
from tests.fixtures.fields import gaussian, make_grid, solenoidal_bump

TWO_PI = 2 * np.pi


def samples_of(grid, values: np.ndarray, radius: float, pair=(0, 1)):
    """Exact transforms of one component on the lattice inside the radius."""
    lattice = spatial_lattice(grid, radius)
    transform = fourier_transform_at(values, grid, lattice)
    return FourierSampleSet(
        radius=radius,
        samples=tuple(
            CurlSample(
                xi=tuple(xi),
                pair=pair,
                value=value,
                sigma=8.0,
                directional=(0j, 0j),
                time_weight=1.0,
                probe_norms=(1.0, 1.0),
            )
            for xi, value in zip(lattice, transform, strict=True)
        ),
    )


def test_invert_lowpass_is_exact_on_band_limited_fields():
    """Test that exact samples of a single mode give the mode back."""
    grid = make_grid(n_x=8)
    mesh = grid.mesh()
    sigma_01 = np.cos(TWO_PI * mesh[1]) + 0.5 * np.sin(TWO_PI * mesh[2])
    field = invert_lowpass(samples_of(grid, sigma_01, 7.0), 7.0, grid)
    expected = CurlField.from_upper(grid, {(0, 1): sigma_01})
    np.testing.assert_allclose(field.components, expected.components, atol=1e-10)


def test_invert_lowpass_of_nothing_is_zero():
    """Test that empty and vanishing sample sets give the zero field."""
    grid = make_grid(n_x=8)
    empty = invert_lowpass(FourierSampleSet(radius=7.0), 7.0, grid)
    assert not np.any(empty.components)
    zero = invert_lowpass(
        samples_of(grid, np.zeros(grid.shape), 7.0), 7.0, grid
    )
    assert not np.any(zero.components)


def test_invert_lowpass_reads_reversed_pairs_with_a_sign():
    """Test that samples of (k, j) enter as -sigma_jk."""
    grid = make_grid(n_x=8)
    sigma_01 = np.cos(TWO_PI * grid.mesh()[0])
    forward = samples_of(grid, sigma_01, 7.0, pair=(0, 1))
    reverse = samples_of(grid, -sigma_01, 7.0, pair=(1, 0))
    from_forward = invert_lowpass(forward, 7.0, grid)
    from_reverse = invert_lowpass(reverse, 7.0, grid)
    np.testing.assert_allclose(
        from_forward.components, from_reverse.components, atol=1e-12
    )


def test_invert_lowpass_drops_samples_beyond_the_cutoff():
    """Test that only frequencies inside the cutoff enter the synthesis."""
    grid = make_grid(n_x=8)
    sigma_01 = 1.0 + np.cos(TWO_PI * grid.mesh()[0])
    field = invert_lowpass(samples_of(grid, sigma_01, 7.0), 1.0, grid)
    np.testing.assert_allclose(field.components[0, 1], 1.0, atol=1e-10)


def test_invert_lowpass_rejects_off_lattice_samples():
    """Test that frequencies off the lattice are reported."""
    grid = make_grid(n_x=8)
    off = FourierSampleSet(
        radius=7.0,
        samples=(
            CurlSample(
                xi=(1.0, 0.0, 0.0),
                pair=(0, 1),
                value=1.0,
                sigma=8.0,
                directional=(0j, 0j),
                time_weight=1.0,
                probe_norms=(1.0, 1.0),
            ),
        ),
    )
    with pytest.raises(LatticeMismatchError):
        invert_lowpass(off, 7.0, grid)


def test_pair_frame_direction():
    """Test omega_I = (xi_j e_k - xi_k e_j) / m and the degenerate pairs."""
    xi = np.asarray([3.0, 4.0, 0.0])
    frame, strength = pair_frame(xi, 8.0, (0, 1))
    assert strength == pytest.approx(5.0)
    np.testing.assert_allclose(frame.omega_imag, (-0.8, 0.6, 0.0), atol=1e-12)
    assert abs(np.dot(frame.omega_real, xi)) <= 1e-12
    with pytest.raises(FrameError):
        pair_frame(np.asarray([0.0, 0.0, TWO_PI]), 8.0, (0, 1))


def test_center_phase():
    """Test the phase of the carrier center."""
    assert center_phase((TWO_PI, 0.0, 0.0)) == pytest.approx(-1.0)
    assert center_phase((TWO_PI, TWO_PI, 0.0)) == pytest.approx(1.0)


def test_sample_jobs_skip_degenerate_pairs(magnetic: MagneticReconstructor):
    """Test that xi = 0 and pairs with xi_j = xi_k = 0 are not sampled."""
    grid = make_grid(n_x=8)
    jobs = magnetic.sample_jobs(grid, 7.0)
    assert len(jobs) == 12
    for xi, (j, k) in jobs:
        assert np.hypot(xi[j], xi[k]) > 0


def test_zero_difference_samples_vanish(
    magnetic: MagneticReconstructor, same_pair_oracle: SimulatedDtnOracle
):
    """Test that identical coefficient pairs give vanishing samples."""
    sample = magnetic.curl_fourier_sample(
        same_pair_oracle, (TWO_PI, 0.0, 0.0), 4.0, (0, 1)
    )
    assert abs(sample.value) <= 1e-9
    assert all(norm > 0 for norm in sample.probe_norms)
    assert sample.time_weight != 0


def test_volume_term_vanishes_for_equal_pairs(
    builder: GoBuilder, same_pair_oracle: SimulatedDtnOracle
):
    """Test the volume term and the corrected functional for equal pairs."""
    pair = same_pair_oracle.coefficients(1)
    frame = build_frame((TWO_PI, 0.0, 0.0), (0.0, 0.0, 0.0), 4.0, 1)
    u1 = builder.build_go_solution(pair.potential, pair.q, frame)
    u2 = builder.build_go_solution(pair.potential, pair.q, frame.with_side(2))
    assert volume_term(pair, pair, u1, u2) == 0

    corrected = MagneticReconstructor(
        config=ReconConfig(recon_volume_correction=True), go_builder=builder
    )
    value, weight, norm = corrected.frame_functional(same_pair_oracle, frame)
    assert abs(value) <= 1e-9
    assert norm > 0


@pytest.fixture(name="cross_grid")
def create_cross_grid():
    """A grid fine enough for the quadrature cross-checks at sigma = 4."""
    return make_grid(n_x=20, n_t=32)


def functional_and_volume(
    builder: GoBuilder, oracle: SimulatedDtnOracle
) -> tuple[complex, complex, GoSolution, GoSolution]:
    """Boundary functional, volume term and both GO solutions of one frame."""
    first, second = oracle.coefficients(1), oracle.coefficients(2)
    frame = build_frame((TWO_PI, 0.0, 0.0), (0.0, 0.0, 0.0), 4.0, 1)
    u1 = builder.build_go_solution(first.potential, first.q, frame)
    u2 = builder.build_go_solution(second.potential, second.q, frame.with_side(2))
    record = oracle.measure(u2.boundary_input(), u2.probe_metadata())
    volume = volume_term(first, second, u1, u2)
    return boundary_functional(record, u1), volume, u1, u2


def test_boundary_functional_balances_the_volume_term(
    builder: GoBuilder, solver: CrankNicolsonSolver, cross_grid: Grid
):
    """Test that the functional of an electric difference is minus its volume term."""
    grid = cross_grid
    free = VectorField.zeros(grid)
    q = np.broadcast_to(0.2 * gaussian(grid, width=0.12), grid.space_time_shape)
    oracle = SimulatedDtnOracle(
        solver=solver,
        first=CoefficientPair(potential=free, q=ScalarSpaceTimeField.zeros(grid)),
        second=CoefficientPair(
            potential=free, q=ScalarSpaceTimeField(grid=grid, values=q)
        ),
    )
    functional, volume, _, _ = functional_and_volume(builder, oracle)
    assert abs(volume) > 0
    assert abs(functional + volume) <= 0.05 * abs(volume)


def test_boundary_functional_matches_the_first_order_quadrature(
    builder: GoBuilder, solver: CrankNicolsonSolver, cross_grid: Grid
):
    """Test the functional of a magnetic difference against direct quadrature.

    The functional plus the volume term equals the integral of
    -(2i (A_2 - A_1).grad(u_2) + i div(A_2 - A_1) u_2) conj(u_1).
    """
    grid = cross_grid
    q = ScalarSpaceTimeField.zeros(grid)
    first = CoefficientPair(potential=VectorField.zeros(grid), q=q)
    second = CoefficientPair(potential=solenoidal_bump(grid, amplitude=0.1), q=q)
    oracle = SimulatedDtnOracle(solver=solver, first=first, second=second)
    functional, volume, u1, u2 = functional_and_volume(builder, oracle)

    difference = second.potential - first.potential
    first_order = 1j * divergence(difference)[None] * u2.values
    for axis, component in enumerate(difference.components):
        first_order += 2j * component[None] * partial(u2.values, grid, axis)
    expected = -space_time_pairing(first_order, np.conj(u1.values), grid)
    assert abs(expected) > 0
    assert abs(functional + volume - expected) <= 0.05 * abs(expected)


def test_boundary_functional_checks_the_probe(
    builder: GoBuilder, same_pair_oracle: SimulatedDtnOracle
):
    """Test that records of another probe are rejected."""
    pair = same_pair_oracle.coefficients(1)
    grid = same_pair_oracle.grid
    frame = build_frame((TWO_PI, 0.0, 0.0), (0.0, 0.0, 0.0), 4.0, 1)
    u1 = builder.build_go_solution(pair.potential, pair.q, frame)
    record = DtnRecord(
        grid=grid,
        final_state=np.zeros(grid.shape),
        trace=np.zeros((2 * grid.n, grid.n_t + 1, grid.face_size)),
        probe_norm=1.0,
    )
    with pytest.raises(DtnOraclePort.ProbeMismatchError):
        boundary_functional(record, u1)

    other_sigma = u1.probe_metadata().model_copy(update={"sigma": 5.0})
    with pytest.raises(DtnOraclePort.ProbeMismatchError):
        boundary_functional(record.model_copy(update={"probe": other_sigma}), u1)

    partner = u1.probe_metadata().model_copy(update={"side": 2})
    matched = record.model_copy(update={"probe": partner})
    assert boundary_functional(matched, u1) == 0


def test_omega_continuity_needs_an_angle(
    magnetic: MagneticReconstructor, same_pair_oracle: SimulatedDtnOracle
):
    """Test that the continuity modulus needs a non-zero rotation."""
    with pytest.raises(ValueError):
        magnetic.omega_continuity(
            same_pair_oracle, (TWO_PI, 0.0, 0.0), 4.0, (0, 1), 0.0
        )


def test_curl_error_of_the_truth_vanishes():
    """Test that the reconstruction error of the truth itself is zero."""
    grid = make_grid(n_x=8)
    truth = CurlField.from_upper(grid, {(0, 1): np.cos(TWO_PI * grid.mesh()[0])})
    assert curl_error(truth, truth) == (0.0, 0.0)
