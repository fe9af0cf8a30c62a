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

"""Test the magnetic reconstruction from simulated DtN data end to end."""

import itertools
import math
from typing import NamedTuple

import numpy as np
import pytest

from dtn_inverse.field_core.core.fourier import fourier_transform_at, synthesize
from dtn_inverse.field_core.models import CurlField, ScalarSpaceTimeField, VectorField
from dtn_inverse.forward.core.crank_nicolson import CrankNicolsonSolver, ForwardConfig
from dtn_inverse.go.core.solutions import GoBuilder, GoConfig
from dtn_inverse.harness.adapters.simulated_oracle import SimulatedDtnOracle
from dtn_inverse.harness.core.fixtures import magnetic_truth
from dtn_inverse.models import Provenance
from dtn_inverse.recon.core.magnetic import (
    MAGNETIC_COLUMNS,
    MagneticReconstructor,
    stability_sweep_magnetic,
)
from dtn_inverse.recon.core.rules import ReconConfig
from dtn_inverse.recon.models import CoefficientPair, CurlReconstruction
from dtn_inverse.transport.core.n_omega import TransportConfig, TransportOperator
from tests.fixtures.fields import make_grid, solenoidal_bump

SIGMA = 8.0


class Setup(NamedTuple):
    """Oracle, reconstructor and magnetic field of the bump fixture."""

    oracle: SimulatedDtnOracle
    magnetic: MagneticReconstructor
    truth: CurlField


class Run(NamedTuple):
    """A reconstruction at sigma = 8 together with its setup."""

    setup: Setup
    result: CurlReconstruction


def create_setup(n_x: int, config: ReconConfig) -> Setup:
    """A = 0 against a solenoidal bump of amplitude 0.1, both with q = 0."""
    grid = make_grid(n_x=n_x, n_t=16)
    solver = CrankNicolsonSolver(ForwardConfig())
    builder = GoBuilder(
        config=GoConfig(),
        transport=TransportOperator(TransportConfig()),
        solver=solver,
    )
    q = ScalarSpaceTimeField.zeros(grid)
    first = CoefficientPair(potential=VectorField.zeros(grid), q=q)
    second = CoefficientPair(potential=solenoidal_bump(grid, amplitude=0.1), q=q)
    return Setup(
        oracle=SimulatedDtnOracle(solver=solver, first=first, second=second),
        magnetic=MagneticReconstructor(config=config, go_builder=builder),
        truth=magnetic_truth(first, second),
    )


@pytest.fixture(name="run", scope="module")
def create_run() -> Run:
    """Reconstruct the magnetic field on 16^3 nodes at sigma = 8."""
    setup = create_setup(16, ReconConfig())
    return Run(setup=setup, result=setup.magnetic.reconstruct(setup.oracle, SIGMA))


def expected_samples(run: Run) -> np.ndarray:
    """Transforms of the true field at the sampled frequencies and pairs."""
    grid = run.setup.truth.grid
    return np.asarray(
        [
            fourier_transform_at(
                run.setup.truth.components[s.pair], grid, np.asarray(s.xi)
            )[0]
            for s in run.result.samples.samples
        ]
    )


def test_curl_samples_match_the_transform(run: Run):
    """Test the samples on |xi| <= R against the transform of the true field."""
    samples = run.result.samples.samples
    assert len(samples) == 12
    expected = expected_samples(run)
    values = np.asarray([s.value for s in samples])
    assert np.linalg.norm(values - expected) <= 0.2 * np.linalg.norm(expected)
    assert np.abs(values - expected).max() <= 0.15 * np.abs(expected).max()


def test_band_limited_field(run: Run):
    """Test the synthesized field against the band-limited true field."""
    grid = run.setup.truth.grid
    samples = run.result.samples.samples
    expected = expected_samples(run)
    upper = {}
    for pair in ((0, 1), (0, 2), (1, 2)):
        chosen = [i for i, sample in enumerate(samples) if sample.pair == pair]
        points = np.asarray([samples[i].xi for i in chosen]).reshape(-1, grid.n)
        upper[pair] = synthesize(grid, points, expected[chosen]).real
    band_limited = CurlField.from_upper(grid, upper).components
    error = run.result.field.components - band_limited
    assert np.linalg.norm(error) <= 0.2 * np.linalg.norm(band_limited)


def test_curl_samples_are_hermitian(run: Run):
    """Test that the samples of a real field at -xi are conjugate."""
    samples = {
        (tuple(np.round(s.xi, 9)), s.pair): s.value
        for s in run.result.samples.samples
    }
    scale = np.abs(expected_samples(run)).max()
    for (xi, pair), value in samples.items():
        mirrored = samples[(tuple(np.round(-np.asarray(xi), 9)), pair)]
        assert abs(mirrored - np.conj(value)) <= 0.2 * scale


def test_curl_samples_are_antisymmetric(run: Run):
    """Test that the reversed pair gives the negated sample."""
    sample = next(
        s
        for s in run.result.samples.samples
        if s.pair == (0, 1) and s.xi[1] > 0
    )
    reversed_sample = run.setup.magnetic.curl_fourier_sample(
        run.setup.oracle, sample.xi, SIGMA, (1, 0)
    )
    scale = np.abs(expected_samples(run)).max()
    assert abs(reversed_sample.value + sample.value) <= 0.1 * scale


def test_coarse_magnetic_sweep():
    """Test a noise sweep through the full pipeline on 12^3 nodes.

    With sigma = |log eta| / 2 in [4, 9] the two noisiest rows have no
    frequency inside the cutoff and reconstruct zero.
    """
    config = ReconConfig(recon_sigma_rule=0.5)
    setup = create_setup(12, config)
    grid = setup.oracle.grid
    table = stability_sweep_magnetic(
        setup.magnetic,
        setup.oracle.with_eta,
        etas=(1e-2, 1e-4, 1e-6, 1e-8),
        truth=setup.truth,
        provenance=Provenance(config_hash="coarse", seed=0, grid=grid),
        sigma_bounds=(4.0, 9.0),
        include_floor=False,
    )
    assert table.columns == MAGNETIC_COLUMNS
    assert table.column("sigma") == pytest.approx(
        [4.0, 2 * math.log(10), 3 * math.log(10), 9.0]
    )
    errors = table.column("err_Hminus1")
    assert errors[0] == pytest.approx(errors[1])
    for previous, current in itertools.pairwise(errors):
        assert current <= previous * (1 + config.recon_floor_tolerance)
    assert errors[-1] < errors[0]
    assert set(table.fits) == {"a", "b", "c", "r_squared"}
