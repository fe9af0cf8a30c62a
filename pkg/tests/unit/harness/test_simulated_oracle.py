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

"""Test the simulated DtN difference oracle."""

import numpy as np
import pytest

from dtn_inverse.field_core.models import ScalarSpaceTimeField
from dtn_inverse.forward.core.crank_nicolson import CrankNicolsonSolver, ForwardConfig
from dtn_inverse.forward.models import BoundaryInput, ProbeMetadata
from dtn_inverse.harness.adapters.simulated_oracle import SimulatedDtnOracle
from dtn_inverse.recon.models import CoefficientPair
from tests.fixtures.fields import make_grid, sine_mode, solenoidal_bump

GRID = make_grid(n_x=8)
PROBE = ProbeMetadata(sigma=4.0, xi=(0.0, 0.0, 0.0), y=(0.0, 0.0, 0.0), side=1)


def eigenmode_probe() -> BoundaryInput:
    """The first eigenmode with vanishing Dirichlet data."""
    return BoundaryInput(
        grid=GRID,
        initial=sine_mode(GRID),
        faces=np.zeros((2 * GRID.n, GRID.n_t + 1, GRID.face_size)),
    )


def pair(amplitude: float, q_level: float = 0.0) -> CoefficientPair:
    """A bump potential with a constant q."""
    return CoefficientPair(
        potential=solenoidal_bump(GRID, amplitude=amplitude, radius=0.2),
        q=ScalarSpaceTimeField(
            grid=GRID, values=np.full(GRID.space_time_shape, q_level)
        ),
    )


@pytest.fixture(name="solver")
def create_solver() -> CrankNicolsonSolver:
    """Create a forward solver with the default configuration."""
    return CrankNicolsonSolver(ForwardConfig())


def test_equal_pairs_measure_nothing(solver: CrankNicolsonSolver):
    """Test that coinciding coefficients give a vanishing difference."""
    oracle = SimulatedDtnOracle(solver=solver, first=pair(0.05), second=pair(0.05))
    record = oracle.measure(eigenmode_probe(), PROBE)
    assert record.norm() == 0.0
    assert record.probe == PROBE
    assert record.probe_norm == pytest.approx(eigenmode_probe().norm())


def test_different_pairs_are_seen(solver: CrankNicolsonSolver):
    """Test that a different q shows in the difference."""
    oracle = SimulatedDtnOracle(
        solver=solver, first=pair(0.05), second=pair(0.05, q_level=1.0)
    )
    assert oracle.measure(eigenmode_probe(), PROBE).norm() > 0


def test_noise_level_and_reproducibility(solver: CrankNicolsonSolver):
    """Test that with_eta adds calibrated noise that repeats per seed."""
    clean = SimulatedDtnOracle(
        solver=solver, first=pair(0.05), second=pair(0.05), seed=5
    )
    noisy = clean.with_eta(1e-2)
    assert noisy.eta == 1e-2
    assert noisy.coefficients(2) is clean.coefficients(2)
    first = noisy.measure(eigenmode_probe(), PROBE)
    second = noisy.measure(eigenmode_probe(), PROBE)
    assert first.operational_norm() == pytest.approx(1e-2)
    assert np.array_equal(first.trace, second.trace)


def test_invalid_oracles(solver: CrankNicolsonSolver):
    """Test the rejected constructions."""
    coarse = CoefficientPair(
        potential=solenoidal_bump(make_grid(n_x=10), amplitude=0.05, radius=0.2),
        q=ScalarSpaceTimeField.zeros(make_grid(n_x=10)),
    )
    with pytest.raises(ValueError):
        SimulatedDtnOracle(solver=solver, first=pair(0.05), second=coarse)
    with pytest.raises(ValueError):
        SimulatedDtnOracle(solver=solver, first=pair(0.05), second=pair(0.05), eta=-1)
