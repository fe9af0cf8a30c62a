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

"""Shared fixtures of the reconstruction tests."""

import pytest

from dtn_inverse.field_core.models import ScalarSpaceTimeField
from dtn_inverse.forward.core.crank_nicolson import CrankNicolsonSolver, ForwardConfig
from dtn_inverse.go.core.solutions import GoBuilder, GoConfig
from dtn_inverse.harness.adapters.simulated_oracle import SimulatedDtnOracle
from dtn_inverse.recon.core.electric import ElectricReconstructor
from dtn_inverse.recon.core.magnetic import MagneticReconstructor
from dtn_inverse.recon.core.rules import ReconConfig
from dtn_inverse.recon.models import CoefficientPair
from dtn_inverse.transport.core.n_omega import TransportConfig, TransportOperator
from tests.fixtures.fields import make_grid, solenoidal_bump


@pytest.fixture(name="solver")
def create_solver() -> CrankNicolsonSolver:
    """Create a forward solver with the default configuration."""
    return CrankNicolsonSolver(ForwardConfig())


@pytest.fixture(name="builder")
def create_builder(solver: CrankNicolsonSolver) -> GoBuilder:
    """Create a GO builder with the default configuration."""
    return GoBuilder(
        config=GoConfig(),
        transport=TransportOperator(TransportConfig()),
        solver=solver,
    )


@pytest.fixture(name="magnetic")
def create_magnetic(builder: GoBuilder) -> MagneticReconstructor:
    """Create a magnetic reconstructor with the default configuration."""
    return MagneticReconstructor(config=ReconConfig(), go_builder=builder)


@pytest.fixture(name="electric")
def create_electric(builder: GoBuilder) -> ElectricReconstructor:
    """Create an electric reconstructor with the default configuration."""
    return ElectricReconstructor(config=ReconConfig(), go_builder=builder)


@pytest.fixture(name="same_pair_oracle")
def create_same_pair_oracle(solver: CrankNicolsonSolver) -> SimulatedDtnOracle:
    """An oracle whose two coefficient pairs coincide on a coarse grid."""
    grid = make_grid(n_x=8, n_t=16)
    pair = CoefficientPair(
        potential=solenoidal_bump(grid, amplitude=0.05),
        q=ScalarSpaceTimeField.zeros(grid),
    )
    return SimulatedDtnOracle(solver=solver, first=pair, second=pair)
