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

"""Wire the configured solvers and reconstructors together."""

from collections.abc import Generator
from contextlib import contextmanager
from typing import NamedTuple

from dtn_inverse.config import Config
from dtn_inverse.field_core.adapters.sparse_poisson import SparsePoissonSolver
from dtn_inverse.field_core.core.hodge import HodgeProjector
from dtn_inverse.forward.core.crank_nicolson import CrankNicolsonSolver
from dtn_inverse.go.core.solutions import GoBuilder
from dtn_inverse.recon.core.electric import ElectricReconstructor
from dtn_inverse.recon.core.magnetic import MagneticReconstructor
from dtn_inverse.transport.core.n_omega import TransportOperator

__all__ = ["Components", "prepare_components"]


class Components(NamedTuple):
    """Everything an experiment needs, built from one configuration."""

    config: Config
    solver: CrankNicolsonSolver
    transport: TransportOperator
    go_builder: GoBuilder
    hodge: HodgeProjector
    magnetic: MagneticReconstructor
    electric: ElectricReconstructor


@contextmanager
def prepare_components(config: Config) -> Generator[Components, None, None]:
    """Construct the solvers and reconstructors along with all their dependencies."""
    solver = CrankNicolsonSolver(config)
    transport = TransportOperator(config)
    go_builder = GoBuilder(config=config, transport=transport, solver=solver)
    yield Components(
        config=config,
        solver=solver,
        transport=transport,
        go_builder=go_builder,
        hodge=HodgeProjector(poisson_solver=SparsePoissonSolver(config)),
        magnetic=MagneticReconstructor(config=config, go_builder=go_builder),
        electric=ElectricReconstructor(config=config, go_builder=go_builder),
    )
