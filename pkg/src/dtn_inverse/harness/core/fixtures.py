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

"""Coefficient pairs and reference fields of an experiment."""

import logging
from pathlib import Path

import numpy as np

from dtn_inverse.field_core.core.admissible import (
    bump_profile,
    make_admissible_potential,
)
from dtn_inverse.field_core.core.operators import curl
from dtn_inverse.field_core.models import (
    BumpSpec,
    CurlField,
    Grid,
    ScalarSpaceTimeField,
    VectorField,
)
from dtn_inverse.field_core.ports.field_store import FieldStorePort
from dtn_inverse.harness.models import CoefficientSpec, ExperimentConfigError
from dtn_inverse.recon.models import CoefficientPair

__all__ = ["build_coefficients", "electric_truth", "magnetic_truth"]

log = logging.getLogger(__name__)


def _load[F: VectorField | ScalarSpaceTimeField](
    store: FieldStorePort, path: Path, kind: type[F], grid: Grid
) -> F:
    try:
        field = store.load(path)
    except FieldStorePort.FieldFormatError as error:
        raise ExperimentConfigError(path=path, details=str(error)) from error
    if not isinstance(field, kind):
        raise ExperimentConfigError(
            path=path, details=f"expected a {kind.__name__}"
        )
    if field.grid != grid:
        raise ExperimentConfigError(path=path, details="the grid does not match")
    return field


def build_coefficients(
    spec: CoefficientSpec, grid: Grid, store: FieldStorePort
) -> CoefficientPair:
    """Assemble (A, q) from the bumps, the separable q term and the files.

    May raise an ExperimentConfigError or an AdmissibilityError.
    """
    components = make_admissible_potential(
        grid, spec.bumps, divergence_free=True
    ).components
    if spec.potential_file is not None:
        stored = _load(store, spec.potential_file, VectorField, grid)
        components = components + stored.components

    values = np.zeros(grid.space_time_shape)
    if spec.q_amplitude:
        profile = bump_profile(
            grid, BumpSpec(center=spec.q_center, radius=spec.q_radius)
        )
        times = grid.times().reshape((-1,) + (1,) * grid.n)
        if spec.q_pulse_width is None:
            wave = np.cos(2 * np.pi * spec.q_frequency * times / grid.horizon)
        else:
            offset = (times - grid.horizon / 2) / spec.q_pulse_width
            wave = np.exp(-(offset**2) / 2)
        values = values + spec.q_amplitude * wave * profile[None]
    if spec.q_file is not None:
        stored = _load(store, spec.q_file, ScalarSpaceTimeField, grid)
        values = values + np.real(stored.values)

    log.debug(
        "Built coefficients from %d bumps, q amplitude %s",
        len(spec.bumps),
        spec.q_amplitude,
    )
    return CoefficientPair(
        potential=VectorField(grid=grid, components=components),
        q=ScalarSpaceTimeField(grid=grid, values=values),
    )


def magnetic_truth(first: CoefficientPair, second: CoefficientPair) -> CurlField:
    """The magnetic field of A_1 - A_2."""
    return curl(first.potential - second.potential)


def electric_truth(
    first: CoefficientPair, second: CoefficientPair
) -> ScalarSpaceTimeField:
    """q_2 - q_1."""
    return ScalarSpaceTimeField(
        grid=first.grid, values=second.q.values - first.q.values
    )
