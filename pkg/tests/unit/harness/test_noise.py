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

"""Test the seeded noise injection."""

import numpy as np
import pytest

from dtn_inverse.forward.models import DtnRecord, ProbeMetadata
from dtn_inverse.harness.core.noise import inject_noise, job_generator, probe_key
from tests.fixtures.fields import make_grid

GRID = make_grid(n_x=8)


def zero_record(probe: ProbeMetadata | None, probe_norm: float = 2.0) -> DtnRecord:
    """A vanishing record for a probe of the given norm."""
    return DtnRecord(
        grid=GRID,
        final_state=np.zeros(GRID.shape),
        trace=np.zeros((2 * GRID.n, GRID.n_t + 1, GRID.face_size)),
        probe_norm=probe_norm,
        probe=probe,
    )


@pytest.fixture(name="probe")
def create_probe() -> ProbeMetadata:
    """Frequency data of some probe."""
    return ProbeMetadata(sigma=4.0, xi=(6.0, 0.0, 0.0), y=(0.0, 0.0, 0.0), side=1)


def test_zero_eta_returns_the_record(probe: ProbeMetadata):
    """Test that eta = 0 leaves the record untouched."""
    record = zero_record(probe)
    assert inject_noise(record, 0.0, seed=3) is record


@pytest.mark.parametrize("eta", [1e-1, 1e-2, 1e-3, 1e-4])
def test_noise_is_calibrated(probe: ProbeMetadata, eta: float):
    """Test that the perturbation has operational norm eta."""
    noisy = inject_noise(zero_record(probe), eta, seed=3)
    assert noisy.operational_norm() == pytest.approx(eta, rel=1e-2)


def test_noise_is_keyed_by_seed_and_probe(probe: ProbeMetadata):
    """Test reproducibility per (seed, probe) and variation otherwise."""
    record = zero_record(probe)
    first = inject_noise(record, 0.1, seed=3)
    again = inject_noise(record, 0.1, seed=3)
    assert np.array_equal(first.trace, again.trace)

    other_seed = inject_noise(record, 0.1, seed=4)
    assert not np.array_equal(first.trace, other_seed.trace)

    moved = probe.model_copy(update={"sigma": 5.0})
    other_probe = inject_noise(zero_record(moved), 0.1, seed=3)
    assert not np.array_equal(first.trace, other_probe.trace)
    assert probe_key(probe) != probe_key(moved)


def test_vanishing_probe_norm_gives_absolute_noise(caplog):
    """Test that a zero probe norm falls back to an absolute noise norm."""
    noisy = inject_noise(zero_record(None, probe_norm=0.0), 0.01, seed=0)
    assert noisy.norm() == pytest.approx(0.01)
    assert "Probe norm vanishes" in caplog.text


def test_negative_eta_is_rejected(probe: ProbeMetadata):
    """Test that noise levels must not be negative."""
    with pytest.raises(ValueError):
        inject_noise(zero_record(probe), -1e-3, seed=0)


def test_job_streams_are_independent():
    """Test that jobs of one seed draw different numbers."""
    first = job_generator(0, 1).standard_normal(4)
    second = job_generator(0, 2).standard_normal(4)
    assert not np.allclose(first, second)
    assert np.array_equal(first, job_generator(0, 1).standard_normal(4))
