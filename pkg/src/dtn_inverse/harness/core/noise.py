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

"""Seeded perturbations of DtN records with a prescribed operational norm."""

import hashlib
import logging

import numpy as np

from dtn_inverse.field_core.models import frozen_array
from dtn_inverse.forward.models import DtnRecord, ProbeMetadata, face_norm, state_norm

__all__ = ["inject_noise", "job_generator", "probe_key"]

log = logging.getLogger(__name__)


def probe_key(probe: ProbeMetadata | None) -> int:
    """A stable 64 bit key of the probe metadata."""
    payload = probe.model_dump_json() if probe is not None else ""
    digest = hashlib.blake2b(payload.encode(), digest_size=8).digest()
    return int.from_bytes(digest, "little")


def job_generator(seed: int, key: int) -> np.random.Generator:
    """The Philox stream of one job, derived from the master seed."""
    sequence = np.random.SeedSequence(seed, spawn_key=(key,))
    return np.random.Generator(np.random.Philox(sequence))


def _complex_normal(
    generator: np.random.Generator, shape: tuple[int, ...]
) -> np.ndarray:
    return generator.standard_normal(shape) + 1j * generator.standard_normal(shape)


def inject_noise(record: DtnRecord, target_eta: float, seed: int) -> DtnRecord:
    """Add complex Gaussian noise whose norm relative to the probe is target_eta.

    The stream is keyed by the probe metadata of the record, so every probe
    receives the same perturbation whatever order the jobs run in.
    """
    if target_eta < 0:
        raise ValueError("target_eta must not be negative")
    if target_eta == 0:
        return record
    grid = record.grid
    generator = job_generator(seed, probe_key(record.probe))
    state = _complex_normal(generator, record.final_state.shape)
    trace = _complex_normal(generator, record.trace.shape)
    size = float(np.hypot(state_norm(state, grid), face_norm(trace, grid)))
    reference = record.probe_norm
    if reference == 0:
        log.warning("Probe norm vanishes, scaling noise to an absolute norm")
        reference = 1.0
    scale = target_eta * reference / size
    return record.model_copy(
        update={
            "final_state": frozen_array(record.final_state + scale * state),
            "trace": frozen_array(record.trace + scale * trace),
        }
    )
