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

"""Construction of frequency frames and complex frequencies."""

from collections.abc import Sequence

import numpy as np
from pydantic import ValidationError

from dtn_inverse.go.models import ComplexFrequency, FrequencyFrame

__all__ = ["FrameError", "build_frame", "make_rho", "reflect_frame"]

_RANK_TOLERANCE = 1e-9


class FrameError(ValueError):
    """Raised when no valid frame exists for the requested data."""

    def __init__(self, *, details: str):
        super().__init__(f"Cannot build a frequency frame: {details}")


def _gram_schmidt(candidates: list[np.ndarray], count: int) -> list[np.ndarray]:
    basis: list[np.ndarray] = []
    for vector in candidates:
        residual = vector - sum((vector @ b) * b for b in basis)
        norm = np.linalg.norm(residual)
        if norm > _RANK_TOLERANCE:
            # second pass keeps the result orthogonal to rounding
            residual = residual - sum((residual @ b) * b for b in basis)
            basis.append(residual / np.linalg.norm(residual))
        if len(basis) == count:
            break
    return basis


def build_frame(
    xi: Sequence[float],
    y: Sequence[float],
    sigma: float,
    side: int,
    *,
    omega_imag: Sequence[float] | None = None,
) -> FrequencyFrame:
    """Complete xi to an orthonormal pair omega_R, omega_I.

    Gram-Schmidt runs over xi/|xi| (skipped for xi = 0), the requested
    omega_I if given, and then the unit vectors e_1, ..., e_n. Without a
    requested omega_I the first two new vectors become omega_R and omega_I,
    with one they become omega_I and omega_R.

    May raise a FrameError.
    """
    xi_vector = np.asarray(xi, dtype=float)
    n = len(xi_vector)
    if n < 3:
        raise FrameError(details=f"dimension {n} is below 3")
    if sigma <= np.linalg.norm(xi_vector) / 2:
        raise FrameError(details=f"sigma={sigma} does not exceed |xi|/2")
    if np.linalg.norm(y) >= 1:
        raise FrameError(details="|y| must be below 1")

    candidates = []
    leading = 0
    if np.linalg.norm(xi_vector) > 0:
        candidates.append(xi_vector)
        leading = 1
    if omega_imag is not None:
        requested = np.asarray(omega_imag, dtype=float)
        if abs(requested @ xi_vector) > _RANK_TOLERANCE * max(
            1.0, float(np.linalg.norm(xi_vector))
        ):
            raise FrameError(details="the requested omega_I is not orthogonal to xi")
        candidates.append(requested)
    candidates.extend(np.eye(n))
    basis = _gram_schmidt(candidates, leading + 2)
    first, second = basis[leading], basis[leading + 1]
    real, imag = (second, first) if omega_imag is not None else (first, second)
    try:
        return FrequencyFrame(
            xi=tuple(xi_vector),
            omega_real=tuple(real),
            omega_imag=tuple(imag),
            y=tuple(float(v) for v in y),
            sigma=sigma,
            side=side,
        )
    except ValidationError as error:
        raise FrameError(details=str(error)) from error


def reflect_frame(frame: FrequencyFrame) -> FrequencyFrame:
    """The frame with omega_R replaced by -omega_R."""
    return frame.model_copy(
        update={"omega_real": tuple(-np.asarray(frame.omega_real))}
    )


def _side_rho(frame: FrequencyFrame, side: int) -> np.ndarray:
    xi = np.asarray(frame.xi)
    real = np.asarray(frame.omega_real)
    imag = np.asarray(frame.omega_imag)
    sigma = frame.sigma
    c = np.sqrt(1 - (xi @ xi) / (4 * sigma**2))
    sign = 1 if side == 1 else -1
    return sigma * (sign * 1j * imag - sign * xi / (2 * sigma) + c * real) + np.asarray(
        frame.y
    )


def make_rho(frame: FrequencyFrame) -> ComplexFrequency:
    """rho_1 = sigma(i omega_I - xi/2sigma + c omega_R) + y and
    rho_2 = sigma(-i omega_I + xi/2sigma + c omega_R) + y with
    c = sqrt(1 - |xi|^2/4sigma^2), taking the side of the frame.
    """
    rho = _side_rho(frame, frame.side)
    first, second = _side_rho(frame, 1), _side_rho(frame, 2)
    gap = second - np.conj(first)
    return ComplexFrequency(
        frame=frame,
        rho_real=tuple(rho.real),
        rho_imag=tuple(rho.imag),
        partner_gap_real=tuple(gap.real),
        partner_gap_imag=tuple(gap.imag),
        phase_shift=complex(second @ second - np.conj(first @ first)),
    )
