"""
Sign-limit predictions of the asymptotic binary state

Integrating the alpha = 0 dynamics gives (I + xi/2 Omega) w ~ -Omega S t / beta
for large t, so every memristor ends at (1 - sign(v_i))/2 with v one of

    xi_zero          Omega S
    xi_corrected     (I + xi/2 Omega)^{-1} Omega S
    alpha_corrected  ((1 - alpha) I + xi/2 Omega)^{-1} Omega S

sign(0) counts as +1 (prediction 0) and is reported as a tie.
"""

import logging
from enum import Enum
from typing import List, Optional, Sequence

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, field_validator
from scipy import linalg

from .dynamics import SimulationTrace, binarize, binary_fraction, simulate
from .errors import SingularSystemError
from .models import (ArrayModel, MemristorParams, NetworkState, SourceVector, as_matrix,
                     as_sources, frozen_array)
from .settings import get_settings
from .topology import LoopBasis

logger = logging.getLogger(__name__)

DEFAULT_BINARIZE_THRESHOLD = 0.9


class PredictionMethod(str, Enum):
    """Which correction of the sign formula to apply"""
    XI_ZERO = "xi_zero"
    XI_CORRECTED = "xi_corrected"
    ALPHA_CORRECTED = "alpha_corrected"


class AsymptoticPrediction(ArrayModel):
    """Predicted terminal binary state"""
    w_infinity: np.ndarray
    method: PredictionMethod
    tie_count: int = Field(ge=0)

    @field_validator("w_infinity", mode="before")
    @classmethod
    def _binary(cls, value):
        array = np.asarray(value)
        if not np.all(np.isin(array, (0, 1))):
            raise ValueError("predictions must be binary")
        return frozen_array(array, dtype=np.int8)


def _sign_argument(matrix: np.ndarray, drive: np.ndarray, shift: float, xi: float,
                   exact_projector: bool) -> np.ndarray:
    """(shift I + xi/2 Omega)^{-1} Omega S"""
    if exact_projector:
        # Omega fixes Omega S, so the inverse acts as a scalar
        scale = shift + xi / 2.0
        if scale == 0.0:
            raise SingularSystemError("shift + xi/2 vanishes for a projector")
        return drive if scale > 0.0 else -drive
    system = shift * np.eye(matrix.shape[0]) + 0.5 * xi * matrix
    try:
        return linalg.solve(system, drive, assume_a="sym")
    except linalg.LinAlgError as e:
        raise SingularSystemError(f"prediction matrix is singular: {e}")


def predict_asymptotic(omega, sources, params: MemristorParams,
                       method: PredictionMethod = PredictionMethod.XI_ZERO,
                       tie_tolerance: Optional[float] = None) -> AsymptoticPrediction:
    """Predict w(t -> infinity) from the sign formula"""
    method = PredictionMethod(method)
    matrix = as_matrix(omega)
    drive = matrix @ as_sources(sources)
    exact = bool(getattr(omega, "is_exact_projector", False))
    tolerance = get_settings().tie_tolerance if tie_tolerance is None else tie_tolerance

    if method is PredictionMethod.XI_ZERO:
        argument = drive
    elif method is PredictionMethod.XI_CORRECTED:
        argument = _sign_argument(matrix, drive, 1.0, params.xi, exact)
    else:
        argument = _sign_argument(matrix, drive, 1.0 - params.alpha, params.xi, exact)

    ties = np.abs(argument) <= tolerance
    w_infinity = np.where(ties, 0, (argument < 0.0).astype(np.int8))
    return AsymptoticPrediction(w_infinity=w_infinity, method=method, tie_count=int(np.count_nonzero(ties)))


def prediction_accuracy(trace: SimulationTrace, prediction: AsymptoticPrediction,
                        binarize_threshold: float = DEFAULT_BINARIZE_THRESHOLD) -> float:
    """Fraction of memristors whose rounded terminal value matches the prediction"""
    terminal = trace.terminal
    if terminal.shape != prediction.w_infinity.shape:
        raise ValueError("trace and prediction sizes differ")
    fraction = binary_fraction(terminal)
    if fraction < binarize_threshold:
        logger.warning(f"terminal state only {fraction:.1%} binary (threshold {binarize_threshold:.0%})")
    return float(np.mean(binarize(terminal) == prediction.w_infinity))


class RecollectionResult(ArrayModel):
    """Outcome of driving the circuit with a loop-basis source pattern"""
    pattern_coefficients: np.ndarray
    driven_source: np.ndarray
    target: np.ndarray
    retrieved: np.ndarray
    prediction: AsymptoticPrediction
    overlap: float = Field(ge=0.0, le=1.0)

    @field_validator("pattern_coefficients", "driven_source", mode="before")
    @classmethod
    def _vector(cls, value):
        return frozen_array(value)

    @field_validator("target", "retrieved", mode="before")
    @classmethod
    def _binary(cls, value):
        return frozen_array(value, dtype=np.int8)


def recall_pattern(loop_basis: LoopBasis, coefficients: Sequence[float], params: MemristorParams,
                   dt: float, steps: int, w0: Optional[NetworkState] = None) -> RecollectionResult:
    """Drive with S = sum_l rho_l A~^l and compare the terminal state with the sign target"""
    rho = np.asarray(coefficients, dtype=float)
    if rho.shape != (loop_basis.loop_count,):
        raise ValueError(f"expected {loop_basis.loop_count} pattern coefficients, got {rho.size}")

    omega = loop_basis.projector()
    sources = SourceVector(s=rho @ loop_basis.rows)
    n = omega.size
    prediction = predict_asymptotic(omega, sources, params, PredictionMethod.ALPHA_CORRECTED)
    if w0 is None:
        w0 = NetworkState.uniform(n)
    trace = simulate(w0, omega, sources, params, dt, steps, record_every=steps)

    # Omega S = S for loop-basis drives
    target = (sources.s < 0.0).astype(np.int8)
    retrieved = binarize(trace.terminal)
    return RecollectionResult(
        pattern_coefficients=rho,
        driven_source=sources.s,
        target=target,
        retrieved=retrieved,
        prediction=prediction,
        overlap=float(np.mean(retrieved == target)),
    )


class AccuracyRow(BaseModel):
    """One line of the accuracy-versus-xi sweep"""
    model_config = ConfigDict(frozen=True)

    xi: float
    mean_accuracy: float
    std_accuracy: float
    n_samples: int


def summarize_accuracies(xi: float, accuracies: List[float]) -> AccuracyRow:
    values = np.asarray(accuracies, dtype=float)
    spread = float(values.std(ddof=1)) if values.size > 1 else 0.0
    return AccuracyRow(xi=xi, mean_accuracy=float(values.mean()), std_accuracy=spread, n_samples=int(values.size))
