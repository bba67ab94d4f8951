"""
Explicit Euler integration of memristor dynamics inside the unit box

Single device:  dw/dt = alpha w - (R_on / beta) s / R(w)
Network:        dw/dt = alpha w - (I + xi Omega W)^{-1} Omega S / beta

Every step is clamped to [0, 1]. Clamped memristors stay in the linear
system with their boundary value.
"""

import logging

import numpy as np
from pydantic import Field, field_validator, model_validator

from . import lyapunov
from .errors import DimensionMismatchError, SingularSystemError
from .models import (ArrayModel, MemristorParams, NetworkState, as_matrix, as_memory,
                     as_sources, frozen_array)

logger = logging.getLogger(__name__)

BINARY_TOLERANCE = 1e-3


def single_memristor_step(w: float, s_volts: float, params: MemristorParams, dt: float) -> float:
    """One clamped Euler step of an isolated memristor"""
    if dt <= 0.0:
        raise ValueError("dt must be positive")
    drift = params.alpha * w - float(params.on_ratio(w)) * s_volts / params.beta
    return float(np.clip(w + dt * drift, 0.0, 1.0))


def _check_dimensions(w: np.ndarray, matrix: np.ndarray, s: np.ndarray) -> None:
    n = w.size
    if matrix.shape != (n, n) or s.shape != (n,):
        raise DimensionMismatchError(
            f"state of size {n} cannot use omega {matrix.shape} and sources {s.shape}")


def _advance(w: np.ndarray, matrix: np.ndarray, drive: np.ndarray, params: MemristorParams,
             dt: float) -> np.ndarray:
    x = lyapunov.solve_interaction(w, matrix, drive, params.xi)
    return np.clip(w + dt * (params.alpha * w - x / params.beta), 0.0, 1.0)


def network_step(state: NetworkState, omega, sources, params: MemristorParams,
                 dt: float) -> NetworkState:
    """Advance the network by dt"""
    if dt <= 0.0:
        raise ValueError("dt must be positive")
    w = as_memory(state)
    matrix = as_matrix(omega)
    s = as_sources(sources)
    _check_dimensions(w, matrix, s)
    return NetworkState(w=_advance(w, matrix, matrix @ s, params, dt), time=state.time + dt)


def binarize(w) -> np.ndarray:
    """Round memory values at 0.5"""
    return (np.asarray(w, dtype=float) >= 0.5).astype(np.int8)


def binary_fraction(w, tolerance: float = BINARY_TOLERANCE) -> float:
    """Fraction of components within ``tolerance`` of 0 or 1"""
    w = np.asarray(w, dtype=float)
    return float(np.mean(np.minimum(w, 1.0 - w) <= tolerance))


class SimulationTrace(ArrayModel):
    """Recorded states and Lyapunov values of one integration"""
    times: np.ndarray
    states: np.ndarray
    lyapunov: np.ndarray
    lyapunov_asymptotic: np.ndarray
    clamped_counts: np.ndarray
    dt: float = Field(gt=0.0)
    record_every: int = Field(default=1, ge=1)
    final_state: NetworkState

    @field_validator("times", "lyapunov", "lyapunov_asymptotic", mode="before")
    @classmethod
    def _vector(cls, value):
        return frozen_array(value)

    @field_validator("states", mode="before")
    @classmethod
    def _states(cls, value):
        array = np.asarray(value, dtype=float)
        if array.ndim != 2:
            raise ValueError("states must be a (records x N) matrix")
        if np.any(array < 0.0) or np.any(array > 1.0):
            raise ValueError("recorded states must lie in [0, 1]")
        return frozen_array(array)

    @field_validator("clamped_counts", mode="before")
    @classmethod
    def _counts(cls, value):
        return frozen_array(value, dtype=np.int64)

    @model_validator(mode="after")
    def _aligned(self) -> "SimulationTrace":
        records = self.states.shape[0]
        for name in ("times", "lyapunov", "lyapunov_asymptotic", "clamped_counts"):
            if getattr(self, name).shape != (records,):
                raise ValueError(f"{name} must have one entry per recorded state")
        if records > 1 and np.any(np.diff(self.times) <= 0.0):
            raise ValueError("times must be strictly increasing")
        return self

    @property
    def terminal(self) -> np.ndarray:
        return self.final_state.w


def simulate(w0: NetworkState, omega, sources, params: MemristorParams, dt: float, steps: int,
             record_every: int = 1) -> SimulationTrace:
    """
    Repeated network steps from ``w0`` with L and L_a recorded.

    States are recorded at step 0 and every ``record_every`` steps after;
    the final state is always kept on the trace.
    """
    if steps < 1:
        raise ValueError("steps must be at least 1")
    if dt <= 0.0:
        raise ValueError("dt must be positive")

    w = as_memory(w0).copy()
    matrix = as_matrix(omega)
    s = as_sources(sources)
    _check_dimensions(w, matrix, s)
    drive = matrix @ s

    times, states, values, asymptotic, clamped = [], [], [], [], []

    def record(step: int, memory: np.ndarray) -> None:
        times.append(w0.time + step * dt)
        states.append(memory.copy())
        values.append(lyapunov.lyapunov_value(memory, matrix, s, params))
        asymptotic.append(lyapunov.lyapunov_asymptotic(memory, matrix, s, params))
        clamped.append(int(np.count_nonzero((memory == 0.0) | (memory == 1.0))))

    record(0, w)
    for step in range(1, steps + 1):
        try:
            w = _advance(w, matrix, drive, params, dt)
        except SingularSystemError as e:
            raise SingularSystemError(str(e), step=step) from e
        if step % record_every == 0:
            record(step, w)

    logger.debug(f"simulated {steps} steps of N={w.size}; {binary_fraction(w):.3f} binary at the end")
    return SimulationTrace(
        times=times,
        states=np.vstack(states),
        lyapunov=values,
        lyapunov_asymptotic=asymptotic,
        clamped_counts=clamped,
        dt=dt,
        record_every=record_every,
        final_state=NetworkState(w=w, time=w0.time + steps * dt),
    )

