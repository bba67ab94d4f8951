"""
Shared records for memristor parameters, network states and sources
"""

from typing import Any, Optional

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

XI_TOLERANCE = 1e-12


def frozen_array(value: Any, dtype=float) -> np.ndarray:
    """Copy into a read-only numpy array"""
    array = np.array(value, dtype=dtype, copy=True)
    array.setflags(write=False)
    return array


class ArrayModel(BaseModel):
    """Base for immutable records holding numpy payloads"""
    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)


class MemristorParams(BaseModel):
    """Decay rate, drive timescale and nonlinearity of identical memristors"""
    model_config = ConfigDict(frozen=True)

    alpha: float = Field(ge=0.0)
    beta: float = Field(gt=0.0)
    xi: float = Field(gt=0.0)
    r_on: Optional[float] = Field(default=None, gt=0.0)
    r_off: Optional[float] = Field(default=None, gt=0.0)

    @model_validator(mode="after")
    def _check_resistances(self) -> "MemristorParams":
        if (self.r_on is None) != (self.r_off is None):
            raise ValueError("r_on and r_off must be given together")
        if self.r_on is not None:
            if not self.r_on < self.r_off:
                raise ValueError("r_on must be smaller than r_off")
            expected = (self.r_off - self.r_on) / self.r_on
            if abs(self.xi - expected) > XI_TOLERANCE * max(1.0, expected):
                raise ValueError(f"xi={self.xi} disagrees with (r_off - r_on)/r_on = {expected}")
        return self

    @classmethod
    def from_resistances(cls, alpha: float, beta: float, r_on: float, r_off: float) -> "MemristorParams":
        """Derive xi from the on/off resistances"""
        return cls(alpha=alpha, beta=beta, xi=(r_off - r_on) / r_on, r_on=r_on, r_off=r_off)

    def resistance(self, w):
        """R(w) = R_on (1 - w) + R_off w, in units of R_on when no resistances are set"""
        r_on = 1.0 if self.r_on is None else self.r_on
        r_off = 1.0 + self.xi if self.r_off is None else self.r_off
        return r_on * (1.0 - np.asarray(w)) + r_off * np.asarray(w)

    def on_ratio(self, w):
        """R_on / R(w)"""
        r_on = 1.0 if self.r_on is None else self.r_on
        return r_on / self.resistance(w)

    def with_xi(self, xi: float) -> "MemristorParams":
        """Copy with a new nonlinearity; resistances are dropped"""
        return MemristorParams(alpha=self.alpha, beta=self.beta, xi=xi)


class NetworkState(ArrayModel):
    """Memory values of every memristor at a given time"""
    w: np.ndarray
    time: float = 0.0

    @field_validator("w", mode="before")
    @classmethod
    def _as_unit_box(cls, value):
        array = np.asarray(value, dtype=float)
        if array.ndim != 1 or array.size == 0:
            raise ValueError("w must be a non-empty vector")
        if not np.all(np.isfinite(array)):
            raise ValueError("w must be finite")
        if np.any(array < 0.0) or np.any(array > 1.0):
            raise ValueError("memory values must lie in [0, 1]")
        return frozen_array(array)

    @property
    def size(self) -> int:
        return int(self.w.size)

    @classmethod
    def uniform(cls, n: int, value: float = 0.5) -> "NetworkState":
        return cls(w=np.full(n, value))

    @classmethod
    def random(cls, n: int, rng: np.random.Generator) -> "NetworkState":
        return cls(w=rng.random(n))


class SourceVector(ArrayModel):
    """Voltage sources in series with each memristor (volts)"""
    s: np.ndarray

    @field_validator("s", mode="before")
    @classmethod
    def _finite_vector(cls, value):
        array = np.asarray(value, dtype=float)
        if array.ndim != 1 or array.size == 0:
            raise ValueError("sources must be a non-empty vector")
        if not np.all(np.isfinite(array)):
            raise ValueError("sources must be finite")
        return frozen_array(array)

    @property
    def size(self) -> int:
        return int(self.s.size)

    @classmethod
    def uniform_range(cls, n: int, low: float, high: float, rng: np.random.Generator) -> "SourceVector":
        """Independent sources drawn uniformly from [low, high]"""
        return cls(s=rng.uniform(low, high, size=n))


def as_matrix(omega) -> np.ndarray:
    """Dense view of a ProjectorMatrix or plain array"""
    return np.asarray(getattr(omega, "entries", omega), dtype=float)


def as_sources(sources) -> np.ndarray:
    return np.asarray(getattr(sources, "s", sources), dtype=float)


def as_memory(state) -> np.ndarray:
    return np.asarray(getattr(state, "w", state), dtype=float)
