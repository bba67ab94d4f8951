"""
Experiment configuration for the command-line front end

A JSON file supplies any subset of the sections below; flags override
individual fields and the fully resolved model is written next to the
results as provenance.
"""

import json
import logging
from pathlib import Path
from typing import Any, Dict, List, Literal, Optional

from pydantic import BaseModel, ConfigDict, Field, ValidationError, model_validator

from .asymptotics import PredictionMethod
from .complexity import CRITICAL_SIGMA
from .errors import ConfigError
from .models import MemristorParams
from .optimize import AnnealSchedule
from .settings import get_settings

logger = logging.getLogger(__name__)


class Section(BaseModel):
    model_config = ConfigDict(extra="forbid", frozen=True)


class CircuitConfig(Section):
    vertices: int = Field(default=30, ge=3)
    edge_probability: float = Field(default=0.7, gt=0.0, le=1.0)
    samples: int = Field(default=1, ge=1)


class ParamsConfig(Section):
    alpha: float = Field(default=0.1, ge=0.0)
    beta: float = Field(default=1.0, gt=0.0)
    xi: Optional[float] = Field(default=10.0, gt=0.0)
    r_on: Optional[float] = Field(default=None, gt=0.0)
    r_off: Optional[float] = Field(default=None, gt=0.0)

    @model_validator(mode="after")
    def _nonlinearity(self) -> "ParamsConfig":
        if (self.r_on is None) != (self.r_off is None):
            raise ValueError("r_on and r_off must be given together")
        if self.xi is None and self.r_on is None:
            raise ValueError("either xi or r_on and r_off is required")
        return self

    def to_params(self) -> MemristorParams:
        if self.r_on is not None:
            return MemristorParams.from_resistances(self.alpha, self.beta, self.r_on, self.r_off)
        return MemristorParams(alpha=self.alpha, beta=self.beta, xi=self.xi)


class SourcesConfig(Section):
    mode: Literal["uniform", "explicit", "loop_pattern"] = "uniform"
    low: float = -0.05
    high: float = 0.05
    values: Optional[List[float]] = None
    pattern: Optional[List[float]] = None

    @model_validator(mode="after")
    def _mode_inputs(self) -> "SourcesConfig":
        if self.low > self.high:
            raise ValueError("low must not exceed high")
        if self.mode == "explicit" and not self.values:
            raise ValueError("explicit sources need values")
        return self


class IntegrationConfig(Section):
    dt: float = Field(default=0.1, gt=0.0)
    steps: int = Field(default=1000, ge=1)
    record_every: int = Field(default=1, ge=1)
    initial: Literal["uniform", "random"] = "uniform"


class OptimizerConfig(Section):
    t0: float = Field(default=100.0, ge=0.0)
    rate: float = Field(default=0.995, gt=0.0, lt=1.0)
    budget: Optional[int] = Field(default=None, ge=1)
    steps_per_memristor: int = Field(default=10, ge=1)
    random_samples: int = Field(default=100, ge=1)
    memristive_steps: int = Field(default=60, ge=1)
    refine_t0: float = Field(default=0.025, ge=0.0)
    refine_rate: float = Field(default=0.999, gt=0.0, lt=1.0)
    refine_steps: Optional[int] = Field(default=None, ge=0)
    brute_force_max_n: int = Field(default=20, ge=1)

    def schedule(self, n: int) -> AnnealSchedule:
        """Main annealing schedule; ``budget`` defaults to 10 N proposals"""
        return AnnealSchedule(t0=self.t0, rate=self.rate, steps=self.budget or self.steps_per_memristor * n)

    def refine_schedule(self, n: int) -> Optional[AnnealSchedule]:
        """Low-temperature stage after the memristive run; zero steps skips it"""
        steps = self.refine_steps if self.refine_steps is not None else self.budget or self.steps_per_memristor * n
        if steps == 0:
            return None
        return AnnealSchedule(t0=self.refine_t0, rate=self.refine_rate, steps=steps)


class PredictConfig(Section):
    sources: SourcesConfig = SourcesConfig(low=-0.5, high=5.0)
    xi_values: List[float] = Field(default_factory=lambda: [0.1, 1.0, 10.0], min_length=1)
    method: PredictionMethod = PredictionMethod.XI_CORRECTED
    binarize_threshold: float = Field(default=0.9, ge=0.0, le=1.0)


class KacRiceConfig(Section):
    circuit_sizes: List[int] = Field(default_factory=lambda: [50, 100, 200, 400, 800])
    seeds_per_size: int = Field(default=3, ge=1)
    sigmas: List[float] = Field(default_factory=lambda: [0.5, 0.8, CRITICAL_SIGMA, 1.2, 2.0])
    n: int = Field(default=1000, ge=2)
    loop_fraction: float = Field(default=0.7, ge=0.0, le=1.0)
    s_volts: float = 10.0
    measure_samples: int = Field(default=3, ge=1)


class MarkowitzConfig(Section):
    portfolio: Optional[Path] = None
    assets: int = Field(default=20, ge=1)
    tradeoff: float = Field(default=1.0, gt=0.0)
    alpha: Optional[float] = Field(default=None, gt=0.0)
    beta: float = Field(default=1.0, gt=0.0)
    seeds: int = Field(default=10, ge=1)


class OutputConfig(Section):
    directory: Optional[Path] = None
    thin: int = Field(default=1, ge=1)
    export_instances: bool = False

    def resolved(self) -> Path:
        return self.directory or get_settings().output_dir


class ExperimentConfig(Section):
    """Every parameter of one CLI run"""
    seed: int = Field(default_factory=lambda: get_settings().default_seed, ge=0, lt=2 ** 64)
    circuit: CircuitConfig = CircuitConfig()
    params: ParamsConfig = ParamsConfig()
    sources: SourcesConfig = SourcesConfig()
    integration: IntegrationConfig = IntegrationConfig()
    optimizer: OptimizerConfig = OptimizerConfig()
    predict: PredictConfig = PredictConfig()
    kacrice: KacRiceConfig = KacRiceConfig()
    markowitz: MarkowitzConfig = MarkowitzConfig()
    output: OutputConfig = OutputConfig()


def _field_path(error: Dict[str, Any]) -> str:
    return ".".join(str(part) for part in error["loc"]) or "config"


def validate_config(payload: Dict[str, Any]) -> ExperimentConfig:
    """Validate a raw mapping, reporting the first failing field path"""
    try:
        return ExperimentConfig.model_validate(payload)
    except ValidationError as e:
        first = e.errors()[0]
        raise ConfigError(first["msg"], field_path=_field_path(first)) from e


def read_config_file(path: Optional[Path]) -> Dict[str, Any]:
    if path is None:
        return {}
    with open(path, "r") as f:
        try:
            payload = json.load(f)
        except json.JSONDecodeError as e:
            raise ConfigError(f"invalid JSON in {path}: {e}")
    if not isinstance(payload, dict):
        raise ConfigError(f"{path} must hold a JSON object")
    return payload


def apply_overrides(payload: Dict[str, Any], overrides: Dict[str, Any]) -> Dict[str, Any]:
    """Set dotted keys such as ``integration.dt``; None values are skipped"""
    merged = json.loads(json.dumps(payload))
    for dotted, value in overrides.items():
        if value is None:
            continue
        target = merged
        *parents, leaf = dotted.split(".")
        for key in parents:
            target = target.setdefault(key, {})
            if not isinstance(target, dict):
                raise ConfigError("cannot override inside a non-object value", field_path=dotted)
        target[leaf] = value
    return merged


def load_config(path: Optional[Path] = None, overrides: Optional[Dict[str, Any]] = None) -> ExperimentConfig:
    payload = apply_overrides(read_config_file(path), overrides or {})
    config = validate_config(payload)
    logger.debug(f"resolved config: {config.model_dump_json()}")
    return config
