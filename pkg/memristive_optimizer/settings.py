"""
Environment settings and logging setup

Values are read from the process environment after loading an optional
``.env`` file from the current working directory.
"""

import logging
import os
from functools import lru_cache
from pathlib import Path
from typing import Optional

from dotenv import load_dotenv
from pydantic import BaseModel, ConfigDict, Field, field_validator

from .errors import ConfigError

LOG_FORMAT = '%(asctime)s - %(name)s - %(levelname)s - %(message)s'
PACKAGE_LOGGER = "memristive_optimizer"


class Settings(BaseModel):
    """Environment-level defaults shared by the library and the CLI"""
    model_config = ConfigDict(frozen=True)

    log_level: str = "INFO"
    output_dir: Path = Path("results")
    default_seed: int = Field(default=0, ge=0, lt=2 ** 64)
    tie_tolerance: float = Field(default=0.0, ge=0.0)
    brute_force_limit: int = Field(default=25, ge=1, le=30)
    workers: int = Field(default=1, ge=1)
    condition_warning: float = Field(default=1e6, gt=1.0)

    @field_validator("log_level")
    @classmethod
    def _known_level(cls, value: str) -> str:
        value = value.upper()
        if not isinstance(logging.getLevelName(value), int):
            raise ValueError(f"unknown log level {value}")
        return value

    @classmethod
    def from_environment(cls) -> "Settings":
        """Build settings from MEMRISTIVE_* variables"""
        load_dotenv(Path.cwd() / '.env')
        env = os.environ
        values = {
            "log_level": env.get("MEMRISTIVE_LOG_LEVEL"),
            "output_dir": env.get("MEMRISTIVE_OUTPUT_DIR"),
            "default_seed": env.get("MEMRISTIVE_DEFAULT_SEED"),
            "tie_tolerance": env.get("MEMRISTIVE_TIE_TOLERANCE"),
            "brute_force_limit": env.get("MEMRISTIVE_BRUTE_FORCE_LIMIT"),
            "workers": env.get("MEMRISTIVE_WORKERS"),
            "condition_warning": env.get("MEMRISTIVE_CONDITION_WARNING"),
        }
        return cls(**{key: value for key, value in values.items() if value is not None})


@lru_cache(maxsize=1)
def get_settings() -> Settings:
    """Cached settings instance"""
    return Settings.from_environment()


def configure_logging(level: Optional[str] = None) -> logging.Logger:
    """Attach a single stream handler to the package logger"""
    logger = logging.getLogger(PACKAGE_LOGGER)
    level = (level or get_settings().log_level).upper()

    if not any(getattr(handler, "_memristive", False) for handler in logger.handlers):
        handler = logging.StreamHandler()
        handler.setFormatter(logging.Formatter(LOG_FORMAT))
        handler._memristive = True
        logger.addHandler(handler)

    try:
        logger.setLevel(level)
    except ValueError as e:
        raise ConfigError(str(e), field_path="log_level")
    return logger
