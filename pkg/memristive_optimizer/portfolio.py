"""
Markowitz asset selection as a memristive circuit

Selecting a subset w in {0,1}^N maximizes

    M(w) = sum_i (r_i - p/2 Sigma_ii) w_i - p/2 sum_{i!=j} w_i Sigma_ij w_j

The circuit uses Omega = -Sigma, xi = p/(2 alpha) and
S = beta Sigma^{-1} (r - alpha/2 - (p/2 - alpha xi/3) eta), eta_i = Sigma_ii,
which makes L_a(w) = -M(w) on every binary state.
"""

import logging
import math
from pathlib import Path
from typing import List, Optional, Union

import numpy as np
from pydantic import Field, field_validator, model_validator
from scipy import linalg

from .errors import ConfigError, PortfolioFormatError, SingularSystemError
from .models import ArrayModel, MemristorParams, SourceVector, frozen_array
from .optimize import DynamicsMapping
from .settings import get_settings

logger = logging.getLogger(__name__)

SYMMETRY_TOLERANCE = 1e-12
UNIT_CORRELATION_TOLERANCE = 1e-12


class PortfolioProblem(ArrayModel):
    """Expected returns, covariance and risk trade-off of a selection problem"""
    returns: np.ndarray
    covariance: np.ndarray
    tradeoff: float = Field(gt=0.0)
    asset_names: Optional[List[str]] = None

    @field_validator("returns", mode="before")
    @classmethod
    def _returns(cls, value):
        array = np.atleast_1d(np.asarray(value, dtype=float))
        if array.ndim != 1 or not np.all(np.isfinite(array)):
            raise ValueError("returns must be a finite vector")
        return frozen_array(array)

    @field_validator("covariance", mode="before")
    @classmethod
    def _covariance(cls, value):
        array = np.asarray(value, dtype=float)
        if array.ndim != 2 or array.shape[0] != array.shape[1]:
            raise ValueError("covariance must be square")
        scale = max(1.0, float(np.max(np.abs(array), initial=0.0)))
        if np.max(np.abs(array - array.T), initial=0.0) > SYMMETRY_TOLERANCE * scale:
            raise ValueError("covariance must be symmetric")
        if np.any(np.diag(array) < 0.0):
            raise ValueError("variances must be non-negative")
        return frozen_array(0.5 * (array + array.T))

    @model_validator(mode="after")
    def _sizes(self) -> "PortfolioProblem":
        n = self.returns.size
        if self.covariance.shape != (n, n):
            raise ValueError(f"covariance {self.covariance.shape} does not match {n} returns")
        if self.asset_names is not None and len(self.asset_names) != n:
            raise ValueError(f"expected {n} asset names, got {len(self.asset_names)}")
        return self

    @property
    def size(self) -> int:
        return int(self.returns.size)

    @property
    def variances(self) -> np.ndarray:
        return np.diag(self.covariance)


def markowitz_value(problem: PortfolioProblem, w) -> float:
    """M(w) for a binary selection"""
    w = np.asarray(w, dtype=float)
    p = problem.tradeoff
    off = problem.covariance - np.diag(problem.variances)
    return float((problem.returns - p / 2.0 * problem.variances) @ w - p / 2.0 * w @ off @ w)


def markowitz_to_dynamics(problem: PortfolioProblem, alpha: Optional[float] = None,
                          beta: float = 1.0) -> DynamicsMapping:
    """
    Circuit inputs with L_a = -M exactly.

    When ``alpha`` is omitted it is set to p * lambda_max(Sigma), which keeps
    I + xi Omega positive definite with xi lambda_max = 1/2.
    """
    sigma = problem.covariance
    p = problem.tradeoff
    if alpha is None:
        alpha = p * float(linalg.eigvalsh(sigma)[-1])
    if alpha <= 0.0:
        raise ConfigError(f"alpha must be positive, got {alpha}", field_path="params.alpha")
    if beta <= 0.0:
        raise ConfigError(f"beta must be positive, got {beta}", field_path="params.beta")
    xi = p / (2.0 * alpha)

    condition = float(np.linalg.cond(sigma))
    if not math.isfinite(condition):
        raise SingularSystemError("covariance matrix is singular")
    if condition > get_settings().condition_warning:
        logger.warning(f"covariance condition number {condition:.3e}; sources scale with |Sigma^-1|, "
                       f"consider a smaller beta")

    rhs = problem.returns - alpha / 2.0 - (p / 2.0 - alpha * xi / 3.0) * problem.variances
    try:
        sources = beta * linalg.solve(sigma, rhs, assume_a="sym")
    except linalg.LinAlgError as e:
        raise SingularSystemError(f"covariance matrix is singular: {e}")

    params = MemristorParams(alpha=alpha, beta=beta, xi=xi)
    logger.debug(f"markowitz mapping: alpha={alpha:.6g}, xi={xi:.6g}, |S|={np.linalg.norm(sources):.3e}")
    return DynamicsMapping(omega=-sigma, sources=SourceVector(s=sources), params=params)


def _fields(line: str, count: int, line_number: int) -> List[str]:
    parts = line.split()
    if len(parts) != count:
        raise PortfolioFormatError(f"expected {count} fields, got {len(parts)}", line_number)
    return parts


def _number(text: str, line_number: int, kind=float):
    try:
        return kind(text)
    except ValueError:
        raise PortfolioFormatError(f"cannot parse {text!r} as {kind.__name__}", line_number)


def load_portfolio(path: Union[str, Path], tradeoff: float = 1.0) -> PortfolioProblem:
    """
    Read the OR-Library portfolio format.

    Line 1 holds N, the next N lines ``mean_return stddev`` and the rest
    ``i j correlation`` for every 1-indexed pair i <= j.
    """
    with open(path, "r") as f:
        lines = [(number, line) for number, line in enumerate(f, start=1) if line.strip()]
    if not lines:
        raise PortfolioFormatError("empty portfolio file", 1)

    header_number, header = lines[0]
    n = _number(_fields(header, 1, header_number)[0], header_number, int)
    if n < 1:
        raise PortfolioFormatError(f"asset count must be positive, got {n}", header_number)
    if len(lines) < 1 + n:
        raise PortfolioFormatError(f"expected {n} asset lines, file ends early")

    returns, stds = np.empty(n), np.empty(n)
    for index, (number, line) in enumerate(lines[1:1 + n]):
        mean, std = (_number(part, number) for part in _fields(line, 2, number))
        if std < 0.0:
            raise PortfolioFormatError(f"negative standard deviation {std}", number)
        returns[index], stds[index] = mean, std

    correlation = np.full((n, n), np.nan)
    for number, line in lines[1 + n:]:
        i_text, j_text, c_text = _fields(line, 3, number)
        i, j = _number(i_text, number, int) - 1, _number(j_text, number, int) - 1
        value = _number(c_text, number)
        if not (0 <= i < n and 0 <= j < n):
            raise PortfolioFormatError(f"asset pair ({i + 1}, {j + 1}) out of range", number)
        if not -1.0 <= value <= 1.0:
            raise PortfolioFormatError(f"correlation {value} outside [-1, 1]", number)
        if i == j and abs(value - 1.0) > UNIT_CORRELATION_TOLERANCE:
            raise PortfolioFormatError(f"self-correlation of asset {i + 1} is {value}, not 1", number)
        if not np.isnan(correlation[i, j]):
            raise PortfolioFormatError(f"duplicate pair ({i + 1}, {j + 1})", number)
        correlation[i, j] = correlation[j, i] = value

    missing = np.argwhere(np.isnan(correlation))
    if missing.size:
        i, j = sorted(missing[0])
        raise PortfolioFormatError(f"missing correlation for pair ({i + 1}, {j + 1})")

    logger.info(f"loaded {n} assets from {path}")
    return PortfolioProblem(returns=returns, covariance=correlation * np.outer(stds, stds), tradeoff=tradeoff)


def write_portfolio(problem: PortfolioProblem, path: Union[str, Path]) -> None:
    """Write ``problem`` in the format read by ``load_portfolio``"""
    stds = np.sqrt(problem.variances)
    scale = np.outer(stds, stds)
    correlation = np.divide(problem.covariance, scale, out=np.zeros_like(problem.covariance), where=scale > 0.0)
    correlation = np.clip(correlation, -1.0, 1.0)
    np.fill_diagonal(correlation, 1.0)

    with open(path, "w") as f:
        f.write(f"{problem.size}\n")
        for mean, std in zip(problem.returns, stds):
            f.write(f"{mean:.17g} {std:.17g}\n")
        for i in range(problem.size):
            for j in range(i, problem.size):
                f.write(f"{i + 1} {j + 1} {correlation[i, j]:.17g}\n")
