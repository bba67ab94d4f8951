"""
Statistics of loop projectors for random circuits and the Kac-Rice estimate
of the number of stationary points of the asymptotic Lyapunov function

Random ER projectors follow Omega_ii ~ 1 - c / N^a with c ~ sqrt(3) and
a ~ 1/2, and off-diagonal entries Omega_ij ~ sqrt(3/N) Q_ij. With Q_ij
Gaussian of width sigma the expected count is

    <#> = (sqrt(3) alpha xi)^N (1 - 1/sqrt(N))^L Z(S)

which for alpha xi >> S >> 1 reduces to (1 - 1/sqrt(N))^L rho^N with
rho = sqrt(3) / (sqrt(pi) sigma). All counts are kept as natural logs.
"""

import logging
import math
from enum import Enum
from typing import Iterable, List, Sequence, Tuple, Union

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, field_validator
from scipy import linalg

from .errors import ConfigError, ScalingFitError
from .models import ArrayModel, MemristorParams, as_matrix, frozen_array
from .topology import circuit_projector, generate_er_circuit

logger = logging.getLogger(__name__)

CRITICAL_TOLERANCE = 1e-9
TAIL_SIGMAS = 5.0
MIN_FIT_SIZES = 5
CRITICAL_SIGMA = math.sqrt(3.0 / math.pi)


class OffDiagonalHistogram(ArrayModel):
    """Histogram of Omega_ij for i < j"""
    counts: np.ndarray
    edges: np.ndarray
    mean: float
    std: float
    tail_fraction: float
    total: int

    @field_validator("counts", mode="before")
    @classmethod
    def _counts(cls, value):
        return frozen_array(value, dtype=np.int64)

    @field_validator("edges", mode="before")
    @classmethod
    def _edges(cls, value):
        return frozen_array(value)

    @property
    def centers(self) -> np.ndarray:
        return 0.5 * (self.edges[:-1] + self.edges[1:])


def offdiagonal_values(omega) -> np.ndarray:
    matrix = as_matrix(omega)
    return matrix[np.triu_indices(matrix.shape[0], k=1)]


def offdiagonal_histogram(omega, bins: int = 50) -> OffDiagonalHistogram:
    """Histogram plus the share of mass beyond five standard deviations"""
    values = offdiagonal_values(omega)
    if as_matrix(omega).shape[0] < 10:
        logger.warning("off-diagonal statistics of fewer than 10 memristors are not representative")
    mean = float(values.mean())
    std = float(values.std())

    if std == 0.0:
        counts, edges = np.array([values.size]), np.array([mean, mean])
        tail = 0.0
    else:
        counts, edges = np.histogram(values, bins=bins)
        tail = float(np.mean(np.abs(values - mean) > TAIL_SIGMAS * std))
    return OffDiagonalHistogram(counts=counts, edges=edges, mean=mean, std=std,
                                tail_fraction=tail, total=int(values.size))


def measure_sigma(omegas: Iterable) -> float:
    """Pooled width of off-diagonals rescaled by sqrt(N/3)"""
    pooled = [offdiagonal_values(omega) * math.sqrt(as_matrix(omega).shape[0] / 3.0) for omega in omegas]
    return float(np.concatenate(pooled).std())


class OmegaScalingFit(BaseModel):
    """Power law 1 - Omega_ii ~ c / N^exponent"""
    model_config = ConfigDict(frozen=True)

    c: float = Field(gt=0.0)
    exponent: float
    samples: List[Tuple[float, float]]
    stderr: List[float] = []
    residual: float


def diagonal_deficit(omega) -> float:
    """mean(1 - Omega_ii)"""
    return float(np.mean(1.0 - np.diag(as_matrix(omega))))


def fit_scaling_samples(samples: Sequence[Tuple[float, float]], stderr: Sequence[float] = ()) -> OmegaScalingFit:
    """Least squares of log(1 - Omega_ii) against log N"""
    sizes = np.array([size for size, _ in samples], dtype=float)
    deficits = np.array([value for _, value in samples], dtype=float)
    if np.unique(sizes).size < MIN_FIT_SIZES:
        raise ScalingFitError(f"need at least {MIN_FIT_SIZES} distinct sizes, got {np.unique(sizes).size}")
    if np.any(deficits <= 0.0):
        raise ScalingFitError("diagonal deficits must be positive to fit on a log scale")

    x, y = np.log(sizes), np.log(deficits)
    slope, intercept = np.polyfit(x, y, deg=1)
    residual = float(np.sqrt(np.mean((y - (slope * x + intercept)) ** 2)))
    return OmegaScalingFit(c=float(np.exp(intercept)), exponent=float(-slope),
                           samples=[(float(a), float(b)) for a, b in samples],
                           stderr=[float(e) for e in stderr], residual=residual)


def vertices_for_edges(edge_count: int, p: float) -> int:
    """Invert N = p V (V - 1) / 2"""
    return max(3, int(round(0.5 * (1.0 + math.sqrt(1.0 + 8.0 * edge_count / p)))))


def fit_diagonal_scaling(circuit_sizes: Sequence[int], p: float, seeds_per_size: int,
                         seed: int = 0) -> OmegaScalingFit:
    """
    Fit the diagonal scaling over ER circuits.

    ``circuit_sizes`` are target memristor counts; each is realized with the
    vertex count closest to p V (V - 1) / 2 and averaged over the sample.
    """
    if len(set(circuit_sizes)) < MIN_FIT_SIZES:
        raise ScalingFitError(f"need at least {MIN_FIT_SIZES} distinct sizes")
    if seeds_per_size < 1:
        raise ScalingFitError("seeds_per_size must be at least 1")

    samples, errors = [], []
    for index, target in enumerate(circuit_sizes):
        vertex_count = vertices_for_edges(target, p)
        sizes, deficits = [], []
        for repeat in range(seeds_per_size):
            graph = generate_er_circuit(vertex_count, p, seed=_size_seed(seed, index, repeat))
            sizes.append(graph.edge_count)
            deficits.append(diagonal_deficit(circuit_projector(graph)))
        samples.append((float(np.mean(sizes)), float(np.mean(deficits))))
        errors.append(float(np.std(deficits, ddof=1) / math.sqrt(len(deficits))) if len(deficits) > 1 else 0.0)
        logger.info(f"scaling sample N~{samples[-1][0]:.0f}: mean(1 - Omega_ii) = {samples[-1][1]:.5f}")
    return fit_scaling_samples(samples, errors)


def _size_seed(seed: int, index: int, repeat: int) -> int:
    return int(np.random.SeedSequence(seed, spawn_key=(index, repeat)).generate_state(1, dtype=np.uint64)[0])


class DeterminantIdentity(BaseModel):
    """log|det(Q - sqrt(N) I)| against its closed form"""
    model_config = ConfigDict(frozen=True)

    lhs: float
    rhs: float


def projector_det_identity(q, n: int) -> DeterminantIdentity:
    """|det(Q - sqrt(N) I)| = N^{N/2} (1 - 1/sqrt(N))^L, both as logs"""
    matrix = as_matrix(q)
    if matrix.shape != (n, n):
        raise ValueError(f"projector of shape {matrix.shape} is not {n} x {n}")
    rank = int(round(float(np.trace(matrix))))
    _, lhs = np.linalg.slogdet(matrix - math.sqrt(n) * np.eye(n))
    rhs = 0.5 * n * math.log(n)
    if rank:
        shrink = 1.0 - 1.0 / math.sqrt(n)
        rhs = rhs + rank * math.log(shrink) if shrink > 0.0 else -math.inf
    return DeterminantIdentity(lhs=float(lhs), rhs=float(rhs))


class Regime(str, Enum):
    EXPLODING = "exploding"
    VANISHING = "vanishing"
    CRITICAL = "critical"


class KacRiceEstimate(BaseModel):
    """Log expected number of stationary points"""
    model_config = ConfigDict(frozen=True)

    log_count: float
    log_count_simplified: float
    regime: Regime
    sigma: float
    rho: float
    n: int
    l: int
    z_term: float
    z_term_simplified: float


def _log_bracket(a: float, b: np.ndarray, sigma: float) -> np.ndarray:
    """log(exp(-3 a^2 / (2 sigma^2 b^2)) / |b|), -inf where b = 0"""
    b = np.abs(np.asarray(b, dtype=float))
    out = np.full(b.shape, -np.inf)
    nonzero = b > 0.0
    out[nonzero] = -3.0 * a ** 2 / (2.0 * sigma ** 2 * b[nonzero] ** 2) - np.log(b[nonzero])
    return out


def log_z(n: int, sigma: float, params: MemristorParams, s_volts: Union[float, np.ndarray]) -> float:
    """
    log Z for equal sources (scalar ``s_volts``) or the product form over a
    source vector, using
        a(w) = alpha xi (1 - sqrt(3/N)) w - (alpha/2 + alpha xi (1 - sqrt(3/N)))
        b(w) = alpha xi w + S / beta
    """
    axi = params.alpha * params.xi
    shrink = 1.0 - math.sqrt(3.0 / n)
    a_one = axi * shrink - (params.alpha / 2.0 + axi * shrink)
    a_zero = -(params.alpha / 2.0 + axi * shrink)

    drive = np.atleast_1d(np.asarray(s_volts, dtype=float)) / params.beta
    per_site = np.logaddexp(_log_bracket(a_one, axi + drive, sigma), _log_bracket(a_zero, drive, sigma))
    if drive.size == 1:
        total = n * float(per_site[0])
    elif drive.size == n:
        total = float(per_site.sum())
    else:
        raise ValueError(f"source vector of length {drive.size} does not match N={n}")
    return n * math.log(math.sqrt(3.0) / (math.sqrt(math.pi) * sigma)) + total


def classify_regime(rho: float) -> Regime:
    if abs(rho - 1.0) <= CRITICAL_TOLERANCE:
        return Regime.CRITICAL
    return Regime.EXPLODING if rho > 1.0 else Regime.VANISHING


def kac_rice_count(n: int, l: int, sigma: float, params: MemristorParams,
                   s_volts: Union[float, np.ndarray]) -> KacRiceEstimate:
    """Full and alpha xi >> S >> 1 forms of log <#>"""
    if sigma <= 0.0:
        raise ConfigError(f"sigma must be positive, got {sigma}", field_path="sigma")
    if n < 2:
        raise ConfigError("Kac-Rice estimate needs N >= 2", field_path="n")
    axi = params.alpha * params.xi
    if axi <= 0.0:
        raise ConfigError("Kac-Rice estimate needs alpha * xi > 0", field_path="params.alpha")

    rho = math.sqrt(3.0) / (math.sqrt(math.pi) * sigma)
    loops = l * math.log(1.0 - 1.0 / math.sqrt(n))
    z_term = log_z(n, sigma, params, s_volts)
    z_simplified = n * math.log(rho) - n * math.log(axi)
    return KacRiceEstimate(
        log_count=n * math.log(math.sqrt(3.0) * axi) + loops + z_term,
        log_count_simplified=loops + n * math.log(rho),
        regime=classify_regime(rho),
        sigma=sigma,
        rho=rho,
        n=n,
        l=l,
        z_term=z_term,
        z_term_simplified=z_simplified,
    )


def random_projector(n: int, rank: int, rng: np.random.Generator) -> np.ndarray:
    """Orthogonal projector onto a random rank-dimensional subspace"""
    if rank == 0:
        return np.zeros((n, n))
    q, _ = linalg.qr(rng.standard_normal((n, rank)), mode="economic")
    projector = q @ q.T
    return 0.5 * (projector + projector.T)
