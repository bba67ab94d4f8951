"""
Lyapunov functional of the memristive network and its binary restrictions

For memory vector w, interaction matrix Omega, sources S and parameters
(alpha, beta, xi):

    L(w)   = -alpha/2 sum w_i^2 - alpha xi/3 sum Omega_ii w_i^3
             - alpha xi sum_{i!=j} Omega_ij w_i w_j^2 + 1/beta w.Omega S
    L_a(w) = -[ w.h + alpha xi sum_{i!=j} Omega_ij w_i w_j ]
    h_i    = alpha/2 + alpha xi/3 Omega_ii - 1/beta (Omega S)_i

L and L_a coincide on every corner of the unit hypercube. L_a is the
quadratic binary objective that the heuristics in ``optimize`` minimize.
"""

import logging
from typing import Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict, field_validator
from scipy import linalg

from .errors import ConfigError, DimensionMismatchError, SingularSystemError
from .models import ArrayModel, MemristorParams, as_matrix, as_memory, as_sources, frozen_array

logger = logging.getLogger(__name__)

RESIDUAL_TOLERANCE = 1e-9


def _operands(state, omega, sources) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    w = as_memory(state)
    matrix = as_matrix(omega)
    s = as_sources(sources)
    n = matrix.shape[0]
    if matrix.shape != (n, n) or w.shape != (n,) or s.shape != (n,):
        raise DimensionMismatchError(
            f"shapes disagree: omega {matrix.shape}, state {w.shape}, sources {s.shape}")
    return w, matrix, s


def _off_diagonal(matrix: np.ndarray) -> np.ndarray:
    return matrix - np.diag(np.diag(matrix))


def effective_field(omega, sources, params: MemristorParams) -> np.ndarray:
    """h_i = alpha/2 + alpha xi/3 Omega_ii - (Omega S)_i / beta"""
    matrix = as_matrix(omega)
    s = as_sources(sources)
    if s.shape != (matrix.shape[0],):
        raise DimensionMismatchError(f"sources {s.shape} do not match omega {matrix.shape}")
    return (params.alpha / 2.0
            + params.alpha * params.xi / 3.0 * np.diag(matrix)
            - matrix @ s / params.beta)


def lyapunov_value(state, omega, sources, params: MemristorParams) -> float:
    w, matrix, s = _operands(state, omega, sources)
    a, xi = params.alpha, params.xi
    off = _off_diagonal(matrix)
    return float(-a / 2.0 * np.dot(w, w)
                 - a * xi / 3.0 * np.dot(np.diag(matrix), w ** 3)
                 - a * xi * w @ off @ (w ** 2)
                 + w @ matrix @ s / params.beta)


def lyapunov_asymptotic(state, omega, sources, params: MemristorParams) -> float:
    w, matrix, s = _operands(state, omega, sources)
    h = effective_field(matrix, s, params)
    off = _off_diagonal(matrix)
    return float(-(np.dot(w, h) + params.alpha * params.xi * w @ off @ w))


def lyapunov_gradient(state, omega, sources, params: MemristorParams) -> np.ndarray:
    """Variation of L with respect to each memory value"""
    w, matrix, s = _operands(state, omega, sources)
    a, xi = params.alpha, params.xi
    off = _off_diagonal(matrix)
    return (-a * w
            - a * xi * np.diag(matrix) * w ** 2
            - a * xi * off @ (w ** 2)
            + matrix @ s / params.beta
            - 2.0 * a * xi * w * (off @ w))


def m_vector(state, omega, params: MemristorParams) -> np.ndarray:
    """M_i = -2 alpha xi w_i sum_{j!=i} Omega_ji w_j"""
    w = as_memory(state)
    off = _off_diagonal(as_matrix(omega))
    return -2.0 * params.alpha * params.xi * w * (off.T @ w)


def interaction_system(w: np.ndarray, matrix: np.ndarray, xi: float) -> np.ndarray:
    """I + xi Omega diag(w)"""
    return np.eye(matrix.shape[0]) + xi * matrix * w[np.newaxis, :]


def solve_interaction(w: np.ndarray, matrix: np.ndarray, rhs: np.ndarray, xi: float) -> np.ndarray:
    """Solve (I + xi Omega W) x = rhs by LU with partial pivoting"""
    system = interaction_system(w, matrix, xi)
    try:
        x = linalg.solve(system, rhs, check_finite=False)
    except (linalg.LinAlgError, ValueError) as e:
        raise SingularSystemError(f"I + xi Omega W is singular: {e}")
    if not np.all(np.isfinite(x)):
        raise SingularSystemError("I + xi Omega W produced a non-finite solution")
    scale = np.max(np.abs(rhs), initial=0.0)
    residual = np.max(np.abs(system @ x - rhs), initial=0.0)
    if residual > RESIDUAL_TOLERANCE * scale:
        raise SingularSystemError(f"linear solve residual {residual:.3e} exceeds tolerance")
    return x


def memory_velocity(state, omega, sources, params: MemristorParams) -> np.ndarray:
    """Unconstrained dw/dt = alpha w - (I + xi Omega W)^{-1} Omega S / beta"""
    w, matrix, s = _operands(state, omega, sources)
    x = solve_interaction(w, matrix, matrix @ s, params.xi)
    return params.alpha * w - x / params.beta


class LyapunovDiagnostics(ArrayModel):
    """Values and derivative bookkeeping of L at one state"""
    value: float
    asymptotic_value: float
    gradient: np.ndarray
    m_vector: np.ndarray
    weighted_norm_term: float
    derivative_estimate: float

    @field_validator("gradient", "m_vector", mode="before")
    @classmethod
    def _vector(cls, value):
        return frozen_array(value)


def diagnostics(state, omega, sources, params: MemristorParams) -> LyapunovDiagnostics:
    """dL/dt = -|dw/dt|^2_{I + xi Omega W} + M . dw/dt along the flow"""
    w, matrix, s = _operands(state, omega, sources)
    velocity = memory_velocity(w, matrix, s, params)
    weighted = float(velocity @ interaction_system(w, matrix, params.xi) @ velocity)
    m = m_vector(w, matrix, params)
    return LyapunovDiagnostics(
        value=lyapunov_value(w, matrix, s, params),
        asymptotic_value=lyapunov_asymptotic(w, matrix, s, params),
        gradient=lyapunov_gradient(w, matrix, s, params),
        m_vector=m,
        weighted_norm_term=weighted,
        derivative_estimate=-weighted + float(m @ velocity),
    )


def metric_min_eigenvalue(omega, state, xi: float) -> float:
    """Smallest eigenvalue of I + xi sqrt(W) Omega sqrt(W)"""
    matrix = as_matrix(omega)
    root = np.sqrt(as_memory(state))
    metric = np.eye(matrix.shape[0]) + xi * root[:, np.newaxis] * matrix * root[np.newaxis, :]
    return float(linalg.eigvalsh(metric)[0])


class MonotonicityBound(BaseModel):
    """Phase-diagram test certifying dL/dt < 0"""
    model_config = ConfigDict(frozen=True)

    lhs: float
    rhs: float
    satisfied: bool
    s_of_N: float
    omega_bar: float


def monotonicity_bound(omega, sources, params: MemristorParams) -> MonotonicityBound:
    """
    4 xi^2 (1 + xi) Omega_bar^2 < s^2/(alpha beta)^2 - 2 s/(alpha beta)

    with |Omega S|^2 = N^2 s(N)^2 and Omega_bar the largest |Omega_ij|.
    """
    matrix = as_matrix(omega)
    s = as_sources(sources)
    drive = params.alpha * params.beta
    if drive == 0.0:
        raise ConfigError("monotonicity bound is undefined for alpha * beta = 0", field_path="params.alpha")

    n = matrix.shape[0]
    s_of_n = float(np.linalg.norm(matrix @ s)) / n
    omega_bar = float(np.max(np.abs(matrix)))
    q = s_of_n / drive
    lhs = 4.0 * params.xi ** 2 * (1.0 + params.xi) * omega_bar ** 2
    rhs = q ** 2 - 2.0 * q
    return MonotonicityBound(lhs=lhs, rhs=rhs, satisfied=lhs < rhs, s_of_N=s_of_n, omega_bar=omega_bar)


class QuboInstance(ArrayModel):
    """E(w) = linear.w + w^t quadratic w + offset over w in {0,1}^N"""
    linear: np.ndarray
    quadratic: np.ndarray
    offset: float = 0.0

    @field_validator("linear", mode="before")
    @classmethod
    def _linear(cls, value):
        return frozen_array(np.atleast_1d(np.asarray(value, dtype=float)))

    @field_validator("quadratic", mode="before")
    @classmethod
    def _coupling(cls, value):
        return _zero_diagonal_symmetric(value)

    @property
    def size(self) -> int:
        return int(self.linear.size)

    def energy(self, w) -> float:
        w = np.asarray(w, dtype=float)
        return float(self.linear @ w + w @ self.quadratic @ w + self.offset)

    def energies(self, states) -> np.ndarray:
        """Energies of a batch of states, one per row"""
        states = np.asarray(states, dtype=float)
        return (states @ self.linear
                + np.einsum("ij,jk,ik->i", states, self.quadratic, states)
                + self.offset)

    def flip_delta(self, w: np.ndarray, local_field: np.ndarray, index: int) -> float:
        """Energy change of flipping bit ``index`` given local_field = quadratic @ w"""
        step = 1.0 - 2.0 * w[index]
        return float(step * (self.linear[index] + 2.0 * local_field[index]))


class IsingInstance(ArrayModel):
    """E(sigma) = h_tilde.sigma + sigma^t coupling sigma + constant_offset"""
    h_tilde: np.ndarray
    coupling: np.ndarray
    constant_offset: float = 0.0

    @field_validator("h_tilde", mode="before")
    @classmethod
    def _field(cls, value):
        return frozen_array(np.atleast_1d(np.asarray(value, dtype=float)))

    @field_validator("coupling", mode="before")
    @classmethod
    def _coupling(cls, value):
        return _zero_diagonal_symmetric(value)

    def energy(self, sigma) -> float:
        sigma = np.asarray(sigma, dtype=float)
        return float(self.h_tilde @ sigma + sigma @ self.coupling @ sigma + self.constant_offset)


def _zero_diagonal_symmetric(value) -> np.ndarray:
    array = np.asarray(value, dtype=float)
    if array.ndim != 2 or array.shape[0] != array.shape[1]:
        raise ValueError("coupling must be square")
    if np.any(np.diag(array) != 0.0):
        raise ValueError("coupling must have a zero diagonal")
    if np.max(np.abs(array - array.T), initial=0.0) > 1e-12 * max(1.0, np.max(np.abs(array), initial=0.0)):
        raise ValueError("coupling must be symmetric")
    return frozen_array(0.5 * (array + array.T))


def to_qubo(omega, sources, params: MemristorParams) -> QuboInstance:
    """QUBO whose energy equals L_a on every binary state"""
    matrix = as_matrix(omega)
    h = effective_field(matrix, sources, params)
    return QuboInstance(linear=-h, quadratic=-params.alpha * params.xi * _off_diagonal(matrix), offset=0.0)


def qubo_to_ising(qubo: QuboInstance) -> IsingInstance:
    """Substitute w = (1 + sigma)/2 keeping the energy of every state"""
    row_sums = qubo.quadratic.sum(axis=1)
    return IsingInstance(
        h_tilde=qubo.linear / 2.0 + row_sums / 2.0,
        coupling=qubo.quadratic / 4.0,
        constant_offset=qubo.offset + qubo.linear.sum() / 2.0 + qubo.quadratic.sum() / 4.0,
    )


def to_ising(omega, sources, params: MemristorParams) -> IsingInstance:
    return qubo_to_ising(to_qubo(omega, sources, params))


def spins_to_memory(sigma) -> np.ndarray:
    """sigma = +1 maps to w = 1"""
    return (1.0 + np.asarray(sigma, dtype=float)) / 2.0


def to_ising_random(h_tilde, q, params: MemristorParams) -> IsingInstance:
    """Spin glass with couplings alpha xi sqrt(3/N) Q_ij drawn from the ER scaling"""
    q = as_matrix(q)
    n = q.shape[0]
    coupling = params.alpha * params.xi * np.sqrt(3.0 / n) * _off_diagonal(q)
    return IsingInstance(h_tilde=h_tilde, coupling=coupling, constant_offset=0.0)


def shifted_spin_field(h, q) -> np.ndarray:
    """Informational field h/2 - sum_j Q_ij / 2 under the w = (sigma - 1)/2 map"""
    return np.asarray(h, dtype=float) / 2.0 - as_matrix(q).sum(axis=1) / 2.0
