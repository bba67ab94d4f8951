"""
Heuristics and baselines for binary quadratic objectives

Every method minimizes the QUBO energy E(w) = c.w + w^t J w + offset. For
a memristive network the QUBO of ``to_qubo`` has E = L_a, so minimizing
E is what the relaxation of the circuit does. Outcomes always report the
energy recomputed at the returned state.
"""

import logging
import math
from enum import Enum
from typing import Callable, List, Optional

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, field_validator
from scipy import linalg, optimize

from .dynamics import binarize, simulate
from .errors import ConfigError, PositivityError
from .lyapunov import QuboInstance, to_qubo
from .models import ArrayModel, MemristorParams, NetworkState, SourceVector, as_matrix, frozen_array
from .settings import get_settings

logger = logging.getLogger(__name__)

ENUMERATION_CHUNK = 2 ** 16
SAMPLE_CHUNK = 4096
SYMMETRY_TOLERANCE = 1e-12

Sampler = Callable[[int, int, np.random.Generator], np.ndarray]


class AnnealSchedule(BaseModel):
    """Exponential cooling T_k = t0 * rate^k over ``steps`` proposals"""
    model_config = ConfigDict(frozen=True)

    t0: float = Field(ge=0.0)
    rate: float = Field(gt=0.0, lt=1.0)
    steps: int = Field(ge=1)

    def temperature(self, k: int) -> float:
        return self.t0 * self.rate ** k


class OptimizationMethod(str, Enum):
    MEMRISTIVE = "memristive"
    ANNEALING = "annealing"
    RANDOM = "random"
    BRUTE_FORCE = "brute_force"
    MEMRISTIVE_THEN_ANNEALING = "memristive_then_annealing"


class OptimizationOutcome(ArrayModel):
    """Best state found by one method and its accounting"""
    best_state: np.ndarray
    best_energy: float
    evaluations: int = Field(ge=0)
    wall_steps: int = Field(ge=0)
    method: OptimizationMethod
    seed: Optional[int] = None
    stage_energies: List[float] = []

    @field_validator("best_state", mode="before")
    @classmethod
    def _binary(cls, value):
        array = np.asarray(value)
        if not np.all(np.isin(array, (0, 1))):
            raise ValueError("best_state must be binary")
        return frozen_array(array, dtype=np.int8)

    @property
    def bitstring(self) -> str:
        return "".join(str(int(bit)) for bit in self.best_state)


def _bits(indices: np.ndarray, n: int) -> np.ndarray:
    """Bit i of k is w_i"""
    return ((indices[:, np.newaxis] >> np.arange(n, dtype=np.int64)) & 1).astype(np.int8)


def brute_force(qubo: QuboInstance, limit: Optional[int] = None) -> OptimizationOutcome:
    """Exact minimum by enumeration; the lowest index wins ties"""
    limit = get_settings().brute_force_limit if limit is None else limit
    n = qubo.size
    if n > limit:
        raise ConfigError(f"brute force is limited to N <= {limit}, got N={n}", field_path="qubo")

    total = 2 ** n
    best_index, best_energy = 0, math.inf
    for start in range(0, total, ENUMERATION_CHUNK):
        indices = np.arange(start, min(start + ENUMERATION_CHUNK, total), dtype=np.int64)
        energies = qubo.energies(_bits(indices, n))
        local = int(np.argmin(energies))
        if energies[local] < best_energy:
            best_index, best_energy = int(indices[local]), float(energies[local])

    state = _bits(np.array([best_index], dtype=np.int64), n)[0]
    return OptimizationOutcome(best_state=state, best_energy=qubo.energy(state), evaluations=total,
                               wall_steps=total, method=OptimizationMethod.BRUTE_FORCE)


def simulated_annealing(qubo: QuboInstance, schedule: AnnealSchedule, seed: int,
                        initial_state: Optional[np.ndarray] = None) -> OptimizationOutcome:
    """
    Single-flip Metropolis annealing returning the best state seen.

    A proposal is accepted when dE <= 0, or with probability exp(-dE/T_k)
    when T_k > 0. One uniform site and one uniform variate are drawn per
    step so chains with the same seed are identical.
    """
    rng = np.random.default_rng(seed)
    n = qubo.size
    if initial_state is None:
        w = rng.integers(0, 2, size=n).astype(float)
    else:
        w = np.asarray(initial_state, dtype=float).copy()
        if w.shape != (n,):
            raise ConfigError(f"initial state of shape {w.shape} does not match N={n}", field_path="initial_state")

    coupling = qubo.quadratic
    field = coupling @ w
    energy = qubo.energy(w)
    best, best_energy = w.copy(), energy

    for k in range(schedule.steps):
        temperature = schedule.temperature(k)
        index = int(rng.integers(n))
        u = rng.random()
        delta = qubo.flip_delta(w, field, index)

        if delta <= 0.0:
            accept = True
        elif temperature > 0.0:
            # u < exp(-dE/T) without overflowing the exponent
            accept = u > 0.0 and delta < -temperature * math.log(u)
        else:
            accept = False
        if not accept:
            continue

        change = 1.0 - 2.0 * w[index]
        w[index] += change
        field += coupling[:, index] * change
        energy += delta
        if energy < best_energy:
            best, best_energy = w.copy(), energy

    return OptimizationOutcome(best_state=best, best_energy=qubo.energy(best), evaluations=schedule.steps,
                               wall_steps=schedule.steps, method=OptimizationMethod.ANNEALING, seed=seed)


def _uniform_sampler(count: int, n: int, rng: np.random.Generator) -> np.ndarray:
    return rng.integers(0, 2, size=(count, n), dtype=np.int8)


def random_search(qubo: QuboInstance, n_samples: int, seed: int,
                  sampler: Optional[Sampler] = None) -> OptimizationOutcome:
    """Best of ``n_samples`` binary states drawn by ``sampler`` (uniform by default)"""
    if n_samples < 1:
        raise ConfigError("n_samples must be at least 1", field_path="n_samples")
    rng = np.random.default_rng(seed)
    sampler = sampler or _uniform_sampler
    n = qubo.size

    best, best_energy = None, math.inf
    for start in range(0, n_samples, SAMPLE_CHUNK):
        states = np.asarray(sampler(min(SAMPLE_CHUNK, n_samples - start), n, rng))
        energies = qubo.energies(states)
        local = int(np.argmin(energies))
        if energies[local] < best_energy:
            best, best_energy = states[local].copy(), float(energies[local])

    return OptimizationOutcome(best_state=best, best_energy=qubo.energy(best), evaluations=n_samples,
                               wall_steps=n_samples, method=OptimizationMethod.RANDOM, seed=seed)


def _positivity_margin(matrix: np.ndarray, xi: float) -> float:
    return float(linalg.eigvalsh(np.eye(matrix.shape[0]) + xi * matrix)[0])


def max_admissible_xi(omega) -> float:
    """Supremum of xi keeping I + xi Omega positive definite, found by bisection"""
    matrix = as_matrix(omega)
    if linalg.eigvalsh(matrix)[0] >= 0.0:
        return math.inf

    upper = 1.0
    while _positivity_margin(matrix, upper) > 0.0:
        upper *= 2.0
    return float(optimize.bisect(lambda xi: _positivity_margin(matrix, xi), 0.0, upper, xtol=1e-12 * upper))


def check_positivity(omega, xi: float) -> None:
    """
    Admit a general symmetric Omega for the dynamics.

    Exact projectors pass unconditionally. Otherwise the smallest eigenvalue
    of I + xi (Omega W + W Omega)/2 at the worst case W = I must be positive.
    """
    if getattr(omega, "is_exact_projector", False):
        return
    matrix = as_matrix(omega)
    scale = max(1.0, float(np.max(np.abs(matrix), initial=0.0)))
    if np.max(np.abs(matrix - matrix.T), initial=0.0) > SYMMETRY_TOLERANCE * scale:
        raise ConfigError("interaction matrix must be symmetric", field_path="omega")

    margin = _positivity_margin(matrix, xi)
    if margin <= 0.0:
        limit = max_admissible_xi(matrix)
        raise PositivityError(f"I + xi Omega has smallest eigenvalue {margin:.3e} at xi={xi}", limit)


def memristive_minimize(omega, sources, params: MemristorParams, dt: float, steps: int,
                        w0: Optional[NetworkState] = None,
                        objective: Optional[QuboInstance] = None) -> OptimizationOutcome:
    """Relax the circuit and round its terminal state"""
    check_positivity(omega, params.xi)
    matrix = as_matrix(omega)
    if w0 is None:
        w0 = NetworkState.uniform(matrix.shape[0])

    trace = simulate(w0, omega, sources, params, dt, steps, record_every=steps)
    state = binarize(trace.terminal)
    qubo = objective if objective is not None else to_qubo(matrix, sources, params)
    return OptimizationOutcome(best_state=state, best_energy=qubo.energy(state), evaluations=steps,
                               wall_steps=steps, method=OptimizationMethod.MEMRISTIVE)


class DynamicsMapping(ArrayModel):
    """Circuit inputs whose L_a reproduces a QUBO up to ``offset``"""
    omega: np.ndarray
    sources: SourceVector
    params: MemristorParams
    offset: float = 0.0

    @field_validator("omega", mode="before")
    @classmethod
    def _square(cls, value):
        array = np.asarray(value, dtype=float)
        if array.ndim != 2 or array.shape[0] != array.shape[1]:
            raise ValueError("omega must be square")
        return frozen_array(array)

    def qubo(self) -> QuboInstance:
        base = to_qubo(self.omega, self.sources, self.params)
        return base.model_copy(update={"offset": self.offset})


def qubo_to_dynamics(qubo: QuboInstance, params: MemristorParams) -> DynamicsMapping:
    """
    Embed an arbitrary QUBO into circuit inputs.

    Off-diagonals are Omega_ij = -J_ij / (alpha xi) and the diagonal is one
    more than the largest absolute off-diagonal row sum, so Omega is
    positive definite and the sources solve
        Omega S = beta (alpha/2 + alpha xi/3 Omega_ii + c_i)
    """
    strength = params.alpha * params.xi
    if strength <= 0.0:
        raise ConfigError("embedding a QUBO needs alpha * xi > 0", field_path="params.alpha")

    off = -qubo.quadratic / strength
    diagonal = float(np.max(np.abs(off).sum(axis=1), initial=0.0)) + 1.0
    omega = off + diagonal * np.eye(qubo.size)
    rhs = params.beta * (params.alpha / 2.0 + strength / 3.0 * diagonal + qubo.linear)
    sources = linalg.solve(omega, rhs, assume_a="pos")
    return DynamicsMapping(omega=omega, sources=SourceVector(s=sources), params=params, offset=qubo.offset)


def pipeline_memristive_then_annealing(mapping: DynamicsMapping, schedule: Optional[AnnealSchedule], seed: int,
                                       dt: float, steps: int,
                                       w0: Optional[NetworkState] = None) -> OptimizationOutcome:
    """Memristive relaxation refined by low-temperature annealing from its rounded state"""
    qubo = mapping.qubo()
    first = memristive_minimize(mapping.omega, mapping.sources, mapping.params, dt, steps, w0, objective=qubo)
    logger.info(f"memristive stage energy {first.best_energy:.6g}")

    if schedule is None:
        return first.model_copy(update={
            "method": OptimizationMethod.MEMRISTIVE_THEN_ANNEALING,
            "seed": seed,
            "stage_energies": [first.best_energy, first.best_energy],
        })

    second = simulated_annealing(qubo, schedule, seed, initial_state=first.best_state)
    logger.info(f"annealing stage energy {second.best_energy:.6g}")
    return OptimizationOutcome(
        best_state=second.best_state,
        best_energy=second.best_energy,
        evaluations=first.evaluations + second.evaluations,
        wall_steps=first.wall_steps + second.wall_steps,
        method=OptimizationMethod.MEMRISTIVE_THEN_ANNEALING,
        seed=seed,
        stage_energies=[first.best_energy, second.best_energy],
    )
