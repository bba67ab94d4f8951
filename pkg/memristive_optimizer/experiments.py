"""
Per-sample tasks shared by the CLI commands

Each task takes one picklable tuple so it can run in a worker process, and
draws all of its randomness from the run's root seed.
"""

import logging
from typing import List, NamedTuple, Optional, Tuple

import numpy as np

from .asymptotics import predict_asymptotic, prediction_accuracy
from .config import ExperimentConfig, SourcesConfig
from .dynamics import simulate
from .ensemble import Component, component_rng, component_seed
from .errors import ConfigError
from .lyapunov import QuboInstance, to_qubo
from .models import NetworkState, SourceVector
from .optimize import (AnnealSchedule, DynamicsMapping, OptimizationOutcome, brute_force, memristive_minimize,
                       pipeline_memristive_then_annealing, random_search, simulated_annealing)
from .portfolio import PortfolioProblem
from .settings import get_settings
from .topology import (CircuitGraph, CycleBasis, ProjectorMatrix, fundamental_cycle_basis, generate_er_circuit,
                       orthonormal_loop_basis, projector_from_cycles)

logger = logging.getLogger(__name__)


class Circuit(NamedTuple):
    graph: CircuitGraph
    basis: CycleBasis
    omega: ProjectorMatrix


def build_circuit(config: ExperimentConfig, index: int = 0) -> Circuit:
    seed = component_seed(config.seed, Component.GRAPH, index)
    graph = generate_er_circuit(config.circuit.vertices, config.circuit.edge_probability, seed)
    basis = fundamental_cycle_basis(graph)
    return Circuit(graph, basis, projector_from_cycles(basis))


def build_sources(config: ExperimentConfig, circuit: Circuit, index: int = 0,
                  settings: Optional[SourcesConfig] = None) -> SourceVector:
    """Sources drawn from ``settings``, the top-level ``sources`` section by default"""
    settings = settings or config.sources
    n = circuit.graph.edge_count
    rng = component_rng(config.seed, Component.SOURCES, index)

    if settings.mode == "uniform":
        return SourceVector.uniform_range(n, settings.low, settings.high, rng)
    if settings.mode == "explicit":
        if len(settings.values) != n:
            raise ConfigError(f"{len(settings.values)} source values for {n} memristors", field_path="sources.values")
        return SourceVector(s=settings.values)

    loops = orthonormal_loop_basis(circuit.basis)
    if settings.pattern is None:
        pattern = rng.choice([-1.0, 1.0], size=loops.loop_count)
    else:
        pattern = np.asarray(settings.pattern, dtype=float)
    if pattern.shape != (loops.loop_count,):
        raise ConfigError(f"pattern needs {loops.loop_count} coefficients", field_path="sources.pattern")
    return SourceVector(s=pattern @ loops.rows)


def initial_state(config: ExperimentConfig, n: int, index: int = 0) -> NetworkState:
    if config.integration.initial == "uniform":
        return NetworkState.uniform(n)
    return NetworkState.random(n, component_rng(config.seed, Component.INITIAL_STATE, index))


def predict_sample(task: Tuple[ExperimentConfig, float, int]) -> float:
    """Prediction accuracy of one circuit at one xi"""
    config, xi, index = task
    circuit = build_circuit(config, index)
    sources = build_sources(config, circuit, index, config.predict.sources)
    params = config.params.to_params().with_xi(xi)
    n = circuit.graph.edge_count

    steps = config.integration.steps
    trace = simulate(initial_state(config, n, index), circuit.omega, sources, params,
                     config.integration.dt, steps, record_every=steps)
    prediction = predict_asymptotic(circuit.omega, sources, params, config.predict.method)
    return prediction_accuracy(trace, prediction, config.predict.binarize_threshold)


def _brute_force_allowed(config: ExperimentConfig, n: int) -> bool:
    return n <= min(config.optimizer.brute_force_max_n, get_settings().brute_force_limit)


def benchmark_qubo(config: ExperimentConfig, index: int) -> QuboInstance:
    """QUBO form of the Lyapunov functional of circuit ``index``"""
    circuit = build_circuit(config, index)
    return to_qubo(circuit.omega, build_sources(config, circuit, index), config.params.to_params())


def benchmark_sample(task: Tuple[ExperimentConfig, int]) -> List[OptimizationOutcome]:
    """Memristive, annealing, random and (for small N) exhaustive minima of one circuit QUBO"""
    config, index = task
    circuit = build_circuit(config, index)
    sources = build_sources(config, circuit, index)
    params = config.params.to_params()
    n = circuit.graph.edge_count
    qubo = to_qubo(circuit.omega, sources, params)
    optimizer = config.optimizer

    outcomes = [
        memristive_minimize(circuit.omega, sources, params, config.integration.dt, optimizer.memristive_steps,
                            initial_state(config, n, index)),
        simulated_annealing(qubo, optimizer.schedule(n), component_seed(config.seed, Component.ANNEALER, index)),
        random_search(qubo, optimizer.random_samples, component_seed(config.seed, Component.RANDOM_SEARCH, index)),
    ]
    if _brute_force_allowed(config, n):
        outcomes.append(brute_force(qubo))
    return outcomes


def synthetic_portfolio(config: ExperimentConfig) -> PortfolioProblem:
    """Factor-model returns and covariance for ``markowitz.assets`` assets"""
    n = config.markowitz.assets
    rng = component_rng(config.seed, Component.PORTFOLIO)
    factors = rng.normal(size=(n, 3))
    correlation = factors @ factors.T + 3.0 * np.eye(n)
    scale = np.sqrt(np.diag(correlation))
    correlation /= np.outer(scale, scale)
    stds = rng.uniform(0.05, 0.3, size=n)
    returns = rng.uniform(-0.01, 0.05, size=n)
    return PortfolioProblem(returns=returns, covariance=correlation * np.outer(stds, stds),
                            tradeoff=config.markowitz.tradeoff,
                            asset_names=[f"asset_{i + 1}" for i in range(n)])


def markowitz_sample(task: Tuple[ExperimentConfig, DynamicsMapping, int]) -> List[OptimizationOutcome]:
    """Memristive, combined and matched-budget annealing runs for one seed index"""
    config, mapping, index = task
    optimizer = config.optimizer
    n = mapping.omega.shape[0]
    qubo = mapping.qubo()
    w0 = initial_state(config, n, index)
    seed = component_seed(config.seed, Component.ANNEALER, index)

    memristive = memristive_minimize(mapping.omega, mapping.sources, mapping.params, config.integration.dt,
                                     optimizer.memristive_steps, w0, objective=qubo)
    combined = pipeline_memristive_then_annealing(mapping, optimizer.refine_schedule(n), seed,
                                                  config.integration.dt, optimizer.memristive_steps, w0)
    matched = AnnealSchedule(t0=optimizer.t0, rate=optimizer.rate, steps=combined.wall_steps)
    annealing = simulated_annealing(qubo, matched, component_seed(config.seed, Component.RANDOM_SEARCH, index))

    return [memristive, annealing, combined]
