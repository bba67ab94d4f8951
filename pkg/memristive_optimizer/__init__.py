"""
Memristive Optimizer - memristor circuit dynamics, Lyapunov landscapes and
binary optimization heuristics
"""

__version__ = "1.0.0"
__author__ = "Memristive Optimizer"

from .errors import MemristiveError
from .models import MemristorParams, NetworkState, SourceVector
from .topology import (CircuitGraph, ProjectorMatrix, circuit_projector, fundamental_cycle_basis,
                       generate_er_circuit, orthonormal_loop_basis, projector_from_cycles)
from .dynamics import network_step, simulate, single_memristor_step
from .lyapunov import lyapunov_asymptotic, lyapunov_gradient, lyapunov_value, to_ising, to_qubo
from .asymptotics import PredictionMethod, predict_asymptotic, prediction_accuracy
from .complexity import fit_diagonal_scaling, kac_rice_count, offdiagonal_histogram, projector_det_identity
from .optimize import (AnnealSchedule, brute_force, memristive_minimize, pipeline_memristive_then_annealing,
                       random_search, simulated_annealing)
from .portfolio import PortfolioProblem, load_portfolio, markowitz_to_dynamics

__all__ = [
    "MemristiveError",
    "MemristorParams",
    "NetworkState",
    "SourceVector",
    "CircuitGraph",
    "ProjectorMatrix",
    "generate_er_circuit",
    "fundamental_cycle_basis",
    "projector_from_cycles",
    "orthonormal_loop_basis",
    "circuit_projector",
    "single_memristor_step",
    "network_step",
    "simulate",
    "lyapunov_value",
    "lyapunov_asymptotic",
    "lyapunov_gradient",
    "to_qubo",
    "to_ising",
    "PredictionMethod",
    "predict_asymptotic",
    "prediction_accuracy",
    "offdiagonal_histogram",
    "fit_diagonal_scaling",
    "projector_det_identity",
    "kac_rice_count",
    "AnnealSchedule",
    "brute_force",
    "simulated_annealing",
    "random_search",
    "memristive_minimize",
    "pipeline_memristive_then_annealing",
    "PortfolioProblem",
    "load_portfolio",
    "markowitz_to_dynamics",
]
