#!/usr/bin/env python3
"""
Command-line interface for the memristive optimizer
"""

import argparse
import logging
import sys
from pathlib import Path
from typing import Any, Callable, Dict, Iterator, List, Optional

import numpy as np
from pydantic import ValidationError

from . import __version__
from .asymptotics import AccuracyRow, summarize_accuracies
from .complexity import fit_diagonal_scaling, kac_rice_count, measure_sigma, offdiagonal_histogram, \
    projector_det_identity
from .config import ExperimentConfig, load_config
from .dynamics import simulate
from .ensemble import iter_ensemble
from .errors import ConfigError, MemristiveError, PortfolioFormatError, ScalingFitError, TopologyError
from .experiments import (benchmark_qubo, benchmark_sample, build_circuit, build_sources, initial_state,
                          markowitz_sample, predict_sample, synthetic_portfolio)
from .io import (RowWriter, RunResult, write_accuracy_csv, write_edge_list, write_fit_csv, write_histogram_csv,
                 write_ising, write_json, write_kacrice_csv, write_lyapunov_csv, write_matrix_csv, write_qubo,
                 write_rows, write_run_results, write_trace_csv)
from .lyapunov import qubo_to_ising
from .optimize import OptimizationMethod, brute_force
from .portfolio import load_portfolio, markowitz_to_dynamics, markowitz_value
from .settings import configure_logging, get_settings
from .topology import projector_violations

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_NUMERICAL = 3
EXIT_IO = 4

ENERGY_HEADER = ["instance", "method", "N", "energy", "evaluations", "wall_steps"]
SUMMARY_HEADER = ["method", "mean_energy", "std_energy", "n_samples"]
COMPARISON_HEADER = ["seed_index", "method", "energy", "markowitz_value", "evaluations", "wall_steps",
                     "matches_oracle"]
DET_HEADER = ["N", "L", "log_lhs", "log_rhs", "difference"]


def cmd_simulate(config: ExperimentConfig, out: Path) -> List[Path]:
    circuit = build_circuit(config)
    sources = build_sources(config, circuit)
    n = circuit.graph.edge_count
    integration = config.integration
    trace = simulate(initial_state(config, n), circuit.omega, sources, config.params.to_params(),
                     integration.dt, integration.steps, integration.record_every)

    paths = [out / "edges.txt", out / "trace.csv", out / "lyapunov.csv"]
    write_edge_list(circuit.graph, paths[0])
    write_trace_csv(trace, paths[1], thin=config.output.thin)
    write_lyapunov_csv(trace, paths[2])
    logger.info(f"N={n}, L={circuit.basis.loop_count}: L went from {trace.lyapunov[0]:.6g} "
                f"to {trace.lyapunov[-1]:.6g}")
    return paths


def _accuracy_rows(config: ExperimentConfig) -> Iterator[AccuracyRow]:
    workers = get_settings().workers
    for xi in config.predict.xi_values:
        tasks = [(config, xi, index) for index in range(config.circuit.samples)]
        row = summarize_accuracies(xi, list(iter_ensemble(predict_sample, tasks, workers)))
        logger.info(f"xi={xi}: mean accuracy {row.mean_accuracy:.4f} over {row.n_samples} circuits")
        yield row


def cmd_predict(config: ExperimentConfig, out: Path) -> List[Path]:
    path = out / "accuracy.csv"
    write_accuracy_csv(_accuracy_rows(config), path)
    return [path]


def _summary_rows(results: List[RunResult]) -> List[List[Any]]:
    rows = []
    for method in OptimizationMethod:
        energies = np.array([r.energy for r in results if r.method == method.value])
        if energies.size:
            spread = float(energies.std(ddof=1)) if energies.size > 1 else 0.0
            rows.append([method.value, float(energies.mean()), spread, int(energies.size)])
    return rows


def cmd_benchmark(config: ExperimentConfig, out: Path) -> List[Path]:
    tasks = [(config, index) for index in range(config.circuit.samples)]
    results: List[RunResult] = []
    wins = 0

    energies_path = out / "energies.csv"
    with RowWriter(energies_path, ENERGY_HEADER) as writer:
        for index, outcomes in enumerate(iter_ensemble(benchmark_sample, tasks, get_settings().workers)):
            by_method = {outcome.method: outcome for outcome in outcomes}
            wins += by_method[OptimizationMethod.MEMRISTIVE].best_energy < \
                by_method[OptimizationMethod.RANDOM].best_energy
            for outcome in outcomes:
                result = RunResult.from_outcome(outcome, instance=index)
                results.append(result)
                writer.write([index, result.method, result.N, result.energy, result.evaluations, result.wall_steps])

    paths = [energies_path, out / "summary.csv", out / "results.json"]
    write_rows(paths[1], SUMMARY_HEADER, _summary_rows(results))
    write_run_results(results, paths[2])
    if config.output.export_instances:
        paths.extend(_export_instances(config, out, len(tasks)))
    logger.info(f"memristive below random search on {wins} of {len(tasks)} instances")
    return paths


def _export_instances(config: ExperimentConfig, out: Path, count: int) -> List[Path]:
    paths = []
    for index in range(count):
        qubo = benchmark_qubo(config, index)
        qubo_path, ising_path = out / f"instance_{index}.qubo", out / f"instance_{index}.ising"
        write_qubo(qubo, qubo_path)
        write_ising(qubo_to_ising(qubo), ising_path)
        paths.extend([qubo_path, ising_path])
    return paths


def cmd_kacrice(config: ExperimentConfig, out: Path) -> List[Path]:
    settings = config.kacrice
    fit = fit_diagonal_scaling(settings.circuit_sizes, config.circuit.edge_probability, settings.seeds_per_size,
                               config.seed)
    circuits = [build_circuit(config, index) for index in range(settings.measure_samples)]
    sigma = measure_sigma([circuit.omega for circuit in circuits])
    logger.info(f"fit c={fit.c:.5f}, exponent={fit.exponent:.5f}; measured sigma {sigma:.5f}")

    det_rows = []
    for circuit in circuits:
        n = circuit.omega.size
        identity = projector_det_identity(circuit.omega, n)
        det_rows.append([n, circuit.omega.rank, identity.lhs, identity.rhs, abs(identity.lhs - identity.rhs)])

    params = config.params.to_params()
    loops = int(round(settings.loop_fraction * settings.n))
    estimates = [kac_rice_count(settings.n, loops, value, params, settings.s_volts)
                 for value in [*settings.sigmas, sigma]]

    paths = [out / "fit.csv", out / "fit.json", out / "det_identity.csv", out / "kacrice.csv"]
    write_fit_csv(fit, paths[0])
    write_json({"c": fit.c, "exponent": fit.exponent, "residual": fit.residual, "measured_sigma": sigma}, paths[1])
    write_rows(paths[2], DET_HEADER, det_rows)
    write_kacrice_csv(estimates, paths[3])
    return paths


def cmd_markowitz(config: ExperimentConfig, out: Path) -> List[Path]:
    settings = config.markowitz
    if settings.portfolio is None:
        problem = synthetic_portfolio(config)
    else:
        problem = load_portfolio(settings.portfolio, tradeoff=settings.tradeoff)
    mapping = markowitz_to_dynamics(problem, alpha=settings.alpha, beta=settings.beta)

    oracle = None
    if problem.size <= min(config.optimizer.brute_force_max_n, get_settings().brute_force_limit):
        oracle = brute_force(mapping.qubo())
        logger.info(f"oracle Markowitz value {markowitz_value(problem, oracle.best_state):.6g}")

    tasks = [(config, mapping, index) for index in range(settings.seeds)]
    results: List[RunResult] = []
    comparison_path = out / "comparison.csv"
    with RowWriter(comparison_path, COMPARISON_HEADER) as writer:
        for index, outcomes in enumerate(iter_ensemble(markowitz_sample, tasks, get_settings().workers)):
            if oracle is not None and index == 0:
                outcomes = [*outcomes, oracle]
            for outcome in outcomes:
                matches = "" if oracle is None else int(abs(outcome.best_energy - oracle.best_energy) <= 1e-9)
                writer.write([index, outcome.method.value, outcome.best_energy,
                              markowitz_value(problem, outcome.best_state), outcome.evaluations,
                              outcome.wall_steps, matches])
                results.append(RunResult.from_outcome(outcome, instance=index))

    results_path = out / "results.json"
    write_run_results(results, results_path)
    return [comparison_path, results_path]


def cmd_omega_stats(config: ExperimentConfig, out: Path) -> List[Path]:
    circuit = build_circuit(config)
    omega = circuit.omega
    histogram = offdiagonal_histogram(omega)

    paths = [out / "edges.txt", out / "omega.csv", out / "histogram.csv", out / "stats.json"]
    write_edge_list(circuit.graph, paths[0])
    write_matrix_csv(omega, paths[1])
    write_histogram_csv(histogram, paths[2])
    write_json({
        "V": circuit.graph.vertex_count,
        "N": omega.size,
        "L": circuit.basis.loop_count,
        "mean": histogram.mean,
        "std": histogram.std,
        "tail_fraction": histogram.tail_fraction,
        "total": histogram.total,
        "sigma": measure_sigma([omega]),
        "projector_violations": projector_violations(omega, circuit.basis.loop_count),
    }, paths[3])
    return paths


COMMANDS: Dict[str, Callable[[ExperimentConfig, Path], List[Path]]] = {
    "simulate": cmd_simulate,
    "predict": cmd_predict,
    "benchmark": cmd_benchmark,
    "kacrice": cmd_kacrice,
    "markowitz": cmd_markowitz,
    "omega-stats": cmd_omega_stats,
}

HELP = {
    "simulate": "Integrate one random circuit and write its trace",
    "predict": "Sweep xi and score the asymptotic sign prediction",
    "benchmark": "Compare memristive, annealing and random minima on circuit QUBOs",
    "kacrice": "Fit the projector diagonal scaling and sweep the Kac-Rice estimate",
    "markowitz": "Run the portfolio pipeline on a benchmark or synthetic file",
    "omega-stats": "Write the projector and its off-diagonal histogram",
}


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument('--config', type=Path, help='JSON experiment configuration')
    common.add_argument('--seed', type=int, help='Root 64-bit seed')
    common.add_argument('--out', type=Path, help='Output directory')
    common.add_argument('--xi', type=float, nargs='+', help='Nonlinearity (several values for predict)')
    common.add_argument('--dt', type=float, help='Integration step')
    common.add_argument('--steps', type=int, help='Number of integration steps')
    common.add_argument('--lambda', dest='rate', type=float, help='Annealing rate')
    common.add_argument('--t0', type=float, help='Initial annealing temperature')
    common.add_argument('--budget', type=int, help='Annealing proposals per run')
    common.add_argument('--samples', type=int, help='Number of sampled circuits')
    common.add_argument('--portfolio', type=Path, help='OR-Library portfolio file')
    common.add_argument('--log-level', help='Logging level')

    parser = argparse.ArgumentParser(
        description="Memristive circuit dynamics as a heuristic for binary optimization")
    parser.add_argument('--version', action='version', version=f"%(prog)s {__version__}")
    subparsers = parser.add_subparsers(dest='command', help='Available commands')
    for name in COMMANDS:
        subparsers.add_parser(name, parents=[common], help=HELP[name])
    return parser


def overrides_from_args(args: argparse.Namespace) -> Dict[str, Any]:
    xi = args.xi or []
    steps = args.steps
    return {
        "seed": args.seed,
        "output.directory": str(args.out) if args.out else None,
        "params.xi": xi[0] if xi else None,
        "predict.xi_values": list(xi) if xi else None,
        "integration.dt": args.dt,
        "integration.steps": steps,
        "optimizer.memristive_steps": steps,
        "optimizer.rate": args.rate,
        "optimizer.t0": args.t0,
        "optimizer.budget": args.budget,
        "circuit.samples": args.samples,
        "markowitz.portfolio": str(args.portfolio) if args.portfolio else None,
    }


def exit_code(error: Exception) -> int:
    if isinstance(error, (ConfigError, ValidationError, TopologyError, ScalingFitError)):
        return EXIT_CONFIG
    if isinstance(error, (OSError, PortfolioFormatError)):
        return EXIT_IO
    return EXIT_NUMERICAL


def run(command: str, config: ExperimentConfig) -> List[Path]:
    out = config.output.resolved()
    out.mkdir(parents=True, exist_ok=True)
    paths = COMMANDS[command](config, out)
    provenance = out / "provenance.json"
    write_json({"command": command, "version": __version__, "config": config.model_dump(mode="json")}, provenance)
    return [*paths, provenance]


def main(argv: Optional[List[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)

    if not args.command:
        parser.print_help()
        return EXIT_OK

    try:
        configure_logging(args.log_level)
        config = load_config(args.config, overrides_from_args(args))
        paths = run(args.command, config)
    except (MemristiveError, ValidationError, OSError) as e:
        print(f"❌ {args.command} failed: {e}", file=sys.stderr)
        return exit_code(e)

    print(f"✅ {args.command} wrote {len(paths)} files to {paths[-1].parent}")
    return EXIT_OK


if __name__ == '__main__':
    sys.exit(main())
