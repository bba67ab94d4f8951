"""
Text exchange formats for circuits, matrices, traces and experiment results

Every float is written with 17 significant digits so files are exact and
byte-identical for identical inputs.
"""

import csv
import json
import logging
from pathlib import Path
from typing import Any, Dict, Iterable, List, Optional, Sequence, Tuple, Union

import numpy as np
from pydantic import BaseModel

from .asymptotics import AccuracyRow
from .complexity import KacRiceEstimate, OffDiagonalHistogram, OmegaScalingFit
from .dynamics import SimulationTrace
from .errors import DimensionMismatchError, MemristiveError
from .lyapunov import IsingInstance, QuboInstance
from .optimize import OptimizationOutcome
from .topology import CircuitGraph

logger = logging.getLogger(__name__)

PathLike = Union[str, Path]

FIT_HEADER = ["N", "mean_one_minus_omega_ii", "stderr"]
KAC_RICE_HEADER = ["sigma", "N", "L", "log_count", "regime"]
ACCURACY_HEADER = ["xi", "mean_accuracy", "std_accuracy", "n_samples"]
HISTOGRAM_HEADER = ["bin_left", "bin_right", "count"]


def fmt(value: float) -> str:
    return format(float(value), ".17g")


class RowWriter:
    """CSV writer that flushes every row so interrupted runs keep finished samples"""

    def __init__(self, path: PathLike, header: Sequence[str]):
        self.path = Path(path)
        self.header = list(header)
        self._file = None
        self._writer = None

    def __enter__(self) -> "RowWriter":
        self.path.parent.mkdir(parents=True, exist_ok=True)
        self._file = open(self.path, "w", newline="")
        self._writer = csv.writer(self._file, lineterminator="\n")
        self._writer.writerow(self.header)
        return self

    def write(self, row: Sequence[Any]) -> None:
        if len(row) != len(self.header):
            raise DimensionMismatchError(f"row of {len(row)} fields for header of {len(self.header)}")
        self._writer.writerow([fmt(value) if isinstance(value, (float, np.floating)) else value for value in row])
        self._file.flush()

    def __exit__(self, *exc) -> None:
        self._file.close()


def write_rows(path: PathLike, header: Sequence[str], rows: Iterable[Sequence[Any]]) -> None:
    with RowWriter(path, header) as writer:
        for row in rows:
            writer.write(row)


def write_edge_list(graph: CircuitGraph, path: PathLike) -> None:
    """Line 1 ``V N`` then one ``tail head`` line per memristor"""
    with open(path, "w") as f:
        f.write(f"{graph.vertex_count} {graph.edge_count}\n")
        for tail, head in graph.edges:
            f.write(f"{tail} {head}\n")


def read_edge_list(path: PathLike, seed: Optional[int] = None) -> CircuitGraph:
    with open(path, "r") as f:
        rows = [line.split() for line in f if line.strip()]
    try:
        vertex_count, edge_count = (int(value) for value in rows[0])
        edges = [(int(tail), int(head)) for tail, head in rows[1:]]
    except (IndexError, ValueError) as e:
        raise MemristiveError(f"malformed edge list {path}: {e}")
    if len(edges) != edge_count:
        raise MemristiveError(f"edge list {path} declares {edge_count} edges but holds {len(edges)}")
    return CircuitGraph(vertex_count=vertex_count, edges=edges, seed=seed)


def write_matrix_csv(matrix, path: PathLike) -> None:
    """N rows of N comma-separated values"""
    np.savetxt(path, np.asarray(getattr(matrix, "entries", matrix), dtype=float), delimiter=",", fmt="%.17g")


def read_matrix_csv(path: PathLike) -> np.ndarray:
    return np.loadtxt(path, delimiter=",", ndmin=2)


def write_trace_csv(trace: SimulationTrace, path: PathLike, thin: int = 1) -> None:
    """``t,w_0..w_{N-1},L,L_a,clamped`` for every ``thin``-th recorded state"""
    if thin < 1:
        raise ValueError("thin must be at least 1")
    n = trace.states.shape[1]
    header = ["t"] + [f"w_{i}" for i in range(n)] + ["L", "L_a", "clamped"]
    with RowWriter(path, header) as writer:
        for index in range(0, trace.states.shape[0], thin):
            writer.write([trace.times[index], *trace.states[index], trace.lyapunov[index],
                          trace.lyapunov_asymptotic[index], int(trace.clamped_counts[index])])


def write_lyapunov_csv(trace: SimulationTrace, path: PathLike) -> None:
    write_rows(path, ["t", "L", "L_a", "L_minus_L_a"],
               ([t, value, asymptotic, value - asymptotic]
                for t, value, asymptotic in zip(trace.times, trace.lyapunov, trace.lyapunov_asymptotic)))


def _write_triplets(path: PathLike, diagonal: np.ndarray, coupling: np.ndarray) -> None:
    with open(path, "w") as f:
        f.write(f"{diagonal.size}\n")
        for i in np.flatnonzero(diagonal):
            f.write(f"{i} {i} {fmt(diagonal[i])}\n")
        rows, cols = np.nonzero(np.triu(coupling, k=1))
        for i, j in zip(rows, cols):
            f.write(f"{i} {j} {fmt(2.0 * coupling[i, j])}\n")


def _read_triplets(path: PathLike) -> Tuple[np.ndarray, np.ndarray]:
    with open(path, "r") as f:
        rows = [line.split() for line in f if line.strip()]
    if not rows:
        raise MemristiveError(f"{path}: empty triplet file")
    n = int(rows[0][0])
    diagonal = np.zeros(n)
    coupling = np.zeros((n, n))
    for number, fields in enumerate(rows[1:], start=2):
        if len(fields) != 3:
            raise MemristiveError(f"{path}: line {number} is not an 'i j value' triplet")
        i, j, value = int(fields[0]), int(fields[1]), float(fields[2])
        if i == j:
            diagonal[i] += value
        else:
            coupling[i, j] += value / 2.0
            coupling[j, i] += value / 2.0
    return diagonal, coupling


def write_qubo(qubo: QuboInstance, path: PathLike) -> None:
    """
    Sparse triplets: ``N`` then ``i i c_i`` for nonzero fields and
    ``i j 2 J_ij`` (i < j) for nonzero couplings. The offset is not stored.
    """
    _write_triplets(path, qubo.linear, qubo.quadratic)


def read_qubo(path: PathLike) -> QuboInstance:
    linear, quadratic = _read_triplets(path)
    return QuboInstance(linear=linear, quadratic=quadratic)


def write_ising(ising: IsingInstance, path: PathLike) -> None:
    """Same triplet layout as ``write_qubo`` with h_tilde on the diagonal"""
    _write_triplets(path, ising.h_tilde, ising.coupling)


def read_ising(path: PathLike) -> IsingInstance:
    h_tilde, coupling = _read_triplets(path)
    return IsingInstance(h_tilde=h_tilde, coupling=coupling)


def write_accuracy_csv(rows: Iterable[AccuracyRow], path: PathLike) -> None:
    write_rows(path, ACCURACY_HEADER,
               ([row.xi, row.mean_accuracy, row.std_accuracy, row.n_samples] for row in rows))


def write_fit_csv(fit: OmegaScalingFit, path: PathLike) -> None:
    errors = fit.stderr or [0.0] * len(fit.samples)
    write_rows(path, FIT_HEADER, ([size, deficit, error] for (size, deficit), error in zip(fit.samples, errors)))


def write_kacrice_csv(estimates: Iterable[KacRiceEstimate], path: PathLike) -> None:
    write_rows(path, KAC_RICE_HEADER,
               ([e.sigma, e.n, e.l, e.log_count, e.regime.value] for e in estimates))


def write_histogram_csv(histogram: OffDiagonalHistogram, path: PathLike) -> None:
    write_rows(path, HISTOGRAM_HEADER,
               ([left, right, int(count)]
                for left, right, count in zip(histogram.edges[:-1], histogram.edges[1:], histogram.counts)))


class RunResult(BaseModel):
    """One optimizer run as written to results JSON"""
    method: str
    seed: Optional[int] = None
    N: int
    energy: float
    state: str
    wall_steps: int
    evaluations: int
    stage_energies: Optional[List[float]] = None
    instance: Optional[int] = None

    @classmethod
    def from_outcome(cls, outcome: OptimizationOutcome, instance: Optional[int] = None) -> "RunResult":
        return cls(
            method=outcome.method.value,
            seed=outcome.seed,
            N=int(outcome.best_state.size),
            energy=outcome.best_energy,
            state=outcome.bitstring,
            wall_steps=outcome.wall_steps,
            evaluations=outcome.evaluations,
            stage_energies=outcome.stage_energies or None,
            instance=instance,
        )


def write_json(payload: Any, path: PathLike) -> None:
    """Sorted-key JSON with a trailing newline"""
    with open(path, "w") as f:
        json.dump(payload, f, indent=2, sort_keys=True)
        f.write("\n")


def write_run_results(results: Sequence[RunResult], path: PathLike) -> None:
    write_json([result.model_dump(mode="json") for result in results], path)


def schema_path() -> Path:
    return Path(__file__).parent / "schemas" / "run_result.schema.json"


def run_result_schema() -> Dict[str, Any]:
    """JSON schema of a results file, a list of RunResult objects"""
    return {"type": "array", "items": RunResult.model_json_schema()}
