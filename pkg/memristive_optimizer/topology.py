"""
Random circuit graphs, fundamental cycle bases and loop-space projectors

A circuit is a connected directed graph whose edges are memristors. Its
fundamental loops (one per chord of a breadth-first spanning tree) give the
cycle matrix A, and the projector onto the cycle space is
Omega = A^t (A A^t)^{-1} A.
"""

import logging
from typing import Dict, List, Optional, Tuple

import networkx as nx
import numpy as np
from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator
from scipy import linalg

from .errors import TopologyError
from .models import ArrayModel, frozen_array

logger = logging.getLogger(__name__)

IDEMPOTENCE_TOLERANCE = 1e-9
SYMMETRY_TOLERANCE = 1e-12
TRACE_TOLERANCE = 1e-6
EIGENVALUE_TOLERANCE = 1e-7


class CircuitGraph(BaseModel):
    """Connected directed graph; edge index = memristor index"""
    model_config = ConfigDict(frozen=True)

    vertex_count: int = Field(gt=0)
    edges: Tuple[Tuple[int, int], ...]
    seed: Optional[int] = None

    @field_validator("edges", mode="before")
    @classmethod
    def _as_pairs(cls, value):
        return tuple((int(tail), int(head)) for tail, head in value)

    @model_validator(mode="after")
    def _check_graph(self) -> "CircuitGraph":
        for index, (tail, head) in enumerate(self.edges):
            if tail == head:
                raise ValueError(f"edge {index} is a self-loop on vertex {tail}")
            if not (0 <= tail < self.vertex_count and 0 <= head < self.vertex_count):
                raise ValueError(f"edge {index} references a vertex outside 0..{self.vertex_count - 1}")
        if not nx.is_connected(self.to_undirected()):
            raise ValueError("circuit graph must be connected")
        return self

    @property
    def edge_count(self) -> int:
        return len(self.edges)

    @property
    def loop_count(self) -> int:
        """L = N - V + 1 for a connected graph"""
        return self.edge_count - self.vertex_count + 1

    def to_undirected(self) -> nx.MultiGraph:
        graph = nx.MultiGraph()
        graph.add_nodes_from(range(self.vertex_count))
        for index, (tail, head) in enumerate(self.edges):
            graph.add_edge(tail, head, key=index)
        return graph

    def incidence_matrix(self) -> np.ndarray:
        """V x N oriented incidence: -1 at the tail, +1 at the head"""
        incidence = np.zeros((self.vertex_count, self.edge_count), dtype=np.int64)
        for index, (tail, head) in enumerate(self.edges):
            incidence[tail, index] = -1
            incidence[head, index] = 1
        return incidence


class CycleBasis(ArrayModel):
    """Fundamental loop matrix A (L x N, entries -1/0/+1)"""
    matrix: np.ndarray
    chords: Tuple[int, ...] = ()

    @field_validator("matrix", mode="before")
    @classmethod
    def _integer_rows(cls, value):
        array = np.asarray(value)
        if array.ndim != 2:
            raise ValueError("cycle matrix must be two-dimensional")
        if not np.all(np.isin(array, (-1, 0, 1))):
            raise ValueError("cycle matrix entries must be -1, 0 or +1")
        return frozen_array(array, dtype=np.int64)

    @property
    def loop_count(self) -> int:
        return int(self.matrix.shape[0])

    @property
    def edge_count(self) -> int:
        return int(self.matrix.shape[1])


class ProjectorMatrix(ArrayModel):
    """Symmetric N x N interaction matrix"""
    entries: np.ndarray
    is_exact_projector: bool = False

    @field_validator("entries", mode="before")
    @classmethod
    def _symmetric(cls, value):
        array = np.asarray(value, dtype=float)
        if array.ndim != 2 or array.shape[0] != array.shape[1]:
            raise ValueError("interaction matrix must be square")
        if not np.all(np.isfinite(array)):
            raise ValueError("interaction matrix must be finite")
        scale = max(1.0, float(np.max(np.abs(array)))) if array.size else 1.0
        if np.max(np.abs(array - array.T), initial=0.0) > SYMMETRY_TOLERANCE * scale:
            raise ValueError("interaction matrix must be symmetric")
        return frozen_array(array)

    @property
    def size(self) -> int:
        return int(self.entries.shape[0])

    @property
    def rank(self) -> int:
        """Trace rounded to an integer; meaningful for exact projectors"""
        return int(round(float(np.trace(self.entries))))


class LoopBasis(ArrayModel):
    """Orthonormalized loop vectors, one per row"""
    rows: np.ndarray

    @field_validator("rows", mode="before")
    @classmethod
    def _matrix(cls, value):
        array = np.asarray(value, dtype=float)
        if array.ndim != 2:
            raise ValueError("loop basis must be two-dimensional")
        return frozen_array(array)

    @property
    def loop_count(self) -> int:
        return int(self.rows.shape[0])

    def projector(self) -> ProjectorMatrix:
        """Omega = A~^t A~"""
        omega = self.rows.T @ self.rows
        return ProjectorMatrix(entries=0.5 * (omega + omega.T), is_exact_projector=True)


def generate_er_circuit(vertex_count: int, edge_probability: float, seed: int) -> CircuitGraph:
    """
    Erdos-Renyi circuit with random edge orientations.

    Every unordered vertex pair becomes an edge with probability
    ``edge_probability``; a disconnected sample is reduced to its largest
    component and relabelled in increasing vertex order.
    """
    if vertex_count < 3:
        raise TopologyError("an ER circuit needs at least 3 vertices")
    if not 0.0 < edge_probability <= 1.0:
        raise TopologyError(f"edge probability {edge_probability} outside (0, 1]")

    rng = np.random.default_rng(seed)
    tails, heads = np.triu_indices(vertex_count, k=1)
    keep = rng.random(tails.size) < edge_probability
    flip = rng.random(tails.size) < 0.5
    tails, heads, flip = tails[keep], heads[keep], flip[keep]
    edges = [(int(h), int(t)) if f else (int(t), int(h)) for t, h, f in zip(tails, heads, flip)]

    graph = nx.Graph()
    graph.add_nodes_from(range(vertex_count))
    graph.add_edges_from(edges)
    component = max(nx.connected_components(graph), key=lambda nodes: (len(nodes), -min(nodes)))
    if len(component) < vertex_count:
        logger.info(f"seed {seed}: keeping largest component with {len(component)} of {vertex_count} vertices")

    relabel = {vertex: index for index, vertex in enumerate(sorted(component))}
    kept = [(relabel[tail], relabel[head]) for tail, head in edges if tail in relabel]

    if len(component) < 3:
        raise TopologyError(f"seed {seed}: surviving component has {len(component)} vertices")
    if len(kept) - len(component) + 1 < 1:
        raise TopologyError(f"seed {seed}: surviving component has zero loops")

    return CircuitGraph(vertex_count=len(component), edges=kept, seed=seed)


def _spanning_tree(graph: CircuitGraph) -> Tuple[Dict[int, int], Dict[int, int], Dict[int, int]]:
    """BFS tree from vertex 0: parent, depth and tree-edge index per vertex"""
    simple = nx.Graph()
    simple.add_nodes_from(range(graph.vertex_count))
    lowest_edge: Dict[Tuple[int, int], int] = {}
    for index, (tail, head) in enumerate(graph.edges):
        pair = (min(tail, head), max(tail, head))
        lowest_edge.setdefault(pair, index)
        simple.add_edge(tail, head)

    parent: Dict[int, int] = {}
    depth = {0: 0}
    tree_edge: Dict[int, int] = {}
    for vertex, predecessor in nx.bfs_predecessors(simple, 0, sort_neighbors=sorted):
        parent[vertex] = predecessor
        depth[vertex] = depth[predecessor] + 1
        tree_edge[vertex] = lowest_edge[(min(vertex, predecessor), max(vertex, predecessor))]
    return parent, depth, tree_edge


def fundamental_cycle_basis(graph: CircuitGraph) -> CycleBasis:
    """
    One loop per chord of the BFS spanning tree rooted at vertex 0.

    Loops are oriented along their chord (chord entry +1) and closed through
    the tree path from the chord's head back to its tail. Chords appear in
    edge-index order.
    """
    if graph.loop_count < 1:
        raise TopologyError("graph has zero fundamental loops")

    parent, depth, tree_edge = _spanning_tree(graph)
    tree_edges = set(tree_edge.values())
    chords = [index for index in range(graph.edge_count) if index not in tree_edges]

    rows = np.zeros((len(chords), graph.edge_count), dtype=np.int64)
    for row, chord in zip(rows, chords):
        tail, head = graph.edges[chord]
        row[chord] = 1

        # walk head -> tail through the tree
        up: List[int] = []
        down: List[int] = []
        a, b = head, tail
        while a != b:
            if depth[a] >= depth[b]:
                up.append(a)
                a = parent[a]
            else:
                down.append(b)
                b = parent[b]
        for vertex in up:
            index = tree_edge[vertex]
            row[index] += 1 if graph.edges[index] == (vertex, parent[vertex]) else -1
        for vertex in down:
            index = tree_edge[vertex]
            row[index] += 1 if graph.edges[index] == (parent[vertex], vertex) else -1

    logger.debug(f"cycle basis: V={graph.vertex_count} N={graph.edge_count} L={len(chords)}")
    return CycleBasis(matrix=rows, chords=tuple(chords))


def _require_full_rank(matrix: np.ndarray) -> None:
    """Raise naming the first row that depends on the rows above it"""
    loop_count = matrix.shape[0]
    if loop_count == 0:
        raise TopologyError("cycle matrix has zero fundamental loops")
    if np.linalg.matrix_rank(matrix) == loop_count:
        return
    for row in range(1, loop_count + 1):
        if np.linalg.matrix_rank(matrix[:row]) < row:
            raise TopologyError(f"cycle matrix is rank deficient: row {row - 1} depends on earlier rows",
                                dependent_row=row - 1)


def projector_violations(omega: ProjectorMatrix, rank: int, eigenvalues: bool = False) -> List[str]:
    """List the exact-projector invariants that ``omega`` breaks"""
    entries = omega.entries
    problems = []
    idempotence = np.max(np.abs(entries @ entries - entries), initial=0.0)
    if idempotence > IDEMPOTENCE_TOLERANCE:
        problems.append(f"|Omega^2 - Omega|_max = {idempotence:.3e}")
    asymmetry = np.max(np.abs(entries - entries.T), initial=0.0)
    if asymmetry > SYMMETRY_TOLERANCE:
        problems.append(f"|Omega - Omega^t|_max = {asymmetry:.3e}")
    trace_gap = abs(float(np.trace(entries)) - rank)
    if trace_gap > TRACE_TOLERANCE:
        problems.append(f"|trace - L| = {trace_gap:.3e}")
    if eigenvalues:
        spectrum = linalg.eigvalsh(entries)
        distance = np.minimum(np.abs(spectrum), np.abs(spectrum - 1.0))
        if np.max(distance, initial=0.0) > EIGENVALUE_TOLERANCE:
            problems.append(f"eigenvalue {spectrum[np.argmax(distance)]:.3e} away from 0 and 1")
    return problems


def projector_from_cycles(basis: CycleBasis) -> ProjectorMatrix:
    """Omega = A^t (A A^t)^{-1} A through a Cholesky solve"""
    matrix = basis.matrix.astype(float)
    _require_full_rank(matrix)

    gram = matrix @ matrix.T
    factor = linalg.cho_factor(gram)
    omega = matrix.T @ linalg.cho_solve(factor, matrix)
    omega = 0.5 * (omega + omega.T)

    projector = ProjectorMatrix(entries=omega, is_exact_projector=True)
    problems = projector_violations(projector, basis.loop_count)
    if problems:
        raise TopologyError("projector check failed: " + "; ".join(problems))
    return projector


def orthonormal_loop_basis(basis: CycleBasis) -> LoopBasis:
    """QR orthonormalization of the loop rows, each oriented along its loop"""
    matrix = basis.matrix.astype(float)
    _require_full_rank(matrix)

    q, r = linalg.qr(matrix.T, mode="economic")
    signs = np.where(np.diag(r) < 0.0, -1.0, 1.0)
    return LoopBasis(rows=(q * signs).T)


def circuit_projector(graph: CircuitGraph) -> ProjectorMatrix:
    """Shortcut: graph -> cycle basis -> projector"""
    return projector_from_cycles(fundamental_cycle_basis(graph))
