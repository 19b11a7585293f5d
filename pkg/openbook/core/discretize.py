"""
Discretization Engine - vertex-centred finite volumes on every page, junction
condition rows at binding nodes, trace elimination and global assembly of the
generalized eigenproblem K x = lambda M x.

Unknown numbering: page unknowns first (interior nodes and kept poles, page by
page in book order), trace slots after them (bindings in book order, then outer
Dirichlet/Neumann edges). Trace rows of K hold the condition rows
A u_B + C D_h u = 0 with D_h u = (3 u_B - 4 u_1 + u_2) / (2h).
"""

import logging
import math
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path
from typing import Dict, List, Optional, Tuple, Union

import numpy as np
from scipy import sparse
from scipy.sparse import linalg as sparse_linalg

from .complex import BoundaryTag, OpenBookComplex, validate_complex
from .conditions import Sampling
from .errors import AssemblyError, ChartError, DimensionMismatchError, TraceBlockError
from .pages import POLE_RTOL, Edge, Lateral, PageChart, angular_symbol, pole_edges

logger = logging.getLogger(__name__)

MIN_NODES = 8
TRACE_COND_LIMIT = 1e12
TRACE_COND_WARN = 1e8
REAL_CAST_RTOL = 1e-14

_PENDING = -2


class EndKind(str, Enum):
    TRACE = "trace"
    POLE = "pole"
    DIRICHLET = "dirichlet"
    NEUMANN = "neumann"


@dataclass(frozen=True, eq=False)
class AngularGrid:
    """Angular nodes of a page: coordinates, cell weights and the -d^2/dt^2 stiffness."""

    t: np.ndarray
    weights: np.ndarray
    stiffness: sparse.csr_matrix
    periodic: bool = False

    @property
    def size(self) -> int:
        return self.t.size

    def align(self, node: int, orientation: int) -> int:
        """Page-local index of binding node `node` under the orientation sign."""
        if orientation == 1:
            return node
        if self.periodic:
            return (-node) % self.size
        return self.size - 1 - node

    @classmethod
    def single(cls, symbol: float = 0.0) -> "AngularGrid":
        return cls(np.zeros(1), np.ones(1), sparse.csr_matrix(np.array([[float(symbol)]])))

    @classmethod
    def for_chart(cls, chart: PageChart, n_t: int) -> "AngularGrid":
        if not chart.has_angle:
            return cls.single()
        if chart.periodic:
            dt = 2.0 * math.pi / n_t
            idx = np.arange(n_t)
            rows = np.concatenate([idx, idx, idx])
            cols = np.concatenate([idx, (idx + 1) % n_t, (idx - 1) % n_t])
            vals = np.concatenate([np.full(n_t, 2.0 / dt), np.full(2 * n_t, -1.0 / dt)])
            T = sparse.coo_matrix((vals, (rows, cols)), shape=(n_t, n_t)).tocsr()
            return cls(idx * dt, np.full(n_t, dt), T, periodic=True)

        dt = chart.width / n_t
        if chart.lateral == Lateral.DIRICHLET:
            n = n_t - 1
            t = dt * np.arange(1, n_t)
            main = np.full(n, 2.0 / dt)
            weights = np.full(n, dt)
        else:
            n = n_t + 1
            t = dt * np.arange(n_t + 1)
            main = np.full(n, 2.0 / dt)
            main[0] = main[-1] = 1.0 / dt
            weights = np.full(n, dt)
            weights[0] = weights[-1] = dt / 2.0
        off = np.full(n - 1, -1.0 / dt)
        T = sparse.diags([off, main, off], [-1, 0, 1], shape=(n, n), format="csr")
        return cls(t, weights, T)


def discrete_angular_symbol(chart: PageChart, m: int, n_t: int) -> float:
    """Eigenvalue of the n_t-point angular stiffness on mode m."""
    if not chart.has_angle:
        return 0.0
    m = abs(int(m))
    if chart.periodic:
        dt = 2.0 * math.pi / n_t
        return (4.0 / dt ** 2) * math.sin(m * dt / 2.0) ** 2
    angular_symbol(chart, m)
    dt = chart.width / n_t
    return (4.0 / dt ** 2) * math.sin(m * math.pi * dt / (2.0 * chart.width)) ** 2


@dataclass(frozen=True, eq=False)
class PageLine:
    """Radial geometry: vertex nodes, fluxes f(s_{i+1/2})/h, dual masses, potential weights."""

    s: np.ndarray
    h: float
    flux: np.ndarray
    mass: np.ndarray
    potential: np.ndarray

    @property
    def segments(self) -> int:
        return self.s.size - 1

    def stiffness(self) -> sparse.csr_matrix:
        main = np.concatenate([self.flux, [0.0]]) + np.concatenate([[0.0], self.flux])
        return sparse.diags([-self.flux, main, -self.flux], [-1, 0, 1], format="csr")


def page_line(chart: PageChart, segments: int) -> PageLine:
    s0, s1 = chart.bounds
    h = (s1 - s0) / segments
    s = s0 + h * np.arange(segments + 1)
    s[-1] = s1
    f_mid, _ = chart.profile(s[:-1] + h / 2.0)
    lower = np.maximum(s - h / 2.0, s0)
    upper = np.minimum(s + h / 2.0, s1)
    mass = np.asarray(chart.measure(lower, upper), dtype=float)
    f_nodes = np.asarray(chart.profile(s)[0], dtype=float)
    regular = np.abs(f_nodes) > POLE_RTOL * np.max(np.abs(f_nodes))
    potential = np.zeros_like(s)
    potential[regular] = (upper - lower)[regular] / f_nodes[regular]
    return PageLine(s, h, np.asarray(f_mid, dtype=float) / h, mass, potential)


@dataclass(eq=False)
class PageGrid:
    chart: PageChart
    line: PageLine
    angular: AngularGrid
    ends: Dict[Edge, EndKind]
    drop_poles: bool = False
    active: bool = True
    index: np.ndarray = field(default=None)

    @property
    def page_id(self) -> str:
        return self.chart.id

    @property
    def shape(self) -> Tuple[int, int]:
        return self.line.s.size, self.angular.size


@dataclass(frozen=True, eq=False)
class ConditionBlock:
    """Condition rows of one binding node; traces, near1 and near2 are global indices per slot."""

    binding_id: str
    node: int
    traces: np.ndarray
    near1: np.ndarray
    near2: np.ndarray
    inv2h: np.ndarray
    A: np.ndarray
    C: np.ndarray

    @property
    def k(self) -> int:
        return self.traces.size

    def trace_matrix(self) -> np.ndarray:
        return self.A + self.C * (3.0 * self.inv2h)[np.newaxis, :]


@dataclass(frozen=True, eq=False)
class DiscreteSystem:
    stiffness: sparse.csr_matrix
    mass_matrix: sparse.csr_matrix
    n_interior: int
    blocks: Tuple[ConditionBlock, ...]
    pages: Dict[str, PageGrid]
    mode: Optional[int] = None
    angular_nodes: Optional[int] = None

    @property
    def n(self) -> int:
        return self.stiffness.shape[0]

    @property
    def n_trace(self) -> int:
        return self.n - self.n_interior

    @property
    def full2d(self) -> bool:
        return self.mode is None

    @property
    def resolution(self) -> Dict[str, float]:
        return {page_id: grid.line.h for page_id, grid in self.pages.items()}

    def page_values(self, vector: np.ndarray, page_id: str) -> np.ndarray:
        """Values of a full-length vector on the page's (s, t) grid; pinned nodes read 0."""
        grid = self.pages[page_id]
        values = np.zeros(grid.shape, dtype=complex)
        mask = grid.index >= 0
        values[mask] = np.asarray(vector)[grid.index[mask]]
        return values

    def dump(self, path: Union[str, Path]) -> Path:
        """Write K and M as `row, col, re, im` triplets."""
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        with path.open("w", encoding="utf-8") as handle:
            for name, matrix in (("K", self.stiffness), ("M", self.mass_matrix)):
                coo = matrix.tocoo()
                handle.write(f"# {name} {matrix.shape[0]} {matrix.shape[1]} {coo.nnz}\n")
                for row, col, value in zip(coo.row, coo.col, coo.data):
                    value = complex(value)
                    handle.write(f"{row}, {col}, {value.real:.17g}, {value.imag:.17g}\n")
        logger.info("wrote matrices (n=%d) to %s", self.n, path)
        return path


@dataclass(frozen=True, eq=False)
class ReducedSystem:
    K: sparse.csr_matrix
    M: sparse.csr_matrix
    E: Optional[sparse.csr_matrix] = None
    system: Optional[DiscreteSystem] = None
    symmetry_defect: float = field(init=False)

    def __post_init__(self):
        object.__setattr__(self, "symmetry_defect", symmetry_defect_of(self.K, self.M))

    @classmethod
    def from_matrices(cls, K, M) -> "ReducedSystem":
        return cls(sparse.csr_matrix(K), sparse.csr_matrix(M))

    @property
    def dimension(self) -> int:
        return self.K.shape[0]

    @property
    def mode(self) -> Optional[int]:
        return self.system.mode if self.system is not None else None

    def lift(self, x: np.ndarray) -> np.ndarray:
        """Full-length vector with traces reconstructed from the interior values."""
        if self.E is None:
            return np.asarray(x)
        return np.concatenate([x, self.E @ x])


def symmetry_defect_of(K, M) -> float:
    scale = sparse.diags(1.0 / np.sqrt(np.abs(M.diagonal())))
    S = scale @ K @ scale
    denominator = sparse_linalg.norm(S)
    if denominator == 0.0:
        return 0.0
    return float(sparse_linalg.norm(S - S.conj().T) / denominator)


def symmetry_defect(system: ReducedSystem) -> float:
    """Relative Frobenius asymmetry of M^{-1/2} K_red M^{-1/2}."""
    return system.symmetry_defect


def _require_valid(book: OpenBookComplex) -> None:
    report = validate_complex(book)
    if not report.ok:
        raise AssemblyError("book is not well-formed: " + "; ".join(report.messages()))


def _require_nodes(count: int, what: str) -> None:
    if count < MIN_NODES:
        raise AssemblyError(f"{what} must be at least {MIN_NODES}, got {count}")


def _end_kinds(book: OpenBookComplex, chart: PageChart) -> Dict[Edge, EndKind]:
    poles = pole_edges(chart)
    ends = {}
    for edge in (Edge.START, Edge.END):
        tag = book.outer_tag(chart.id, edge)
        if book.attachment(chart.id, edge) is not None:
            ends[edge] = EndKind.TRACE
        elif edge in poles:
            ends[edge] = EndKind.POLE
        elif tag in (BoundaryTag.DIRICHLET, BoundaryTag.NEUMANN):
            ends[edge] = EndKind(tag.value)
        else:
            raise AssemblyError(f"edge {edge.value} of page {chart.id} has no boundary treatment")
    return ends


def _mode_sign(chart: PageChart, m: int, orientation: int) -> float:
    """Sign picked up by a rectangle's sine/cosine factor under t -> W - t."""
    if orientation == 1 or not chart.has_angle or chart.periodic:
        return 1.0
    m = abs(int(m))
    if chart.lateral == Lateral.DIRICHLET:
        return -1.0 if m % 2 == 0 else 1.0
    return -1.0 if m % 2 == 1 else 1.0


def _segments_for(chart: PageChart, default: int, resolution: Optional[Dict[str, int]]) -> int:
    segments = int((resolution or {}).get(chart.id, default))
    _require_nodes(segments, f"nodes for page {chart.id}")
    return segments


def _allocate_page_unknowns(grids: List[PageGrid]) -> int:
    counter = 0
    for grid in grids:
        n_nodes, n_ang = grid.shape
        grid.index = np.full((n_nodes, n_ang), -1, dtype=np.int64)
        if not grid.active:
            continue
        interior = (n_nodes - 2) * n_ang
        grid.index[1:-1, :] = counter + np.arange(interior).reshape(n_nodes - 2, n_ang)
        counter += interior
        for edge, row in ((Edge.START, 0), (Edge.END, n_nodes - 1)):
            kind = grid.ends[edge]
            if kind == EndKind.POLE:
                if not grid.drop_poles:
                    grid.index[row, :] = counter
                    counter += 1
            else:
                grid.index[row, :] = _PENDING
    return counter


def _edge_rows(grid: PageGrid, edge: Edge) -> Tuple[int, int, int]:
    last = grid.line.segments
    if edge == Edge.START:
        return 0, 1, 2
    return last, last - 1, last - 2


def _binding_blocks(
    book: OpenBookComplex,
    grids: Dict[str, PageGrid],
    next_trace: int,
    mode: Optional[int],
) -> Tuple[List[ConditionBlock], int]:
    blocks: List[ConditionBlock] = []
    for binding in book.bindings:
        records = book.adjacencies_of(binding.id)
        active = [grids[a.page_id].active for a in records]
        if not any(active):
            continue
        if not all(active):
            raise AssemblyError(f"binding {binding.id} joins pages with and without mode {mode}")

        sizes = sorted({grids[a.page_id].angular.size for a in records})
        if len(sizes) != 1:
            raise DimensionMismatchError(f"angular node-count mismatch at binding {binding.id}: {sizes}")
        n_nodes = sizes[0]
        pair = book.condition(binding.id)
        per_node = pair.sampling == Sampling.PER_NODE
        if per_node and pair.n_samples != n_nodes:
            raise DimensionMismatchError(
                f"binding {binding.id}: per-node condition has {pair.n_samples} samples, grid has {n_nodes} binding nodes"
            )
        if mode is not None:
            signs = np.array([_mode_sign(grids[a.page_id].chart, mode, a.orientation) for a in records])
        else:
            signs = np.ones(len(records))

        for node in range(n_nodes):
            A, C = pair.at(node if per_node else 0)
            traces, near1, near2, inv2h = [], [], [], []
            for adjacency in records:
                grid = grids[adjacency.page_id]
                col = grid.angular.align(node, adjacency.orientation)
                row, row1, row2 = _edge_rows(grid, adjacency.edge)
                grid.index[row, col] = next_trace
                traces.append(next_trace)
                near1.append(grid.index[row1, col])
                near2.append(grid.index[row2, col])
                inv2h.append(0.5 / grid.line.h)
                next_trace += 1
            blocks.append(
                ConditionBlock(
                    binding.id,
                    node,
                    np.array(traces),
                    np.array(near1),
                    np.array(near2),
                    np.array(inv2h),
                    A * signs[np.newaxis, :],
                    C * signs[np.newaxis, :],
                )
            )
    return blocks, next_trace


def _outer_blocks(grids: List[PageGrid], next_trace: int) -> Tuple[List[ConditionBlock], int]:
    blocks: List[ConditionBlock] = []
    for grid in grids:
        if not grid.active:
            continue
        for edge in (Edge.START, Edge.END):
            kind = grid.ends[edge]
            if kind not in (EndKind.DIRICHLET, EndKind.NEUMANN):
                continue
            A = np.array([[1.0 if kind == EndKind.DIRICHLET else 0.0]])
            C = np.array([[0.0 if kind == EndKind.DIRICHLET else 1.0]])
            row, row1, row2 = _edge_rows(grid, edge)
            for col in range(grid.angular.size):
                grid.index[row, col] = next_trace
                blocks.append(
                    ConditionBlock(
                        f"{grid.page_id}:{edge.value}",
                        col,
                        np.array([next_trace]),
                        np.array([grid.index[row1, col]]),
                        np.array([grid.index[row2, col]]),
                        np.array([0.5 / grid.line.h]),
                        A,
                        C,
                    )
                )
                next_trace += 1
    return blocks, next_trace


def _assemble(
    book: OpenBookComplex,
    grids: List[PageGrid],
    mode: Optional[int],
    angular_nodes: Optional[int],
) -> DiscreteSystem:
    by_id = {grid.page_id: grid for grid in grids}
    n_interior = _allocate_page_unknowns(grids)
    binding_blocks, next_trace = _binding_blocks(book, by_id, n_interior, mode)
    outer_blocks, n = _outer_blocks(grids, next_trace)
    blocks = tuple(binding_blocks + outer_blocks)
    for grid in grids:
        if np.any(grid.index == _PENDING):
            raise AssemblyError(f"page {grid.page_id} has edge nodes without a condition")

    rows, cols, vals = [], [], []
    mass_rows, mass_vals = [], []
    for grid in grids:
        if not grid.active:
            continue
        line, angular = grid.line, grid.angular
        page_K = (
            sparse.kron(line.stiffness(), sparse.diags(angular.weights))
            + sparse.kron(sparse.diags(line.potential), angular.stiffness)
        ).tocoo()
        glob = grid.index.ravel()
        row_glob = glob[page_K.row]
        col_glob = glob[page_K.col]
        keep = (row_glob >= 0) & (row_glob < n_interior) & (col_glob >= 0)
        rows.append(row_glob[keep])
        cols.append(col_glob[keep])
        vals.append(page_K.data[keep].astype(complex))

        page_mass = np.kron(line.mass, angular.weights)
        keep_mass = (glob >= 0) & (glob < n_interior)
        mass_rows.append(glob[keep_mass])
        mass_vals.append(page_mass[keep_mass])

    for block in blocks:
        T = block.trace_matrix()
        k = block.k
        r_idx = np.repeat(block.traces, k)
        rows.extend([r_idx, r_idx, r_idx])
        cols.extend([np.tile(block.traces, k), np.tile(block.near1, k), np.tile(block.near2, k)])
        scaled = block.C * block.inv2h[np.newaxis, :]
        vals.extend([T.ravel().astype(complex), (-4.0 * scaled).ravel().astype(complex), scaled.ravel().astype(complex)])

    no_index = np.zeros(0, dtype=np.int64)
    data = np.concatenate(vals) if vals else np.zeros(0, dtype=complex)
    if not np.any(data.imag):
        data = data.real
    K = sparse.coo_matrix(
        (data, (np.concatenate(rows) if rows else no_index, np.concatenate(cols) if cols else no_index)),
        shape=(n, n),
    ).tocsr()
    mass_index = np.concatenate(mass_rows) if mass_rows else np.zeros(0, dtype=np.int64)
    mass_data = np.concatenate(mass_vals) if mass_vals else np.zeros(0)
    M = sparse.coo_matrix((mass_data, (mass_index, mass_index)), shape=(n, n)).tocsr()

    diagonal = M.diagonal()
    if n_interior and np.min(diagonal[:n_interior]) <= 0.0:
        raise AssemblyError("non-positive cell volume in the mass matrix")

    logger.info(
        "assembled %s system: %d unknowns, %d trace slots, %d condition blocks",
        "full 2-D" if mode is None else f"mode {mode}",
        n_interior,
        n - n_interior,
        len(blocks),
    )
    return DiscreteSystem(K, M, n_interior, blocks, by_id, mode, angular_nodes)


def build_mode_system(
    book: OpenBookComplex,
    m: int,
    nodes_per_page: int,
    angular_nodes: Optional[int] = None,
    resolution: Optional[Dict[str, int]] = None,
) -> DiscreteSystem:
    """1-D system of angular mode m; `angular_nodes` swaps m^2 for the discrete angular symbol."""
    _require_valid(book)
    _require_nodes(nodes_per_page, "nodes per page")
    for binding_id, pair in book.conditions.items():
        if pair.sampling == Sampling.PER_NODE:
            raise AssemblyError(f"binding {binding_id} has per-node conditions; use the full 2-D system")

    grids = []
    for chart in book.pages:
        segments = _segments_for(chart, nodes_per_page, resolution)
        active = True
        try:
            if angular_nodes is None:
                symbol = angular_symbol(chart, m)
            else:
                symbol = discrete_angular_symbol(chart, m, angular_nodes)
        except ChartError:
            symbol, active = 0.0, False
        grids.append(
            PageGrid(
                chart=chart,
                line=page_line(chart, segments),
                angular=AngularGrid.single(symbol),
                ends=_end_kinds(book, chart),
                drop_poles=symbol != 0.0,
                active=active,
            )
        )
    return _assemble(book, grids, int(m), angular_nodes)


def build_full_system(
    book: OpenBookComplex,
    grid: Tuple[int, int],
    resolution: Optional[Dict[str, int]] = None,
) -> DiscreteSystem:
    """Tensor-grid system on every page; ring nodes at a pole collapse to one unknown."""
    _require_valid(book)
    n_s, n_t = (int(v) for v in grid)
    _require_nodes(n_s, "radial grid size")
    if book.dimension == 2:
        _require_nodes(n_t, "angular grid size")

    grids = [
        PageGrid(
            chart=chart,
            line=page_line(chart, _segments_for(chart, n_s, resolution)),
            angular=AngularGrid.for_chart(chart, n_t),
            ends=_end_kinds(book, chart),
        )
        for chart in book.pages
    ]
    return _assemble(book, grids, None, n_t)


def eliminate_traces(system: DiscreteSystem) -> ReducedSystem:
    """Solve every condition block for its traces and substitute into the page rows."""
    n_interior = system.n_interior
    e_rows, e_cols, e_vals = [], [], []
    for block in system.blocks:
        T = block.trace_matrix()
        condition = np.linalg.cond(T)
        if not np.isfinite(condition) or condition > TRACE_COND_LIMIT:
            raise TraceBlockError(block.binding_id, block.node, float(condition), 0.5 / float(np.max(block.inv2h)))
        if condition > TRACE_COND_WARN:
            logger.warning("trace block at %s node %d has condition number %.3e", block.binding_id, block.node, condition)
        G = np.linalg.solve(T, block.C * block.inv2h[np.newaxis, :])
        local = np.repeat(block.traces - n_interior, block.k)
        e_rows.extend([local, local])
        e_cols.extend([np.tile(block.near1, block.k), np.tile(block.near2, block.k)])
        e_vals.extend([(4.0 * G).ravel(), (-G).ravel()])

    data = np.concatenate(e_vals) if e_vals else np.zeros(0, dtype=complex)
    if data.size and np.max(np.abs(data.imag)) <= REAL_CAST_RTOL * max(np.max(np.abs(data)), 1.0):
        data = data.real
    empty = np.zeros(0, dtype=np.int64)
    E = sparse.coo_matrix(
        (data, (np.concatenate(e_rows) if e_rows else empty, np.concatenate(e_cols) if e_cols else empty)),
        shape=(system.n_trace, n_interior),
    ).tocsr()

    K = system.stiffness
    K_red = (K[:n_interior, :n_interior] + K[:n_interior, n_interior:] @ E).tocsr()
    M_red = system.mass_matrix[:n_interior, :n_interior].tocsr()
    reduced = ReducedSystem(K_red, M_red, E, system)
    logger.debug("eliminated %d traces; symmetry defect %.3e", system.n_trace, reduced.symmetry_defect)
    return reduced
