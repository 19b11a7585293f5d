"""
Spectrum Engine - orchestrates discretization and eigensolves for a whole book:
mode merging, optional thread pool over modes, convergence studies, condition
reports and eigenfunction sampling.
"""

import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import TYPE_CHECKING, Dict, List, Optional, Tuple

import numpy as np

from .complex import OpenBookComplex, ValidationReport, validate_complex
from .conditions import ConditionReport, condition_report
from .discretize import (
    DiscreteSystem,
    ReducedSystem,
    build_full_system,
    build_mode_system,
    eliminate_traces,
)
from .eigensolve import SpectrumResult, cluster_eigenvalues, lowest_eigenpairs
from .errors import AssemblyError
from .pages import angular_factor

if TYPE_CHECKING:
    from openbook.bookfile.models import SolverSettings

logger = logging.getLogger(__name__)

SystemKey = Optional[int]


@dataclass
class BookSpectrum:
    """Merged spectrum of a book with the systems it was computed from."""

    result: SpectrumResult
    systems: Dict[SystemKey, ReducedSystem]
    sources: List[Tuple[SystemKey, int]]
    per_system: Dict[SystemKey, SpectrumResult] = field(default_factory=dict)

    @property
    def eigenvalues(self) -> np.ndarray:
        return self.result.eigenvalues

    def symmetry_defects(self) -> List[float]:
        return [self.systems[key].symmetry_defect for key, _ in self.sources]

    def eigenfunction(self, index: int) -> Tuple[ReducedSystem, np.ndarray]:
        """System and full-length vector (traces included) of the index-th eigenvalue."""
        key, column = self.sources[index]
        system = self.systems[key]
        return system, system.lift(self.per_system[key].vectors[:, column])


@dataclass
class ConvergenceStudy:
    resolutions: List[int]
    values: np.ndarray
    orders: np.ndarray
    symmetry_defects: List[float]
    orthogonality_defects: List[float]
    reference: Optional[np.ndarray] = None

    @property
    def errors(self) -> Optional[np.ndarray]:
        if self.reference is None:
            return None
        return np.abs(self.values - self.reference[np.newaxis, :])


@dataclass
class BookReport:
    validation: ValidationReport
    conditions: Dict[str, ConditionReport]


@dataclass
class EigenfunctionSample:
    index: int
    mode: SystemKey
    page_id: str
    s: float
    t: float
    value: complex


def observed_orders(values: np.ndarray, reference: Optional[np.ndarray] = None) -> np.ndarray:
    """log2 error ratios for a halving sequence; against successive differences without a reference."""
    values = np.real(np.asarray(values))
    if reference is not None:
        errors = np.abs(values - np.real(reference)[np.newaxis, :])
    else:
        errors = np.abs(np.diff(values, axis=0))
    with np.errstate(divide="ignore", invalid="ignore"):
        return np.log2(errors[:-1] / errors[1:])


class SpectrumEngine:
    """Builds, reduces and solves the systems a run needs."""

    def __init__(self):
        self.default_export_angles = 32

    def report(self, book: OpenBookComplex) -> BookReport:
        validation = validate_complex(book)
        conditions = {}
        for binding in book.bindings:
            pair = book.conditions.get(binding.id)
            if pair is not None:
                conditions[binding.id] = condition_report(pair)
        return BookReport(validation, conditions)

    def reduce(
        self,
        book: OpenBookComplex,
        settings: "SolverSettings",
        mode: SystemKey = None,
        dump: Optional[Path] = None,
    ) -> ReducedSystem:
        if settings.full2d:
            system = build_full_system(book, settings.grid, settings.resolution)
        else:
            system = build_mode_system(book, mode, settings.nodes, settings.angular_nodes, settings.resolution)
        if dump is not None:
            system.dump(_dump_path(dump, None if settings.full2d else mode))
        return eliminate_traces(system)

    def _solve_one(
        self,
        book: OpenBookComplex,
        settings: "SolverSettings",
        mode: SystemKey,
        dump: Optional[Path],
    ) -> Tuple[SystemKey, ReducedSystem, SpectrumResult]:
        reduced = self.reduce(book, settings, mode, dump)
        if reduced.dimension == 0:
            empty = SpectrumResult(np.zeros(0, dtype=complex), np.zeros(0), np.zeros((0, 0)), method="empty")
            return mode, reduced, empty
        result = lowest_eigenpairs(
            reduced,
            settings.count,
            tol=settings.tol,
            shift=settings.shift,
            seed=settings.seed,
            cluster_tol=settings.cluster_tol,
        )
        logger.info("mode %s: lowest %s", "2-D" if mode is None else mode, np.round(result.real_parts[:4], 6))
        return mode, reduced, result

    def solve(
        self,
        book: OpenBookComplex,
        settings: "SolverSettings",
        dump: Optional[Path] = None,
    ) -> BookSpectrum:
        """Lowest `count` eigenvalues of the book, merged over the requested modes."""
        report = validate_complex(book)
        if not report.ok:
            raise AssemblyError("book is not well-formed: " + "; ".join(report.messages()))

        if settings.full2d:
            keys: List[SystemKey] = [None]
        elif book.dimension == 1:
            keys = [0]
        else:
            keys = settings.mode_magnitudes
        if settings.workers > 1 and len(keys) > 1:
            with ThreadPoolExecutor(max_workers=settings.workers) as pool:
                solved = list(pool.map(lambda key: self._solve_one(book, settings, key, dump), keys))
        else:
            solved = [self._solve_one(book, settings, key, dump) for key in keys]

        requested = set(settings.modes)
        entries: List[Tuple[complex, float, SystemKey, int, SystemKey, bool]] = []
        for key, reduced, result in solved:
            tags = [None] if key is None else [m for m in (key, -key) if m in requested] or [key]
            if key is not None and not book.axisymmetric:
                tags = tags[:1]
            for tag in dict.fromkeys(tags):
                for column in range(len(result)):
                    entries.append(
                        (result.eigenvalues[column], result.residuals[column], key, column, tag, bool(result.certified[column]))
                    )

        entries.sort(key=lambda entry: (entry[0].real, entry[4] if entry[4] is not None else 0))
        entries = entries[: settings.count]
        values = np.array([entry[0] for entry in entries], dtype=complex)
        per_system = {key: result for key, _, result in solved}
        merged = SpectrumResult(
            eigenvalues=values,
            residuals=np.array([entry[1] for entry in entries]),
            vectors=None,
            cluster_ids=cluster_eigenvalues(values, settings.cluster_tol),
            modes=[entry[4] for entry in entries],
            symmetry_defect=max((r.symmetry_defect for _, r, _ in solved), default=0.0),
            orthogonality_defect=max((res.orthogonality_defect for _, _, res in solved), default=0.0),
            converged=all(res.converged for _, _, res in solved),
            method="+".join(sorted({res.method for _, _, res in solved})),
            certified=np.array([entry[5] for entry in entries], dtype=bool),
        )
        if not merged.converged:
            logger.warning("some eigenpairs did not meet the residual tolerance %.1e", settings.tol)
        return BookSpectrum(
            result=merged,
            systems={key: reduced for key, reduced, _ in solved},
            sources=[(entry[2], entry[3]) for entry in entries],
            per_system=per_system,
        )

    def convergence(
        self,
        book: OpenBookComplex,
        settings: "SolverSettings",
        reference: Optional[np.ndarray] = None,
    ) -> ConvergenceStudy:
        """Solve on `levels` grids, each twice as fine as the last."""
        resolutions: List[int] = []
        rows: List[np.ndarray] = []
        symmetry: List[float] = []
        orthogonality: List[float] = []
        for level in range(settings.levels):
            factor = 2 ** level
            if settings.full2d:
                n_s, n_t = settings.grid
                update = {"grid": (n_s * factor, n_t * factor)}
                resolutions.append(n_s * factor)
            else:
                update = {"nodes": settings.nodes * factor}
                resolutions.append(settings.nodes * factor)
            update["resolution"] = {page: nodes * factor for page, nodes in settings.resolution.items()}
            spectrum = self.solve(book, settings.model_copy(update=update))
            rows.append(spectrum.eigenvalues.real)
            symmetry.append(spectrum.result.symmetry_defect)
            orthogonality.append(spectrum.result.orthogonality_defect)

        width = min(len(row) for row in rows)
        values = np.array([row[:width] for row in rows])
        ref = None if reference is None else np.asarray(reference, dtype=float)[:width]
        return ConvergenceStudy(resolutions, values, observed_orders(values, ref), symmetry, orthogonality, ref)

    def sample_eigenfunctions(
        self,
        book: OpenBookComplex,
        spectrum: BookSpectrum,
        indices: List[int],
        angles: Optional[int] = None,
    ) -> List[EigenfunctionSample]:
        """Values of selected eigenfunctions on every page grid; mode runs expand the angular factor."""
        angles = angles or self.default_export_angles
        signs = book.angular_signs()
        samples: List[EigenfunctionSample] = []
        for index in indices:
            system, vector = spectrum.eigenfunction(index)
            discrete: DiscreteSystem = system.system
            mode = spectrum.result.modes[index]
            for page_id, grid in discrete.pages.items():
                values = discrete.page_values(vector, page_id)
                s_nodes = grid.line.s
                if discrete.full2d:
                    t_nodes = grid.angular.t
                    field_values = values
                else:
                    chart = grid.chart
                    if chart.has_angle:
                        extent = chart.angular_extent
                        t_nodes = np.linspace(0.0, extent, angles, endpoint=not chart.periodic)
                    else:
                        t_nodes = np.zeros(1)
                    # reversed periodic pages carry e^{-imt} in their own coordinate
                    m = (mode or 0) * (signs[page_id] if chart.periodic else 1)
                    field_values = values[:, :1] * angular_factor(chart, m, t_nodes)[np.newaxis, :]
                for i, s in enumerate(s_nodes):
                    for j, t in enumerate(t_nodes):
                        samples.append(EigenfunctionSample(index, mode, page_id, float(s), float(t), complex(field_values[i, j])))
        return samples


def _dump_path(base: Path, mode: SystemKey) -> Path:
    base = Path(base)
    if mode is None:
        return base
    return base.with_name(f"{base.stem}-m{mode}{base.suffix}")


spectrum_engine = SpectrumEngine()
