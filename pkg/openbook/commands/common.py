"""
Shared command plumbing: the book argument, solver flags and CSV output.
"""

import argparse
import csv
import sys
from pathlib import Path
from typing import Any, Iterable, List, Optional, Sequence

import numpy as np

from openbook.bookfile.models import SolverSettings
from openbook.bookfile.parser import ParsedBook, load_book

SOLVER_FIELDS = (
    "modes",
    "full2d",
    "grid",
    "nodes",
    "angular_nodes",
    "count",
    "tol",
    "shift",
    "seed",
    "cluster_tol",
    "workers",
    "levels",
)


def add_book_argument(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("book", help="book file, with or without the .book suffix")


def add_solver_flags(parser: argparse.ArgumentParser) -> None:
    group = parser.add_argument_group("solver")
    group.add_argument("--modes", help="angular modes, 'm0..m1' or a comma list")
    group.add_argument("--full2d", action="store_true", default=None, help="solve the tensor-grid 2-D system")
    group.add_argument("--grid", help="2-D grid per page, 'NSxNT'")
    group.add_argument("--nodes", type=int, help="radial segments per page for mode systems")
    group.add_argument("--angular-nodes", dest="angular_nodes", type=int, help="use the discrete angular symbol of this many nodes")
    group.add_argument("--count", type=int, help="number of eigenvalues")
    group.add_argument("--tol", type=float, help="residual tolerance")
    group.add_argument("--shift", type=float, help="shift-invert shift, below the lowest eigenvalue")
    group.add_argument("--seed", type=int, help="seed of the Krylov starting vector")
    group.add_argument("--cluster-tol", dest="cluster_tol", type=float, help="relative multiplicity cluster tolerance")
    group.add_argument("--workers", type=int, help="threads over angular modes")
    group.add_argument("--dump-matrices", dest="dump_matrices", help="write K and M triplets to this path")
    group.add_argument("--csv", help="write the table to this CSV file")


def apply_flags(settings: SolverSettings, args: argparse.Namespace) -> SolverSettings:
    """Command-line flags override the [solver] section."""
    updates = {}
    for name in SOLVER_FIELDS:
        value = getattr(args, name, None)
        if value is not None:
            updates[name] = value
    if not updates:
        return settings
    return SolverSettings.model_validate({**settings.model_dump(), **updates})


def load(args: argparse.Namespace, validate: bool = True) -> ParsedBook:
    parsed = load_book(args.book, validate=validate)
    parsed.settings = apply_flags(parsed.settings, args)
    return parsed


def fmt(value: float) -> str:
    """Full double precision, 17 significant digits."""
    return format(float(value), ".17g")


def write_csv(path: Optional[str], header: Sequence[str], rows: Iterable[Sequence[Any]]) -> None:
    if path is None:
        return
    target = Path(path)
    target.parent.mkdir(parents=True, exist_ok=True)
    with target.open("w", newline="", encoding="utf-8") as handle:
        writer = csv.writer(handle, lineterminator="\n")
        writer.writerow(header)
        writer.writerows(rows)
    print(f"wrote {target}", file=sys.stderr)


def format_matrix(matrix: np.ndarray, digits: int = 12) -> str:
    def entry(z: complex) -> str:
        re = round(z.real, digits) + 0.0
        im = round(z.imag, digits) + 0.0
        if im == 0.0:
            return f"{re:.{digits}g}"
        return f"{re:.{digits}g}{im:+.{digits}g}j"

    return "[" + ", ".join("[" + ", ".join(entry(complex(z)) for z in row) + "]" for row in matrix) + "]"


def mode_label(mode: Optional[int]) -> str:
    return "full2d" if mode is None else str(mode)


def parse_indices(text: Optional[str], count: int) -> List[int]:
    if not text:
        return list(range(count))
    return [int(part) for part in text.split(",") if part.strip()]
