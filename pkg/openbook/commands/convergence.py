"""
convergence - the spectrum on a sequence of halving grids and observed orders.
"""

import argparse

import numpy as np

from openbook.core.spectrum_engine import spectrum_engine

from .common import add_book_argument, add_solver_flags, fmt, load, write_csv

HEADER = ("level", "resolution", "index", "re_lambda", "order")


def register(subparsers) -> None:
    parser = subparsers.add_parser("convergence", help="run a grid sequence and report observed orders")
    add_book_argument(parser)
    add_solver_flags(parser)
    parser.add_argument("--levels", type=int, help="number of grids (at least 3)")
    parser.set_defaults(handler=run)


def run(args: argparse.Namespace) -> int:
    parsed = load(args)
    study = spectrum_engine.convergence(parsed.book, parsed.settings)

    rows = []
    for level, resolution in enumerate(study.resolutions):
        values = " ".join(f"{v:.10g}" for v in study.values[level])
        print(f"level {level} (n={resolution}): {values}")
        for index, value in enumerate(study.values[level]):
            order = study.orders[level - 2, index] if level >= 2 else np.nan
            rows.append((level, resolution, index, fmt(value), fmt(order)))

    for level, orders in enumerate(study.orders, start=2):
        text = " ".join("nan" if not np.isfinite(p) else f"{p:.2f}" for p in orders)
        print(f"observed order at level {level}: {text}")
    for level, (sym, ortho) in enumerate(zip(study.symmetry_defects, study.orthogonality_defects)):
        print(f"level {level}: symmetry defect {sym:.3e}, orthogonality defect {ortho:.3e}")

    write_csv(args.csv, HEADER, rows)
    return 0
