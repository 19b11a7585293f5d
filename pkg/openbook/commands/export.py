"""
export - eigenfunction samples (page, s, t, Re u, Im u) as CSV.
"""

import argparse
import csv
import sys

from openbook.core.spectrum_engine import spectrum_engine

from .common import add_book_argument, add_solver_flags, fmt, load, mode_label, parse_indices, write_csv

HEADER = ("index", "mode", "page", "s", "t", "re_u", "im_u")


def register(subparsers) -> None:
    parser = subparsers.add_parser("export", help="write eigenfunction samples for plotting")
    add_book_argument(parser)
    add_solver_flags(parser)
    parser.add_argument("--indices", help="comma list of eigenvalue indices (default: all computed)")
    parser.add_argument("--angles", type=int, help="angular samples per page for mode runs")
    parser.set_defaults(handler=run)


def run(args: argparse.Namespace) -> int:
    parsed = load(args)
    spectrum = spectrum_engine.solve(parsed.book, parsed.settings, dump=args.dump_matrices)
    indices = parse_indices(args.indices, len(spectrum.eigenvalues))
    for index in indices:
        if not 0 <= index < len(spectrum.eigenvalues):
            print(f"error: eigenvalue index {index} out of range 0..{len(spectrum.eigenvalues) - 1}")
            return 1

    samples = spectrum_engine.sample_eigenfunctions(parsed.book, spectrum, indices, args.angles)
    rows = [
        (s.index, mode_label(s.mode), s.page_id, fmt(s.s), fmt(s.t), fmt(s.value.real), fmt(s.value.imag))
        for s in samples
    ]
    if args.csv:
        write_csv(args.csv, HEADER, rows)
    else:
        writer = csv.writer(sys.stdout, lineterminator="\n")
        writer.writerow(HEADER)
        writer.writerows(rows)
    print(f"{len(rows)} samples from {len(indices)} eigenfunctions", file=sys.stderr)
    return 0
