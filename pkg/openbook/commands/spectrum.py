"""
spectrum - lowest eigenvalues with residuals, multiplicity clusters and mode tags.
"""

import argparse
import sys

from openbook.core.spectrum_engine import spectrum_engine

from .common import add_book_argument, add_solver_flags, fmt, load, mode_label, write_csv

HEADER = ("index", "re_lambda", "im_lambda", "residual", "cluster", "mode", "symmetry_defect", "certified")


def register(subparsers) -> None:
    parser = subparsers.add_parser("spectrum", help="compute the lowest eigenvalues")
    add_book_argument(parser)
    add_solver_flags(parser)
    parser.set_defaults(handler=run)


def run(args: argparse.Namespace) -> int:
    parsed = load(args)
    spectrum = spectrum_engine.solve(parsed.book, parsed.settings, dump=args.dump_matrices)
    result = spectrum.result
    defects = spectrum.symmetry_defects()

    print(f"{'#':>4} {'re(lambda)':>20} {'im(lambda)':>12} {'residual':>10} {'cluster':>7} {'mode':>6} {'sym.defect':>10} {'cert':>4}")
    rows = []
    for i, value in enumerate(result.eigenvalues):
        mode = mode_label(result.modes[i])
        certified = "yes" if result.certified[i] else "no"
        print(
            f"{i:>4} {value.real:>20.12g} {value.imag:>12.3g} {result.residuals[i]:>10.2e} "
            f"{result.cluster_ids[i]:>7} {mode:>6} {defects[i]:>10.2e} {certified:>4}"
        )
        rows.append(
            (i, fmt(value.real), fmt(value.imag), fmt(result.residuals[i]), int(result.cluster_ids[i]), mode, fmt(defects[i]), int(result.certified[i]))
        )

    print()
    for cluster, (value, multiplicity) in enumerate(result.clusters()):
        print(f"cluster {cluster}: {value.real:.10g} x{multiplicity}")
    print(f"orthogonality defect: {result.orthogonality_defect:.3e}")
    if not result.converged:
        print("warning: some eigenpairs are not certified to the residual tolerance", file=sys.stderr)

    write_csv(args.csv, HEADER, rows)
    return 0
