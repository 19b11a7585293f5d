"""
validate - complex well-formedness and per-binding condition reports.
"""

import argparse
from typing import List

from openbook.core.conditions import ConditionReport
from openbook.core.spectrum_engine import spectrum_engine

from .common import add_book_argument, format_matrix, load


def register(subparsers) -> None:
    parser = subparsers.add_parser("validate", help="check the book and its junction conditions")
    add_book_argument(parser)
    parser.set_defaults(handler=run)


def _describe(binding_id: str, label: str, report: ConditionReport) -> List[str]:
    lines = [f"binding {binding_id} (k={report.k}, {label})"]
    lines.append(f"  rank: {report.rank}")
    if report.elliptic:
        lines.append("  elliptic: true")
    elif report.violating_lambda is None:
        lines.append("  elliptic: false (det(A - lambda C) vanishes identically)")
    else:
        lines.append(f"  elliptic: false (lambda = {report.violating_lambda:g})")
    lines.append(f"  selfadjoint defect: {report.selfadjoint_defect:.3g}")
    if report.canonical is not None and not report.canonical.per_node:
        lines.append(f"  U: {format_matrix(report.canonical.U)}")
    elif report.canonical is not None:
        lines.append(f"  U: per-node, {report.canonical.U.shape[0]} samples")
    if report.sample_variation is not None:
        lines.append(f"  sample variation: {report.sample_variation:.3g}")
    return lines


def run(args: argparse.Namespace) -> int:
    parsed = load(args, validate=False)
    book = parsed.book
    report = spectrum_engine.report(book)
    errors: List[str] = []

    for issue in report.validation:
        position = parsed.position_of(issue.ids[0]) if issue.ids else None
        prefix = f"line {position[0]}, column {position[1]}: " if position else ""
        errors.append(prefix + issue.message)

    print(f"book: {len(book.pages)} pages, {len(book.bindings)} bindings")
    for binding in book.bindings:
        condition = report.conditions.get(binding.id)
        if condition is None:
            continue
        label = book.conditions[binding.id].label or "custom"
        for line in _describe(binding.id, label, condition):
            print(line)
        if condition.rank < condition.k:
            errors.append(f"binding {binding.id}: rank(A, C) = {condition.rank} < {condition.k}")
        if not condition.elliptic:
            if condition.violating_lambda is None:
                errors.append(f"binding {binding.id}: ellipticity violated for every lambda")
            else:
                errors.append(f"binding {binding.id}: ellipticity violated at λ = {condition.violating_lambda:g}")
        if condition.rank == condition.k and not condition.selfadjoint:
            errors.append(f"binding {binding.id}: not self-adjoint (defect {condition.selfadjoint_defect:.3g})")

    for message in errors:
        print(f"error: {message}")
    if not errors:
        print("ok")
    return 1 if errors else 0
