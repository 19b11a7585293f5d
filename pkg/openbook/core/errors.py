"""
Error hierarchy shared by the engines, the book-file reader and the CLI.
Validation findings are reported as data; these exceptions cover hard failures.
"""

from typing import List, Optional, Tuple


class OpenBookError(Exception):
    """Base class for every failure raised by the package."""


class UnknownIdError(OpenBookError, KeyError):
    def __init__(self, kind: str, ident: str):
        self.kind = kind
        self.ident = ident
        super().__init__(f"unknown {kind} '{ident}'")

    def __str__(self) -> str:
        return f"unknown {self.kind} '{self.ident}'"


class ChartError(OpenBookError, ValueError):
    """Bad chart parameters, out-of-range coordinates, or a chart that cannot be reduced."""


class ConditionError(OpenBookError, ValueError):
    """Malformed condition matrices or violated hypotheses of the unitary construction."""


class AssemblyError(OpenBookError):
    """The book cannot be discretized with the requested options."""


class TraceBlockError(AssemblyError):
    def __init__(self, binding_id: str, node: int, condition_number: float, h: float):
        self.binding_id = binding_id
        self.node = node
        self.condition_number = condition_number
        self.h = h
        super().__init__(
            f"singular trace block A + (3/(2h))C at binding '{binding_id}' node {node} "
            f"(condition number {condition_number:.3g}); try a different resolution than h = {h:.6g}"
        )


class ShiftCollisionError(OpenBookError):
    def __init__(self, shift: float, suggested_shift: float):
        self.shift = shift
        self.suggested_shift = suggested_shift
        super().__init__(
            f"shift collision: K - ({shift:.17g})M is singular; retry with shift {suggested_shift:.17g}"
        )


class DimensionCapError(OpenBookError):
    def __init__(self, dimension: int, cap: int):
        self.dimension = dimension
        self.cap = cap
        super().__init__(f"dense reference limited to dimension {cap}, got {dimension}")


class DimensionMismatchError(OpenBookError, ValueError):
    pass


Position = Tuple[int, int]


class BookFileError(OpenBookError):
    """One or more positioned diagnostics from reading a book file."""

    def __init__(self, diagnostics: List[Tuple[Optional[Position], str]]):
        self.diagnostics = diagnostics
        super().__init__("; ".join(self.format_lines()))

    def format_lines(self) -> List[str]:
        lines = []
        for position, message in self.diagnostics:
            if position is None:
                lines.append(message)
            else:
                lines.append(f"line {position[0]}, column {position[1]}: {message}")
        return lines
