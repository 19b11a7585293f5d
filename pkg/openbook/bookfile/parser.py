"""
Book File Reader - line-oriented `[section]` / `key = value` format with
positioned diagnostics, plus the emitter used for the parse/emit round trip.

    [page north]
    kind = cap
    radius = 1
    theta1 = pi/2
    start = pole

    [binding eq]
    circumference = 2*pi
    slot.0 = north end +1
    slot.1 = south end -1
    condition = kirchhoff

    [solver]
    modes = -4..4
"""

import json
import logging
import re
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Dict, List, Optional, Tuple, Union

import numpy as np
from pydantic import ValidationError

from openbook.core.complex import OpenBookComplex, validate_complex
from openbook.core.conditions import ConditionPair, Sampling
from openbook.core.errors import BookFileError, OpenBookError, Position
from openbook.core.pages import Edge, PageChart, PageKind

from .models import PAGE_PARAMETERS, BindingSpec, PageSpec, SolverSettings

logger = logging.getLogger(__name__)

BOOK_SUFFIX = ".book"
SECTION_KINDS = ("page", "binding", "solver")

_SECTION = re.compile(r"^\[\s*([A-Za-z]+)(?:\s+([A-Za-z0-9_.\-]+))?\s*\]$")
_ENTRY = re.compile(r"^([A-Za-z_][A-Za-z0-9_]*(?:\.[0-9]+)?)\s*=\s*(.*?)\s*$")

Diagnostic = Tuple[Optional[Position], str]


@dataclass
class Entry:
    key: str
    value: str
    position: Position


@dataclass
class Section:
    kind: str
    ident: Optional[str]
    position: Position
    entries: Dict[str, Entry] = field(default_factory=dict)

    @property
    def name(self) -> str:
        return f"{self.kind}:{self.ident}" if self.ident else self.kind


@dataclass
class ParsedBook:
    book: OpenBookComplex
    settings: SolverSettings
    positions: Dict[str, Position] = field(default_factory=dict)

    def position_of(self, ident: str) -> Optional[Position]:
        for kind in ("binding", "page"):
            if f"{kind}:{ident}" in self.positions:
                return self.positions[f"{kind}:{ident}"]
        return None


def _tokenize(text: str) -> Tuple[List[Section], List[Diagnostic]]:
    sections: List[Section] = []
    diagnostics: List[Diagnostic] = []
    seen = set()
    current: Optional[Section] = None

    for lineno, raw in enumerate(text.splitlines(), start=1):
        stripped = raw.strip()
        if not stripped or stripped[0] in "#;":
            continue
        column = len(raw) - len(raw.lstrip()) + 1

        header = _SECTION.match(stripped)
        if header:
            kind, ident = header.group(1).lower(), header.group(2)
            current = None
            if kind not in SECTION_KINDS:
                diagnostics.append(((lineno, column), f"unknown section '{kind}' (expected page, binding or solver)"))
                continue
            if kind != "solver" and not ident:
                diagnostics.append(((lineno, column), f"[{kind}] section needs an id"))
                continue
            if kind == "solver" and ident:
                diagnostics.append(((lineno, column), "[solver] section takes no id"))
                continue
            section = Section(kind, ident, (lineno, column))
            if section.name in seen:
                diagnostics.append(((lineno, column), f"duplicate section [{kind}{' ' + ident if ident else ''}]"))
                continue
            seen.add(section.name)
            sections.append(section)
            current = section
            continue

        entry = _ENTRY.match(stripped)
        if not entry:
            diagnostics.append(((lineno, column), "expected '[section]' or 'key = value'"))
            continue
        if current is None:
            diagnostics.append(((lineno, column), f"key '{entry.group(1)}' outside of any section"))
            continue
        key = entry.group(1)
        position = (lineno, column + entry.start(2))
        if key in current.entries:
            diagnostics.append(((lineno, column), f"duplicate key '{key}'"))
            continue
        current.entries[key] = Entry(key, entry.group(2), position)

    return sections, diagnostics


def _error_key(loc: Tuple[Any, ...]) -> Optional[str]:
    if not loc:
        return None
    if loc[0] == "slots" and len(loc) > 1:
        return f"slot.{loc[1]}"
    return str(loc[0])


def _schema_diagnostics(section: Section, exc: ValidationError) -> List[Diagnostic]:
    diagnostics = []
    for error in exc.errors():
        key = _error_key(error["loc"])
        entry = section.entries.get(key) if key else None
        position = entry.position if entry else section.position
        message = error["msg"]
        if message.startswith("Value error, "):
            message = message[len("Value error, "):]
        if error["type"] == "extra_forbidden":
            message = f"unknown key '{key}' in [{section.kind}] section"
        elif error["type"] == "missing":
            message = f"missing key '{key}' in [{section.kind}{' ' + section.ident if section.ident else ''}]"
        elif key:
            message = f"{key}: {message}"
        diagnostics.append((position, message))
    return diagnostics


def _section_values(section: Section) -> Dict[str, Any]:
    values: Dict[str, Any] = {}
    slots: Dict[int, str] = {}
    for key, entry in section.entries.items():
        if section.kind == "binding" and key.startswith("slot."):
            slots[int(key.split(".", 1)[1])] = entry.value
        else:
            values[key] = entry.value
    if section.kind == "binding":
        values["slots"] = slots
    if section.ident:
        values["id"] = section.ident
    return values


class BookFileParser:
    """Reads book files into a complex and solver settings."""

    def __init__(self, validate: bool = True):
        self.validate = validate

    def parse(self, text: str) -> ParsedBook:
        sections, diagnostics = _tokenize(text)
        page_specs: List[PageSpec] = []
        charts: List[PageChart] = []
        binding_specs: List[BindingSpec] = []
        conditions: Dict[str, ConditionPair] = {}
        settings = SolverSettings()
        positions = {section.name: section.position for section in sections}

        for section in sections:
            values = _section_values(section)
            try:
                if section.kind == "page":
                    spec = PageSpec.model_validate(values)
                    charts.append(spec.to_chart())
                    page_specs.append(spec)
                elif section.kind == "binding":
                    spec = BindingSpec.model_validate(values)
                    conditions[spec.id] = spec.to_pair()
                    binding_specs.append(spec)
                else:
                    settings = SolverSettings.model_validate(values)
            except ValidationError as exc:
                diagnostics.extend(_schema_diagnostics(section, exc))
            except OpenBookError as exc:
                diagnostics.append((section.position, str(exc)))

        if not page_specs and not diagnostics:
            diagnostics.append((None, "book has no pages"))
        if diagnostics:
            raise BookFileError(diagnostics)

        tags = {}
        for spec in page_specs:
            tags.update(spec.boundary_tags())
        book = OpenBookComplex(
            pages=charts,
            bindings=[spec.to_binding() for spec in binding_specs],
            adjacencies=[a for spec in binding_specs for a in spec.adjacencies()],
            conditions=conditions,
            boundary_tags=tags,
        )
        resolution = {spec.id: spec.nodes for spec in page_specs if spec.nodes is not None}
        settings = settings.model_copy(update={"resolution": resolution})
        parsed = ParsedBook(book, settings, positions)

        if self.validate:
            report = validate_complex(book)
            if not report.ok:
                raise BookFileError(
                    [(parsed.position_of(issue.ids[0]) if issue.ids else None, issue.message) for issue in report]
                )
        logger.debug("parsed book: %d pages, %d bindings", len(book.pages), len(book.bindings))
        return parsed

    def read(self, path: Union[str, Path]) -> ParsedBook:
        resolved = resolve_book_path(path)
        return self.parse(resolved.read_text(encoding="utf-8"))


def resolve_book_path(path: Union[str, Path]) -> Path:
    """The path itself, or the path with the .book suffix added."""
    candidate = Path(path)
    if candidate.is_file():
        return candidate
    suffixed = candidate.with_name(candidate.name + BOOK_SUFFIX)
    if suffixed.is_file():
        return suffixed
    raise BookFileError([(None, f"no such book file: {path}")])


def parse_book_file(text: str, validate: bool = True) -> Tuple[OpenBookComplex, SolverSettings]:
    parsed = BookFileParser(validate=validate).parse(text)
    return parsed.book, parsed.settings


def load_book(path: Union[str, Path], validate: bool = True) -> ParsedBook:
    return BookFileParser(validate=validate).read(path)


def _number(value: float) -> str:
    return repr(float(value))


def _matrix_json(matrix: np.ndarray) -> str:
    return json.dumps(np.stack([matrix.real, matrix.imag], axis=-1).tolist())


def _condition_lines(pair: ConditionPair) -> List[str]:
    if pair.label is not None:
        return [f"condition = {pair.label}"]
    lines = ["condition = custom"]
    if pair.sampling == Sampling.PER_NODE:
        lines.append(f"sampling = {pair.sampling.value}")
    lines.append(f"A = {_matrix_json(pair.A)}")
    lines.append(f"C = {_matrix_json(pair.C)}")
    return lines


def _modes_text(modes: List[int]) -> str:
    if len(modes) > 1 and modes == list(range(modes[0], modes[-1] + 1)):
        return f"{modes[0]}..{modes[-1]}"
    return ",".join(str(m) for m in modes)


def _solver_lines(settings: SolverSettings) -> List[str]:
    defaults = SolverSettings()
    lines = []
    for name in SolverSettings.model_fields:
        if name == "resolution":
            continue
        value = getattr(settings, name)
        if value == getattr(defaults, name) or value is None:
            continue
        if name == "modes":
            text = _modes_text(value)
        elif name == "grid":
            text = f"{value[0]}x{value[1]}"
        elif isinstance(value, bool):
            text = "true" if value else "false"
        elif isinstance(value, float):
            text = _number(value)
        else:
            text = str(value)
        lines.append(f"{name} = {text}")
    return lines


def emit_book_file(book: OpenBookComplex, settings: Optional[SolverSettings] = None) -> str:
    """Text that parses back to an equal complex and equal settings."""
    settings = settings or SolverSettings()
    out: List[str] = []
    for chart in book.pages:
        out.append(f"[page {chart.id}]")
        out.append(f"kind = {chart.kind.value}")
        for name in PAGE_PARAMETERS[chart.kind]:
            out.append(f"{name} = {_number(getattr(chart, name))}")
        if chart.kind == PageKind.RECTANGLE:
            out.append(f"lateral = {chart.lateral.value}")
        for edge in (Edge.START, Edge.END):
            tag = book.outer_tag(chart.id, edge)
            if tag is not None:
                out.append(f"{edge.value} = {tag.value}")
        if chart.id in settings.resolution:
            out.append(f"nodes = {settings.resolution[chart.id]}")
        out.append("")

    for binding in book.bindings:
        out.append(f"[binding {binding.id}]")
        out.append(f"kind = {binding.kind.value}")
        if binding.circumference is not None:
            out.append(f"circumference = {_number(binding.circumference)}")
        for adjacency in book.adjacencies_of(binding.id):
            sign = "+1" if adjacency.orientation == 1 else "-1"
            out.append(f"slot.{adjacency.slot} = {adjacency.page_id} {adjacency.edge.value} {sign}")
        if binding.id in book.conditions:
            out.extend(_condition_lines(book.conditions[binding.id]))
        out.append("")

    solver = _solver_lines(settings)
    if solver:
        out.append("[solver]")
        out.extend(solver)
        out.append("")
    return "\n".join(out)
