"""
Open Book Complex - pages, bindings, adjacency records and junction conditions,
with a well-formedness report that lists every violated rule as data.
"""

import logging
import math
from collections import defaultdict, deque
from dataclasses import dataclass, field, replace
from enum import Enum
from typing import Dict, Iterator, List, Optional, Tuple

from .conditions import ConditionPair
from .errors import UnknownIdError
from .pages import Edge, FlatRectangle, Interval, PageChart, boundary_circumference, pole_edges

logger = logging.getLogger(__name__)

CIRCUMFERENCE_RTOL = 1e-10


class BindingKind(str, Enum):
    CIRCLE = "circle"
    SEGMENT = "segment"
    POINT = "point"


class BoundaryTag(str, Enum):
    DIRICHLET = "dirichlet"
    NEUMANN = "neumann"
    POLE = "pole"


@dataclass(frozen=True)
class Binding:
    id: str
    kind: BindingKind = BindingKind.CIRCLE
    circumference: Optional[float] = None
    degree: Optional[int] = None

    def __post_init__(self):
        object.__setattr__(self, "kind", BindingKind(self.kind))


@dataclass(frozen=True)
class Adjacency:
    page_id: str
    edge: Edge
    binding_id: str
    slot: int
    orientation: int = 1

    def __post_init__(self):
        object.__setattr__(self, "edge", Edge(self.edge))


@dataclass(frozen=True)
class ValidationIssue:
    code: str
    message: str
    ids: Tuple[str, ...] = ()


@dataclass
class ValidationReport:
    issues: List[ValidationIssue] = field(default_factory=list)

    def add(self, code: str, message: str, *ids: str) -> None:
        self.issues.append(ValidationIssue(code, message, tuple(ids)))

    @property
    def ok(self) -> bool:
        return not self.issues

    def messages(self) -> List[str]:
        return [issue.message for issue in self.issues]

    def __len__(self) -> int:
        return len(self.issues)

    def __iter__(self) -> Iterator[ValidationIssue]:
        return iter(self.issues)


@dataclass(frozen=True)
class OpenBookComplex:
    pages: Tuple[PageChart, ...]
    bindings: Tuple[Binding, ...]
    adjacencies: Tuple[Adjacency, ...]
    conditions: Dict[str, ConditionPair] = field(default_factory=dict)
    boundary_tags: Dict[Tuple[str, Edge], BoundaryTag] = field(default_factory=dict)

    def __post_init__(self):
        object.__setattr__(self, "pages", tuple(self.pages))
        object.__setattr__(self, "bindings", tuple(self.bindings))
        object.__setattr__(self, "adjacencies", tuple(self.adjacencies))
        object.__setattr__(self, "conditions", dict(self.conditions))
        tags = {(page_id, Edge(edge)): BoundaryTag(tag) for (page_id, edge), tag in self.boundary_tags.items()}
        object.__setattr__(self, "boundary_tags", tags)

    def page(self, page_id: str) -> PageChart:
        for chart in self.pages:
            if chart.id == page_id:
                return chart
        raise UnknownIdError("page", page_id)

    def binding(self, binding_id: str) -> Binding:
        for binding in self.bindings:
            if binding.id == binding_id:
                return binding
        raise UnknownIdError("binding", binding_id)

    def condition(self, binding_id: str) -> ConditionPair:
        if binding_id not in self.conditions:
            raise UnknownIdError("condition for binding", binding_id)
        return self.conditions[binding_id]

    def adjacencies_of(self, binding_id: str) -> List[Adjacency]:
        """Adjacency records of a binding in slot order."""
        return sorted((a for a in self.adjacencies if a.binding_id == binding_id), key=lambda a: a.slot)

    def attachment(self, page_id: str, edge: Edge) -> Optional[Adjacency]:
        edge = Edge(edge)
        for adjacency in self.adjacencies:
            if adjacency.page_id == page_id and adjacency.edge == edge:
                return adjacency
        return None

    def outer_tag(self, page_id: str, edge: Edge) -> Optional[BoundaryTag]:
        return self.boundary_tags.get((page_id, Edge(edge)))

    def slot_map(self) -> Dict[Tuple[str, int], Tuple[str, Edge]]:
        """(binding, slot) -> (page, edge)."""
        return {(a.binding_id, a.slot): (a.page_id, a.edge) for a in self.adjacencies}

    def edge_map(self) -> Dict[Tuple[str, Edge], Tuple[str, int]]:
        """(page, edge) -> (binding, slot)."""
        return {(a.page_id, a.edge): (a.binding_id, a.slot) for a in self.adjacencies}

    @property
    def dimension(self) -> int:
        return 1 if all(isinstance(p, Interval) for p in self.pages) else 2

    @property
    def axisymmetric(self) -> bool:
        return all(p.has_angle and p.periodic for p in self.pages)

    def angular_signs(self) -> Dict[str, int]:
        """Per-page sign s such that mode m in binding coordinates is e^{i s m t} in page coordinates.

        The first page of each connected component gets +1; signs propagate through
        the orientations recorded at every binding.
        """
        signs: Dict[str, int] = {}
        by_page: Dict[str, List[Adjacency]] = defaultdict(list)
        for adjacency in self.adjacencies:
            by_page[adjacency.page_id].append(adjacency)
        for chart in self.pages:
            if chart.id in signs:
                continue
            signs[chart.id] = 1
            queue = deque([chart.id])
            while queue:
                page_id = queue.popleft()
                for own in by_page[page_id]:
                    for other in self.adjacencies_of(own.binding_id):
                        sign = signs[page_id] * own.orientation * other.orientation
                        if other.page_id not in signs:
                            signs[other.page_id] = sign
                            queue.append(other.page_id)
                        elif signs[other.page_id] != sign:
                            logger.warning("page %s is reached with both orientations; keeping %+d", other.page_id, signs[other.page_id])
        return signs

    def with_conditions(self, updates: Dict[str, ConditionPair]) -> "OpenBookComplex":
        merged = dict(self.conditions)
        merged.update(updates)
        return replace(self, conditions=merged)


def binding_degree(book: OpenBookComplex, binding_id: str) -> int:
    """Number of adjacency records referencing the binding."""
    book.binding(binding_id)
    return sum(1 for a in book.adjacencies if a.binding_id == binding_id)


def _check_ids(book: OpenBookComplex, report: ValidationReport) -> Tuple[Dict[str, PageChart], Dict[str, Binding]]:
    pages: Dict[str, PageChart] = {}
    for chart in book.pages:
        if chart.id in pages:
            report.add("duplicate-page", f"duplicate page id '{chart.id}'", chart.id)
        pages[chart.id] = chart
    bindings: Dict[str, Binding] = {}
    for binding in book.bindings:
        if binding.id in bindings:
            report.add("duplicate-binding", f"duplicate binding id '{binding.id}'", binding.id)
        bindings[binding.id] = binding
    kinds = {isinstance(chart, Interval) for chart in book.pages}
    if len(kinds) > 1:
        report.add("mixed-dimension", "interval pages cannot share a book with 2-D pages")
    return pages, bindings


def _check_edges(book: OpenBookComplex, pages: Dict[str, PageChart], report: ValidationReport) -> None:
    attached: Dict[Tuple[str, Edge], List[str]] = defaultdict(list)
    for adjacency in book.adjacencies:
        if adjacency.page_id in pages:
            attached[(adjacency.page_id, adjacency.edge)].append(adjacency.binding_id)

    for (page_id, edge), tag in book.boundary_tags.items():
        if page_id not in pages:
            report.add("unknown-page", f"boundary tag on unknown page '{page_id}'", page_id)

    for chart in pages.values():
        poles = pole_edges(chart)
        for edge in (Edge.START, Edge.END):
            where = f"edge {edge.value} of page {chart.id}"
            owners = attached.get((chart.id, edge), [])
            tag = book.outer_tag(chart.id, edge)
            if len(owners) > 1:
                report.add("edge-reused", f"{where} is attached to more than one binding", chart.id, *owners)
            if owners and tag is not None:
                report.add("edge-tagged", f"{where} has both a binding and a boundary tag", chart.id)
            if edge in poles:
                if owners:
                    report.add("pole-binding", f"pole {where} cannot attach to a binding", chart.id, *owners)
                elif tag is not None and tag != BoundaryTag.POLE:
                    report.add("pole-tag", f"pole {where} must carry the pole tag, not {tag.value}", chart.id)
            elif tag == BoundaryTag.POLE:
                report.add("pole-tag", f"{where} is tagged pole but the profile does not vanish there", chart.id)
            if not owners and tag is None and edge not in poles:
                report.add("edge-unassigned", f"{where} has neither a binding nor a boundary tag", chart.id)


def _check_binding(
    book: OpenBookComplex,
    binding: Binding,
    pages: Dict[str, PageChart],
    report: ValidationReport,
) -> None:
    records = book.adjacencies_of(binding.id)
    k = len(records)
    if k == 0:
        report.add("degree", f"binding {binding.id} has no adjacent pages", binding.id)
    if binding.degree is not None and binding.degree != k:
        report.add("degree", f"degree mismatch at binding {binding.id}: declared {binding.degree}, found {k}", binding.id)
    slots = sorted(a.slot for a in records)
    if slots != list(range(k)):
        report.add("slots", f"slot indices at binding {binding.id} must be 0..{k - 1}, got {slots}", binding.id)
    for adjacency in records:
        if adjacency.orientation not in (1, -1):
            report.add("orientation", f"orientation at binding {binding.id} slot {adjacency.slot} must be +1 or -1", binding.id)

    charts = [(a, pages[a.page_id]) for a in records if a.page_id in pages]
    if binding.kind == BindingKind.POINT:
        for adjacency, chart in charts:
            if not isinstance(chart, Interval):
                report.add("kind", f"point binding {binding.id} can only join interval pages, not '{chart.id}'", binding.id, chart.id)
    elif binding.kind == BindingKind.SEGMENT:
        rectangles = [chart for _, chart in charts if isinstance(chart, FlatRectangle)]
        if len(rectangles) != len(charts):
            report.add("kind", f"segment binding {binding.id} can only join rectangle pages", binding.id)
        if len({(r.width, r.lateral) for r in rectangles}) > 1:
            report.add("lateral", f"rectangles at binding {binding.id} differ in width or lateral tag", binding.id)
    else:
        for adjacency, chart in charts:
            if not (chart.has_angle and chart.periodic):
                report.add("kind", f"circle binding {binding.id} cannot join page '{chart.id}'", binding.id, chart.id)

    if binding.kind != BindingKind.POINT:
        expected = binding.circumference
        if expected is None or not (expected > 0 and math.isfinite(expected)):
            report.add("circumference", f"binding {binding.id} needs a positive circumference", binding.id)
        else:
            for adjacency, chart in charts:
                actual = boundary_circumference(chart, adjacency.edge)
                if actual is None or abs(actual - expected) > CIRCUMFERENCE_RTOL * expected:
                    report.add(
                        "circumference",
                        f"circumference mismatch at binding {binding.id}: page {chart.id} has {actual}, binding has {expected}",
                        binding.id,
                        chart.id,
                    )

    pair = book.conditions.get(binding.id)
    if pair is None:
        report.add("condition", f"missing condition at binding {binding.id}", binding.id)
    elif pair.k != k:
        report.add("condition", f"condition size mismatch at binding {binding.id}: {k} slots but {pair.k}x{pair.k} matrices", binding.id)


def validate_complex(book: OpenBookComplex) -> ValidationReport:
    """Every violated well-formedness rule, with the offending ids; empty means well-formed."""
    report = ValidationReport()
    pages, bindings = _check_ids(book, report)

    for adjacency in book.adjacencies:
        if adjacency.page_id not in pages:
            report.add("unknown-page", f"adjacency refers to unknown page '{adjacency.page_id}'", adjacency.page_id)
        if adjacency.binding_id not in bindings:
            report.add("unknown-binding", f"adjacency refers to unknown binding '{adjacency.binding_id}'", adjacency.binding_id)

    _check_edges(book, pages, report)
    for binding in bindings.values():
        _check_binding(book, binding, pages, report)
    for binding_id in book.conditions:
        if binding_id not in bindings:
            report.add("unknown-binding", f"condition for unknown binding '{binding_id}'", binding_id)

    logger.debug("validated book: %d pages, %d bindings, %d issues", len(pages), len(bindings), len(report))
    return report
