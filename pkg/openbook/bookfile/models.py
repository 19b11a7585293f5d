"""
Book File Models - pydantic schemas for the [page], [binding] and [solver]
sections, converted into charts, bindings, adjacencies and condition pairs.
"""

import json
import math
import re
from typing import Any, Dict, List, Optional, Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

from openbook.core.complex import Adjacency, Binding, BindingKind, BoundaryTag
from openbook.core.conditions import ConditionName, ConditionPair, Sampling, named_condition
from openbook.core.pages import (
    Cylinder,
    Edge,
    FlatAnnulus,
    FlatRectangle,
    Interval,
    Lateral,
    PageChart,
    PageKind,
    SphericalCap,
)

_FACTOR = re.compile(r"^(?:sqrt\((?P<root>[^()]+)\)|(?P<pi>pi)|(?P<num>[0-9]*\.?[0-9]+(?:[eE][+-]?[0-9]+)?))$")
_RANGE = re.compile(r"^\s*(-?\d+)\s*\.\.\s*(-?\d+)\s*$")
_GRID = re.compile(r"^\s*(\d+)\s*[xX]\s*(\d+)\s*$")

PAGE_PARAMETERS = {
    PageKind.CAP: ("radius", "theta0", "theta1"),
    PageKind.CYLINDER: ("radius", "length"),
    PageKind.ANNULUS: ("r0", "r1"),
    PageKind.RECTANGLE: ("length", "width"),
    PageKind.INTERVAL: ("length",),
}
REQUIRED_PARAMETERS = {
    PageKind.CAP: ("radius", "theta1"),
    PageKind.CYLINDER: ("radius", "length"),
    PageKind.ANNULUS: ("r1",),
    PageKind.RECTANGLE: ("length", "width"),
    PageKind.INTERVAL: ("length",),
}


def parse_number(value: Any) -> Any:
    """Numbers with optional sign, pi and sqrt(x) factors joined by * and /."""
    if not isinstance(value, str):
        return value
    text = value.strip().replace(" ", "")
    sign = 1.0
    if text[:1] in "+-" and text:
        sign = -1.0 if text[0] == "-" else 1.0
        text = text[1:]
    pieces = re.split(r"([*/])", text)
    result = None
    operator = "*"
    for piece in pieces:
        if piece in ("*", "/"):
            operator = piece
            continue
        match = _FACTOR.match(piece)
        if not match:
            raise ValueError(f"not a number: '{value}'")
        if match.group("root") is not None:
            factor = math.sqrt(float(parse_number(match.group("root"))))
        elif match.group("pi"):
            factor = math.pi
        else:
            factor = float(match.group("num"))
        if result is None:
            result = factor
        elif operator == "*":
            result *= factor
        else:
            result /= factor
    if result is None:
        raise ValueError(f"not a number: '{value}'")
    return sign * result


def _raw_entries(value: Any) -> np.ndarray:
    """Real array of a JSON matrix; complex entries are written as [re, im] pairs."""
    if isinstance(value, str):
        try:
            value = json.loads(value)
        except json.JSONDecodeError as exc:
            raise ValueError(f"matrix is not valid JSON: {exc.msg}") from None
    try:
        array = np.array(value, dtype=float)
    except (TypeError, ValueError):
        raise ValueError("matrix entries must all be numbers or all be [re, im] pairs") from None
    if array.ndim not in (2, 3, 4):
        raise ValueError(f"unexpected matrix shape {array.shape}")
    return array


def _as_complex(array: np.ndarray, sampling: Sampling) -> np.ndarray:
    plain = 2 if sampling == Sampling.CONSTANT else 3
    if array.ndim == plain:
        return array.astype(complex)
    if array.ndim == plain + 1 and array.shape[-1] == 2:
        return array[..., 0] + 1j * array[..., 1]
    raise ValueError(f"{sampling.value} matrices cannot have shape {array.shape}")


class SlotSpec(BaseModel):
    model_config = ConfigDict(extra="forbid")

    page: str
    edge: Edge
    orientation: int = 1

    @model_validator(mode="before")
    @classmethod
    def split_text(cls, value: Any) -> Any:
        if not isinstance(value, str):
            return value
        parts = value.split()
        if len(parts) not in (2, 3):
            raise ValueError("slot must read '<page> <start|end> [+1|-1]'")
        spec = {"page": parts[0], "edge": parts[1]}
        if len(parts) == 3:
            try:
                spec["orientation"] = int(parts[2])
            except ValueError:
                raise ValueError(f"orientation must be +1 or -1, got '{parts[2]}'") from None
        return spec

    @field_validator("orientation")
    @classmethod
    def unit_orientation(cls, value: int) -> int:
        if value not in (1, -1):
            raise ValueError("orientation must be +1 or -1")
        return value


class PageSpec(BaseModel):
    model_config = ConfigDict(extra="forbid")

    id: str
    kind: PageKind
    radius: Optional[float] = None
    theta0: Optional[float] = None
    theta1: Optional[float] = None
    length: Optional[float] = None
    width: Optional[float] = None
    r0: Optional[float] = None
    r1: Optional[float] = None
    lateral: Optional[Lateral] = None
    start: Optional[BoundaryTag] = None
    end: Optional[BoundaryTag] = None
    nodes: Optional[int] = Field(default=None, ge=8)

    @field_validator("radius", "theta0", "theta1", "length", "width", "r0", "r1", mode="before")
    @classmethod
    def numeric(cls, value: Any) -> Any:
        return parse_number(value)

    @model_validator(mode="after")
    def parameters_match_kind(self) -> "PageSpec":
        allowed = set(PAGE_PARAMETERS[self.kind])
        for name in ("radius", "theta0", "theta1", "length", "width", "r0", "r1"):
            if getattr(self, name) is not None and name not in allowed:
                raise ValueError(f"key '{name}' does not apply to {self.kind.value} pages")
        for name in REQUIRED_PARAMETERS[self.kind]:
            if getattr(self, name) is None:
                raise ValueError(f"{self.kind.value} page needs '{name}'")
        if self.lateral is not None and self.kind != PageKind.RECTANGLE:
            raise ValueError("key 'lateral' only applies to rectangle pages")
        return self

    def to_chart(self) -> PageChart:
        if self.kind == PageKind.CAP:
            return SphericalCap(self.id, self.radius, self.theta0 or 0.0, self.theta1)
        if self.kind == PageKind.CYLINDER:
            return Cylinder(self.id, self.radius, self.length)
        if self.kind == PageKind.ANNULUS:
            return FlatAnnulus(self.id, self.r0 or 0.0, self.r1)
        if self.kind == PageKind.RECTANGLE:
            return FlatRectangle(self.id, self.length, self.width, self.lateral or Lateral.DIRICHLET)
        return Interval(self.id, self.length)

    def boundary_tags(self) -> Dict[Tuple[str, Edge], BoundaryTag]:
        tags = {}
        if self.start is not None:
            tags[(self.id, Edge.START)] = self.start
        if self.end is not None:
            tags[(self.id, Edge.END)] = self.end
        return tags


class BindingSpec(BaseModel):
    model_config = ConfigDict(extra="forbid")

    id: str
    kind: BindingKind = BindingKind.CIRCLE
    circumference: Optional[float] = None
    slots: Dict[int, SlotSpec] = Field(default_factory=dict)
    condition: str = "kirchhoff"
    A: Optional[Any] = None
    C: Optional[Any] = None
    sampling: Sampling = Sampling.CONSTANT

    @field_validator("circumference", mode="before")
    @classmethod
    def numeric(cls, value: Any) -> Any:
        return parse_number(value)

    @field_validator("condition")
    @classmethod
    def known_condition(cls, value: str) -> str:
        words = value.split()
        if not words:
            raise ValueError("condition is empty")
        names = [name.value for name in ConditionName]
        if words[0].lower() not in names:
            raise ValueError(f"unknown condition '{words[0]}' (expected one of {', '.join(names)})")
        if words[0].lower() == ConditionName.DELTA.value:
            if len(words) != 2:
                raise ValueError("delta condition reads 'delta <alpha>'")
            parse_number(words[1])
        elif len(words) != 1:
            raise ValueError(f"condition '{words[0]}' takes no parameters")
        return value

    @field_validator("A", "C", mode="before")
    @classmethod
    def matrix(cls, value: Any) -> Any:
        if value is None:
            return None
        return _raw_entries(value)

    @model_validator(mode="after")
    def consistent(self) -> "BindingSpec":
        k = len(self.slots)
        if sorted(self.slots) != list(range(k)):
            raise ValueError(f"slot indices must be 0..{k - 1}, got {sorted(self.slots)}")
        custom = self.condition.split()[0].lower() == ConditionName.CUSTOM.value
        if custom and (self.A is None or self.C is None):
            raise ValueError("custom condition needs both A and C")
        if not custom and (self.A is not None or self.C is not None):
            raise ValueError("A and C are only read for the custom condition")
        if custom:
            self.A = _as_complex(self.A, self.sampling)
            self.C = _as_complex(self.C, self.sampling)
            if self.A.shape != self.C.shape:
                raise ValueError(f"A and C shapes differ: {self.A.shape} vs {self.C.shape}")
            if self.A.shape[-1] != k or self.A.shape[-2] != k:
                raise ValueError(f"condition size mismatch: {k} slots but {self.A.shape[-2]}x{self.A.shape[-1]} matrices")
        if self.kind != BindingKind.POINT and self.circumference is None:
            raise ValueError(f"{self.kind.value} binding needs 'circumference'")
        if self.kind == BindingKind.POINT and self.circumference is not None:
            raise ValueError("point bindings have no circumference")
        return self

    def to_binding(self) -> Binding:
        return Binding(self.id, self.kind, self.circumference, len(self.slots))

    def adjacencies(self) -> List[Adjacency]:
        return [
            Adjacency(slot.page, slot.edge, self.id, index, slot.orientation)
            for index, slot in sorted(self.slots.items())
        ]

    def to_pair(self) -> ConditionPair:
        words = self.condition.split()
        name = words[0].lower()
        params: Dict[str, Any] = {}
        if name == ConditionName.DELTA.value:
            params["alpha"] = parse_number(words[1])
        elif name == ConditionName.CUSTOM.value:
            params = {"A": self.A, "C": self.C, "sampling": self.sampling}
        return named_condition(name, len(self.slots), params)


class SolverSettings(BaseModel):
    """Solver options; defaults < [solver] section < command-line flags."""

    model_config = ConfigDict(extra="forbid")

    modes: List[int] = Field(default_factory=lambda: list(range(-4, 5)))
    full2d: bool = False
    grid: Tuple[int, int] = (64, 64)
    nodes: int = Field(default=200, ge=8)
    angular_nodes: Optional[int] = Field(default=None, ge=8)
    count: int = Field(default=10, ge=1)
    tol: float = Field(default=1e-8, gt=0)
    shift: float = -1.0
    seed: int = 0
    cluster_tol: float = Field(default=1e-6, gt=0)
    workers: int = Field(default=1, ge=1)
    levels: int = Field(default=3, ge=3)
    resolution: Dict[str, int] = Field(default_factory=dict)

    @field_validator("modes", mode="before")
    @classmethod
    def mode_list(cls, value: Any) -> Any:
        if isinstance(value, int):
            return [value]
        if not isinstance(value, str):
            return value
        match = _RANGE.match(value)
        if match:
            first, last = int(match.group(1)), int(match.group(2))
            if last < first:
                raise ValueError(f"empty mode range '{value}'")
            return list(range(first, last + 1))
        try:
            return [int(part) for part in value.split(",") if part.strip()]
        except ValueError:
            raise ValueError(f"modes must read 'm0..m1' or a comma list, got '{value}'") from None

    @field_validator("modes")
    @classmethod
    def nonempty(cls, value: List[int]) -> List[int]:
        if not value:
            raise ValueError("at least one mode is required")
        return value

    @field_validator("grid", mode="before")
    @classmethod
    def grid_pair(cls, value: Any) -> Any:
        if not isinstance(value, str):
            return value
        match = _GRID.match(value)
        if not match:
            raise ValueError(f"grid must read 'NSxNT', got '{value}'")
        return int(match.group(1)), int(match.group(2))

    @field_validator("grid")
    @classmethod
    def grid_size(cls, value: Tuple[int, int]) -> Tuple[int, int]:
        if min(value) < 8:
            raise ValueError("grid sizes must be at least 8")
        return value

    @field_validator("tol", "shift", "cluster_tol", mode="before")
    @classmethod
    def numeric(cls, value: Any) -> Any:
        return parse_number(value)

    @property
    def mode_magnitudes(self) -> List[int]:
        return sorted({abs(m) for m in self.modes})
