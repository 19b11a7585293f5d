import math

import pytest

from conftest import BOOKS, caps_book
from openbook.bookfile import load_book
from openbook.core.complex import (
    Adjacency,
    Binding,
    BindingKind,
    BoundaryTag,
    OpenBookComplex,
    binding_degree,
    validate_complex,
)
from openbook.core.conditions import named_condition
from openbook.core.errors import UnknownIdError
from openbook.core.pages import Cylinder, Edge, FlatRectangle, Interval, SphericalCap


def codes(book):
    return [issue.code for issue in validate_complex(book)]


def test_sphere_from_caps_is_well_formed(sphere_book):
    assert validate_complex(sphere_book).ok
    assert sphere_book.dimension == 2
    assert sphere_book.axisymmetric
    assert binding_degree(sphere_book, "eq") == 2
    assert sphere_book.slot_map()[("eq", 1)] == ("south", Edge.END)
    assert sphere_book.edge_map()[("north", Edge.END)] == ("eq", 0)


def test_interval_chain_is_one_dimensional(interval_chain):
    assert validate_complex(interval_chain).ok
    assert interval_chain.dimension == 1
    assert not interval_chain.axisymmetric


def test_circumference_mismatch():
    report = validate_complex(caps_book(theta1=math.pi / 3))
    assert not report.ok
    assert any(m.startswith("circumference mismatch at binding eq") for m in report.messages())


def test_condition_size_mismatch():
    book = caps_book(named_condition("kirchhoff", 3))
    messages = validate_complex(book).messages()
    assert any(m.startswith("condition size mismatch at binding eq") for m in messages)


def test_missing_condition_and_unknown_ids(sphere_book):
    book = OpenBookComplex(
        pages=sphere_book.pages,
        bindings=sphere_book.bindings,
        adjacencies=list(sphere_book.adjacencies) + [Adjacency("ghost", Edge.END, "nowhere", 2)],
        conditions={},
        boundary_tags=sphere_book.boundary_tags,
    )
    found = codes(book)
    assert "condition" in found
    assert "unknown-page" in found
    assert "unknown-binding" in found
    with pytest.raises(UnknownIdError):
        book.page("ghost")
    with pytest.raises(UnknownIdError):
        binding_degree(book, "nowhere")
    with pytest.raises(UnknownIdError):
        book.condition("eq")


def test_edges_need_a_treatment():
    tube = Cylinder("tube", 1.0, 1.0)
    book = OpenBookComplex(pages=[tube], bindings=[], adjacencies=[], boundary_tags={("tube", Edge.START): "dirichlet"})
    report = validate_complex(book)
    assert [issue.code for issue in report] == ["edge-unassigned"]
    assert report.issues[0].ids == ("tube",)


def test_pole_rules():
    cap = SphericalCap("cap", 1.0, 0.0, math.pi)
    book = OpenBookComplex(pages=[cap], bindings=[], adjacencies=[], boundary_tags={("cap", Edge.START): "neumann"})
    assert "pole-tag" in codes(book)
    closed = OpenBookComplex(pages=[cap], bindings=[], adjacencies=[])
    assert validate_complex(closed).ok


def test_edge_attached_twice(sphere_book):
    book = OpenBookComplex(
        pages=sphere_book.pages,
        bindings=list(sphere_book.bindings) + [Binding("extra", BindingKind.CIRCLE, 2 * math.pi)],
        adjacencies=list(sphere_book.adjacencies) + [Adjacency("north", Edge.END, "extra", 0)],
        conditions={**sphere_book.conditions, "extra": named_condition("dirichlet", 1)},
        boundary_tags=sphere_book.boundary_tags,
    )
    assert "edge-reused" in codes(book)


def test_binding_kinds_must_match_pages():
    strip = FlatRectangle("strip", 1.0, 1.0)
    line = Interval("line", 1.0)
    book = OpenBookComplex(
        pages=[strip, line],
        bindings=[Binding("p", BindingKind.POINT, None, 2)],
        adjacencies=[Adjacency("strip", Edge.END, "p", 0), Adjacency("line", Edge.START, "p", 1)],
        conditions={"p": named_condition("kirchhoff", 2)},
        boundary_tags={("strip", Edge.START): "dirichlet", ("line", Edge.END): "dirichlet"},
    )
    found = codes(book)
    assert "kind" in found
    assert "mixed-dimension" in found


def test_declared_degree_mismatch(sphere_book):
    book = OpenBookComplex(
        pages=sphere_book.pages,
        bindings=[Binding("eq", BindingKind.CIRCLE, 2 * math.pi, 3)],
        adjacencies=sphere_book.adjacencies,
        conditions=sphere_book.conditions,
        boundary_tags=sphere_book.boundary_tags,
    )
    assert any("degree mismatch at binding eq" in m for m in validate_complex(book).messages())


def test_with_conditions(sphere_book):
    swapped = sphere_book.with_conditions({"eq": named_condition("dirichlet", 2)})
    assert swapped.condition("eq").label == "dirichlet"
    assert sphere_book.condition("eq").label == "kirchhoff"
    assert swapped.outer_tag("north", Edge.START) == BoundaryTag.POLE


def test_radius_mismatch():
    north = SphericalCap("north", 0.9, 0.0, math.pi / 2)
    south = SphericalCap("south", 1.0, 0.0, math.pi / 2)
    book = caps_book()
    book = OpenBookComplex(
        pages=[north, south],
        bindings=book.bindings,
        adjacencies=book.adjacencies,
        conditions=book.conditions,
        boundary_tags=book.boundary_tags,
    )
    assert any(m.startswith("circumference mismatch at binding eq") for m in validate_complex(book).messages())


def test_three_spheres_degree():
    book = load_book(BOOKS / "three-spheres").book
    assert binding_degree(book, "ring") == 6


def test_angular_signs_follow_orientations(sphere_book):
    assert sphere_book.angular_signs() == {"north": 1, "south": -1}
    dumbbell = load_book(BOOKS / "dumbbell").book
    assert dumbbell.angular_signs() == {"left": 1, "neck": 1, "right": -1}
    three = load_book(BOOKS / "three-spheres").book.angular_signs()
    assert [three[page] for page in ("a_upper", "a_lower", "b_small", "b_large", "c_small", "c_large")] == [1, -1, 1, -1, 1, -1]
