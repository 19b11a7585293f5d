import math

import pytest
from pydantic import ValidationError

from conftest import BOOKS
from openbook.bookfile import SolverSettings, emit_book_file, load_book, parse_book_file
from openbook.bookfile.models import parse_number
from openbook.core.errors import BookFileError
from openbook.core.pages import Edge, SphericalCap

HEMISPHERES = """\
[page north]
kind = cap
radius = 1
theta1 = pi/2
start = pole

[page south]
kind = cap
radius = 1
theta1 = pi/2
start = pole

[binding eq]
circumference = 2*pi
slot.0 = north end +1
slot.1 = south end -1
{condition}
"""


def parse_errors(text):
    with pytest.raises(BookFileError) as caught:
        parse_book_file(text)
    return caught.value.format_lines()


@pytest.mark.parametrize("path", sorted(BOOKS.glob("*.book")), ids=lambda p: p.stem)
def test_shipped_books_parse(path):
    parsed = load_book(path)
    assert parsed.book.pages


def test_sphere_from_caps_settings():
    parsed = load_book(BOOKS / "sphere-from-caps")
    assert parsed.settings.modes == list(range(-4, 5))
    assert parsed.settings.nodes == 400
    assert parsed.settings.count == 16
    assert parsed.settings.cluster_tol == 0.01
    assert parsed.book.page("north") == SphericalCap("north", 1.0, 0.0, math.pi / 2)
    assert parsed.book.condition("eq").label == "kirchhoff"
    assert parsed.position_of("eq")[0] == 17


@pytest.mark.parametrize("name", ["sphere-from-caps", "flat-two-page", "nonselfadjoint", "interval-circle"])
def test_emit_round_trip(name):
    book, settings = parse_book_file((BOOKS / f"{name}.book").read_text())
    again, settings_again = parse_book_file(emit_book_file(book, settings))
    assert again.pages == book.pages
    assert again.bindings == book.bindings
    assert again.adjacencies == book.adjacencies
    assert again.conditions == book.conditions
    assert again.boundary_tags == book.boundary_tags
    assert settings_again == settings


def test_delta_condition_and_page_resolution():
    text = HEMISPHERES.format(condition="condition = delta -2.5").replace("start = pole\n\n[page south]", "start = pole\nnodes = 64\n\n[page south]")
    book, settings = parse_book_file(text)
    assert book.condition("eq").label == "delta -2.5"
    assert settings.resolution == {"north": 64}
    again, settings_again = parse_book_file(emit_book_file(book, settings))
    assert settings_again.resolution == {"north": 64}


def test_unknown_key_is_positioned():
    lines = parse_errors(HEMISPHERES.replace("radius = 1\ntheta1", "radus = 1\ntheta1", 1).format(condition=""))
    assert any(line.startswith("line 3,") and "unknown key 'radus'" in line for line in lines)


def test_unknown_condition():
    lines = parse_errors(HEMISPHERES.format(condition="condition = robin"))
    assert any("unknown condition 'robin'" in line and line.startswith("line 17,") for line in lines)


def test_custom_size_mismatch():
    text = HEMISPHERES.format(condition="condition = custom\nA = [[1, 0, 0], [0, 1, 0], [0, 0, 1]]\nC = [[0, 0, 0], [0, 0, 0], [0, 0, 0]]")
    lines = parse_errors(text)
    assert any("condition size mismatch" in line for line in lines)


def test_circumference_mismatch_points_at_binding():
    lines = parse_errors(HEMISPHERES.replace("circumference = 2*pi", "circumference = pi").format(condition=""))
    assert any(line.startswith("line 13,") and "circumference mismatch at binding eq" in line for line in lines)


def test_structural_diagnostics():
    lines = parse_errors("radius = 1\n[page]\n[shelf x]\n[solver]\nthis is not an entry\n")
    assert lines[0].startswith("line 1, column 1: key 'radius' outside")
    assert any(line.startswith("line 2,") and "needs an id" in line for line in lines)
    assert any(line.startswith("line 3,") and "unknown section 'shelf'" in line for line in lines)
    assert any(line.startswith("line 5,") for line in lines)


def test_missing_file():
    with pytest.raises(BookFileError, match="no such book file"):
        load_book(BOOKS / "no-such-book")


def test_unvalidated_parse_keeps_bad_books():
    text = HEMISPHERES.replace("circumference = 2*pi", "circumference = pi").format(condition="")
    book, _ = parse_book_file(text, validate=False)
    assert book.binding("eq").circumference == pytest.approx(math.pi)
    assert book.adjacencies[1].edge == Edge.END


def test_numbers():
    assert parse_number("2*pi") == pytest.approx(2 * math.pi)
    assert parse_number("-sqrt(2)/2") == pytest.approx(-math.sqrt(2) / 2)
    assert parse_number("1e-3") == 1e-3
    with pytest.raises(ValueError):
        parse_number("pie")


def test_solver_settings():
    assert SolverSettings.model_validate({"modes": "-2..2"}).modes == [-2, -1, 0, 1, 2]
    assert SolverSettings.model_validate({"modes": "1,3"}).mode_magnitudes == [1, 3]
    assert SolverSettings.model_validate({"modes": "-3..3"}).mode_magnitudes == [0, 1, 2, 3]
    assert SolverSettings.model_validate({"grid": "32x64"}).grid == (32, 64)
    for bad in ({"grid": "4x4"}, {"modes": "3..1"}, {"levels": 2}, {"count": 0}, {"colour": "red"}):
        with pytest.raises(ValidationError):
            SolverSettings.model_validate(bad)
