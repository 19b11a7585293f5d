import json
import math

import pytest

from conftest import FIXTURES
from openbook.core.errors import OpenBookError
from openbook.core.oracles import (
    hemisphere_spectrum,
    interval_spectrum,
    parity_scan,
    rectangle_spectrum,
    sphere_spectrum,
)


def test_sphere_levels():
    reference = sphere_spectrum(3)
    assert reference.values == (0.0, 2.0, 6.0, 12.0)
    assert reference.multiplicities == (1, 3, 5, 7)
    assert list(reference.expanded(5)) == [0.0, 2.0, 2.0, 2.0, 6.0]
    assert sphere_spectrum(1, radius=2.0).values == (0.0, 0.5)


def test_parity_scan_matches_fixture():
    fixture = json.loads((FIXTURES / "hemisphere_parity.json").read_text())
    counts = parity_scan(fixture["l_max"])
    for bc in ("dirichlet", "neumann"):
        assert {str(l): n for l, n in counts[bc].items()} == fixture[bc]


@pytest.mark.parametrize("l", range(8))
def test_hemispheres_split_the_sphere(l):
    dirichlet = dict(zip(hemisphere_spectrum("dirichlet", 7).values, hemisphere_spectrum("dirichlet", 7).multiplicities))
    neumann = dict(zip(hemisphere_spectrum("neumann", 7).values, hemisphere_spectrum("neumann", 7).multiplicities))
    level = float(l * (l + 1))
    assert dirichlet.get(level, 0) == l
    assert neumann[level] == l + 1
    assert dirichlet.get(level, 0) + neumann[level] == 2 * l + 1


def test_two_by_one_rectangle():
    reference = rectangle_spectrum(2.0, 1.0, "dirichlet")
    scaled = [value / math.pi ** 2 for value in reference.values[:5]]
    assert scaled == pytest.approx([1.25, 2.0, 3.25, 4.25, 5.0])
    assert reference.multiplicities[:5] == (1, 1, 1, 1, 2)


def test_neumann_rectangle_starts_at_zero():
    reference = rectangle_spectrum(1.0, 1.0, "neumann")
    assert reference.values[0] == 0.0
    assert reference.multiplicities[1] == 2


def test_interval_graphs():
    chain = interval_spectrum([1.0, 1.0])
    assert chain.values[0] == pytest.approx((math.pi / 2) ** 2)
    circle = interval_spectrum([math.pi, math.pi], topology="circle")
    assert circle.values[:3] == pytest.approx((0.0, 1.0, 4.0))
    assert circle.multiplicities[:3] == (1, 2, 2)


@pytest.mark.parametrize(
    "call",
    [
        lambda: hemisphere_spectrum("robin", 3),
        lambda: rectangle_spectrum(1.0, -1.0, "dirichlet"),
        lambda: rectangle_spectrum(1.0, 1.0, "periodic"),
        lambda: interval_spectrum([1.0], topology="star"),
    ],
)
def test_rejected_arguments(call):
    with pytest.raises(OpenBookError):
        call()
