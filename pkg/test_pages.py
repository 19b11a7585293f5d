import math

import numpy as np
import pytest
from scipy.integrate import trapezoid

from openbook.core.errors import ChartError
from openbook.core.pages import (
    Cylinder,
    Edge,
    FlatAnnulus,
    FlatRectangle,
    Interval,
    Lateral,
    SphericalCap,
    angular_factor,
    angular_norm,
    angular_symbol,
    boundary_circumference,
    metric_profile,
    page_inner,
    pole_edges,
    sl_reduce,
)


def test_cap_profile():
    cap = SphericalCap("c", 2.0, 0.0, math.pi / 2)
    f, df = metric_profile(cap, math.pi)
    assert f == pytest.approx(2.0)
    assert df == pytest.approx(0.0, abs=1e-15)
    assert cap.bounds == (0.0, math.pi)
    with pytest.raises(ChartError):
        metric_profile(cap, 3.5)


@pytest.mark.parametrize(
    "chart, expected",
    [
        (SphericalCap("c", 1.0, 0.0, math.pi / 2), [Edge.START]),
        (SphericalCap("s", 1.0, 0.0, math.pi), [Edge.START, Edge.END]),
        (SphericalCap("z", 1.0, 0.3, 2.0), []),
        (FlatAnnulus("d", 0.0, 1.0), [Edge.START]),
        (FlatAnnulus("a", 0.5, 1.0), []),
        (Cylinder("t", 1.0, 2.0), []),
        (FlatRectangle("r", 1.0, 1.0), []),
        (Interval("i", 1.0), []),
    ],
)
def test_pole_edges(chart, expected):
    assert pole_edges(chart) == expected


def test_boundary_circumference():
    assert boundary_circumference(SphericalCap("c", 1.0, 0.0, math.pi / 2), Edge.END) == pytest.approx(2 * math.pi)
    assert boundary_circumference(SphericalCap("c", 1.0, 0.0, 5 * math.pi / 6), Edge.END) == pytest.approx(math.pi)
    assert boundary_circumference(Cylinder("t", 0.5, 2.0), Edge.START) == pytest.approx(math.pi)
    assert boundary_circumference(FlatRectangle("r", 1.0, 0.25), Edge.END) == 0.25
    assert boundary_circumference(Interval("i", 1.0), Edge.END) is None


def test_angular_symbols():
    assert angular_symbol(Cylinder("t", 1.0, 1.0), -3) == 9.0
    assert angular_symbol(Interval("i", 1.0), 5) == 0.0
    rectangle = FlatRectangle("r", 1.0, 2.0)
    assert angular_symbol(rectangle, 2) == pytest.approx(math.pi ** 2)
    with pytest.raises(ChartError):
        angular_symbol(rectangle, 0)
    assert angular_symbol(FlatRectangle("n", 1.0, 2.0, Lateral.NEUMANN), 0) == 0.0


def test_angular_factor_norms():
    t = np.linspace(0.0, 2.0, 2001)
    rectangle = FlatRectangle("r", 1.0, 2.0)
    factor = angular_factor(rectangle, 3, t)
    assert factor[0] == 0.0
    assert trapezoid(np.abs(factor) ** 2, t) == pytest.approx(angular_norm(rectangle, 3), rel=1e-5)
    assert angular_norm(Cylinder("t", 1.0, 1.0), 4) == pytest.approx(2 * math.pi)


def test_measures():
    cap = SphericalCap("c", 1.0, 0.0, math.pi / 2)
    assert 2 * math.pi * cap.measure(0.0, math.pi / 2) == pytest.approx(2 * math.pi)
    assert FlatAnnulus("d", 0.0, 2.0).measure(0.0, 2.0) == pytest.approx(2.0)


def test_sturm_liouville_reduction():
    cap = SphericalCap("c", 1.0, 0.0, math.pi / 2)
    problem = sl_reduce(cap, -2)
    assert problem.m == 2 and problem.symbol == 4.0
    assert problem.page_id == "c"
    assert problem.inner(lambda s: 1.0, lambda s: 1.0) == pytest.approx(1.0)
    assert problem.potential(np.array([math.pi / 2]))[0] == pytest.approx(4.0)
    p, q, w = problem.coefficients(np.array([math.pi / 6]))
    assert np.allclose([p[0], q[0], w[0]], [0.5, 8.0, 0.5])
    with pytest.raises(ChartError):
        sl_reduce(Interval("i", 1.0), 0)


def test_page_inner_is_area():
    cap = SphericalCap("c", 1.0, 0.0, math.pi / 2)
    assert page_inner(cap, lambda s, t: 1.0, lambda s, t: 1.0).real == pytest.approx(2 * math.pi, rel=1e-9)
    rectangle = FlatRectangle("r", 2.0, 3.0)
    assert page_inner(rectangle, lambda s, t: 1.0, lambda s, t: 1.0).real == pytest.approx(6.0)


@pytest.mark.parametrize(
    "chart",
    [
        SphericalCap("c", 1.0, 0.0, 2.0),
        FlatAnnulus("a", 0.5, 2.0),
        Cylinder("t", 0.7, 1.5),
        FlatRectangle("r", 2.0, 3.0, lateral="neumann"),
    ],
    ids=lambda chart: chart.kind.value,
)
@pytest.mark.parametrize("m", [0, 1, 3])
def test_mode_inner_product_matches_page_inner(chart, m):
    problem = sl_reduce(chart, m)
    s0, _ = chart.bounds

    def p(s):
        return 1.0 + 2.0 * (s - s0) - 0.5j * (s - s0) ** 3

    def q(s):
        return (s - s0) ** 2 - 3.0 + 1j * (s - s0)

    def u(s, t):
        return p(s) * complex(angular_factor(chart, m, t))

    def v(s, t):
        return q(s) * complex(angular_factor(chart, m, t))

    reduced = problem.inner(p, q) * problem.angular_norm()
    assert reduced == pytest.approx(page_inner(chart, u, v), rel=1e-8, abs=1e-10)


@pytest.mark.parametrize(
    "build",
    [
        lambda: SphericalCap("c", 1.0, 1.0, 0.5),
        lambda: SphericalCap("c", -1.0, 0.0, 1.0),
        lambda: Cylinder("t", 1.0, 0.0),
        lambda: FlatAnnulus("a", 1.0, 0.5),
        lambda: Interval("i", float("nan")),
    ],
)
def test_bad_parameters(build):
    with pytest.raises(ChartError):
        build()
