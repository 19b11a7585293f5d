"""
Page Charts - metric profiles of axisymmetric and flat pages, and the per-mode
Sturm-Liouville reduction of the Laplace-Beltrami operator.

Every chart has a parameter s in [s0, s1] normal to its edges and, except for
intervals, an angular coordinate t. The metric is ds^2 + f(s)^2 dt^2.
"""

import math
from dataclasses import dataclass
from enum import Enum
from typing import Callable, List, Optional, Tuple, Union

import numpy as np
from scipy import integrate

from .errors import ChartError

POLE_RTOL = 1e-12
RANGE_RTOL = 1e-12

ArrayLike = Union[float, np.ndarray]


class PageKind(str, Enum):
    CAP = "cap"
    CYLINDER = "cylinder"
    ANNULUS = "annulus"
    RECTANGLE = "rectangle"
    INTERVAL = "interval"


class Edge(str, Enum):
    START = "start"
    END = "end"


class Lateral(str, Enum):
    DIRICHLET = "dirichlet"
    NEUMANN = "neumann"


@dataclass(frozen=True)
class PageChart:
    id: str

    kind = None

    @property
    def bounds(self) -> Tuple[float, float]:
        raise NotImplementedError

    @property
    def periodic(self) -> bool:
        return True

    @property
    def has_angle(self) -> bool:
        return True

    @property
    def angular_extent(self) -> Optional[float]:
        return 2.0 * math.pi

    def profile(self, s: ArrayLike) -> Tuple[ArrayLike, ArrayLike]:
        raise NotImplementedError

    def measure(self, a: ArrayLike, b: ArrayLike) -> ArrayLike:
        """Integral of f over [a, b]."""
        raise NotImplementedError

    @property
    def span(self) -> float:
        s0, s1 = self.bounds
        return s1 - s0

    def edge_coordinate(self, edge: Edge) -> float:
        s0, s1 = self.bounds
        return s0 if Edge(edge) == Edge.START else s1

    def _require_positive(self, **values: float) -> None:
        for name, value in values.items():
            if not (np.isfinite(value) and value > 0):
                raise ChartError(f"page '{self.id}': {name} must be positive, got {value}")


@dataclass(frozen=True)
class SphericalCap(PageChart):
    """Zone of a sphere of radius R between polar angles theta0 < theta1; s = R theta."""

    radius: float = 1.0
    theta0: float = 0.0
    theta1: float = math.pi / 2

    kind = PageKind.CAP

    def __post_init__(self):
        self._require_positive(radius=self.radius)
        if not (0.0 <= self.theta0 < self.theta1 <= math.pi * (1 + RANGE_RTOL)):
            raise ChartError(
                f"page '{self.id}': need 0 <= theta0 < theta1 <= pi, got [{self.theta0}, {self.theta1}]"
            )

    @property
    def bounds(self) -> Tuple[float, float]:
        return self.radius * self.theta0, self.radius * self.theta1

    def profile(self, s):
        R = self.radius
        return R * np.sin(s / R), np.cos(s / R)

    def measure(self, a, b):
        R = self.radius
        return R * R * (np.cos(a / R) - np.cos(b / R))


@dataclass(frozen=True)
class Cylinder(PageChart):
    radius: float = 1.0
    length: float = 1.0

    kind = PageKind.CYLINDER

    def __post_init__(self):
        self._require_positive(radius=self.radius, length=self.length)

    @property
    def bounds(self) -> Tuple[float, float]:
        return 0.0, self.length

    def profile(self, s):
        s = np.asarray(s, dtype=float)
        return self.radius + 0.0 * s, 0.0 * s

    def measure(self, a, b):
        return self.radius * (np.asarray(b) - np.asarray(a))


@dataclass(frozen=True)
class FlatAnnulus(PageChart):
    """Polar coordinates r in [r0, r1]; r0 = 0 is a disc with a pole at the centre."""

    r0: float = 0.0
    r1: float = 1.0

    kind = PageKind.ANNULUS

    def __post_init__(self):
        if not (0.0 <= self.r0 < self.r1 and np.isfinite(self.r1)):
            raise ChartError(f"page '{self.id}': need 0 <= r0 < r1, got [{self.r0}, {self.r1}]")

    @property
    def bounds(self) -> Tuple[float, float]:
        return self.r0, self.r1

    def profile(self, s):
        s = np.asarray(s, dtype=float)
        return s, 1.0 + 0.0 * s

    def measure(self, a, b):
        return 0.5 * (np.asarray(b) ** 2 - np.asarray(a) ** 2)


@dataclass(frozen=True)
class FlatRectangle(PageChart):
    """[0, L] x [0, W]; the bindable edges are s = 0 and s = L, the lateral sides carry a fixed tag."""

    length: float = 1.0
    width: float = 1.0
    lateral: Lateral = Lateral.DIRICHLET

    kind = PageKind.RECTANGLE

    def __post_init__(self):
        self._require_positive(length=self.length, width=self.width)
        object.__setattr__(self, "lateral", Lateral(self.lateral))

    @property
    def bounds(self) -> Tuple[float, float]:
        return 0.0, self.length

    @property
    def periodic(self) -> bool:
        return False

    @property
    def angular_extent(self) -> Optional[float]:
        return self.width

    def profile(self, s):
        s = np.asarray(s, dtype=float)
        return 1.0 + 0.0 * s, 0.0 * s

    def measure(self, a, b):
        return np.asarray(b) - np.asarray(a)


@dataclass(frozen=True)
class Interval(PageChart):
    length: float = 1.0

    kind = PageKind.INTERVAL

    def __post_init__(self):
        self._require_positive(length=self.length)

    @property
    def bounds(self) -> Tuple[float, float]:
        return 0.0, self.length

    @property
    def periodic(self) -> bool:
        return False

    @property
    def has_angle(self) -> bool:
        return False

    @property
    def angular_extent(self) -> Optional[float]:
        return None

    def profile(self, s):
        s = np.asarray(s, dtype=float)
        return 1.0 + 0.0 * s, 0.0 * s

    def measure(self, a, b):
        return np.asarray(b) - np.asarray(a)


def metric_profile(chart: PageChart, s: float) -> Tuple[float, float]:
    """(f(s), f'(s)) for s in the closed parameter interval."""
    s0, s1 = chart.bounds
    slack = RANGE_RTOL * max(1.0, abs(s0), abs(s1))
    if not (s0 - slack <= s <= s1 + slack):
        raise ChartError(f"page '{chart.id}': s = {s} outside [{s0}, {s1}]")
    f, df = chart.profile(float(s))
    return float(f), float(df)


def pole_edges(chart: PageChart) -> List[Edge]:
    """Edges where the profile vanishes (coordinate singularities, not boundaries)."""
    if not chart.has_angle or not chart.periodic:
        return []
    s0, s1 = chart.bounds
    samples = np.abs(chart.profile(np.array([s0, 0.5 * (s0 + s1), s1]))[0])
    scale = float(np.max(samples))
    poles = []
    if samples[0] <= POLE_RTOL * scale:
        poles.append(Edge.START)
    if samples[2] <= POLE_RTOL * scale:
        poles.append(Edge.END)
    return poles


def boundary_circumference(chart: PageChart, edge: Edge) -> Optional[float]:
    """2 pi f at the edge; the segment width for rectangles; None (a point) for intervals."""
    if not chart.has_angle:
        return None
    if not chart.periodic:
        return chart.angular_extent
    f, _ = chart.profile(chart.edge_coordinate(edge))
    return 2.0 * math.pi * float(f)


def angular_symbol(chart: PageChart, m: int) -> float:
    """Eigenvalue of -d^2/dt^2 on the angular factor of mode m."""
    if not chart.has_angle:
        return 0.0
    m = abs(int(m))
    if chart.periodic:
        return float(m * m)
    if chart.lateral == Lateral.DIRICHLET and m == 0:
        raise ChartError(f"page '{chart.id}': mode 0 vanishes under Dirichlet lateral sides")
    return (m * math.pi / chart.width) ** 2


def angular_norm(chart: PageChart, m: int) -> float:
    """Squared L2 norm of the angular factor of mode m over the angular range."""
    if not chart.has_angle:
        return 1.0
    if chart.periodic:
        return 2.0 * math.pi
    m = abs(int(m))
    if m == 0:
        return chart.width
    return chart.width / 2.0


def angular_factor(chart: PageChart, m: int, t: ArrayLike) -> np.ndarray:
    """Angular factor of mode m: e^{imt}, or sin/cos(m pi t / W) on rectangles."""
    t = np.asarray(t, dtype=float)
    if not chart.has_angle:
        return np.ones_like(t, dtype=complex)
    if chart.periodic:
        return np.exp(1j * m * t)
    m = abs(int(m))
    phase = m * math.pi * t / chart.width
    if chart.lateral == Lateral.DIRICHLET:
        return np.sin(phase).astype(complex)
    return np.cos(phase).astype(complex)


@dataclass(frozen=True)
class SLProblem:
    """-(1/f)(f v')' + (symbol/f^2) v = lambda v on [s0, s1] with weight f."""

    chart: PageChart
    m: int
    symbol: float

    @property
    def page_id(self) -> str:
        return self.chart.id

    @property
    def bounds(self) -> Tuple[float, float]:
        return self.chart.bounds

    def coefficients(self, s: ArrayLike) -> Tuple[ArrayLike, ArrayLike, ArrayLike]:
        """(p, q, w) of -(p v')' + q v = lambda w v."""
        f, _ = self.chart.profile(s)
        with np.errstate(divide="ignore"):
            q = self.symbol / np.asarray(f) if self.symbol else np.zeros_like(f)
        return f, q, f

    def potential(self, s: ArrayLike) -> ArrayLike:
        """q / w, the symbol over f squared."""
        _, q, w = self.coefficients(s)
        with np.errstate(divide="ignore", invalid="ignore"):
            return np.asarray(q) / np.asarray(w)

    def inner(self, u: Callable[[float], complex], v: Callable[[float], complex]) -> complex:
        """Weighted inner product, integral of u conj(v) f ds."""
        s0, s1 = self.bounds

        def integrand(s: float) -> complex:
            f, _ = self.chart.profile(s)
            return u(s) * np.conj(v(s)) * float(f)

        re, _ = integrate.quad(lambda s: integrand(s).real, s0, s1, epsabs=1e-13, epsrel=1e-12)
        im, _ = integrate.quad(lambda s: integrand(s).imag, s0, s1, epsabs=1e-13, epsrel=1e-12)
        return complex(re, im)

    def angular_norm(self) -> float:
        return angular_norm(self.chart, self.m)


def sl_reduce(chart: PageChart, m: int) -> SLProblem:
    if not chart.has_angle:
        raise ChartError(f"page '{chart.id}': interval pages have no angular coordinate to reduce")
    return SLProblem(chart=chart, m=abs(int(m)), symbol=angular_symbol(chart, m))


def page_inner(
    chart: PageChart,
    u: Callable[[float, float], complex],
    v: Callable[[float, float], complex],
) -> complex:
    """L2 inner product on the page, integral of u conj(v) f ds dt."""
    s0, s1 = chart.bounds
    extent = chart.angular_extent
    if extent is None:
        raise ChartError(f"page '{chart.id}': interval pages have no 2-D measure")

    def integrand(t: float, s: float) -> complex:
        f, _ = chart.profile(s)
        return u(s, t) * np.conj(v(s, t)) * float(f)

    options = dict(epsabs=1e-13, epsrel=1e-12)
    re, _ = integrate.dblquad(lambda t, s: integrand(t, s).real, s0, s1, 0.0, extent, **options)
    im, _ = integrate.dblquad(lambda t, s: integrand(t, s).imag, s0, s1, 0.0, extent, **options)
    return complex(re, im)
