import math
from pathlib import Path

import numpy as np
import pytest

from openbook.core.complex import Adjacency, Binding, BindingKind, BoundaryTag, OpenBookComplex
from openbook.core.conditions import ConditionPair, named_condition
from openbook.core.pages import Edge, Interval, SphericalCap

ROOT = Path(__file__).parent
BOOKS = ROOT / "books"
FIXTURES = ROOT / "fixtures"


def caps_book(condition: ConditionPair = None, theta1: float = math.pi / 2) -> OpenBookComplex:
    """Two unit caps glued at their rims."""
    north = SphericalCap("north", 1.0, 0.0, theta1)
    south = SphericalCap("south", 1.0, 0.0, theta1)
    return OpenBookComplex(
        pages=[north, south],
        bindings=[Binding("eq", BindingKind.CIRCLE, 2.0 * math.pi, 2)],
        adjacencies=[
            Adjacency("north", Edge.END, "eq", 0, 1),
            Adjacency("south", Edge.END, "eq", 1, -1),
        ],
        conditions={"eq": condition if condition is not None else named_condition("kirchhoff", 2)},
        boundary_tags={("north", Edge.START): BoundaryTag.POLE, ("south", Edge.START): BoundaryTag.POLE},
    )


def chain_book(lengths=(1.0, 1.0)) -> OpenBookComplex:
    """Intervals joined end to start, Dirichlet at the two free ends."""
    pages = [Interval(f"e{i}", length) for i, length in enumerate(lengths)]
    bindings, adjacencies = [], []
    for i in range(len(pages) - 1):
        bindings.append(Binding(f"v{i}", BindingKind.POINT, None, 2))
        adjacencies.append(Adjacency(pages[i].id, Edge.END, f"v{i}", 0))
        adjacencies.append(Adjacency(pages[i + 1].id, Edge.START, f"v{i}", 1))
    return OpenBookComplex(
        pages=pages,
        bindings=bindings,
        adjacencies=adjacencies,
        conditions={b.id: named_condition("kirchhoff", 2) for b in bindings},
        boundary_tags={
            (pages[0].id, Edge.START): BoundaryTag.DIRICHLET,
            (pages[-1].id, Edge.END): BoundaryTag.DIRICHLET,
        },
    )


def random_unitary(k: int, seed: int = 0) -> np.ndarray:
    rng = np.random.default_rng(seed)
    z = rng.standard_normal((k, k)) + 1j * rng.standard_normal((k, k))
    q, r = np.linalg.qr(z)
    return q * (np.diag(r) / np.abs(np.diag(r)))[np.newaxis, :]


@pytest.fixture
def sphere_book() -> OpenBookComplex:
    return caps_book()


@pytest.fixture
def interval_chain() -> OpenBookComplex:
    return chain_book()
