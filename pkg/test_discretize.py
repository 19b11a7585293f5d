"""
Assembly and trace elimination: sizes, decoupling under Dirichlet bindings,
agreement with closed-form spectra and mode/2-D block equivalence.
"""

import math

import numpy as np
import pytest

from conftest import caps_book, chain_book
from openbook.core.complex import Adjacency, Binding, BindingKind, OpenBookComplex
from openbook.core.conditions import ConditionPair, Sampling, named_condition
from openbook.core.discretize import (
    AngularGrid,
    build_full_system,
    build_mode_system,
    discrete_angular_symbol,
    eliminate_traces,
    page_line,
    symmetry_defect,
)
from openbook.core.eigensolve import dense_reference_eig
from openbook.core.errors import AssemblyError, DimensionMismatchError, TraceBlockError
from openbook.core.pages import Cylinder, FlatRectangle, Interval, SphericalCap


def test_page_line_masses_sum_to_area():
    cap = SphericalCap("c", 1.0, 0.0, math.pi / 2)
    line = page_line(cap, 50)
    assert line.s.size == 51
    assert line.mass.sum() == pytest.approx(1.0, rel=1e-12)
    assert line.potential[0] == 0.0


def test_angular_grids():
    periodic = AngularGrid.for_chart(Cylinder("t", 1.0, 1.0), 16)
    assert periodic.size == 16 and periodic.periodic
    assert periodic.align(3, -1) == 13
    assert np.allclose(periodic.stiffness @ np.ones(16), 0.0)
    dirichlet = AngularGrid.for_chart(FlatRectangle("r", 1.0, 1.0), 16)
    assert dirichlet.size == 15
    assert dirichlet.align(0, -1) == 14


def test_discrete_symbol_approaches_m_squared():
    cap = SphericalCap("c", 1.0, 0.0, math.pi / 2)
    assert discrete_angular_symbol(cap, 3, 4096) == pytest.approx(9.0, rel=1e-5)
    assert discrete_angular_symbol(cap, 0, 16) == 0.0


def test_mode_system_layout(sphere_book):
    system = build_mode_system(sphere_book, 0, 20)
    # 19 interior nodes plus the pole on each cap; one trace per slot
    assert system.n_interior == 40
    assert system.n_trace == 2
    assert len(system.blocks) == 1
    dropped = build_mode_system(sphere_book, 1, 20)
    assert dropped.n_interior == 38


def test_mode_zero_matches_sphere(sphere_book):
    reduced = eliminate_traces(build_mode_system(sphere_book, 0, 100))
    values = dense_reference_eig(reduced).eigenvalues.real[:4]
    for value, exact in zip(values, (0.0, 2.0, 6.0, 12.0)):
        assert abs(value - exact) <= 1e-2 * (1.0 + exact)


def test_dirichlet_binding_decouples_pages():
    book = caps_book(named_condition("dirichlet", 2))
    system = build_mode_system(book, 0, 40)
    reduced = eliminate_traces(system)
    assert abs(reduced.E).max() == 0.0
    interior = system.stiffness[: system.n_interior, : system.n_interior]
    assert abs(reduced.K - interior).max() == 0.0
    assert symmetry_defect(reduced) <= 1e-14


def test_chain_matches_long_interval(interval_chain):
    reduced = eliminate_traces(build_mode_system(interval_chain, 0, 200))
    values = dense_reference_eig(reduced).eigenvalues.real[:4]
    exact = [(n * math.pi / 2.0) ** 2 for n in range(1, 5)]
    assert np.allclose(values, exact, rtol=1e-3)


def test_splitting_an_interval_is_neutral():
    whole = OpenBookComplex(
        pages=[Interval("e", 2.0)],
        bindings=[],
        adjacencies=[],
        boundary_tags={("e", "start"): "dirichlet", ("e", "end"): "dirichlet"},
    )
    unsplit = dense_reference_eig(eliminate_traces(build_mode_system(whole, 0, 200))).eigenvalues.real[:10]
    split = dense_reference_eig(eliminate_traces(build_mode_system(chain_book((1.0, 1.0)), 0, 100))).eigenvalues.real[:10]
    exact = np.array([(n * math.pi / 2.0) ** 2 for n in range(1, 11)])
    assert np.all(np.abs(split - unsplit) < np.abs(unsplit - exact))


def test_splitting_a_cap_is_neutral():
    kirchhoff = named_condition("kirchhoff", 2)
    split_book = OpenBookComplex(
        pages=[
            SphericalCap("north_cap", 1.0, 0.0, math.pi / 4),
            SphericalCap("north_zone", 1.0, math.pi / 4, math.pi / 2),
            SphericalCap("south", 1.0, 0.0, math.pi / 2),
        ],
        bindings=[
            Binding("split", BindingKind.CIRCLE, 2.0 * math.pi * math.sin(math.pi / 4), 2),
            Binding("eq", BindingKind.CIRCLE, 2.0 * math.pi, 2),
        ],
        adjacencies=[
            Adjacency("north_cap", "end", "split", 0),
            Adjacency("north_zone", "start", "split", 1),
            Adjacency("north_zone", "end", "eq", 0),
            Adjacency("south", "end", "eq", 1, -1),
        ],
        conditions={"split": kirchhoff, "eq": kirchhoff},
        boundary_tags={("north_cap", "start"): "pole", ("south", "start"): "pole"},
    )
    resolution = {"north_cap": 32, "north_zone": 32}
    unsplit = dense_reference_eig(eliminate_traces(build_mode_system(caps_book(), 0, 64))).eigenvalues.real[1:6]
    split = dense_reference_eig(eliminate_traces(build_mode_system(split_book, 0, 64, resolution=resolution)))
    exact = np.array([l * (l + 1.0) for l in range(1, 6)])
    assert np.all(np.abs(split.eigenvalues.real[1:6] - unsplit) < np.abs(unsplit - exact))


def test_full_system_is_block_equivalent_to_modes(sphere_book):
    n_t = 16
    full = dense_reference_eig(eliminate_traces(build_full_system(sphere_book, (24, n_t))))
    union = []
    for m in range(n_t // 2 + 1):
        reduced = eliminate_traces(build_mode_system(sphere_book, m, 24, angular_nodes=n_t))
        values = dense_reference_eig(reduced).eigenvalues.real
        copies = 1 if m in (0, n_t // 2) else 2
        union.extend(np.repeat(values, copies))
    union = np.sort(union)[:20]
    assert np.allclose(full.eigenvalues.real[:20], union, rtol=1e-8, atol=1e-9)


def per_node_kirchhoff(samples):
    """Kirchhoff rows scrambled by a different invertible matrix at every node."""
    kirchhoff = named_condition("kirchhoff", 2)
    scramble = [np.array([[1.0 + node / samples, 0.3], [0.0, 2.0 - 0.5j]]) for node in range(samples)]
    return ConditionPair(
        np.stack([G @ kirchhoff.A for G in scramble]),
        np.stack([G @ kirchhoff.C for G in scramble]),
        sampling=Sampling.PER_NODE,
    )


def test_per_node_condition_in_full_system(sphere_book):
    grid = (24, 16)
    constant = dense_reference_eig(eliminate_traces(build_full_system(sphere_book, grid)))
    sampled_book = sphere_book.with_conditions({"eq": per_node_kirchhoff(16)})
    sampled = dense_reference_eig(eliminate_traces(build_full_system(sampled_book, grid)))
    assert np.allclose(sampled.eigenvalues.real[:12], constant.eigenvalues.real[:12], rtol=1e-8, atol=1e-9)
    assert sampled.max_imaginary_ratio() <= 1e-8

    with pytest.raises(DimensionMismatchError, match="15 samples"):
        build_full_system(sphere_book.with_conditions({"eq": per_node_kirchhoff(15)}), grid)
    with pytest.raises(AssemblyError):
        build_mode_system(sampled_book, 0, 24)


def test_singular_trace_block_is_reported(sphere_book):
    h = (1.0 * (math.pi / 2) - 0.0) / 100
    mu = 3.0 * (0.5 / h)
    pair = ConditionPair([[-mu, 0.0], [0.0, 1.0]], [[1.0, 0.0], [0.0, 0.0]])
    system = build_mode_system(sphere_book.with_conditions({"eq": pair}), 0, 100)
    with pytest.raises(TraceBlockError) as caught:
        eliminate_traces(system)
    assert caught.value.binding_id == "eq"


def test_rectangle_mode_zero_is_inactive():
    left, right = FlatRectangle("left", 1.0, 1.0), FlatRectangle("right", 1.0, 1.0)
    book = OpenBookComplex(
        pages=[left, right],
        bindings=[Binding("seam", BindingKind.SEGMENT, 1.0, 2)],
        adjacencies=[Adjacency("left", "end", "seam", 0), Adjacency("right", "start", "seam", 1)],
        conditions={"seam": named_condition("kirchhoff", 2)},
        boundary_tags={("left", "start"): "dirichlet", ("right", "end"): "dirichlet"},
    )
    assert build_mode_system(book, 0, 20).n == 0
    reduced = eliminate_traces(build_mode_system(book, 1, 50))
    lowest = dense_reference_eig(reduced).eigenvalues.real[0]
    assert lowest == pytest.approx(math.pi ** 2 * 1.25, rel=1e-3)


def test_too_few_nodes(sphere_book):
    with pytest.raises(AssemblyError):
        build_mode_system(sphere_book, 0, 4)
    with pytest.raises(AssemblyError):
        build_full_system(sphere_book, (32, 4))


def test_dump_writes_triplets(sphere_book, tmp_path):
    system = build_mode_system(sphere_book, 0, 10)
    path = system.dump(tmp_path / "matrices.txt")
    lines = path.read_text().splitlines()
    assert lines[0].startswith(f"# K {system.n} {system.n} ")
    assert any(line.startswith("# M ") for line in lines)
    row, col, re, im = lines[1].split(", ")
    assert 0 <= int(row) < system.n and float(im) == 0.0
