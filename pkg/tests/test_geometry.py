from __future__ import annotations

import pytest
from hypothesis import given
from hypothesis import strategies as st

from schemgen.geometry import (bends, conflicts, crossings, edges_to_polylines, junctions, length, simplify,
                               unit_edges)
from schemgen.geometry import edge as mk_edge

from oracles import wire_cells


def test_unit_edges_straight():
    assert unit_edges([(0, 0), (3, 0)]) == [((0, 0), (1, 0)), ((1, 0), (2, 0)), ((2, 0), (3, 0))]
    assert unit_edges([(0, 2), (0, 0)]) == [((0, 1), (0, 2)), ((0, 0), (0, 1))]


def test_unit_edges_rejects_diagonal():
    with pytest.raises(ValueError):
        unit_edges([(0, 0), (1, 1)])


def E(*pts):
    return set(unit_edges(pts))


def test_perpendicular_crossing_is_clean():
    nets = {"A": E((0, 2), (4, 2)), "B": E((2, 0), (2, 4))}
    assert conflicts(nets) == []
    assert crossings(nets) == [(2, 2)]


def test_t_junction_between_nets_conflicts():
    nets = {"A": E((0, 2), (4, 2)), "B": E((2, 0), (2, 2))}
    assert conflicts(nets) == [(("A", "B"), (2, 2))]


def test_collinear_overlap_conflicts():
    nets = {"A": E((0, 0), (4, 0)), "B": E((2, 0), (6, 0))}
    pts = {p for _, p in conflicts(nets)}
    assert {(2, 0), (3, 0), (4, 0)} <= pts


def test_corner_touch_conflicts():
    nets = {"A": E((0, 0), (2, 0), (2, 2)), "B": E((2, 2), (4, 2))}
    assert conflicts(nets) == [(("A", "B"), (2, 2))]


def test_same_net_junction():
    nets = {"A": E((0, 2), (4, 2)) | E((2, 2), (2, 5))}
    assert junctions(nets) == [("A", (2, 2))]
    assert conflicts(nets) == []


def test_simplify_bends_length():
    pts = simplify([(0, 0), (1, 0), (2, 0), (2, 0), (2, 3), (5, 3)])
    assert pts == ((0, 0), (2, 0), (2, 3), (5, 3))
    assert bends(pts) == 2 and length(pts) == 8


edge_sets = st.sets(
    st.tuples(st.integers(0, 6), st.integers(0, 6), st.booleans()).map(
        lambda t: mk_edge((t[0], t[1]), (t[0] + 1, t[1]) if t[2] else (t[0], t[1] + 1))),
    max_size=30)


@given(edge_sets)
def test_polylines_reconstruct_edge_set(edges):
    lines = edges_to_polylines(edges)
    rebuilt = [e for pl in lines for e in unit_edges(pl)]
    assert set(rebuilt) == edges
    assert len(rebuilt) == len(edges)  # every edge used exactly once
    assert all(bends(pl) == len(pl) - 2 for pl in lines)


@given(edge_sets)
def test_polylines_deterministic(edges):
    assert edges_to_polylines(set(sorted(edges))) == edges_to_polylines(edges)


def test_wire_cells_oracle_agrees():
    pts = ((0, 0), (3, 0), (3, 2))
    cells = wire_cells(pts)
    assert {mk_edge(a, b) for a, b in zip(cells, cells[1:])} == set(unit_edges(pts))
