from __future__ import annotations

import json
import random
from dataclasses import replace

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from schemgen.netlist import parse_netlist
from schemgen.placement import (DEFAULT_WIDTH, PlacedComponent, PlacementOverflow, SchemaError, SchematicLayout,
                                WirePolyline, initial_place, read_layout, validate_layout, write_layout)
from schemgen.substructure import PAIR_KINDS, detect
from schemgen.symbols import Orientation

from conftest import GOLDEN, load
from strategies import circuits

MINIMAL = b"""{
  "grid": {"width": 64, "height": 64},
  "components": [
    {"id": "M1", "kind": "NMOS", "x": 10, "y": 10, "rot": 0, "mirror": false}
  ],
  "wires": [],
  "labels": []
}
"""


def boxes_disjoint_oracle(layout):
    """Independent pairwise check on integer cell sets."""
    cells = []
    for c in layout.components:
        x0, y0, x1, y1 = c.box
        cells.append({(x, y) for x in range(x0, x1 + 1) for y in range(y0, y1 + 1)})
    return all(not (a & b) for i, a in enumerate(cells) for b in cells[i + 1:])


def test_eight_orientations():
    assert len(set(Orientation.all())) == 8


def test_minimal_round_trip():
    layout = read_layout(MINIMAL)
    assert layout.components == (PlacedComponent("M1", "NMOS", 10, 10, 0, False),)
    assert write_layout(layout) == MINIMAL


def test_missing_components():
    doc = json.loads(MINIMAL)
    del doc["components"]
    with pytest.raises(SchemaError) as exc:
        read_layout(json.dumps(doc))
    assert exc.value.path == "/components"


@pytest.mark.parametrize("mutate, path", [
    (lambda d: d["components"][0].update(rot=45), "/components/0/rot"),
    (lambda d: d["components"][0].update(x="1"), "/components/0/x"),
    (lambda d: d["components"][0].update(kind="BJT"), "/components/0/kind"),
    (lambda d: d["grid"].pop("width"), "/grid/width"),
    (lambda d: d.update(wires=[{"net": "A", "points": [[0, 0], [1]]}]), "/wires/0/points/1"),
])
def test_schema_paths(mutate, path):
    doc = json.loads(MINIMAL)
    mutate(doc)
    with pytest.raises(SchemaError) as exc:
        read_layout(json.dumps(doc))
    assert exc.value.path == path


def test_extra_field_tolerated_with_warning():
    doc = json.loads(MINIMAL)
    doc["comment"] = "from the model"
    doc["components"][0]["note"] = "moved"
    warnings = []
    layout = read_layout(json.dumps(doc), warnings)
    assert len(layout.components) == 1
    assert any("comment" in w for w in warnings) and any("note" in w for w in warnings)


def test_invalid_json():
    with pytest.raises(SchemaError):
        read_layout(b"{not json")


layouts = st.builds(
    lambda comps, wires: SchematicLayout(64, 64, tuple(comps), tuple(wires), ()),
    st.lists(st.builds(PlacedComponent, st.sampled_from(["M1", "M2", "R1", "PORT_A"]),
                       st.sampled_from(["NMOS", "PMOS", "RESISTOR", "PORT"]),
                       st.integers(0, 60), st.integers(0, 60), st.sampled_from([0, 90, 180, 270]),
                       st.booleans()), max_size=4, unique_by=lambda c: c.id),
    st.lists(st.builds(WirePolyline, st.sampled_from(["A", "B"]),
                       st.lists(st.tuples(st.integers(0, 64), st.integers(0, 64)), min_size=2, max_size=4)
                       .map(tuple)), max_size=3),
)


@settings(max_examples=200)
@given(layouts)
def test_write_read_identity(layout):
    data = write_layout(layout)
    again = read_layout(data)
    assert write_layout(again) == data
    assert sorted(again.components, key=lambda c: c.id) == sorted(layout.components, key=lambda c: c.id)
    assert again.wires == layout.wires


def test_identical_positions_overlap():
    l = SchematicLayout(64, 64, (PlacedComponent("M1", "NMOS", 5, 5), PlacedComponent("M2", "NMOS", 5, 5)))
    v = validate_layout(l)
    assert [x.code for x in v] == ["overlap"]


def test_diagonal_wire():
    l = SchematicLayout(64, 64, (), (WirePolyline("A", ((0, 0), (3, 3))),))
    assert [x.code for x in validate_layout(l)] == ["not_rectilinear"]


@pytest.mark.parametrize("layout, code", [
    (SchematicLayout(64, 64, (PlacedComponent("M1", "NMOS", 62, 0),)), "out_of_bounds"),
    (SchematicLayout(64, 64, (PlacedComponent("M1", "NMOS", 0, 0), PlacedComponent("M1", "NMOS", 20, 0))),
     "duplicate_id"),
    (SchematicLayout(64, 64, (PlacedComponent("M1", "BJT", 0, 0),)), "unknown_kind"),
    (SchematicLayout(64, 64, (), (WirePolyline("A", ((0, 0),)),)), "wire_too_short"),
    (SchematicLayout(64, 64, (), (WirePolyline("A", ((0, 0), (0, 0))),)), "zero_length"),
    (SchematicLayout(64, 64, (), (WirePolyline("A", ((0, 0), (0, 70))),)), "out_of_bounds"),
])
def test_violation_codes(layout, code):
    assert code in [v.code for v in validate_layout(layout)]


def test_circuit_aware_violations():
    c = parse_netlist("M1 a b gnd gnd NMOS\nM2 a c gnd gnd NMOS")
    l = SchematicLayout(64, 64, (PlacedComponent("M1", "PMOS", 0, 0), PlacedComponent("X9", "NMOS", 20, 0),
                                 PlacedComponent("PORT_ZZ", "PORT", 40, 0)),
                        (WirePolyline("NOPE", ((0, 0), (0, 5))),))
    codes = sorted(v.code for v in validate_layout(l, c))
    assert codes == ["kind_mismatch", "missing_component", "unknown_id", "unknown_id", "unknown_net"]


def test_golden_ota5t_valid():
    golden = read_layout((GOLDEN / "ota5t.layout.json").read_bytes())
    assert validate_layout(golden, load("ota5t")) == []
    assert boxes_disjoint_oracle(golden)


def test_inverter_rows_and_column():
    c = load("inverter")
    l = initial_place(c, detect(c))
    p, n = l.component("M1"), l.component("M2")
    assert p.y < n.y
    assert p.x == n.x
    assert (p.rot, n.rot) == (0, 0)


def _check_pairs(c, layout):
    for m in detect(c):
        if m.kind not in PAIR_KINDS:
            continue
        a, b = (layout.component(d) for d in m.devices)
        w = a.size[0]
        assert a.y == b.y
        # mirror images about the vertical centerline: boxes reflect onto each other
        assert a.x + b.x + w == layout.width
        assert (a.mirror, b.mirror) == (False, True)


@pytest.mark.parametrize("name", ["ota5t", "telescopic"])
def test_pairs_symmetric(name):
    c = load(name)
    _check_pairs(c, initial_place(c, detect(c)))


def test_supply_rows():
    c = load("ota5t")
    l = initial_place(c, detect(c))
    y = {d: l.component(d).y for d in ("M1", "M3", "M5")}
    assert y["M3"] < y["M1"] < y["M5"]


def test_ports_on_margins():
    c = load("ota5t")
    l = initial_place(c, detect(c))
    assert l.component("PORT_INP").x == 0
    assert l.component("PORT_INN").x == 0
    out = l.component("PORT_OUT")
    assert out.x + out.size[0] == DEFAULT_WIDTH and out.mirror


def test_empty_circuit_gives_empty_layout():
    from schemgen.netlist import Circuit
    l = initial_place(Circuit((), ()), [])
    assert l.components == () and l.wires == ()


def test_overflow_on_small_canvas():
    c = load("telescopic")
    with pytest.raises(PlacementOverflow):
        initial_place(c, detect(c), width=12, height=12)


@settings(max_examples=150, deadline=None)
@given(circuits(max_devices=8, passives=True))
def test_initial_place_valid_and_deterministic(c):
    m = detect(c)
    try:
        l = initial_place(c, m)
    except PlacementOverflow:
        return
    assert validate_layout(l, c) == []
    assert boxes_disjoint_oracle(l)
    assert write_layout(initial_place(c, m)) == write_layout(l)
    _check_pairs(c, l)


def test_random_circuits_rarely_overflow():
    from strategies import random_circuit
    rng = random.Random(3)
    overflow = 0
    for _ in range(200):
        c = random_circuit(rng, rng.randint(1, 8), passives=True)
        try:
            initial_place(c, detect(c))
        except PlacementOverflow:
            overflow += 1
    assert overflow == 0
