from __future__ import annotations

import re
import xml.etree.ElementTree as ET

import pytest
from hypothesis import given
from hypothesis import strategies as st

from schemgen.placement import PlacedComponent, SchematicLayout, read_layout
from schemgen.render import RenderOptions, render_svg, terminal_positions
from schemgen.symbols import (Orientation, UnknownKind, anchor_offsets, box_size, reflect, symbol_table,
                              transform)
from schemgen.wiring import priority_order

from conftest import CIRCUITS, GOLDEN, routed
from oracles import anchor_point

SVG = "{http://www.w3.org/2000/svg}"
KINDS = sorted(symbol_table())


def nmos(x=0, y=0, rot=0, mirror=False, cid="M1"):
    return PlacedComponent(cid, "NMOS", x, y, rot, mirror)


def test_every_device_kind_has_a_symbol():
    assert set(KINDS) == {"NMOS", "PMOS", "RESISTOR", "CAPACITOR", "VSOURCE", "ISOURCE", "PORT"}


def test_anchors_on_boundary():
    for sym in symbol_table().values():
        w, h = sym.box
        for x, y in sym.anchors.values():
            assert x in (0, w) or y in (0, h)


@given(st.sampled_from(KINDS), st.sampled_from(Orientation.all()))
def test_transform_group(kind, o):
    w, h = symbol_table()[kind].box
    for px, py in symbol_table()[kind].anchors.values():
        # four quarter turns
        p, (bw, bh) = (px, py), (w, h)
        for _ in range(4):
            p = transform(p[0], p[1], bw, bh, Orientation(90))
            bw, bh = bh, bw
        assert p == (px, py)
        m = transform(*transform(px, py, w, h, Orientation(0, True)), w, h, Orientation(0, True))
        assert m == (px, py)
    assert reflect(reflect(o)) == o


@given(st.sampled_from(KINDS), st.sampled_from(Orientation.all()), st.integers(0, 50), st.integers(0, 50))
def test_anchor_oracle_agrees(kind, o, x, y):
    comp = PlacedComponent("X1" if kind != "PORT" else "PORT_A", kind, x, y, o.rot, o.mirror)
    layout = SchematicLayout(64, 64, (comp,))
    got = {tp.role: tp.point for tp in terminal_positions(layout)}
    bw, bh = box_size(kind, o)
    for role, p in got.items():
        assert p == anchor_point({"kind": kind, "x": x, "y": y, "rot": o.rot, "mirror": o.mirror}, role)
        assert x <= p[0] <= x + bw and y <= p[1] <= y + bh


def test_terminal_examples():
    tp = {t.role: t.point for t in terminal_positions(SchematicLayout(64, 64, (nmos(10, 10),)))}
    assert tp["GATE"] == (10, 13)
    mir = {t.role: t.point for t in terminal_positions(SchematicLayout(64, 64, (nmos(10, 10, mirror=True),)))}
    # reflected about the box midline x = 12
    assert mir["GATE"] == (14, 13)
    rot = anchor_offsets("NMOS", Orientation(90))
    assert rot["GATE"] == (6 - 3, 0)
    assert rot["DRAIN"] == (6 - 0, 4)


def test_nmos_golden():
    svg = render_svg(SchematicLayout(8, 8, (nmos(),)), RenderOptions(unit_px=10))
    assert svg == (GOLDEN / "nmos.svg").read_text()
    root = ET.fromstring(svg)
    assert root.find(f".//{SVG}g[@id='M1']") is not None
    gate = root.find(f".//{SVG}circle[@data-terminal='M1:GATE:0:3']")
    assert (gate.get("cx"), gate.get("cy")) == ("0.0", "30.0")


@pytest.mark.parametrize("name", CIRCUITS)
def test_fixture_svg_golden(name):
    layout = read_layout((GOLDEN / f"{name}.layout.json").read_bytes())
    assert render_svg(layout) == (GOLDEN / f"{name}.svg").read_text()


def test_empty_layout():
    root = ET.fromstring(render_svg(SchematicLayout(16, 16)))
    children = [c.tag.replace(SVG, "") for c in root]
    assert children == ["style", "rect"]
    assert root.get("viewBox") == "0 0 160 160"


def test_highlight():
    layout = SchematicLayout(32, 32, (nmos(2, 2), nmos(12, 2, cid="M2")))
    root = ET.fromstring(render_svg(layout, RenderOptions(highlight={"M2"})))
    assert "accent" in root.find(f".//{SVG}g[@id='M2']").get("class").split()
    assert "accent" not in root.find(f".//{SVG}g[@id='M1']").get("class").split()


def test_violation_styling():
    layout = SchematicLayout(32, 32, (nmos(2, 2), nmos(3, 3, cid="M2")))
    root = ET.fromstring(render_svg(layout))
    assert "violation" in root.find(f".//{SVG}g[@id='M1']").get("class")


def test_unit_px_floor():
    with pytest.raises(ValueError):
        RenderOptions(unit_px=3)


def test_unknown_kind():
    with pytest.raises(UnknownKind):
        render_svg(SchematicLayout(16, 16, (PlacedComponent("Q1", "BJT", 0, 0),)))
    with pytest.raises(UnknownKind):
        terminal_positions(SchematicLayout(16, 16, (PlacedComponent("Q1", "BJT", 0, 0),)))


@pytest.mark.parametrize("name", CIRCUITS)
def test_render_metadata_matches_wiring_anchors(name):
    c, _, layout, _ = routed(name)
    svg = render_svg(layout)
    meta = set(re.findall(r'data-terminal="([^"]+)"', svg))
    from_wiring = {f"{t.device}:{t.role}:{t.point[0]}:{t.point[1]}"
                   for task in priority_order(c, layout) for t in task.terminals}
    assert from_wiring <= meta
    # every anchor marker belongs to a terminal known to wiring (bulk too)
    assert meta == from_wiring
    ET.fromstring(svg)


def test_deterministic_and_fixed_decimals():
    _, _, layout, _ = routed("telescopic")
    a, b = render_svg(layout), render_svg(layout)
    assert a == b
    nums = re.findall(r'(?:x|y|x1|y1|x2|y2|cx|cy|r)="([-0-9.]+)"', a)
    assert nums and all(re.fullmatch(r"-?\d+\.\d", n) for n in nums)


def test_junction_dots_only_at_same_net_tees():
    _, _, layout, _ = routed("ota5t")
    root = ET.fromstring(render_svg(layout))
    dots = root.findall(f".//{SVG}circle[@class='junction']")
    assert dots
    for d in dots:
        assert d.get("data-net")
