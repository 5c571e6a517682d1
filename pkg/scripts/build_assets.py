"""Regenerate the packaged example layouts and reference schematics.

Run after changing the symbol table, placer or router; the outputs are
frozen package data and the test suite checks them byte for byte.
"""

from __future__ import annotations

import argparse
import random
from dataclasses import replace
from pathlib import Path

from schemgen.evaluation import check_correctness
from schemgen.netlist import parse_netlist
from schemgen.pipeline import place_and_route
from schemgen.placement import write_layout
from schemgen.render import render_svg
from schemgen.substructure import SubstructureKind
from schemgen.wiring import wire_layout

ASSETS = Path(__file__).resolve().parents[1] / "src" / "schemgen" / "assets"
FIXTURES = Path(__file__).resolve().parents[1] / "fixtures"

GOOD_CAPTION = ("Preferred placement: mirrored pairs share a row about the centerline, "
                "rows follow the supply stack from top to bottom, wires are short and orthogonal.")
BAD_CAPTION = ("Poor placement: devices are scattered out of their supply rows and pairs are "
               "broken up, so the wiring wanders and crosses itself.")


def scramble(layout, seed: int = 7):
    """Shuffle device positions and flip some of them, keeping ports fixed."""
    rng = random.Random(seed)
    devs = sorted((c for c in layout.components if not c.id.startswith("PORT_")), key=lambda c: c.id)
    spots = [(c.x, c.y) for c in devs]
    rng.shuffle(spots)
    moved = {c.id: replace(c, x=x, y=y, rot=rng.choice((0, 180)), mirror=rng.random() < 0.5)
             for c, (x, y) in zip(devs, spots)}
    comps = tuple(moved.get(c.id, c) for c in layout.components)
    return replace(layout, components=comps, wires=(), labels=())


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--size", type=int, default=32, help="canvas size for the small examples")
    args = ap.parse_args()

    for kind in SubstructureKind:
        node = ASSETS / "substructures" / kind.value.lower()
        c = parse_netlist((node / "example.sp").read_text(), str(node / "example.sp"))
        layout, _ = place_and_route(c, width=args.size, height=args.size)
        assert check_correctness(c, layout).correct, kind
        (node / "layout.json").write_bytes(write_layout(layout))
        (node / "layout.svg").write_text(render_svg(layout))
        print("wrote", node.relative_to(ASSETS))

    ref = ASSETS / "references"
    text = (FIXTURES / "ota5t.sp").read_text()
    (ref / "circuit.sp").write_text(text)
    c = parse_netlist(text)
    good, _ = place_and_route(c)
    assert check_correctness(c, good).correct
    bad, _ = wire_layout(c, scramble(good))
    for name, layout, caption in (("good", good, GOOD_CAPTION), ("bad", bad, BAD_CAPTION)):
        (ref / f"{name}.layout.json").write_bytes(write_layout(layout))
        (ref / f"{name}.svg").write_text(render_svg(layout))
        (ref / f"{name}.caption.txt").write_text(caption + "\n")
        print("wrote references/" + name)


if __name__ == "__main__":
    main()
