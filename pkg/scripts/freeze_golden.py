"""Write the golden files used by the regression tests.

Only rerun this deliberately, after reviewing that a change in output is
intended; the tests compare against these bytes exactly.
"""

from __future__ import annotations

from pathlib import Path

from schemgen.evaluation import evaluate
from schemgen.netlist import parse_netlist
from schemgen.pipeline import place_and_route
from schemgen.placement import PlacedComponent, SchematicLayout, write_layout
from schemgen.render import RenderOptions, render_svg
from schemgen.substructure import detect

ROOT = Path(__file__).resolve().parents[1]
GOLDEN = ROOT / "tests" / "golden"


def main() -> None:
    GOLDEN.mkdir(parents=True, exist_ok=True)
    for name in ("inverter", "ota5t", "telescopic"):
        c = parse_netlist((ROOT / "fixtures" / f"{name}.sp").read_text())
        m = detect(c)
        layout, _ = place_and_route(c, m)
        (GOLDEN / f"{name}.layout.json").write_bytes(write_layout(layout))
        (GOLDEN / f"{name}.svg").write_text(render_svg(layout))
        print(name, "composite", evaluate(c, layout, m).aesthetics.composite)
    nmos = SchematicLayout(8, 8, (PlacedComponent("M1", "NMOS", 0, 0),))
    (GOLDEN / "nmos.svg").write_text(render_svg(nmos, RenderOptions(unit_px=10)))


if __name__ == "__main__":
    main()
