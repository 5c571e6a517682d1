"""Packaged example library: one small annotated circuit per building block,
plus a good and a bad reference schematic of the same amplifier.

Everything is loaded from package data and checked on first use; a layout
that does not pass the correctness checker against its own netlist raises
:class:`AssetCorrupt` rather than being silently handed to a backend.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from importlib import resources

from .evaluation import check_correctness
from .netlist import Circuit, NetlistError, parse_netlist
from .placement import SchemaError, SchematicLayout, read_layout
from .substructure import SubstructureKind


class AssetCorrupt(RuntimeError):
    pass


@dataclass(frozen=True)
class ExampleAsset:
    kind: SubstructureKind
    netlist_text: str
    description: str
    layout: SchematicLayout
    svg: str

    def digest(self) -> str:
        """Compact text form used inside prompts."""
        comps = ", ".join(f"{c.id}@({c.x},{c.y}) rot={c.rot}{' mirrored' if c.mirror else ''}"
                          for c in sorted(self.layout.components, key=lambda c: c.id)
                          if not c.id.startswith("PORT_"))
        body = "\n".join(line for line in self.netlist_text.splitlines() if not line.startswith("*"))
        return f"{self.description}\nNetlist:\n{body}\nPlacement: {comps}"


@dataclass(frozen=True)
class ReferenceAsset:
    name: str
    caption: str
    layout: SchematicLayout
    svg: str


def _root():
    return resources.files("schemgen") / "assets"


def _read(node, name: str) -> str:
    f = node / name
    if not f.is_file():
        raise AssetCorrupt(f"missing asset file {name} in {node}")
    return f.read_text(encoding="utf-8")


def _checked(name: str, netlist: Circuit | None, layout_text: str) -> SchematicLayout:
    try:
        layout = read_layout(layout_text)
    except SchemaError as e:
        raise AssetCorrupt(f"{name}: unreadable layout ({e})") from None
    if netlist is not None:
        report = check_correctness(netlist, layout)
        if not report.correct:
            raise AssetCorrupt(f"{name}: layout fails correctness check: {report.to_dict()}")
    return layout


@lru_cache(maxsize=1)
def example_library() -> tuple[ExampleAsset, ...]:
    out = []
    for kind in SubstructureKind:
        node = _root() / "substructures" / kind.value.lower()
        text = _read(node, "example.sp")
        try:
            c = parse_netlist(text, f"{kind.value.lower()}/example.sp")
        except NetlistError as e:
            raise AssetCorrupt(str(e)) from None
        layout = _checked(kind.value, c, _read(node, "layout.json"))
        out.append(ExampleAsset(kind, text, _read(node, "description.txt").strip(), layout,
                                _read(node, "layout.svg")))
    return tuple(out)


@lru_cache(maxsize=1)
def reference_examples() -> tuple[ReferenceAsset, ReferenceAsset]:
    node = _root() / "references"
    c = parse_netlist(_read(node, "circuit.sp"), "references/circuit.sp")
    refs = []
    for name in ("good", "bad"):
        # the bad reference is deliberately ugly but still has to be readable
        layout = _checked(name, c if name == "good" else None, _read(node, f"{name}.layout.json"))
        refs.append(ReferenceAsset(name, _read(node, f"{name}.caption.txt").strip(), layout,
                                   _read(node, f"{name}.svg")))
    return refs[0], refs[1]
