"""Frozen symbol geometry shared by placement, wiring and rendering.

All coordinates are grid units with y growing downward.  A component's
``(x, y)`` is the top-left corner of its (possibly rotated) symbol box.  The
orientation maps a symbol-local point by mirroring horizontally first and then
rotating clockwise by ``rot`` degrees, re-normalized into the box.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from functools import lru_cache
from importlib import resources

ROTATIONS = (0, 90, 180, 270)
PORT = "PORT"


class UnknownKind(KeyError):
    pass


@dataclass(frozen=True)
class Orientation:
    rot: int = 0
    mirror: bool = False

    def __post_init__(self):
        if self.rot not in ROTATIONS:
            raise ValueError(f"rotation must be one of {ROTATIONS}, got {self.rot}")

    @staticmethod
    def all() -> list["Orientation"]:
        return [Orientation(r, m) for m in (False, True) for r in ROTATIONS]


@dataclass(frozen=True)
class SymbolDef:
    kind: str
    box: tuple[int, int]
    anchors: dict[str, tuple[int, int]]
    strokes: tuple[tuple, ...]


def transform(px: float, py: float, w: int, h: int, orient: Orientation) -> tuple[float, float]:
    """Map a local point of a ``w x h`` box through ``orient``."""
    if orient.mirror:
        px = w - px
    if orient.rot == 90:
        return h - py, px
    if orient.rot == 180:
        return w - px, h - py
    if orient.rot == 270:
        return py, w - px
    return px, py


def _int_point(p: tuple[float, float]) -> tuple[int, int]:
    return int(p[0]), int(p[1])


@lru_cache(maxsize=1)
def symbol_table() -> dict[str, SymbolDef]:
    raw = json.loads(resources.files("schemgen").joinpath("data/symbols.json").read_text())
    table = {}
    for rec in raw["symbols"]:
        w, h = rec["box"]
        anchors = {role: (int(x), int(y)) for role, (x, y) in rec["anchors"].items()}
        for role, (x, y) in anchors.items():
            on_edge = x in (0, w) or y in (0, h)
            if not (0 <= x <= w and 0 <= y <= h and on_edge):
                raise ValueError(f"anchor {rec['kind']}.{role} is not on the box boundary")
        table[rec["kind"]] = SymbolDef(rec["kind"], (w, h), anchors, tuple(tuple(s) for s in rec["strokes"]))
    return table


def symbol(kind: str) -> SymbolDef:
    try:
        return symbol_table()[kind]
    except KeyError:
        raise UnknownKind(kind) from None


def box_size(kind: str, orient: Orientation) -> tuple[int, int]:
    w, h = symbol(kind).box
    return (h, w) if orient.rot in (90, 270) else (w, h)


def anchor_offsets(kind: str, orient: Orientation) -> dict[str, tuple[int, int]]:
    sym = symbol(kind)
    w, h = sym.box
    return {role: _int_point(transform(x, y, w, h, orient)) for role, (x, y) in sym.anchors.items()}


def reflect(orient: Orientation) -> Orientation:
    """Orientation after reflecting the whole drawing about a vertical axis."""
    return Orientation((360 - orient.rot) % 360, not orient.mirror)
