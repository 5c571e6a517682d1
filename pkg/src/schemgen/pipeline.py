"""Deterministic placement plus routing, without any agent in the loop."""

from __future__ import annotations

from .netlist import Circuit
from .placement import DEFAULT_HEIGHT, DEFAULT_WIDTH, SchematicLayout, initial_place
from .substructure import SubstructureMatch, detect
from .wiring import RoutingReport, wire_layout


def place_and_route(c: Circuit, matches: list[SubstructureMatch] | None = None,
                    width: int = DEFAULT_WIDTH, height: int = DEFAULT_HEIGHT
                    ) -> tuple[SchematicLayout, RoutingReport]:
    if matches is None:
        matches = detect(c)
    return wire_layout(c, initial_place(c, matches, width, height))
