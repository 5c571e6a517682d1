"""Deterministic prompt assembly.

The same request always yields byte-identical prompt text; images are sent
alongside and listed in a manifest with their content hashes.
"""

from __future__ import annotations

import hashlib
from collections import Counter
from dataclasses import dataclass

from ..netlist import Circuit, NetClass
from ..placement import write_layout
from ..substructure import SubstructureMatch
from .protocol import BackendRequest, Phase, Step

_TASK = {
    Phase.PLACEMENT: ("You are improving the placement of devices in an analog circuit schematic. "
                      "Judge the layout the way a circuit designer would: matched pairs mirrored "
                      "about a shared axis, supply-connected devices toward their rail, signal flow "
                      "readable, no overlapping symbols."),
    Phase.WIRING: ("You are tidying the wiring of an analog circuit schematic whose placement is "
                   "fixed. Wires are orthogonal polylines on the integer grid. Every net must stay "
                   "connected; two nets may only meet where they cross at right angles."),
}

_INSTRUCTIONS = {
    Step.DECIDE: ("Look at the current rendering. Reply with one line `DECISION: ACCEPT` if it is "
                  "good enough, or `DECISION: MODIFY` if not, followed by `REASONING:` and the "
                  "concrete problems you see."),
    Step.REVISE: ("Reply with `REASONING:` and a short plan, then the complete revised layout as a "
                  "single fenced ```json block in the same schema as the current layout."),
}

_PHASE_RULE = {
    Phase.PLACEMENT: "You may move, rotate or mirror components. Wires will be re-routed for you.",
    Phase.WIRING: "Do not move, rotate or mirror any component; only the wires and labels may change.",
}


@dataclass(frozen=True)
class Prompt:
    text: str
    manifest: tuple[tuple[str, str], ...]  # (image label, sha256 of the svg)


def history_window(history: list[str], k: int) -> tuple[str, ...]:
    return tuple(history[-k:]) if k > 0 else ()


def describe_circuit(c: Circuit, matches: list[SubstructureMatch] = (), name: str = "") -> str:
    """Plain-language summary of the netlist that accompanies the images."""
    kinds = Counter(d.kind.value for d in c.devices)
    parts = [f"{n} {k}" for k, n in sorted(kinds.items())]
    lines = [f"Circuit {name or 'unnamed'} has {len(c.devices)} devices ({', '.join(parts)}) "
             f"and {len(c.nets)} nets."]
    rails = [n.name for n in c.nets if n.klass in (NetClass.POWER, NetClass.GROUND)]
    if rails:
        lines.append("Supply rails: " + ", ".join(rails) + ".")
    io = [n.name for n in c.nets if n.klass is NetClass.IO]
    if io:
        lines.append("External pins: " + ", ".join(io) + ".")
    for m in matches:
        members = ", ".join(f"{d} as {r}" for d, r in m.members)
        shared = f" sharing {', '.join(m.shared_nets)}" if m.shared_nets else ""
        lines.append(f"{m.kind.value.replace('_', ' ').lower()}: {members}{shared}.")
    return "\n".join(lines)


def _sha(text: str) -> str:
    return hashlib.sha256(text.encode("utf-8")).hexdigest()


def build_prompt(req: BackendRequest) -> Prompt:
    out = [f"# Task ({req.phase.value}, {req.step.value}, iteration {req.iteration})", _TASK[req.phase],
           _PHASE_RULE[req.phase], "", "## Building-block examples"]
    for i, ex in enumerate(req.examples, 1):
        out += [f"### Example {i}", ex, ""]
    out.append("## Reference schematics")
    for img, caption in (req.reference_good, req.reference_bad):
        out.append(f"Reference ({img.label}): {caption}")
    out += ["", "## Circuit", "```spice", req.netlist_text.rstrip(), "```", req.description_text, "",
            "## Current layout", "```json", write_layout(req.layout).decode().rstrip(), "```"]
    if req.history_digest:
        out += ["", "## Earlier iterations"]
        out += [f"- {h}" for h in req.history_digest]
    if req.step is Step.REVISE:
        out += ["", "## Your assessment", req.decide_reasoning or ""]
    if req.repair_error:
        out += ["", "## Your previous reply was rejected",
                f"Error: {req.repair_error}", "Send a corrected layout."]
    out += ["", "## Reply format", _INSTRUCTIONS[req.step]]
    return Prompt("\n".join(out) + "\n", tuple((im.label, _sha(im.svg)) for im in req.all_images))
