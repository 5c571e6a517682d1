"""Correctness checking and computable aesthetics proxies.

Correctness: every net's terminals lie in one connected component of that
net's wire graph, no symbol boxes overlap (and no wire runs through a symbol),
and no two nets meet other than at a clean perpendicular crossing.

Aesthetics proxies are declared stand-ins for human judgment, not a model of
it.  ``composite`` is a fixed weighted mean of symmetry, alignment, a
crossing score and a wire-length score.
"""

from __future__ import annotations

import json
from collections import defaultdict
from dataclasses import asdict, dataclass, field
from math import comb

from .geometry import Point, conflicts, crossings, net_edges, net_points
from .geometry import bends as count_bends
from .geometry import length as path_length
from .netlist import Circuit
from .placement import SchematicLayout, Violation, validate_layout
from .render import terminal_positions
from .substructure import PAIR_KINDS, SubstructureMatch
from .wiring import ROLE_ORDER

WEIGHTS = {"symmetry": 0.4, "alignment": 0.3, "crossing": 0.2, "length": 0.1}


@dataclass(frozen=True)
class Aesthetics:
    symmetry: float
    alignment: float
    crossings: int
    total_wire_length: int
    bends: int
    crossing_score: float
    length_score: float
    composite: float


@dataclass
class EvalReport:
    connectivity_failures: list[tuple[str, list[tuple[str, str]]]] = field(default_factory=list)
    overlap_violations: list[Violation] = field(default_factory=list)
    short_circuits: list[tuple[tuple[str, str], Point]] = field(default_factory=list)
    aesthetics: Aesthetics | None = None

    @property
    def correct(self) -> bool:
        return not (self.connectivity_failures or self.overlap_violations or self.short_circuits)

    @property
    def violation_count(self) -> int:
        return (sum(max(len(m), 1) for _, m in self.connectivity_failures)
                + len(self.overlap_violations) + len(self.short_circuits))

    def to_dict(self) -> dict:
        return {
            "correct": self.correct,
            "connectivity_failures": [{"net": n, "missing": [list(p) for p in m]}
                                      for n, m in self.connectivity_failures],
            "overlap_violations": [v.to_dict() for v in self.overlap_violations],
            "short_circuits": [{"nets": list(nets), "at": list(p)} for nets, p in self.short_circuits],
            "aesthetics": asdict(self.aesthetics) if self.aesthetics else None,
        }


def _components(edges, points) -> dict[Point, Point]:
    """Label every point with a representative of its connected component."""
    adj: dict[Point, list[Point]] = defaultdict(list)
    for p, q in edges:
        adj[p].append(q)
        adj[q].append(p)
    label: dict[Point, Point] = {}
    for start in sorted(set(adj) | set(points)):
        if start in label:
            continue
        label[start] = start
        stack = [start]
        while stack:
            p = stack.pop()
            for q in adj[p]:
                if q not in label:
                    label[q] = start
                    stack.append(q)
    return label


def connectivity_failures(c: Circuit, layout: SchematicLayout) -> list[tuple[str, list[tuple[str, str]]]]:
    terms: dict[str, list] = defaultdict(list)
    for tp in terminal_positions(layout, c):
        if tp.net is not None:
            terms[tp.net].append(tp)
    placed = {comp.id for comp in layout.components}
    edges = net_edges(layout.wires)
    failures = []
    for net in c.nets:
        expected = sorted(net.terminals, key=lambda t: (ROLE_ORDER[t[1].value], t[0]))
        present = sorted(terms.get(net.name, []), key=lambda t: (ROLE_ORDER[t.role], t.device))
        missing: list[tuple[str, str]] = []
        unplaced = [f"{d}:{r.value}" for d, r in expected if d not in placed]
        if not present:
            if unplaced:
                failures.append((net.name, [(u, u) for u in unplaced]))
            continue
        ref = present[0]
        ref_label = f"{ref.device}:{ref.role}"
        missing.extend((ref_label, u) for u in unplaced)
        label = _components(edges.get(net.name, ()), [t.point for t in present])
        root = label[ref.point]
        for t in present[1:]:
            if label[t.point] != root:
                missing.append((ref_label, f"{t.device}:{t.role}"))
        if missing:
            failures.append((net.name, missing))
    return failures


def check_correctness(c: Circuit, layout: SchematicLayout) -> EvalReport:
    report = EvalReport()
    report.overlap_violations = validate_layout(layout, c)
    report.connectivity_failures = connectivity_failures(c, layout)

    edges = net_edges(layout.wires)
    shorts = set(conflicts(edges))
    anchors = {tp.point: tp for tp in terminal_positions(layout, c)}
    boxes = [(comp.id, comp.box) for comp in layout.components]
    for net, pts in sorted(net_points(layout.wires).items()):
        for p in sorted(pts):
            tp = anchors.get(p)
            if tp is not None:
                if tp.net is not None and tp.net != net:
                    shorts.add((tuple(sorted((net, tp.net))), p))
                continue
            for cid, (x0, y0, x1, y1) in boxes:
                if x0 <= p[0] <= x1 and y0 <= p[1] <= y1:
                    report.overlap_violations.append(
                        Violation("wire_through_symbol", f"net {net} wire crosses {cid} at {p}", (cid,)))
    report.short_circuits = sorted(shorts)
    return report


def _center2(comp) -> tuple[int, int]:
    x0, y0, x1, y1 = comp.box
    return x0 + x1, y0 + y1


def score_aesthetics(layout: SchematicLayout, matches: list[SubstructureMatch] = ()) -> Aesthetics:
    comps = {comp.id: comp for comp in layout.components}

    pairs = [m for m in matches if m.kind in PAIR_KINDS and all(d in comps for d in m.devices)]
    good = 0
    for m in pairs:
        a, b = (comps[d] for d in m.devices)
        if a.y == b.y and a.kind == b.kind and a.rot == b.rot and a.mirror != b.mirror:
            good += 1
    symmetry = good / len(pairs) if pairs else 1.0

    if len(comps) < 2:
        alignment = 1.0
    else:
        centers = {cid: _center2(comp) for cid, comp in comps.items()}
        xs = defaultdict(int)
        ys = defaultdict(int)
        for cx, cy in centers.values():
            xs[cx] += 1
            ys[cy] += 1
        aligned = sum(1 for cx, cy in centers.values() if xs[cx] > 1 or ys[cy] > 1)
        alignment = aligned / len(comps)

    edges = net_edges(layout.wires)
    n_cross = len(crossings(edges))
    total = sum(path_length(w.points) for w in layout.wires)
    n_bends = sum(count_bends(w.points) for w in layout.wires)
    pairs_of_wires = comb(len(layout.wires), 2)
    crossing_score = 1.0 if pairs_of_wires == 0 else max(0.0, 1.0 - n_cross / pairs_of_wires)

    anchor_pts = {tp.point for tp in terminal_positions(layout)}
    bound = 0
    for net, pts in net_points(layout.wires).items():
        touched = pts & anchor_pts
        if len(touched) >= 2:
            xs_ = [p[0] for p in touched]
            ys_ = [p[1] for p in touched]
            bound += (max(xs_) - min(xs_)) + (max(ys_) - min(ys_))
    length_score = 1.0 if total == 0 else min(1.0, bound / total)

    composite = (WEIGHTS["symmetry"] * symmetry + WEIGHTS["alignment"] * alignment
                 + WEIGHTS["crossing"] * crossing_score + WEIGHTS["length"] * length_score)
    return Aesthetics(round(symmetry, 6), round(alignment, 6), n_cross, total, n_bends,
                      round(crossing_score, 6), round(length_score, 6), round(composite, 6))


def evaluate(c: Circuit, layout: SchematicLayout, matches: list[SubstructureMatch] = ()) -> EvalReport:
    report = check_correctness(c, layout)
    report.aesthetics = score_aesthetics(layout, matches)
    return report


# -- trial aggregation -----------------------------------------------------

@dataclass
class Trial:
    report: EvalReport
    place_iters: int
    wire_iters: int
    completed: bool = True


@dataclass
class RunSummary:
    circuit: str
    trials: int
    correct_count: int
    avg_place_iters: float
    avg_wire_iters: float
    avg_composite: float
    reports: list[EvalReport] = field(default_factory=list, repr=False)

    def to_dict(self) -> dict:
        return {
            "circuit": self.circuit, "trials": self.trials, "correct_count": self.correct_count,
            "avg_place_iters": self.avg_place_iters, "avg_wire_iters": self.avg_wire_iters,
            "avg_composite": self.avg_composite,
            "reports": [r.to_dict() for r in self.reports],
        }


def summarize_trials(circuit: str, trials: list[Trial]) -> RunSummary:
    if not trials:
        raise ValueError("need at least one trial")
    done = [t for t in trials if t.completed] or trials
    n = len(done)
    return RunSummary(
        circuit=circuit,
        trials=len(trials),
        correct_count=sum(t.report.correct for t in trials),
        avg_place_iters=round(sum(t.place_iters for t in done) / n, 2),
        avg_wire_iters=round(sum(t.wire_iters for t in done) / n, 2),
        avg_composite=round(sum(t.report.aesthetics.composite if t.report.aesthetics else 0.0
                                for t in done) / n, 3),
        reports=[t.report for t in trials],
    )


TABLE_COLUMNS = ("Circuit", "Correctness", "Aesthetics proxy", "Avg. Iter. for Placement",
                 "Avg. Iter. for Wiring")


def format_table(summaries: list[RunSummary]) -> str:
    rows = [TABLE_COLUMNS]
    for s in summaries:
        rows.append((s.circuit, f"{s.correct_count}/{s.trials}", f"{s.avg_composite:.3f}",
                     f"{s.avg_place_iters:g}", f"{s.avg_wire_iters:g}"))
    widths = [max(len(r[i]) for r in rows) for i in range(len(TABLE_COLUMNS))]
    fmt = lambda r: " | ".join(v.ljust(w) for v, w in zip(r, widths)).rstrip()  # noqa: E731
    sep = "-+-".join("-" * w for w in widths)
    return "\n".join([fmt(rows[0]), sep, *(fmt(r) for r in rows[1:])]) + "\n"


def summaries_json(summaries: list[RunSummary]) -> str:
    return json.dumps([s.to_dict() for s in summaries], indent=2)
