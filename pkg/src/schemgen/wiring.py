"""Priority-ordered rectilinear wiring.

Nets are connected in a fixed order: power, ground, then by the most
significant terminal role they carry (gate, drain, source, bulk, then
everything else).  Each net is built as a sequential spanning construction:
terminal 2 is routed to terminal 1, every later terminal to the nearest cell
already on its net.  Paths come from a uniform-cost search with a per-bend
penalty; among equal-cost paths the first move order left, right, up, down
wins at every step (horizontal before vertical).  A final pass strips any
geometry that conflicts with a higher-priority net.
"""

from __future__ import annotations

import heapq
import json
from dataclasses import dataclass, field

from .geometry import DIRS, Edge, Point, conflicts, edge, edges_to_polylines, incidence, simplify, straight_axis
from .geometry import bends as count_bends
from .geometry import length as path_length
from .geometry import unit_edges
from .netlist import Circuit, NetClass, Role
from .placement import Label, SchematicLayout, WirePolyline
from .render import TerminalPoint, terminal_positions

STEP_COST = 1
BEND_COST = 2
STUB_LENGTH = 2

ROLE_ORDER = {
    Role.GATE.value: 0, Role.DRAIN.value: 1, Role.SOURCE.value: 2, Role.BULK.value: 3,
    Role.POS.value: 4, Role.NEG.value: 5, Role.PIN.value: 6,
}
_ROLE_RANK = {Role.GATE.value: 2, Role.DRAIN.value: 3, Role.SOURCE.value: 4, Role.BULK.value: 5}
OTHER_RANK = 6

_OPPOSITE = {0: 1, 1: 0, 2: 3, 3: 2}
_AXIS = {0: "H", 1: "H", 2: "V", 3: "V"}


class Unroutable(RuntimeError):
    def __init__(self, net: str, wires: list[WirePolyline] | None = None, missing=()):
        super().__init__(f"net {net} could not be fully routed")
        self.net = net
        self.wires = wires or []
        self.missing = list(missing)


@dataclass(frozen=True)
class ConnectionTask:
    net: str
    terminals: tuple[TerminalPoint, ...]
    priority_rank: int


def net_rank(klass: NetClass, roles) -> int:
    if klass == NetClass.POWER:
        return 0
    if klass == NetClass.GROUND:
        return 1
    return min((_ROLE_RANK.get(r, OTHER_RANK) for r in roles), default=OTHER_RANK)


def priority_order(c: Circuit, layout: SchematicLayout | None = None) -> list[ConnectionTask]:
    """Connection tasks sorted by rank, then net name.

    Without a layout the terminal points are ``None``; with one, port pins are
    included and every terminal carries its grid point.
    """
    members: dict[str, list[TerminalPoint]] = {n.name: [] for n in c.nets}
    if layout is None:
        for d in c.devices:
            for t in d.terminals:
                members[t.net].append(TerminalPoint(d.name, t.role.value, t.net, None))
    else:
        for tp in terminal_positions(layout, c):
            if tp.net in members:
                members[tp.net].append(tp)
    klass = c.net_class
    tasks = []
    for net, terms in members.items():
        rank = net_rank(klass[net], [t.role for t in terms])
        ordered = tuple(sorted(terms, key=lambda t: (ROLE_ORDER[t.role], t.device)))
        tasks.append(ConnectionTask(net, ordered, rank))
    return sorted(tasks, key=lambda t: (t.priority_rank, t.net))


class RoutingGrid:
    """Mutable routing state: symbol obstacles, terminal cells and routed edges."""

    def __init__(self, width: int, height: int, obstacles=(), terminals: dict[Point, str] | None = None):
        self.width = width
        self.height = height
        self.terminals: dict[Point, str] = dict(terminals or {})
        self.obstacles: set[Point] = set(obstacles) - set(self.terminals)
        self.edges: dict[str, set[Edge]] = {}
        self._inc = incidence({})

    @classmethod
    def from_layout(cls, layout: SchematicLayout, circuit: Circuit | None = None) -> "RoutingGrid":
        obstacles = set()
        for comp in layout.components:
            x0, y0, x1, y1 = comp.box
            obstacles.update((x, y) for x in range(x0, x1 + 1) for y in range(y0, y1 + 1))
        terminals = {tp.point: tp.net for tp in terminal_positions(layout, circuit) if tp.net is not None}
        return cls(layout.width, layout.height, obstacles, terminals)

    @property
    def occupied(self) -> dict[Point, str]:
        return {p: min(nets) for p, nets in self._inc.items() if nets}

    def own_points(self, net: str) -> set[Point]:
        return {p for p, nets in self._inc.items() if net in nets}

    def add_path(self, net: str, points) -> None:
        new = unit_edges(points)
        mine = self.edges.setdefault(net, set())
        for p, q in new:
            if (p, q) in mine:
                continue
            mine.add((p, q))
            d = (q[0] - p[0], q[1] - p[1])
            self._inc[p][net].add(d)
            self._inc[q][net].add((-d[0], -d[1]))

    # status codes: None = free, "H"/"V" = crossable on that axis only, False = blocked
    def status(self, q: Point, net: str):
        x, y = q
        if not (0 <= x <= self.width and 0 <= y <= self.height):
            return False
        owner = self.terminals.get(q)
        if owner is not None:
            if owner != net:
                return False
        elif q in self.obstacles:
            return False
        here = self._inc.get(q)
        if not here:
            return None
        others = [dirs for n, dirs in here.items() if n != net and dirs]
        if not others:
            return None
        if len(others) > 1 or net in here and here[net]:
            return False
        axis = straight_axis(others[0])
        if axis is None:
            return False
        return "V" if axis == "H" else "H"

    def legal(self, p: Point, d: int | None, m: int, net: str, status_p=None) -> bool:
        if d is not None and m == _OPPOSITE[d]:
            return False
        sp = self.status(p, net) if status_p is None else status_p
        if sp is False:
            return False
        if sp is not None and (d is None or d != m):
            return False
        dx, dy = DIRS[m]
        sq = self.status((p[0] + dx, p[1] + dy), net)
        if sq is False:
            return False
        return sq is None or sq == _AXIS[m]


def _search(grid: RoutingGrid, net: str, sources: set[Point], target: Point) -> list[Point] | None:
    """Min-cost path from any source to ``target``; lexicographic move tie-break."""
    if target in sources:
        return [target]
    h: dict[tuple[Point, int | None], int] = {}
    srcs = sorted(sources)

    def lower(p: Point) -> int:
        # admissible remaining cost to the nearest source, which keeps A* exact
        return STEP_COST * min(abs(p[0] - s[0]) + abs(p[1] - s[1]) for s in srcs)

    f0 = lower(target)
    heap = [(f0, 0, target[1], target[0], m, target) for m in range(4)]
    heapq.heapify(heap)
    best_start = None
    status_cache: dict[Point, object] = {}

    def status(p):
        if p not in status_cache:
            status_cache[p] = grid.status(p, net)
        return status_cache[p]

    while heap:
        _, v, _, _, m, q = heapq.heappop(heap)
        key = (q, None if m == -1 else m)
        if key in h:
            continue
        h[key] = v
        if m == -1:
            best_start = q
            break
        dx, dy = DIRS[m]
        p = (q[0] - dx, q[1] - dy)
        sp = status(p)
        if sp is False:
            continue
        # legality of p -> q via m only depends on q's status for the arrival axis
        sq = status(q)
        if not (sq is None or sq == _AXIS[m]):
            continue
        lp = lower(p)
        for d in range(4):
            if d == _OPPOSITE[m] or (p, d) in h:
                continue
            if sp is not None and d != m:
                continue
            g = v + STEP_COST + (0 if d == m else BEND_COST)
            heapq.heappush(heap, (g + lp, g, p[1], p[0], d, p))
        if p in sources and sp is None and (p, None) not in h:
            heapq.heappush(heap, (v + STEP_COST, v + STEP_COST, p[1], p[0], -1, p))
    if best_start is None:
        return None

    path = [best_start]
    state: tuple[Point, int | None] = (best_start, None)
    while path[-1] != target:
        p, d = state
        cur = h[state]
        for m in range(4):
            if not grid.legal(p, d, m, net, status(p)):
                continue
            dx, dy = DIRS[m]
            q = (p[0] + dx, p[1] + dy)
            cost = STEP_COST + (0 if d is None or d == m else BEND_COST)
            if h.get((q, m)) == cur - cost:
                state = (q, m)
                path.append(q)
                break
        else:  # pragma: no cover - h is consistent by construction
            raise RuntimeError("path reconstruction failed")
    return path


def _stub(grid: RoutingGrid, net: str, t: Point) -> list[Point] | None:
    for m in range(4):
        dx, dy = DIRS[m]
        p, ok = t, True
        for i in range(STUB_LENGTH):
            if not grid.legal(p, None if i == 0 else m, m, net):
                ok = False
                break
            p = (p[0] + dx, p[1] + dy)
        if ok:
            return [t, p]
    return None


def route_net(task: ConnectionTask, grid: RoutingGrid) -> list[WirePolyline]:
    """Route one net on ``grid`` (mutated).  Raises :class:`Unroutable` with partial wires."""
    net = task.net
    points = []
    for t in task.terminals:
        if t.point is None:
            raise ValueError(f"terminal {t.device}:{t.role} has no position")
        if t.point not in points:
            points.append(t.point)
    if not points:
        return []
    wires: list[WirePolyline] = []
    missing: list[Point] = []
    if len(points) == 1:
        stub = _stub(grid, net, points[0])
        if stub is None:
            raise Unroutable(net, [], points)
        grid.add_path(net, stub)
        return [WirePolyline(net, tuple(stub))]

    routed: set[Point] = {points[0]} | grid.own_points(net)
    for t in points[1:]:
        if t in routed:
            continue
        eligible = [p for p in routed if grid.status(p, net) is None]
        path = None
        if eligible:
            start = min(eligible, key=lambda p: (abs(p[0] - t[0]) + abs(p[1] - t[1]), p))
            path = _search(grid, net, {start}, t)
            if path is None:
                path = _search(grid, net, set(eligible), t)
        if path is None:
            missing.append(t)
            routed.add(t)
            continue
        grid.add_path(net, path)
        routed.update(path)
        if len(path) > 1:
            wires.append(WirePolyline(net, simplify(path)))
    if missing:
        raise Unroutable(net, wires, missing)
    return wires


def remove_conflicts(
    wires,
    ranks: dict[str, int] | None = None,
    terminals: dict[Point, str] | None = None,
) -> tuple[list[WirePolyline], set[str]]:
    """Strip geometry that conflicts with a higher-priority net.

    Nets are ranked by ``ranks`` (lower wins), then by first appearance.
    Duplicate segments within a net merge.  Returns the cleaned polylines
    (maximal chains per net) and the set of nets that lost geometry.
    """
    first: dict[str, int] = {}
    for w in wires:
        first.setdefault(w.net, len(first))
    ranks = ranks or {}
    order = sorted(first, key=lambda n: (ranks.get(n, len(first) + 100), first[n]))

    raw: dict[str, set[Edge]] = {n: set() for n in order}
    for w in wires:
        pts = list(w.points)
        for p, q in zip(pts, pts[1:]):
            if p != q and (p[0] == q[0] or p[1] == q[1]):
                raw[w.net].update(unit_edges((p, q)))

    accepted: dict[str, set[Edge]] = {}
    owner: dict[Edge, str] = {}
    flagged: set[str] = set()
    for net in order:
        mine = {e for e in raw[net] if owner.get(e, net) == net}
        if len(mine) != len(raw[net]):
            flagged.add(net)
        while True:
            trial = dict(accepted)
            trial[net] = mine
            bad_points = {p for (a, b), p in conflicts(trial) if net in (a, b)}
            if terminals:
                for e in mine:
                    for p in e:
                        if terminals.get(p, net) != net:
                            bad_points.add(p)
            if not bad_points:
                break
            flagged.add(net)
            mine = {e for e in mine if e[0] not in bad_points and e[1] not in bad_points}
        accepted[net] = mine
        for e in mine:
            owner[e] = net

    out = []
    for net in order:
        for pts in edges_to_polylines(accepted[net]):
            out.append(WirePolyline(net, pts))
    return out, flagged


@dataclass
class NetReport:
    net: str
    rank: int
    length: int = 0
    bends: int = 0
    flags: list[str] = field(default_factory=list)

    def to_dict(self) -> dict:
        return {"net": self.net, "rank": self.rank, "length": self.length, "bends": self.bends,
                "flags": list(self.flags)}


@dataclass
class RoutingReport:
    nets: list[NetReport] = field(default_factory=list)

    @property
    def unroutable(self) -> list[str]:
        return [n.net for n in self.nets if "unroutable" in n.flags]

    def to_dict(self) -> dict:
        return {"nets": [n.to_dict() for n in self.nets]}

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2)

    def to_text(self) -> str:
        lines = [f"{'net':<12} {'rank':>4} {'length':>6} {'bends':>5}  flags"]
        for n in self.nets:
            lines.append(f"{n.net:<12} {n.rank:>4} {n.length:>6} {n.bends:>5}  {','.join(n.flags) or '-'}")
        return "\n".join(lines) + "\n"


def wire_layout(c: Circuit, layout: SchematicLayout) -> tuple[SchematicLayout, RoutingReport]:
    """Route every net of ``c`` over the placed ``layout``; existing wires are replaced."""
    report = RoutingReport()
    if not layout.components:
        return layout, report
    grid = RoutingGrid.from_layout(layout, c)
    tasks = priority_order(c, layout)
    routed: list[WirePolyline] = []
    labels: list[Label] = []
    reports: dict[str, NetReport] = {}
    placed = {comp.id for comp in layout.components}
    missing_nets = {n.name for n in c.nets if any(d not in placed for d, _ in n.terminals)}
    for task in tasks:
        rep = NetReport(task.net, task.priority_rank)
        reports[task.net] = rep
        report.nets.append(rep)
        if task.net in missing_nets:
            rep.flags.append("unplaced")
        try:
            wires = route_net(task, grid)
        except Unroutable as exc:
            wires = exc.wires
            rep.flags.append("unroutable")
        except ValueError:
            rep.flags.append("unplaced")
            continue
        routed.extend(wires)
        if len(task.terminals) == 1 and wires:
            end = wires[0].points[-1]
            labels.append(Label(task.net, end[0], end[1]))

    ranks = {t.net: t.priority_rank for t in tasks}
    cleaned, flagged = remove_conflicts(routed, ranks, grid.terminals)
    for net in sorted(flagged):
        reports[net].flags.append("conflict")
    for w in cleaned:
        rep = reports[w.net]
        rep.length += path_length(w.points)
        rep.bends += count_bends(w.points)
    return layout.with_wires(cleaned, labels), report
