"""Unit-edge view of rectilinear wires.

Every wire is decomposed into unit edges between adjacent grid points.  Wires
of one net touching at a point are joined there.  Two different nets may share
a point only as a clean crossing: each passes straight through on its own axis
and the axes are perpendicular.  Anything else is a conflict.
"""

from __future__ import annotations

from collections import defaultdict
from typing import Iterable

Point = tuple[int, int]
Edge = tuple[Point, Point]

DIRS = ((-1, 0), (1, 0), (0, -1), (0, 1))  # left, right, up, down


def edge(p: Point, q: Point) -> Edge:
    return (p, q) if p <= q else (q, p)


def unit_edges(points: Iterable[Point]) -> list[Edge]:
    pts = list(points)
    out = []
    for (x0, y0), (x1, y1) in zip(pts, pts[1:]):
        if x0 != x1 and y0 != y1:
            raise ValueError(f"diagonal segment {(x0, y0)}-{(x1, y1)}")
        dx = (x1 > x0) - (x1 < x0)
        dy = (y1 > y0) - (y1 < y0)
        x, y = x0, y0
        while (x, y) != (x1, y1):
            nx, ny = x + dx, y + dy
            out.append(edge((x, y), (nx, ny)))
            x, y = nx, ny
    return out


def net_edges(wires) -> dict[str, set[Edge]]:
    """Per-net set of unit edges; diagonal segments are skipped."""
    out: dict[str, set[Edge]] = defaultdict(set)
    for w in wires:
        pts = list(w.points)
        for p, q in zip(pts, pts[1:]):
            if p[0] == q[0] or p[1] == q[1]:
                out[w.net].update(unit_edges((p, q)))
        if len(pts) == 1:
            out[w.net]
    return dict(out)


def net_points(wires) -> dict[str, set[Point]]:
    out: dict[str, set[Point]] = defaultdict(set)
    for w in wires:
        pts = list(w.points)
        out[w.net].update(pts)
        for p, q in zip(pts, pts[1:]):
            if p[0] == q[0] or p[1] == q[1]:
                for e in unit_edges((p, q)):
                    out[w.net].update(e)
    return dict(out)


def incidence(edges_by_net: dict[str, set[Edge]]) -> dict[Point, dict[str, set[Point]]]:
    """point -> net -> set of unit directions leaving the point on that net."""
    inc: dict[Point, dict[str, set[Point]]] = defaultdict(lambda: defaultdict(set))
    for net, edges in edges_by_net.items():
        for p, q in edges:
            d = (q[0] - p[0], q[1] - p[1])
            inc[p][net].add(d)
            inc[q][net].add((-d[0], -d[1]))
    return inc


def straight_axis(dirs: set[Point]) -> str | None:
    """'H' or 'V' if ``dirs`` is exactly a straight pass, else None."""
    if dirs == {(-1, 0), (1, 0)}:
        return "H"
    if dirs == {(0, -1), (0, 1)}:
        return "V"
    return None


def is_clean_crossing(nets_here: dict[str, set[Point]]) -> bool:
    if len(nets_here) != 2:
        return len(nets_here) < 2
    a, b = (straight_axis(d) for d in nets_here.values())
    return a is not None and b is not None and a != b


def conflicts(edges_by_net: dict[str, set[Edge]],
              extra_points: dict[str, set[Point]] | None = None) -> list[tuple[tuple[str, str], Point]]:
    """Points where two nets meet other than as a clean crossing.

    ``extra_points`` adds isolated points per net (e.g. single-point wires)
    that touch whatever else is there.
    """
    inc = incidence(edges_by_net)
    if extra_points:
        for net, pts in extra_points.items():
            for p in pts:
                inc[p][net]  # noqa: B018 - materialize presence without directions
    out = []
    for p in sorted(inc):
        here = inc[p]
        if len(here) < 2 or is_clean_crossing(here):
            continue
        names = sorted(here)
        for i, a in enumerate(names):
            for b in names[i + 1:]:
                out.append(((a, b), p))
    return out


def crossings(edges_by_net: dict[str, set[Edge]]) -> list[Point]:
    inc = incidence(edges_by_net)
    return sorted(p for p, here in inc.items() if len(here) == 2 and is_clean_crossing(here))


def junctions(edges_by_net: dict[str, set[Edge]]) -> list[tuple[str, Point]]:
    """Same-net T (or 4-way) points, where the renderer draws a dot."""
    inc = incidence(edges_by_net)
    return sorted((net, p) for p, here in inc.items() for net, dirs in here.items() if len(dirs) >= 3)


def edges_to_polylines(edges: set[Edge]) -> list[tuple[Point, ...]]:
    """Deterministically decompose a unit-edge set into maximal polylines.

    Chains break at points whose degree is not 2; collinear interior points
    are dropped so each vertex is an endpoint or a bend.
    """
    adj: dict[Point, list[Point]] = defaultdict(list)
    for p, q in edges:
        adj[p].append(q)
        adj[q].append(p)
    for p in adj:
        adj[p].sort()
    used: set[Edge] = set()
    chains: list[list[Point]] = []

    def walk(start: Point, nxt: Point) -> list[Point]:
        chain = [start, nxt]
        used.add(edge(start, nxt))
        cur = nxt
        while len(adj[cur]) == 2:
            cand = [n for n in adj[cur] if edge(cur, n) not in used]
            if not cand:
                break
            used.add(edge(cur, cand[0]))
            chain.append(cand[0])
            cur = cand[0]
        return chain

    breaks = sorted(p for p in adj if len(adj[p]) != 2)
    for p in breaks:
        for n in adj[p]:
            if edge(p, n) not in used:
                chains.append(walk(p, n))
    for p in sorted(adj):  # pure cycles
        for n in adj[p]:
            if edge(p, n) not in used:
                chains.append(walk(p, n))
    return [simplify(c) for c in chains]


def simplify(points: list[Point]) -> tuple[Point, ...]:
    out: list[Point] = []
    for p in points:
        if out and out[-1] == p:
            continue
        if len(out) >= 2:
            a, b = out[-2], out[-1]
            if (a[0] == b[0] == p[0]) or (a[1] == b[1] == p[1]):
                out[-1] = p
                continue
        out.append(p)
    return tuple(out)


def bends(points: tuple[Point, ...]) -> int:
    pts = simplify(list(points))
    return max(len(pts) - 2, 0)


def length(points: tuple[Point, ...]) -> int:
    return sum(abs(p[0] - q[0]) + abs(p[1] - q[1]) for p, q in zip(points, points[1:]))
