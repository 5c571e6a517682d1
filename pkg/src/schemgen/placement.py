"""The layout document (component placement + wires) and initial placement."""

from __future__ import annotations

import json
import logging
from collections import defaultdict, deque
from dataclasses import dataclass, field, replace
from typing import Any

from .netlist import Circuit, DeviceKind, NetClass, Role
from .substructure import PAIR_KINDS, SubstructureMatch
from .symbols import PORT, Orientation, UnknownKind, box_size, symbol_table

log = logging.getLogger(__name__)

DEFAULT_WIDTH = 64
DEFAULT_HEIGHT = 64
CLEARANCE = 2
PAIR_GAP = 4
UNIT_GAP = 4
ROW_GAP = 4
PORT_PREFIX = "PORT_"

Point = tuple[int, int]


class SchemaError(ValueError):
    def __init__(self, path: str, message: str):
        super().__init__(f"{path}: {message}")
        self.path = path
        self.message = message


class PlacementOverflow(RuntimeError):
    pass


@dataclass(frozen=True)
class PlacedComponent:
    id: str
    kind: str
    x: int
    y: int
    rot: int = 0
    mirror: bool = False

    @property
    def orientation(self) -> Orientation:
        return Orientation(self.rot, self.mirror)

    @property
    def size(self) -> tuple[int, int]:
        return box_size(self.kind, self.orientation)

    @property
    def box(self) -> tuple[int, int, int, int]:
        """Closed extent ``(x0, y0, x1, y1)``."""
        w, h = self.size
        return self.x, self.y, self.x + w, self.y + h


@dataclass(frozen=True)
class WirePolyline:
    net: str
    points: tuple[Point, ...]

    def segments(self):
        return zip(self.points, self.points[1:])


@dataclass(frozen=True)
class Label:
    net: str
    x: int
    y: int


@dataclass(frozen=True)
class SchematicLayout:
    width: int = DEFAULT_WIDTH
    height: int = DEFAULT_HEIGHT
    components: tuple[PlacedComponent, ...] = ()
    wires: tuple[WirePolyline, ...] = ()
    labels: tuple[Label, ...] = ()

    def component(self, cid: str) -> PlacedComponent:
        for c in self.components:
            if c.id == cid:
                return c
        raise KeyError(cid)

    def with_wires(self, wires, labels=None) -> "SchematicLayout":
        return replace(self, wires=tuple(wires), labels=self.labels if labels is None else tuple(labels))


@dataclass(frozen=True)
class Violation:
    code: str
    message: str
    ids: tuple[str, ...] = ()

    def to_dict(self) -> dict:
        return {"code": self.code, "message": self.message, "ids": list(self.ids)}


def port_id(net: str) -> str:
    return PORT_PREFIX + net


def port_net(cid: str) -> str | None:
    return cid[len(PORT_PREFIX):] if cid.startswith(PORT_PREFIX) else None


# -- serialization ---------------------------------------------------------

_TOP_KEYS = ("grid", "components", "wires", "labels")
_COMPONENT_KEYS = ("id", "kind", "x", "y", "rot", "mirror")


def _require(obj: Any, key: str, path: str, types, warnings: list[str]):
    if not isinstance(obj, dict):
        raise SchemaError(path or "/", "expected an object")
    if key not in obj:
        raise SchemaError(f"{path}/{key}", "missing required field")
    value = obj[key]
    # bool is an int subclass; reject it where an integer is required
    if types is int and isinstance(value, bool) or not isinstance(value, types):
        raise SchemaError(f"{path}/{key}", f"expected {getattr(types, '__name__', types)}")
    return value


def _warn_extra(obj: dict, allowed, path: str, warnings: list[str]):
    for key in obj:
        if key not in allowed:
            warnings.append(f"{path}/{key}: unknown field ignored")


def _point(p: Any, path: str) -> Point:
    if (not isinstance(p, list) or len(p) != 2
            or not all(isinstance(v, int) and not isinstance(v, bool) for v in p)):
        raise SchemaError(path, "expected [x, y] integer pair")
    return p[0], p[1]


def layout_from_obj(doc: Any, warnings: list[str] | None = None) -> SchematicLayout:
    warnings = [] if warnings is None else warnings
    if not isinstance(doc, dict):
        raise SchemaError("/", "expected an object")
    _warn_extra(doc, _TOP_KEYS, "", warnings)
    grid = _require(doc, "grid", "", dict, warnings)
    width = _require(grid, "width", "/grid", int, warnings)
    height = _require(grid, "height", "/grid", int, warnings)
    _warn_extra(grid, ("width", "height"), "/grid", warnings)

    comps = []
    for i, c in enumerate(_require(doc, "components", "", list, warnings)):
        path = f"/components/{i}"
        cid = _require(c, "id", path, str, warnings)
        kind = _require(c, "kind", path, str, warnings)
        x = _require(c, "x", path, int, warnings)
        y = _require(c, "y", path, int, warnings)
        rot = _require(c, "rot", path, int, warnings)
        mirror = _require(c, "mirror", path, bool, warnings)
        if rot not in (0, 90, 180, 270):
            raise SchemaError(f"{path}/rot", "expected 0, 90, 180 or 270")
        if kind not in symbol_table():
            raise SchemaError(f"{path}/kind", f"unknown component kind {kind!r}")
        _warn_extra(c, _COMPONENT_KEYS, path, warnings)
        comps.append(PlacedComponent(cid, kind, x, y, rot, mirror))

    wires = []
    for i, w in enumerate(_require(doc, "wires", "", list, warnings)):
        path = f"/wires/{i}"
        net = _require(w, "net", path, str, warnings)
        pts = _require(w, "points", path, list, warnings)
        _warn_extra(w, ("net", "points"), path, warnings)
        wires.append(WirePolyline(net, tuple(_point(p, f"{path}/points/{j}") for j, p in enumerate(pts))))

    labels = []
    for i, lab in enumerate(doc.get("labels", [])):
        path = f"/labels/{i}"
        labels.append(Label(_require(lab, "net", path, str, warnings),
                            _require(lab, "x", path, int, warnings),
                            _require(lab, "y", path, int, warnings)))
    return SchematicLayout(width, height, tuple(comps), tuple(wires), tuple(labels))


def read_layout(data: bytes | str, warnings: list[str] | None = None) -> SchematicLayout:
    """Parse a layout document.  Unknown fields are collected in ``warnings``."""
    if isinstance(data, bytes):
        data = data.decode("utf-8")
    try:
        doc = json.loads(data)
    except json.JSONDecodeError as exc:
        raise SchemaError("/", f"invalid JSON: {exc.msg} at line {exc.lineno}") from None
    collected: list[str] = []
    layout = layout_from_obj(doc, collected)
    for w in collected:
        log.warning("layout: %s", w)
    if warnings is not None:
        warnings.extend(collected)
    return layout


def _dumps(obj) -> str:
    return json.dumps(obj, separators=(", ", ": "))


def write_layout(layout: SchematicLayout) -> bytes:
    """Canonical serialization: fixed key order, components sorted by id."""
    lines = ["{", f'  "grid": {_dumps({"width": layout.width, "height": layout.height})},']

    def block(name: str, items: list[str], last: bool = False):
        if not items:
            lines.append(f'  "{name}": []' + ("" if last else ","))
            return
        lines.append(f'  "{name}": [')
        lines.extend("    " + it + ("," if i < len(items) - 1 else "") for i, it in enumerate(items))
        lines.append("  ]" + ("" if last else ","))

    block("components", [
        _dumps({"id": c.id, "kind": c.kind, "x": c.x, "y": c.y, "rot": c.rot, "mirror": c.mirror})
        for c in sorted(layout.components, key=lambda c: c.id)
    ])
    block("wires", [_dumps({"net": w.net, "points": [list(p) for p in w.points]}) for w in layout.wires])
    block("labels", [_dumps({"net": lab.net, "x": lab.x, "y": lab.y}) for lab in layout.labels], last=True)
    lines.append("}")
    return ("\n".join(lines) + "\n").encode("utf-8")


# -- validation ------------------------------------------------------------

def boxes_intersect(a, b) -> bool:
    return a[0] <= b[2] and b[0] <= a[2] and a[1] <= b[3] and b[1] <= a[3]


def validate_layout(layout: SchematicLayout, circuit: Circuit | None = None) -> list[Violation]:
    """All structural violations of ``layout``; empty means structurally valid."""
    out: list[Violation] = []
    known = {c.id for c in layout.components}
    seen: set[str] = set()
    placed = []
    for c in layout.components:
        if c.id in seen:
            out.append(Violation("duplicate_id", f"component id {c.id} appears twice", (c.id,)))
            continue
        seen.add(c.id)
        try:
            x0, y0, x1, y1 = c.box
        except UnknownKind:
            out.append(Violation("unknown_kind", f"{c.id}: no symbol for kind {c.kind}", (c.id,)))
            continue
        if x0 < 0 or y0 < 0 or x1 > layout.width or y1 > layout.height:
            out.append(Violation("out_of_bounds", f"{c.id} box {c.box} outside canvas", (c.id,)))
        placed.append(c)
        if circuit is not None:
            net = port_net(c.id)
            if c.kind == PORT:
                if net is None or net not in circuit.net_class:
                    out.append(Violation("unknown_id", f"port {c.id} names no circuit net", (c.id,)))
            else:
                try:
                    dev = circuit.device(c.id)
                    if dev.kind.value != c.kind:
                        out.append(Violation("kind_mismatch", f"{c.id} is {dev.kind.value}, placed as {c.kind}",
                                             (c.id,)))
                except KeyError:
                    out.append(Violation("unknown_id", f"{c.id} is not a circuit device", (c.id,)))

    for i, a in enumerate(placed):
        for b in placed[i + 1:]:
            if boxes_intersect(a.box, b.box):
                out.append(Violation("overlap", f"{a.id} and {b.id} overlap", (a.id, b.id)))

    if circuit is not None:
        for d in circuit.devices:
            if d.name not in known:
                out.append(Violation("missing_component", f"device {d.name} is not placed", (d.name,)))

    nets = circuit.net_class if circuit is not None else None
    for i, w in enumerate(layout.wires):
        tag = (f"wire[{i}]",)
        if nets is not None and w.net not in nets:
            out.append(Violation("unknown_net", f"wire {i} uses unknown net {w.net}", tag))
        if len(w.points) < 2:
            out.append(Violation("wire_too_short", f"wire {i} ({w.net}) has fewer than 2 points", tag))
        for x, y in w.points:
            if not (0 <= x <= layout.width and 0 <= y <= layout.height):
                out.append(Violation("out_of_bounds", f"wire {i} ({w.net}) point {(x, y)} outside canvas", tag))
                break
        for p, q in w.segments():
            if p == q:
                out.append(Violation("zero_length", f"wire {i} ({w.net}) repeats point {p}", tag))
            elif p[0] != q[0] and p[1] != q[1]:
                out.append(Violation("not_rectilinear", f"wire {i} ({w.net}) segment {p}-{q} is diagonal", tag))
    return out


# -- initial placement -----------------------------------------------------

def _channel_nets(dev) -> tuple[str, ...]:
    if dev.kind.is_mos:
        return dev.net_of(Role.DRAIN), dev.net_of(Role.SOURCE)
    return dev.nets


def _supply_distances(c: Circuit, klass: NetClass) -> dict[str, int]:
    """Hop distance of each net from the supply class through device channels."""
    adj: dict[str, set[str]] = defaultdict(set)
    for d in c.devices:
        a, b = _channel_nets(d)
        adj[a].add(b)
        adj[b].add(a)
    dist = {n.name: 0 for n in c.nets if n.klass == klass}
    queue = deque(sorted(dist))
    while queue:
        n = queue.popleft()
        for m in sorted(adj[n]):
            if m not in dist:
                dist[m] = dist[n] + 1
                queue.append(m)
    return dist


def row_keys(c: Circuit) -> dict[str, tuple[int, int]]:
    """Vertical ordering key per device: power-touching first, ground-touching last."""
    klass = c.net_class
    up = _supply_distances(c, NetClass.POWER)
    down = _supply_distances(c, NetClass.GROUND)
    far = len(c.nets) + 1
    keys = {}
    for d in c.devices:
        chan = _channel_nets(d)
        touches_p = any(klass[n] == NetClass.POWER for n in chan)
        touches_g = any(klass[n] == NetClass.GROUND for n in chan)
        group = 0 if touches_p and not touches_g else 2 if touches_g and not touches_p else 1
        u = min(up.get(n, far) for n in chan)
        v = min(down.get(n, far) for n in chan)
        keys[d.name] = (group, u - v)
    return keys


def _port_sides(c: Circuit) -> list[tuple[str, bool]]:
    """``(net, is_output)`` for each IO-class port in declaration order."""
    sides = []
    for name in c.io_ports:
        net = c.net(name)
        if net.klass != NetClass.IO:
            continue
        is_input = any(role == Role.GATE for _, role in net.terminals)
        sides.append((name, not is_input))
    return sides


def initial_place(
    c: Circuit,
    matches: list[SubstructureMatch],
    width: int = DEFAULT_WIDTH,
    height: int = DEFAULT_HEIGHT,
) -> SchematicLayout:
    """Deterministic seed placement from substructure matches.

    Rows follow supply proximity; differential pairs and current mirrors (and
    any two same-kind devices sharing a gate net in one row) are placed
    mirror-symmetric about the vertical centerline with the right member
    mirrored.  Remaining devices are centered or flanked outward.
    """
    if not c.devices:
        return SchematicLayout(width, height)
    keys = row_keys(c)
    pairs: list[tuple[str, str]] = []
    paired: set[str] = set()
    for m in sorted(matches, key=SubstructureMatch.sort_key):
        if m.kind in PAIR_KINDS:
            a, b = m.devices
            if a in paired or b in paired:
                continue
            pairs.append((a, b))
            paired.update((a, b))
            keys[a] = keys[b] = min(keys[a], keys[b])

    rows: dict[tuple, list[str]] = defaultdict(list)
    for d in c.devices:
        rows[keys[d.name]].append(d.name)
    order = sorted(rows)

    row_items: list[tuple[list[tuple[str, str]], list[str]]] = []
    for key in order:
        names = set(rows[key])
        row_pairs = [p for p in pairs if p[0] in names]
        singles = sorted(n for n in names if n not in paired)
        # same-kind singles sharing a gate net read best as a symmetric pair
        by_gate: dict[tuple, list[str]] = defaultdict(list)
        for n in singles:
            dev = c.device(n)
            if dev.kind.is_mos:
                by_gate[(dev.kind, dev.net_of(Role.GATE))].append(n)
        for group in sorted(by_gate.values()):
            if len(group) == 2:
                row_pairs.append((group[0], group[1]))
                singles = [s for s in singles if s not in group]
        row_items.append((row_pairs, singles))

    kinds = {d.name: d.kind.value for d in c.devices}
    row_items, heights, total_h = _fit_rows(row_items, kinds, width, height)
    center = width // 2
    y = (height - total_h) // 2
    if y < CLEARANCE + 2:
        raise PlacementOverflow(f"{len(heights)} rows need {total_h} units, canvas height is {height}")

    comps: list[PlacedComponent] = []
    for (row_pairs, singles), row_h in zip(row_items, heights):
        left_edge, right_edge = center, center
        for i, (a, b) in enumerate(row_pairs):
            wa = box_size(kinds[a], Orientation())[0]
            wb = box_size(kinds[b], Orientation())[0]
            gap = PAIR_GAP // 2 if i == 0 else UNIT_GAP
            w = max(wa, wb)
            xa = left_edge - gap - w
            xb = right_edge + gap
            comps.append(PlacedComponent(a, kinds[a], xa + (w - wa), y, 0, False))
            comps.append(PlacedComponent(b, kinds[b], xb, y, 0, True))
            left_edge, right_edge = xa, xb + w
        if singles and not row_pairs:
            widths = [box_size(kinds[n], Orientation())[0] for n in singles]
            span = sum(widths) + UNIT_GAP * (len(singles) - 1)
            x = center - span // 2
            for n, w in zip(singles, widths):
                comps.append(PlacedComponent(n, kinds[n], x, y, 0, False))
                x += w + UNIT_GAP
        else:
            for i, n in enumerate(singles):
                w = box_size(kinds[n], Orientation())[0]
                if i % 2 == 0:
                    x = right_edge + UNIT_GAP
                    right_edge = x + w
                else:
                    x = left_edge - UNIT_GAP - w
                    left_edge = x
                comps.append(PlacedComponent(n, kinds[n], x, y, 0, False))
        y += row_h + ROW_GAP

    comps.extend(_place_ports(c, comps, width, height))
    layout = SchematicLayout(width, height, tuple(comps))
    bad = [v for v in validate_layout(layout) if v.code in ("out_of_bounds", "overlap")]
    if bad or _crowded(layout):
        raise PlacementOverflow("; ".join(v.message for v in bad) or "components closer than clearance")
    return layout


def _stack(row_items, kinds: dict[str, str]) -> tuple[list[int], int]:
    heights = [max(box_size(kinds[n], Orientation())[1] for n in [*(x for p in ps for x in p), *ss])
               for ps, ss in row_items]
    return heights, sum(heights) + ROW_GAP * (len(heights) - 1)


def _fit_rows(row_items, kinds: dict[str, str], width: int, height: int):
    """Wrap rows to the width; while the stack is too tall, merge the lightest adjacent rows."""
    rows = list(row_items)
    while True:
        wrapped = _wrap_rows(rows, kinds, width)
        heights, total_h = _stack(wrapped, kinds)
        if (height - total_h) // 2 >= CLEARANCE + 2 or len(rows) < 2:
            return wrapped, heights, total_h
        size = [2 * len(ps) + len(ss) for ps, ss in rows]
        i = min(range(len(rows) - 1), key=lambda k: (size[k] + size[k + 1], k))
        (pa, sa), (pb, sb) = rows[i], rows[i + 1]
        rows[i:i + 2] = [(pa + pb, sa + sb)]


def _wrap_rows(row_items, kinds: dict[str, str], width: int):
    """Spill singles that would crowd the port margins onto continuation rows.

    Mirrors the x arithmetic of :func:`initial_place`: pairs grow outward
    from the centerline, flanking singles alternate right then left.
    """
    lo, hi = 2 + 2 * CLEARANCE, width - 2 - 2 * CLEARANCE
    center = width // 2
    w = lambda n: box_size(kinds[n], Orientation())[0]  # noqa: E731
    out = []
    for row_pairs, singles in row_items:
        rest = singles
        if row_pairs:
            left = right = center
            for i, (a, b) in enumerate(row_pairs):
                step = (PAIR_GAP // 2 if i == 0 else UNIT_GAP) + max(w(a), w(b))
                left, right = left - step, right + step
            kept: list[str] = []
            for n in singles:
                if len(kept) % 2 == 0:
                    if right + UNIT_GAP + w(n) > hi:
                        break
                    right += UNIT_GAP + w(n)
                else:
                    if left - UNIT_GAP - w(n) < lo:
                        break
                    left -= UNIT_GAP + w(n)
                kept.append(n)
            out.append((row_pairs, kept))
            rest = singles[len(kept):]
        chunk: list[str] = []
        span = -UNIT_GAP
        for n in rest:
            if chunk and span + UNIT_GAP + w(n) > hi - lo:
                out.append(([], chunk))
                chunk, span = [], -UNIT_GAP
            chunk.append(n)
            span += UNIT_GAP + w(n)
        if chunk:
            out.append(([], chunk))
    return out


def _crowded(layout: SchematicLayout) -> bool:
    comps = layout.components
    for i, a in enumerate(comps):
        x0, y0, x1, y1 = a.box
        grown = (x0 - CLEARANCE, y0 - CLEARANCE, x1 + CLEARANCE, y1 + CLEARANCE)
        for b in comps[i + 1:]:
            bx = b.box
            # strict: boxes exactly CLEARANCE apart are fine
            if grown[0] < bx[2] and bx[0] < grown[2] and grown[1] < bx[3] and bx[1] < grown[3]:
                return True
    return False


def _place_ports(c: Circuit, comps: list[PlacedComponent], width: int, height: int) -> list[PlacedComponent]:
    from .symbols import anchor_offsets

    anchors: dict[str, list[tuple[int, int]]] = defaultdict(list)
    by_id = {p.id: p for p in comps}
    for dev in c.devices:
        p = by_id[dev.name]
        offs = anchor_offsets(p.kind, p.orientation)
        for t in dev.terminals:
            dx, dy = offs[t.role.value]
            anchors[t.net].append((p.x + dx, p.y + dy))

    ports: list[PlacedComponent] = []
    taken: dict[bool, list[int]] = {False: [], True: []}
    for net, is_output in _port_sides(c):
        target_y = min(anchors[net], key=lambda p: (p[1], p[0]))[1] if anchors[net] else height // 2
        y = min(max(target_y - 1, 0), height - 2)
        # keep 2 units clear of ports already on this side
        while any(abs(y - other) < 2 + CLEARANCE for other in taken[is_output]):
            y += 2 + CLEARANCE
        if y + 2 > height:
            raise PlacementOverflow(f"no room for port {net}")
        taken[is_output].append(y)
        x = width - 2 if is_output else 0
        ports.append(PlacedComponent(port_id(net), PORT, x, y, 0, is_output))
    return ports
