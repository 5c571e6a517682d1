"""Deterministic SVG rendering of a layout, plus terminal anchor geometry."""

from __future__ import annotations

from dataclasses import dataclass, field
from xml.sax.saxutils import escape, quoteattr

from .geometry import junctions, net_edges
from .netlist import Circuit
from .placement import SchematicLayout, port_net, validate_layout
from .symbols import PORT, UnknownKind, anchor_offsets, symbol, transform

ACCENT = "#d62728"
INK = "#1a1a1a"
WARN = "#ff7f0e"


@dataclass(frozen=True)
class TerminalPoint:
    device: str
    role: str
    net: str | None
    point: tuple[int, int] | None


@dataclass(frozen=True)
class RenderOptions:
    unit_px: int = 10
    show_labels: bool = True
    show_grid: bool = False
    highlight: frozenset[str] = field(default_factory=frozenset)

    def __post_init__(self):
        if self.unit_px < 4:
            raise ValueError("unit_px must be >= 4")
        object.__setattr__(self, "highlight", frozenset(self.highlight))


def terminal_positions(layout: SchematicLayout, circuit: Circuit | None = None) -> list[TerminalPoint]:
    """Grid position of every component terminal.

    Nets are filled from ``circuit`` for devices; port nets come from the id.
    """
    out = []
    devices = {d.name: d for d in circuit.devices} if circuit is not None else {}
    for comp in sorted(layout.components, key=lambda c: c.id):
        offsets = anchor_offsets(comp.kind, comp.orientation)
        dev = devices.get(comp.id)
        for role, (dx, dy) in offsets.items():
            if comp.kind == PORT:
                net = port_net(comp.id)
            elif dev is not None:
                net = next((t.net for t in dev.terminals if t.role.value == role), None)
            else:
                net = None
            out.append(TerminalPoint(comp.id, role, net, (comp.x + dx, comp.y + dy)))
    return out


def _f(v: float) -> str:
    return f"{v:.1f}"


def _css(opts: RenderOptions) -> str:
    sw = _f(opts.unit_px * 0.15)
    return (
        f".symbol{{stroke:{INK};stroke-width:{sw};fill:none}}"
        f".accent .symbol{{stroke:{ACCENT}}}"
        f".violation .symbol{{stroke:{WARN}}}"
        f".wire{{stroke:{INK};stroke-width:{sw};fill:none}}"
        f".wire.violation{{stroke:{WARN}}}"
        f".junction{{fill:{INK}}}"
        ".anchor{fill:none;stroke:none}"
        ".gridpt{fill:#c8c8c8}"
        f"text{{font-family:monospace;font-size:{_f(opts.unit_px * 1.1)}px;fill:{INK}}}"
    )


def render_svg(layout: SchematicLayout, opts: RenderOptions | None = None) -> str:
    """Render ``layout`` to an SVG 1.1 document string."""
    opts = opts or RenderOptions()
    u = opts.unit_px
    W, H = layout.width * u, layout.height * u
    flagged = {cid for v in validate_layout(layout) for cid in v.ids}
    parts = [
        '<?xml version="1.0" encoding="UTF-8"?>',
        f'<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{W}" height="{H}" '
        f'viewBox="0 0 {W} {H}">',
        f"<style>{_css(opts)}</style>",
        f'<rect class="background" x="0.0" y="0.0" width="{_f(W)}" height="{_f(H)}" fill="#ffffff"/>',
    ]
    if opts.show_grid:
        parts.append('<g id="grid">')
        for gy in range(0, layout.height + 1, 2):
            for gx in range(0, layout.width + 1, 2):
                parts.append(f'<circle class="gridpt" cx="{_f(gx * u)}" cy="{_f(gy * u)}" r="{_f(u * 0.08)}"/>')
        parts.append("</g>")

    if layout.wires:
        parts.append('<g id="wires">')
        for i, w in enumerate(layout.wires):
            cls = "wire violation" if f"wire[{i}]" in flagged else "wire"
            pts = " ".join(f"{_f(x * u)},{_f(y * u)}" for x, y in w.points)
            parts.append(f"<polyline class={quoteattr(cls)} data-net={quoteattr(w.net)} points={quoteattr(pts)}/>")
        parts.append("</g>")
        dots = junctions(net_edges(layout.wires))
        if dots:
            parts.append('<g id="junctions">')
            for net, (x, y) in dots:
                parts.append(f'<circle class="junction" data-net={quoteattr(net)} cx="{_f(x * u)}" '
                             f'cy="{_f(y * u)}" r="{_f(u * 0.3)}"/>')
            parts.append("</g>")

    for comp in sorted(layout.components, key=lambda c: c.id):
        try:
            sym = symbol(comp.kind)
        except UnknownKind:
            raise UnknownKind(f"{comp.id}: no symbol for kind {comp.kind}") from None
        w, h = sym.box
        o = comp.orientation

        def px(lx, ly):
            tx, ty = transform(lx, ly, w, h, o)
            return (comp.x + tx) * u, (comp.y + ty) * u

        classes = ["component", comp.kind.lower()]
        if comp.id in opts.highlight:
            classes.append("accent")
        if comp.id in flagged:
            classes.append("violation")
        parts.append(f"<g id={quoteattr(comp.id)} class={quoteattr(' '.join(classes))} "
                     f'data-kind="{comp.kind}" data-rot="{comp.rot}" data-mirror="{str(comp.mirror).lower()}">')
        for stroke in sym.strokes:
            if stroke[0] == "line":
                x1, y1 = px(stroke[1], stroke[2])
                x2, y2 = px(stroke[3], stroke[4])
                parts.append(f'<line class="symbol" x1="{_f(x1)}" y1="{_f(y1)}" x2="{_f(x2)}" y2="{_f(y2)}"/>')
            elif stroke[0] == "circle":
                cx, cy = px(stroke[1], stroke[2])
                parts.append(f'<circle class="symbol" cx="{_f(cx)}" cy="{_f(cy)}" r="{_f(stroke[3] * u)}"/>')
        for role, (dx, dy) in anchor_offsets(comp.kind, o).items():
            ax, ay = comp.x + dx, comp.y + dy
            parts.append(f'<circle class="anchor" data-terminal={quoteattr(f"{comp.id}:{role}:{ax}:{ay}")} '
                         f'cx="{_f(ax * u)}" cy="{_f(ay * u)}" r="{_f(u * 0.2)}"/>')
        if opts.show_labels:
            bx, by, bx1, _ = comp.box
            text = port_net(comp.id) if comp.kind == PORT else comp.id
            anchor_x = (bx1 + 0.3) * u if comp.kind == PORT and not comp.mirror else bx * u
            if comp.kind == PORT and comp.mirror:
                anchor_x = (bx - 0.3) * u
                parts.append(f'<text class="id-label" x="{_f(anchor_x)}" y="{_f((by - 0.3) * u)}" '
                             f'text-anchor="end">{escape(text)}</text>')
            else:
                parts.append(f'<text class="id-label" x="{_f(anchor_x)}" y="{_f((by - 0.3) * u)}">'
                             f"{escape(text)}</text>")
        parts.append("</g>")

    if opts.show_labels and layout.labels:
        parts.append('<g id="labels">')
        for lab in layout.labels:
            parts.append(f'<text class="net-label" data-net={quoteattr(lab.net)} x="{_f(lab.x * u)}" '
                         f'y="{_f(lab.y * u)}">{escape(lab.net)}</text>')
        parts.append("</g>")
    parts.append("</svg>")
    return "\n".join(parts) + "\n"
