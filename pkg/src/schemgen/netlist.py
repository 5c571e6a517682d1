"""Flat SPICE-subset netlist parser and connectivity model.

Supported cards: ``M`` (4-terminal MOS), ``R``, ``C``, ``V``, ``I``, plus the
``.ports`` card naming external pins and an optional ``.end``.  Comments start
with ``*`` (whole line) or ``;`` (rest of line); ``+`` continues the previous
card.  Identifiers are case-insensitive and normalized to upper case.
Parameter values are kept as verbatim text.
"""

from __future__ import annotations

import enum
import logging
import re
from dataclasses import dataclass, field, replace
from typing import Iterable

log = logging.getLogger(__name__)

POWER_ALIASES = frozenset({"VDD", "VCC", "VDD!", "AVDD"})
GROUND_ALIASES = frozenset({"GND", "VSS", "0", "GND!", "AGND"})


class DeviceKind(str, enum.Enum):
    NMOS = "NMOS"
    PMOS = "PMOS"
    RESISTOR = "RESISTOR"
    CAPACITOR = "CAPACITOR"
    VSOURCE = "VSOURCE"
    ISOURCE = "ISOURCE"

    @property
    def is_mos(self) -> bool:
        return self in (DeviceKind.NMOS, DeviceKind.PMOS)


class Role(str, enum.Enum):
    DRAIN = "DRAIN"
    GATE = "GATE"
    SOURCE = "SOURCE"
    BULK = "BULK"
    POS = "POS"
    NEG = "NEG"
    PIN = "PIN"


class NetClass(str, enum.Enum):
    POWER = "POWER"
    GROUND = "GROUND"
    SIGNAL = "SIGNAL"
    IO = "IO"


MOS_ROLES = (Role.DRAIN, Role.GATE, Role.SOURCE, Role.BULK)
TWO_PIN_ROLES = (Role.POS, Role.NEG)

_PREFIX = {
    "M": (DeviceKind.NMOS, DeviceKind.PMOS),
    "R": (DeviceKind.RESISTOR,),
    "C": (DeviceKind.CAPACITOR,),
    "V": (DeviceKind.VSOURCE,),
    "I": (DeviceKind.ISOURCE,),
}
_LETTER = {
    DeviceKind.NMOS: "M",
    DeviceKind.PMOS: "M",
    DeviceKind.RESISTOR: "R",
    DeviceKind.CAPACITOR: "C",
    DeviceKind.VSOURCE: "V",
    DeviceKind.ISOURCE: "I",
}
_PMOS_MODELS = ("PMOS", "PCH", "PFET")
_NMOS_MODELS = ("NMOS", "NCH", "NFET")


class NetlistError(ValueError):
    """Base class for netlist diagnostics.

    ``str()`` renders as ``file:line:col: code: message``.
    """

    code = "netlist-error"

    def __init__(self, message: str, line: int = 0, col: int = 0, filename: str = "<netlist>"):
        super().__init__(message)
        self.message = message
        self.line = line
        self.col = col
        self.filename = filename

    def __str__(self) -> str:
        return f"{self.filename}:{self.line}:{self.col}: {self.code}: {self.message}"


class NetlistSyntaxError(NetlistError):
    code = "syntax-error"


class DuplicateDevice(NetlistError):
    code = "duplicate-device"


class ArityError(NetlistError):
    code = "arity-error"


class EmptyNetlist(NetlistError):
    code = "empty-netlist"


class AmbiguousNet(NetlistError):
    code = "ambiguous-net"


@dataclass(frozen=True)
class Terminal:
    role: Role
    net: str


@dataclass(frozen=True)
class Device:
    name: str
    kind: DeviceKind
    terminals: tuple[Terminal, ...]
    params: dict[str, str] = field(default_factory=dict, hash=False)
    model: str = ""
    line: int = field(default=0, compare=False)
    col: int = field(default=0, compare=False)

    def net_of(self, role: Role) -> str:
        for t in self.terminals:
            if t.role == role:
                return t.net
        raise KeyError(f"{self.name} has no {role.value} terminal")

    @property
    def nets(self) -> tuple[str, ...]:
        return tuple(t.net for t in self.terminals)


@dataclass(frozen=True)
class Net:
    name: str
    terminals: frozenset[tuple[str, Role]]
    klass: NetClass = NetClass.SIGNAL


@dataclass(frozen=True)
class Circuit:
    devices: tuple[Device, ...]
    nets: tuple[Net, ...]
    io_ports: tuple[str, ...] = ()
    source_text: str = field(default="", compare=False, repr=False)

    def device(self, name: str) -> Device:
        key = name.upper()
        for d in self.devices:
            if d.name == key:
                return d
        raise KeyError(name)

    def net(self, name: str) -> Net:
        key = name.upper()
        for n in self.nets:
            if n.name == key:
                return n
        raise KeyError(name)

    @property
    def net_class(self) -> dict[str, NetClass]:
        return {n.name: n.klass for n in self.nets}

    @property
    def mos_devices(self) -> tuple[Device, ...]:
        return tuple(d for d in self.devices if d.kind.is_mos)


@dataclass
class _Card:
    tokens: list[tuple[str, int]]  # (text, column)
    line: int


def _logical_cards(text: str, filename: str) -> list[_Card]:
    cards: list[_Card] = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        body = raw.split(";", 1)[0]
        stripped = body.strip()
        if not stripped or stripped.startswith("*"):
            continue
        tokens = [(m.group(0), m.start() + 1) for m in re.finditer(r"\S+", body)]
        if stripped.startswith("+"):
            if not cards:
                raise NetlistSyntaxError("continuation line with no preceding card", lineno, 1, filename)
            first, col = tokens[0]
            rest = tokens[1:]
            if first != "+":
                rest = [(first[1:], col + 1)] + rest
            cards[-1].tokens.extend(rest)
            continue
        cards.append(_Card(tokens, lineno))
    return cards


def _split_params(tokens: list[tuple[str, int]], card: _Card, filename: str):
    positional: list[tuple[str, int]] = []
    params: dict[str, str] = {}
    for text, col in tokens:
        if "=" in text:
            key, _, value = text.partition("=")
            if not key or not value:
                raise NetlistSyntaxError(f"malformed parameter {text!r}", card.line, col, filename)
            params[key.upper()] = value
        else:
            positional.append((text, col))
    return positional, params


def _mos_kind(model: str) -> DeviceKind | None:
    up = model.upper()
    if up.startswith(_PMOS_MODELS):
        return DeviceKind.PMOS
    if up.startswith(_NMOS_MODELS):
        return DeviceKind.NMOS
    return None


def _parse_element(card: _Card, filename: str) -> Device:
    name, col0 = card.tokens[0]
    name = name.upper()
    letter = name[0]
    if letter not in _PREFIX:
        raise NetlistSyntaxError(f"unsupported element {name!r}", card.line, col0, filename)
    if len(name) < 2:
        raise NetlistSyntaxError(f"element name {name!r} needs an identifier after the type letter",
                                 card.line, col0, filename)
    positional, params = _split_params(card.tokens[1:], card, filename)

    if letter == "M":
        if not positional:
            raise ArityError(f"{name}: MOS device needs 4 nodes and a model", card.line, col0, filename)
        model, mcol = positional[-1]
        nodes = positional[:-1]
        kind = _mos_kind(model)
        if kind is None:
            if len(positional) <= 4:
                raise ArityError(f"{name}: MOS device needs 4 nodes, got {len(positional)}",
                                 card.line, col0, filename)
            raise NetlistSyntaxError(f"{name}: unknown MOS model {model!r}", card.line, mcol, filename)
        if len(nodes) != 4:
            raise ArityError(f"{name}: MOS device needs 4 nodes, got {len(nodes)}", card.line, col0, filename)
        terminals = tuple(Terminal(r, n.upper()) for r, (n, _) in zip(MOS_ROLES, nodes))
        return Device(name, kind, terminals, params, model.upper(), card.line, col0)

    kind = _PREFIX[letter][0]
    if len(positional) < 2:
        raise ArityError(f"{name}: two-terminal device needs 2 nodes, got {len(positional)}",
                         card.line, col0, filename)
    nodes, rest = positional[:2], positional[2:]
    if letter in "RC" and len(rest) > 1:
        raise ArityError(f"{name}: two-terminal device needs 2 nodes and one value, got "
                         f"{len(positional)} positional fields", card.line, rest[1][1], filename)
    value = {"VALUE": " ".join(t for t, _ in rest)} if rest else {}
    terminals = tuple(Terminal(r, n.upper()) for r, (n, _) in zip(TWO_PIN_ROLES, nodes))
    return Device(name, kind, terminals, {**value, **params}, "", card.line, col0)


def parse_netlist(text: str, filename: str = "<netlist>") -> Circuit:
    """Parse netlist ``text`` into a classified :class:`Circuit`."""
    cards = _logical_cards(text, filename)
    devices: list[Device] = []
    seen: dict[str, int] = {}
    ports: list[tuple[str, int, int]] = []
    for card in cards:
        head, col = card.tokens[0]
        if head.startswith("."):
            directive = head.lower()
            if directive == ".end":
                break
            if directive == ".ports":
                ports.extend((t.upper(), card.line, c) for t, c in card.tokens[1:])
                continue
            if directive in (".subckt", ".ends", ".include", ".lib"):
                raise NetlistSyntaxError(f"unsupported directive {head}", card.line, col, filename)
            log.warning("%s:%d:%d: skipping unknown directive %s", filename, card.line, col, head)
            continue
        dev = _parse_element(card, filename)
        if dev.name in seen:
            raise DuplicateDevice(f"device {dev.name} already defined on line {seen[dev.name]}",
                                  card.line, col, filename)
        seen[dev.name] = card.line
        devices.append(dev)

    if not devices:
        raise EmptyNetlist("netlist contains no devices", 1, 1, filename)

    members: dict[str, set[tuple[str, Role]]] = {}
    for dev in devices:
        for t in dev.terminals:
            members.setdefault(t.net, set()).add((dev.name, t.role))

    io: list[str] = []
    for name, line, col in ports:
        if name not in members:
            raise NetlistSyntaxError(f"port {name} is not connected to any device", line, col, filename)
        if name not in io:
            io.append(name)

    nets = tuple(Net(n, frozenset(m)) for n, m in members.items())
    circuit = Circuit(tuple(devices), nets, tuple(io), text)
    return classify_nets(circuit)


def classify_nets(
    c: Circuit,
    power_aliases: Iterable[str] = POWER_ALIASES,
    ground_aliases: Iterable[str] = GROUND_ALIASES,
) -> Circuit:
    power = {a.upper() for a in power_aliases}
    ground = {a.upper() for a in ground_aliases}
    nets = []
    for net in c.nets:
        is_power, is_ground = net.name in power, net.name in ground
        if is_power and is_ground:
            raise AmbiguousNet(f"net {net.name} matches both power and ground aliases")
        if is_power:
            klass = NetClass.POWER
        elif is_ground:
            klass = NetClass.GROUND
        elif net.name in c.io_ports:
            klass = NetClass.IO
        else:
            klass = NetClass.SIGNAL
        nets.append(replace(net, klass=klass))
    return replace(c, nets=tuple(nets))


def net_groups(c: Circuit) -> dict[str, frozenset[tuple[str, Role]]]:
    """Map each net name to the set of ``(device, role)`` terminals it joins."""
    groups: dict[str, set[tuple[str, Role]]] = {}
    for dev in c.devices:
        for t in dev.terminals:
            groups.setdefault(t.net, set()).add((dev.name, t.role))
    return {k: frozenset(v) for k, v in groups.items()}


def to_netlist(c: Circuit) -> str:
    """Canonical netlist text; ``parse_netlist(to_netlist(c)) == c``."""
    lines = []
    for d in c.devices:
        parts = [d.name, *d.nets]
        params = dict(d.params)
        if d.kind.is_mos:
            parts.append(d.model or d.kind.value)
        elif "VALUE" in params:
            parts.append(params.pop("VALUE"))
        parts.extend(f"{k}={v}" for k, v in params.items())
        lines.append(" ".join(parts))
    if c.io_ports:
        lines.append(".ports " + " ".join(c.io_ports))
    lines.append(".end")
    return "\n".join(lines) + "\n"


def device_letter(kind: DeviceKind) -> str:
    return _LETTER[kind]
