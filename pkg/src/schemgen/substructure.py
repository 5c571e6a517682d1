"""Rule-based recognition of the six analog building blocks.

Rules are polarity-agnostic.  Multi-device patterns are claimed greedily in
priority order (differential pair, current mirror, two-transistor cascode);
a device claimed by one multi-device match is not offered to a later one.
Devices left uncovered fall back to a single-device kind.
"""

from __future__ import annotations

import enum
import itertools
from collections import defaultdict
from dataclasses import dataclass

from .netlist import Circuit, Device, NetClass, Role


class SubstructureKind(str, enum.Enum):
    SINGLE_CASCODE = "SINGLE_CASCODE"
    SINGLE_CURRENT_SOURCE = "SINGLE_CURRENT_SOURCE"
    DIODE_CONNECTED = "DIODE_CONNECTED"
    TWO_TRANSISTOR_CASCODE = "TWO_TRANSISTOR_CASCODE"
    DIFFERENTIAL_PAIR = "DIFFERENTIAL_PAIR"
    CURRENT_MIRROR = "CURRENT_MIRROR"


PRIORITY = (
    SubstructureKind.DIFFERENTIAL_PAIR,
    SubstructureKind.CURRENT_MIRROR,
    SubstructureKind.TWO_TRANSISTOR_CASCODE,
    SubstructureKind.DIODE_CONNECTED,
    SubstructureKind.SINGLE_CURRENT_SOURCE,
    SubstructureKind.SINGLE_CASCODE,
)
PAIR_KINDS = (SubstructureKind.DIFFERENTIAL_PAIR, SubstructureKind.CURRENT_MIRROR)


@dataclass(frozen=True)
class SubstructureMatch:
    kind: SubstructureKind
    members: tuple[tuple[str, str], ...]  # (device, role label)
    shared_nets: tuple[str, ...]

    @property
    def devices(self) -> tuple[str, ...]:
        return tuple(d for d, _ in self.members)

    def member(self, role: str) -> str:
        for d, r in self.members:
            if r == role:
                return d
        raise KeyError(role)

    def sort_key(self):
        return PRIORITY.index(self.kind), tuple(sorted(self.devices))


_SUPPLY = (NetClass.POWER, NetClass.GROUND)


def _terms(d: Device) -> tuple[str, str, str]:
    return d.net_of(Role.GATE), d.net_of(Role.DRAIN), d.net_of(Role.SOURCE)


def _diff_pairs(mos: list[Device], klass: dict[str, NetClass]) -> list[SubstructureMatch]:
    by_source: dict[tuple, list[Device]] = defaultdict(list)
    for d in mos:
        g, dr, s = _terms(d)
        if klass[s] not in _SUPPLY:
            by_source[(d.kind, s)].append(d)
    out = []
    for (_, s), group in by_source.items():
        for a, b in itertools.combinations(sorted(group, key=lambda d: d.name), 2):
            ga, da, _ = _terms(a)
            gb, db, _ = _terms(b)
            if ga != gb and da != db and ga != da and gb != db:
                out.append(SubstructureMatch(SubstructureKind.DIFFERENTIAL_PAIR,
                                             ((a.name, "LEFT"), (b.name, "RIGHT")), (s,)))
    return out


def _mirrors(mos: list[Device]) -> list[SubstructureMatch]:
    by_gate: dict[tuple, list[Device]] = defaultdict(list)
    for d in mos:
        g, _, s = _terms(d)
        by_gate[(d.kind, g, s)].append(d)
    out = []
    for (_, g, s), group in by_gate.items():
        refs = sorted((d for d in group if d.net_of(Role.DRAIN) == g), key=lambda d: d.name)
        outs = sorted(group, key=lambda d: d.name)
        for ref in refs:
            for o in outs:
                if o is ref or o.net_of(Role.DRAIN) == g:
                    continue
                out.append(SubstructureMatch(SubstructureKind.CURRENT_MIRROR,
                                             ((ref.name, "REFERENCE"), (o.name, "OUTPUT")), (g, s)))
    return out


def _cascodes(mos: list[Device], klass: dict[str, NetClass]) -> list[SubstructureMatch]:
    by_source: dict[tuple, list[Device]] = defaultdict(list)
    for d in mos:
        by_source[(d.kind, d.net_of(Role.SOURCE))].append(d)
    out = []
    for lower in mos:
        mid = lower.net_of(Role.DRAIN)
        if klass[mid] in _SUPPLY:
            continue
        for upper in by_source.get((lower.kind, mid), []):
            if upper is lower or upper.net_of(Role.GATE) == lower.net_of(Role.GATE):
                continue
            out.append(SubstructureMatch(SubstructureKind.TWO_TRANSISTOR_CASCODE,
                                         ((lower.name, "INPUT"), (upper.name, "CASCODE")), (mid,)))
    return out


def is_bias_net(c: Circuit, net: str, diode_devices: set[str]) -> bool:
    """True when ``net`` only feeds MOS gates (or belongs to a diode bias device)."""
    if c.net_class[net] != NetClass.SIGNAL:
        return False
    for dev_name, role in c.net(net).terminals:
        if role == Role.GATE or dev_name in diode_devices:
            continue
        return False
    return True


def detect(c: Circuit) -> list[SubstructureMatch]:
    """Recognize building blocks; output sorted by priority then device names."""
    mos = sorted(c.mos_devices, key=lambda d: d.name)
    klass = c.net_class
    diodes = {d.name for d in mos if d.net_of(Role.GATE) == d.net_of(Role.DRAIN)}

    candidates = (
        sorted(_diff_pairs(mos, klass), key=SubstructureMatch.sort_key)
        + sorted(_mirrors(mos), key=SubstructureMatch.sort_key)
        + sorted(_cascodes(mos, klass), key=SubstructureMatch.sort_key)
    )
    matches: list[SubstructureMatch] = []
    claimed: set[str] = set()
    for m in candidates:
        if claimed.isdisjoint(m.devices):
            matches.append(m)
            claimed.update(m.devices)

    mirrored = {d for m in matches if m.kind == SubstructureKind.CURRENT_MIRROR for d in m.devices}
    for name in sorted(diodes - mirrored):
        dev = c.device(name)
        matches.append(SubstructureMatch(SubstructureKind.DIODE_CONNECTED, ((name, "DIODE"),),
                                         (dev.net_of(Role.GATE),)))
        claimed.add(name)

    multi_nets = {n for m in matches if len(m.members) > 1 for n in m.shared_nets}
    for dev in mos:
        if dev.name in claimed:
            continue
        g, _, s = _terms(dev)
        if klass[s] in _SUPPLY and g not in multi_nets and is_bias_net(c, g, diodes):
            matches.append(SubstructureMatch(SubstructureKind.SINGLE_CURRENT_SOURCE,
                                             ((dev.name, "SOURCE"),), (s, g)))
        else:
            matches.append(SubstructureMatch(SubstructureKind.SINGLE_CASCODE,
                                             ((dev.name, "DEVICE"),), ()))
    return sorted(matches, key=SubstructureMatch.sort_key)


def _is_diode(d: Device) -> bool:
    return d.kind.is_mos and d.net_of(Role.GATE) == d.net_of(Role.DRAIN)


def check_rule(c: Circuit, m: SubstructureMatch) -> bool:
    """Re-verify a match directly against the circuit, independent of ``detect``."""
    try:
        devs = [c.device(n) for n in m.devices]
    except KeyError:
        return False
    if len(set(m.devices)) != len(m.devices) or not all(d.kind.is_mos for d in devs):
        return False
    klass = c.net_class

    def G(d): return d.net_of(Role.GATE)
    def D(d): return d.net_of(Role.DRAIN)
    def S(d): return d.net_of(Role.SOURCE)

    k = m.kind
    if k == SubstructureKind.DIODE_CONNECTED:
        return len(devs) == 1 and G(devs[0]) == D(devs[0])
    if k == SubstructureKind.DIFFERENTIAL_PAIR:
        if len(devs) != 2:
            return False
        a, b = devs
        return (a.kind == b.kind and S(a) == S(b) and klass[S(a)] not in _SUPPLY
                and G(a) != G(b) and D(a) != D(b))
    if k == SubstructureKind.CURRENT_MIRROR:
        if len(devs) != 2:
            return False
        ref, out = devs
        return (ref.kind == out.kind and G(ref) == G(out) and S(ref) == S(out)
                and G(ref) == D(ref) and G(out) != D(out))
    if k == SubstructureKind.TWO_TRANSISTOR_CASCODE:
        if len(devs) != 2:
            return False
        lo, up = devs
        return (lo.kind == up.kind and D(lo) == S(up) and G(lo) != G(up)
                and klass[D(lo)] not in _SUPPLY)
    if k == SubstructureKind.SINGLE_CURRENT_SOURCE:
        if len(devs) != 1:
            return False
        d = devs[0]
        gate_net = c.net(G(d))
        only_gates = all(role == Role.GATE or _is_diode(c.device(n)) for n, role in gate_net.terminals)
        return klass[S(d)] in _SUPPLY and gate_net.klass == NetClass.SIGNAL and only_gates
    if k == SubstructureKind.SINGLE_CASCODE:
        return len(devs) == 1
    return False
