from __future__ import annotations

from functools import lru_cache
from pathlib import Path

import pytest

from schemgen.netlist import parse_netlist
from schemgen.pipeline import place_and_route
from schemgen.substructure import detect

ROOT = Path(__file__).resolve().parents[1]
FIXTURES = ROOT / "fixtures"
GOLDEN = Path(__file__).resolve().parent / "golden"
CIRCUITS = ("inverter", "ota5t", "telescopic")

ACCEPTANCE: list[tuple[str, bool, str]] = []


@lru_cache(maxsize=None)
def load(name: str):
    path = FIXTURES / f"{name}.sp"
    return parse_netlist(path.read_text(), str(path))


@lru_cache(maxsize=None)
def routed(name: str):
    """(circuit, matches, layout, routing report) from the deterministic pipeline."""
    c = load(name)
    m = detect(c)
    layout, report = place_and_route(c, m)
    return c, m, layout, report


@pytest.fixture(params=CIRCUITS)
def fixture_name(request):
    return request.param


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for name, ok, detail in ACCEPTANCE:
        terminalreporter.write_line(f"[{'PASS' if ok else 'FAIL'}] {name}: {detail}")
