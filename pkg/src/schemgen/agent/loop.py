"""The two refinement loops: placement, then wiring.

Each iteration renders the current layout and asks the backend to ACCEPT or
MODIFY it; on MODIFY a second call asks for a revised layout.  A revision
that fails to parse (or, in the wiring phase, moves a component) is sent
back with the error up to ``repair_budget`` times and then dropped.  The
loop returns the best layout it has seen, ranked by violation count, then
aesthetics, then recency.
"""

from __future__ import annotations

import enum
import hashlib
import json
from dataclasses import asdict, dataclass, field
from pathlib import Path

from ..assets import example_library, reference_examples
from ..evaluation import EvalReport, evaluate
from ..netlist import Circuit, to_netlist
from ..placement import SchemaError, SchematicLayout, validate_layout, write_layout
from ..render import render_svg
from ..substructure import SubstructureMatch, detect
from ..wiring import wire_layout
from .backends import Backend, HttpBackend, MockBackend
from .prompt import build_prompt, describe_circuit, history_window
from .protocol import (BackendError, BackendRequest, Decision, Image, Phase, Step, parse_decision,
                       parse_revision)


class Status(str, enum.Enum):
    ACCEPTED = "ACCEPTED"
    BUDGET_EXHAUSTED = "BUDGET_EXHAUSTED"
    BACKEND_ERROR = "BACKEND_ERROR"


@dataclass
class AgentConfig:
    max_place_iter: int = 10
    max_wire_iter: int = 20
    history_window: int = 3
    repair_budget: int = 2
    backend: str = "mock"
    url: str = ""
    model: str = ""
    seed: int = 0
    timeout: float = 60.0
    mock_script: tuple[str, ...] | None = None

    def __post_init__(self):
        for name in ("max_place_iter", "max_wire_iter"):
            if getattr(self, name) < 1:
                raise ValueError(f"{name} must be at least 1")
        if self.history_window < 0 or self.repair_budget < 0:
            raise ValueError("history_window and repair_budget must be non-negative")
        if self.backend not in ("mock", "http"):
            raise ValueError(f"unknown backend {self.backend!r}")

    def budget(self, phase: Phase) -> int:
        return self.max_place_iter if phase is Phase.PLACEMENT else self.max_wire_iter


@dataclass
class IterationRecord:
    index: int
    decision: str | None
    reasoning: str
    prompt_sha: str
    violations: int
    composite: float
    outcome: str = ""  # revised | discarded | accepted | error
    error: str | None = None
    responses: list[str] = field(default_factory=list)
    layout: SchematicLayout | None = field(default=None, repr=False)
    svg: str = field(default="", repr=False)

    def to_dict(self) -> dict:
        d = asdict(self)
        for k in ("layout", "svg", "responses"):
            d.pop(k)
        return d


@dataclass
class AgentTranscript:
    phase: Phase
    status: Status = Status.BUDGET_EXHAUSTED
    records: list[IterationRecord] = field(default_factory=list)
    best_index: int = 0  # 0 is the input layout
    error: str | None = None
    best: SchematicLayout | None = field(default=None, repr=False)

    @property
    def iterations(self) -> int:
        return len(self.records)

    def to_dict(self) -> dict:
        return {"phase": self.phase.value, "status": self.status.value, "iterations": self.iterations,
                "best_index": self.best_index, "error": self.error,
                "records": [r.to_dict() for r in self.records]}

    def write(self, directory: Path) -> None:
        directory.mkdir(parents=True, exist_ok=True)
        for r in self.records:
            stem = directory / f"iter_{r.index:02d}"
            if r.layout is not None:
                Path(f"{stem}.layout.json").write_bytes(write_layout(r.layout))
                Path(f"{stem}.svg").write_text(r.svg, encoding="utf-8")
            Path(f"{stem}.response.txt").write_text("\n\n----\n\n".join(r.responses), encoding="utf-8")
        if self.best is not None:
            (directory / "best.layout.json").write_bytes(write_layout(self.best))
        (directory / "summary.json").write_text(json.dumps(self.to_dict(), indent=2) + "\n")


def _rank(report: EvalReport, index: int) -> tuple:
    return (report.violation_count, -report.aesthetics.composite, -index)


def _same_components(a: SchematicLayout, b: SchematicLayout) -> bool:
    key = lambda c: c.id  # noqa: E731
    return sorted(a.components, key=key) == sorted(b.components, key=key)


def _digest(r: IterationRecord) -> str:
    return (f"iteration {r.index}: {r.decision or 'no decision'}, {r.outcome}; "
            f"{r.violations} violations, composite {r.composite:.3f}; {r.reasoning[:160]}")


def make_backend(cfg: AgentConfig) -> Backend:
    if cfg.backend == "mock":
        return MockBackend(cfg.mock_script, seed=cfg.seed)
    return HttpBackend(cfg.url, cfg.model, cfg.timeout)


def run_loop(phase: Phase, c: Circuit, layout: SchematicLayout, cfg: AgentConfig,
             backend: Backend | None = None, matches: list[SubstructureMatch] | None = None,
             name: str = "") -> tuple[SchematicLayout, AgentTranscript]:
    backend = make_backend(cfg) if backend is None else backend
    matches = detect(c) if matches is None else matches
    examples = tuple(e.digest() for e in example_library())
    good, bad = reference_examples()
    ref_good = (Image("reference_good", good.svg), good.caption)
    ref_bad = (Image("reference_bad", bad.svg), bad.caption)
    netlist_text = to_netlist(c)
    description = describe_circuit(c, matches, name)

    tr = AgentTranscript(phase)
    current = layout
    report = evaluate(c, current, matches)
    best = (_rank(report, 0), current)
    # a revision may only win if it is no worse structurally than the input
    structural_cap = len(validate_layout(layout, c))
    history: list[str] = []

    def request(step: Step, i: int, **extra) -> BackendRequest:
        return BackendRequest(phase, step, i, (Image("current", svg),), current, netlist_text,
                              description, examples, ref_good, ref_bad,
                              history_window(history, cfg.history_window), **extra)

    for i in range(1, cfg.budget(phase) + 1):
        svg = render_svg(current)
        req = request(Step.DECIDE, i)
        prompt_sha = hashlib.sha256(build_prompt(req).text.encode()).hexdigest()
        rec = IterationRecord(i, None, "", prompt_sha, report.violation_count,
                              report.aesthetics.composite, layout=current, svg=svg)
        tr.records.append(rec)
        try:
            text = backend.complete(req)
            rec.responses.append(text)
            verdict = parse_decision(text)
        except BackendError as e:
            rec.outcome, rec.error = "error", str(e)
            tr.status, tr.error = Status.BACKEND_ERROR, str(e)
            break
        rec.decision, rec.reasoning = verdict.decision.value, verdict.reasoning
        if verdict.decision is Decision.ACCEPT:
            rec.outcome = "accepted"
            tr.status = Status.ACCEPTED
            break

        revised, err = None, None
        try:
            for _ in range(cfg.repair_budget + 1):
                text = backend.complete(request(Step.REVISE, i, decide_reasoning=verdict.reasoning or "-",
                                                repair_error=err))
                rec.responses.append(text)
                try:
                    cand = parse_revision(text).revised_layout
                    if phase is Phase.WIRING and not _same_components(cand, current):
                        raise SchemaError("/components", "components may not change in the wiring phase")
                    revised = cand
                    break
                except SchemaError as e:
                    err = str(e)
        except BackendError as e:
            rec.outcome, rec.error = "error", str(e)
            tr.status, tr.error = Status.BACKEND_ERROR, str(e)
            break

        if revised is None:
            rec.outcome, rec.error = "discarded", err
        else:
            if phase is Phase.PLACEMENT:
                revised, _ = wire_layout(c, revised.with_wires((), ()))
            else:
                revised = current.with_wires(revised.wires, revised.labels)
            current = revised
            report = evaluate(c, current, matches)
            rec.outcome = "revised"
            eligible = len(validate_layout(current, c)) <= structural_cap
            if eligible and _rank(report, i) < best[0]:
                best = (_rank(report, i), current)
        history.append(_digest(rec))

    tr.best_index = -best[0][2]
    tr.best = best[1]
    return best[1], tr


def run_placement_loop(c: Circuit, layout: SchematicLayout, cfg: AgentConfig, backend: Backend | None = None,
                       matches: list[SubstructureMatch] | None = None, name: str = ""):
    return run_loop(Phase.PLACEMENT, c, layout, cfg, backend, matches, name)


def run_wiring_loop(c: Circuit, layout: SchematicLayout, cfg: AgentConfig, backend: Backend | None = None,
                    matches: list[SubstructureMatch] | None = None, name: str = ""):
    """Like the placement loop, but revisions may only touch wires and labels."""
    return run_loop(Phase.WIRING, c, layout, cfg, backend, matches, name)
