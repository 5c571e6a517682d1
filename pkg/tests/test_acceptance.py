"""One test per acceptance criterion; each records a pass/fail line for the summary."""

from __future__ import annotations

import json
import random
import time

from schemgen.agent import AgentConfig, MockBackend, Status, run_placement_loop, run_wiring_loop
from schemgen.cli import main
from schemgen.evaluation import TABLE_COLUMNS, Trial, check_correctness, evaluate, format_table, summarize_trials
from schemgen.geometry import conflicts, net_edges
from schemgen.netlist import parse_netlist
from schemgen.placement import read_layout, write_layout
from schemgen.render import render_svg
from schemgen.substructure import SubstructureKind, detect
from schemgen.wiring import ConnectionTask, RoutingGrid, priority_order, route_net

from conftest import ACCEPTANCE, CIRCUITS, FIXTURES, GOLDEN, load, routed
from oracles import bfs_length, connected_nets, rule_holds, wire_cells
from strategies import layout_corpus, mirror, random_circuit, translate
from test_wiring import PRIORITY_CASES, _shared_edges, task


def record(name: str, ok: bool, detail: str) -> None:
    ACCEPTANCE.append((name, ok, detail))
    print(f"[{'PASS' if ok else 'FAIL'}] {name}: {detail}")
    assert ok, detail


def test_deterministic_pipeline_correct(tmp_path):
    t0 = time.perf_counter()
    results = {}
    for name in CIRCUITS:
        code = main(["gen", str(FIXTURES / f"{name}.sp"), "--no-agent", "--out-dir", str(tmp_path / name)])
        rep = json.loads((tmp_path / name / "report.json").read_text())["evaluation"]
        results[name] = (code, rep["correct"], len(rep["connectivity_failures"]), len(rep["overlap_violations"]),
                         len(rep["short_circuits"]))
    elapsed = time.perf_counter() - t0
    ok = all(r == (0, True, 0, 0, 0) for r in results.values()) and elapsed < 5.0
    record("deterministic pipeline correctness", ok,
           f"{sum(r[1] for r in results.values())}/3 correct in {elapsed:.2f} s")


def test_connectivity_oracle_equivalence():
    cases = [(load(n), routed(n)[2]) for n in CIRCUITS]
    cases += [(c, layout) for c, _, layout in layout_corpus(2024, 500)]
    agree = 0
    broken = 0
    for c, layout in cases:
        failing = {n for n, _ in check_correctness(c, layout).connectivity_failures}
        expected = {n.name for n in c.nets} - connected_nets(c, layout)
        agree += failing == expected
        broken += bool(expected)
    record("connectivity oracle equivalence", agree == len(cases),
           f"{agree}/{len(cases)} layouts agree ({broken} with broken nets)")


def test_wiring_contract():
    prio_ok = 0
    for i, (text, expected) in enumerate(PRIORITY_CASES):
        c = parse_netlist(text) if text else load("ota5t" if i == 18 else "telescopic")
        prio_ok += [t.net for t in priority_order(c)] == expected
    rng = random.Random(11)
    len_ok = 0
    for _ in range(200):
        a = (rng.randint(0, 32), rng.randint(0, 32))
        b = (rng.randint(0, 32), rng.randint(0, 32))
        wires = route_net(task("N", a, b), RoutingGrid(32, 32))
        len_ok += sum(len(wire_cells(w.points)) - 1 for w in wires) == bfs_length(32, 32, set(), a, b)
    shared = sum(len(_shared_edges(routed(n)[2].wires)) + len(conflicts(net_edges(routed(n)[2].wires)))
                 for n in CIRCUITS)
    ok = prio_ok == len(PRIORITY_CASES) and len_ok == 200 and shared == 0
    record("wiring algorithm contract", ok,
           f"priority {prio_ok}/{len(PRIORITY_CASES)}, shortest length {len_ok}/200, shared cells {shared}")


def test_substructure_matcher():
    kinds = {m.kind for m in detect(load("ota5t"))}
    exact = kinds == {SubstructureKind.DIFFERENTIAL_PAIR, SubstructureKind.CURRENT_MIRROR,
                      SubstructureKind.SINGLE_CURRENT_SOURCE}
    rng = random.Random(7)
    total = sound = 0
    for _ in range(1000):
        c = random_circuit(rng, rng.randint(1, 8), passives=True)
        for m in detect(c):
            total += 1
            sound += rule_holds(c, m)
    record("substructure matcher", exact and sound == total,
           f"5T-OTA exact={exact}, soundness {sound}/{total} matches over 1000 circuits")


def test_agent_budgets(tmp_path):
    c, m, layout, _ = routed("ota5t")
    cfg = AgentConfig()
    counts = {}
    _, tp = run_placement_loop(c, layout, cfg, MockBackend(["MODIFY:noop"] * 50), m)
    _, tw = run_wiring_loop(c, layout, cfg, MockBackend(["MODIFY:noop"] * 50), m)
    counts["never"] = (tp.iterations, tw.iterations, tp.status, tw.status)
    _, ap = run_placement_loop(c, layout, cfg, MockBackend(["ACCEPT"]), m)
    _, aw = run_wiring_loop(c, layout, cfg, MockBackend(["ACCEPT"]), m)
    counts["always"] = (ap.iterations, aw.iterations)
    # replay: every stored iteration layout re-renders to the stored image bytes
    _, tr = run_placement_loop(c, layout, cfg, MockBackend(seed=9, accept_prob=0.0), m)
    tr.write(tmp_path)
    replayed = sum(render_svg(read_layout((tmp_path / f"iter_{r.index:02d}.layout.json").read_bytes())).encode()
                   == (tmp_path / f"iter_{r.index:02d}.svg").read_bytes() for r in tr.records)
    ok = (counts["never"] == (10, 20, Status.BUDGET_EXHAUSTED, Status.BUDGET_EXHAUSTED)
          and counts["always"] == (1, 1) and replayed == tr.iterations)
    record("agent loop budgets", ok,
           f"never-accept {tp.iterations}/{tw.iterations}, always-accept {ap.iterations}/{aw.iterations}, "
           f"replayed {replayed}/{tr.iterations} images")


def test_determinism_and_goldens(tmp_path):
    identical = 0
    for name in CIRCUITS:
        outs = []
        for run in ("a", "b"):
            d = tmp_path / run / name
            main(["gen", str(FIXTURES / f"{name}.sp"), "--seed", "42", "--out-dir", str(d)])
            outs.append(tuple((d / f).read_bytes() for f in ("layout.json", "schematic.svg", "report.json")))
        identical += outs[0] == outs[1]
    golden_ok = 0
    for name in CIRCUITS:
        layout = routed(name)[2]
        golden_ok += (write_layout(layout) == (GOLDEN / f"{name}.layout.json").read_bytes()
                      and render_svg(layout).encode() == (GOLDEN / f"{name}.svg").read_bytes())
    record("determinism and golden files", identical == 3 and golden_ok == 3,
           f"repeat runs identical {identical}/3, goldens match {golden_ok}/3")


def test_table_mirror():
    labels = {"inverter": "Inverter", "ota5t": "5T-OTA", "telescopic": "Telescopic cascode"}
    summaries = []
    for name in CIRCUITS:
        c, m, start, _ = routed(name)
        trials = []
        for seed in range(10):
            cfg = AgentConfig(seed=seed)
            backend = MockBackend(seed=seed)
            layout, tp = run_placement_loop(c, start, cfg, backend, m)
            layout, tw = run_wiring_loop(c, layout, cfg, backend, m)
            trials.append(Trial(evaluate(c, layout, m), tp.iterations, tw.iterations))
        summaries.append(summarize_trials(labels[name], trials))
    table = format_table(summaries)
    header = [h.strip() for h in table.splitlines()[0].split("|")]
    print(table)
    ok = header == list(TABLE_COLUMNS) and len(table.splitlines()) == 2 + len(CIRCUITS)
    record("indicative results table", ok,
           "; ".join(f"{s.circuit} {s.correct_count}/{s.trials} proxy {s.avg_composite:.3f} "
                     f"iters {s.avg_place_iters:g}/{s.avg_wire_iters:g}" for s in summaries))


def test_metric_invariances():
    rng = random.Random(99)
    same = 0
    corpus = layout_corpus(2024, 500)[:100]
    for c, m, layout in corpus:
        base = evaluate(c, layout, m).to_dict()
        moved = evaluate(c, translate(layout, rng.randint(1, 9), rng.randint(1, 9)), m).to_dict()
        flipped = evaluate(c, mirror(layout), m).to_dict()
        same += _strip(moved) == _strip(base) and _strip(flipped) == _strip(base)
    record("metric invariances", same == len(corpus), f"{same}/{len(corpus)} layouts invariant")


def _strip(report: dict) -> dict:
    """Drop coordinates, which legitimately move; everything else must match exactly."""
    out = dict(report)
    out["short_circuits"] = sorted(tuple(s["nets"]) for s in report["short_circuits"])
    out["overlap_violations"] = sorted((v["code"], tuple(v["ids"])) for v in report["overlap_violations"])
    return out
