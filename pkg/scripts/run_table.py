"""Run repeated seeded trials per fixture circuit and print the summary table.

With the mock backend the numbers only exercise the plumbing; they are not
comparable to results from a real vision-language model.
"""

from __future__ import annotations

import argparse
import time
from pathlib import Path

from schemgen.agent import AgentConfig, Status, make_backend, run_placement_loop, run_wiring_loop
from schemgen.evaluation import Trial, evaluate, format_table, summaries_json, summarize_trials
from schemgen.netlist import parse_netlist
from schemgen.pipeline import place_and_route
from schemgen.substructure import detect

ROOT = Path(__file__).resolve().parents[1]
CIRCUITS = {"Inverter": "inverter", "5T-OTA": "ota5t", "Telescopic cascode": "telescopic"}


def run_trial(path: Path, cfg: AgentConfig) -> Trial:
    c = parse_netlist(path.read_text(), str(path))
    matches = detect(c)
    layout, _ = place_and_route(c, matches)
    backend = make_backend(cfg)
    layout, tp = run_placement_loop(c, layout, cfg, backend, matches, path.stem)
    wire_iters, done = 0, tp.status is not Status.BACKEND_ERROR
    if done:
        layout, tw = run_wiring_loop(c, layout, cfg, backend, matches, path.stem)
        wire_iters, done = tw.iterations, tw.status is not Status.BACKEND_ERROR
    return Trial(evaluate(c, layout, matches), tp.iterations, wire_iters, done)


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--trials", type=int, default=10)
    ap.add_argument("--backend", choices=("mock", "http"), default="mock")
    ap.add_argument("--url", default="")
    ap.add_argument("--model", default="")
    ap.add_argument("--json", help="also write per-trial results here")
    args = ap.parse_args()

    summaries = []
    t0 = time.perf_counter()
    for label, stem in CIRCUITS.items():
        trials = [run_trial(ROOT / "fixtures" / f"{stem}.sp",
                            AgentConfig(backend=args.backend, url=args.url, model=args.model, seed=seed))
                  for seed in range(args.trials)]
        summaries.append(summarize_trials(label, trials))
    print(format_table(summaries), end="")
    print(f"({args.trials} trials per circuit, {args.backend} backend, "
          f"{time.perf_counter() - t0:.1f} s)")
    if args.json:
        Path(args.json).write_text(summaries_json(summaries))


if __name__ == "__main__":
    main()
