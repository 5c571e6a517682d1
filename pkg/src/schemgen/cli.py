"""Command-line entry point.

Exit codes: 0 success (layout correct), 1 incorrect or unroutable result,
2 usage, input or configuration error, 3 backend error.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from . import agent
from .assets import example_library
from .config import ConfigError, effective, resolve
from .evaluation import check_correctness, evaluate
from .netlist import NetlistError, parse_netlist
from .placement import PlacementOverflow, SchemaError, initial_place, read_layout, write_layout
from .render import RenderOptions, render_svg
from .substructure import detect
from .wiring import wire_layout

EXIT_OK, EXIT_INCORRECT, EXIT_USAGE, EXIT_BACKEND = 0, 1, 2, 3


class _Parser(argparse.ArgumentParser):
    def error(self, message):  # keep argparse's exit code but prefix consistently
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _read_text(path: str) -> str:
    if path == "-":
        return sys.stdin.read()
    return Path(path).read_text(encoding="utf-8")


def _emit(data: bytes | str, out: str | None) -> None:
    raw = data.encode("utf-8") if isinstance(data, str) else data
    if out:
        Path(out).write_bytes(raw)
    else:
        sys.stdout.buffer.write(raw)
        sys.stdout.flush()


def _dump(obj) -> str:
    return json.dumps(obj, indent=2, sort_keys=False) + "\n"


def cmd_gen(args) -> int:
    flags = {"backend": args.backend, "seed": args.seed, "max_place_iter": args.max_place_iter,
             "max_wire_iter": args.max_wire_iter, "history_window": args.history_window,
             "url": args.url, "model": args.model,
             "mock_script": tuple(s.strip() for s in args.mock_script.split(",")) if args.mock_script else None}
    cfg = resolve(flags, args.config)
    c = parse_netlist(_read_text(args.netlist), args.netlist)
    name = Path(args.netlist).stem
    out = Path(args.out_dir)

    matches = detect(c)
    layout, routing = wire_layout(c, initial_place(c, matches))
    phases = {}
    code = EXIT_OK
    if not args.no_agent:
        backend = agent.make_backend(cfg)
        run_dir = out / "run" / name
        for loop in (agent.run_placement_loop, agent.run_wiring_loop):
            layout, tr = loop(c, layout, cfg, backend, matches, name)
            tr.write(run_dir / tr.phase.value)
            phases[tr.phase.value] = {"status": tr.status.value, "iterations": tr.iterations,
                                      "best_index": tr.best_index, "error": tr.error}
            if tr.status is agent.Status.BACKEND_ERROR:
                print(f"schemgen: backend error in {tr.phase.value} phase: {tr.error}", file=sys.stderr)
                code = EXIT_BACKEND
                break
        (run_dir / "summary.json").write_text(_dump({"circuit": name, "config": effective(cfg),
                                                     "phases": phases}))
    report = evaluate(c, layout, matches)
    if code == EXIT_OK and not report.correct:
        code = EXIT_INCORRECT

    out.mkdir(parents=True, exist_ok=True)
    (out / "layout.json").write_bytes(write_layout(layout))
    (out / "schematic.svg").write_text(render_svg(layout), encoding="utf-8")
    doc = {
        "circuit": name,
        "correct": report.correct,
        "evaluation": report.to_dict(),
        "initial_routing": routing.to_dict(),
        "substructures": [{"kind": m.kind.value, "members": [list(x) for x in m.members],
                           "shared_nets": list(m.shared_nets)} for m in matches],
        "agent": phases if not args.no_agent else None,
        "config": effective(cfg),
        "exit_code": code,
    }
    (out / "report.json").write_text(_dump(doc), encoding="utf-8")
    verdict = "correct" if report.correct else "INCORRECT"
    print(f"{name}: {verdict}, composite {report.aesthetics.composite:.3f}, wrote {out}", file=sys.stderr)
    return code


def cmd_check(args) -> int:
    c = parse_netlist(_read_text(args.netlist), args.netlist)
    layout = read_layout(_read_text(args.layout))
    report = evaluate(c, layout, detect(c)) if args.aesthetics else check_correctness(c, layout)
    _emit(_dump(report.to_dict()), None)
    return EXIT_OK if report.correct else EXIT_INCORRECT


def cmd_render(args) -> int:
    layout = read_layout(_read_text(args.layout))
    opts = RenderOptions(unit_px=args.unit_px, show_labels=not args.no_labels, show_grid=args.grid,
                         highlight=frozenset(args.highlight or ()))
    _emit(render_svg(layout, opts), args.output)
    return EXIT_OK


def cmd_route(args) -> int:
    c = parse_netlist(_read_text(args.netlist), args.netlist)
    layout = read_layout(_read_text(args.layout))
    routed, report = wire_layout(c, layout.with_wires((), ()))
    _emit(write_layout(routed), args.output)
    print(report.to_text(), file=sys.stderr, end="")
    return EXIT_INCORRECT if report.unroutable else EXIT_OK


def cmd_examples(args) -> int:
    for ex in example_library():
        first = ex.description.split(". ")[0].rstrip(".")
        print(f"{ex.kind.value}\t{first}.")
    return EXIT_OK


def _iter_count(text: str) -> int:
    try:
        return int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not an integer: {text!r}") from None


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="schemgen", description="Analog schematic generation from SPICE netlists.")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    g = sub.add_parser("gen", help="full pipeline: place, route, refine, evaluate")
    g.add_argument("netlist")
    g.add_argument("--backend", choices=("mock", "http"))
    g.add_argument("--seed", type=_iter_count)
    g.add_argument("--max-place-iter", type=_iter_count)
    g.add_argument("--max-wire-iter", type=_iter_count)
    g.add_argument("--history-window", type=_iter_count)
    g.add_argument("--url", help="endpoint for the http backend")
    g.add_argument("--model", help="model name passed to the http backend")
    g.add_argument("--mock-script", help="comma-separated mock decisions, e.g. MODIFY:noop,ACCEPT")
    g.add_argument("--out-dir", default="out")
    g.add_argument("--no-agent", action="store_true", help="stop after deterministic wiring")
    g.add_argument("--config", help="TOML configuration file")
    g.set_defaults(func=cmd_gen)

    ck = sub.add_parser("check", help="check a layout against its netlist")
    ck.add_argument("netlist")
    ck.add_argument("layout")
    ck.add_argument("--aesthetics", action="store_true", help="also score the aesthetics proxies")
    ck.set_defaults(func=cmd_check)

    r = sub.add_parser("render", help="render a layout to SVG")
    r.add_argument("layout")
    r.add_argument("-o", "--output")
    r.add_argument("--unit-px", type=int, default=10)
    r.add_argument("--grid", action="store_true")
    r.add_argument("--no-labels", action="store_true")
    r.add_argument("--highlight", nargs="*", metavar="ID")
    r.set_defaults(func=cmd_render)

    rt = sub.add_parser("route", help="(re-)route the wires of a placed layout")
    rt.add_argument("netlist")
    rt.add_argument("layout")
    rt.add_argument("-o", "--output")
    rt.set_defaults(func=cmd_route)

    ex = sub.add_parser("examples", help="list the packaged building-block examples")
    ex.set_defaults(func=cmd_examples)
    return p


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (NetlistError, SchemaError, ConfigError, ValueError) as e:
        print(f"schemgen: error: {e}", file=sys.stderr)
        return EXIT_USAGE
    except OSError as e:
        print(f"schemgen: error: {e.filename}: {e.strerror}", file=sys.stderr)
        return EXIT_USAGE
    except PlacementOverflow as e:
        print(f"schemgen: placement failed: {e}", file=sys.stderr)
        return EXIT_INCORRECT
    except agent.BackendError as e:
        print(f"schemgen: backend error: {e}", file=sys.stderr)
        return EXIT_BACKEND


if __name__ == "__main__":
    sys.exit(main())
