"""Command-line front end.

Exit status: 0 success, 1 usage or input error, 2 scheduling failure,
3 a produced schedule failed validation.
"""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import replace
from pathlib import Path

from . import graph as graphmod
from ._util import parse_number
from .experiments import EXPERIMENTS, default_config, load_config, run_experiment
from .gantt import render_ascii, render_svg
from .graph import GeneratorParams, GraphError, generate_random, measured_ccr
from .metrics import metrics_csv, report
from .network import TopologyError, load_topology, reference_topology
from .scheduler import (AlphaGrid, SchedulingFailure, Variant, dump_schedule, load_schedule, schedule_once,
                        schedule_sweep)
from .validator import check_schedule

EXIT_OK, EXIT_USAGE, EXIT_SCHED, EXIT_INVALID = 0, 1, 2, 3


class _UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise _UsageError(f"{self.prog}: {message}")


def _number(text: str):
    """int, float or p/q."""
    try:
        return parse_number(text.strip(), field="value")
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None


def _int_list(text: str):
    try:
        return tuple(int(x) for x in text.split(",") if x.strip())
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}") from None


def _topology(path):
    return load_topology(path) if path else reference_topology()


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="streamsched", description="Contention-aware list scheduling of task graphs.")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    g = sub.add_parser("generate", help="write a seeded random task graph")
    g.add_argument("--tasks", type=int, default=20)
    g.add_argument("--max-in", type=int, default=2)
    g.add_argument("--max-out", type=int, default=3)
    g.add_argument("--min-entry", type=int, default=2)
    g.add_argument("--min-exit", type=int, default=2)
    g.add_argument("--weights", type=_number, nargs=2, default=(5, 20), metavar=("LO", "HI"))
    g.add_argument("--volumes", type=_number, nargs=2, default=(1, 10), metavar=("LO", "HI"))
    g.add_argument("--ccr", type=float, default=1.0)
    g.add_argument("--seed", type=int, default=0)
    g.add_argument("--period", type=_number)
    g.add_argument("--unconstrained", action="store_true", help="drop the outd(parent) >= outd(child) rule")
    g.add_argument("--topology", help="topology JSON used to calibrate CCR (default: bundled network)")
    g.add_argument("-o", "--out", default="graph.json")

    s = sub.add_parser("schedule", help="schedule a graph and write schedule, metrics, chart and curve")
    s.add_argument("graph")
    s.add_argument("--topology")
    s.add_argument("--variant", default="HVLB_CC_A", choices=[v.value for v in Variant])
    s.add_argument("--alpha", type=float, help="single alpha instead of a sweep")
    s.add_argument("--alpha-start", type=float, default=0.0)
    s.add_argument("--alpha-stop", type=float, default=20.0)
    s.add_argument("--alpha-step", type=float, default=0.01)
    s.add_argument("--depth-power", type=int, default=2)
    s.add_argument("--rounding", action="store_true", help="round computation times to integers")
    s.add_argument("--exact", action="store_true", help="rational arithmetic throughout")
    s.add_argument("-o", "--out", default="schedule.json", help="schedule JSON; sibling files share its stem")

    e = sub.add_parser("experiment", help="run one of the batch experiments")
    e.add_argument("name", nargs="?", choices=EXPERIMENTS)
    e.add_argument("--config", help="INI file with an [experiment] section")
    e.add_argument("--graphs", type=int, help="graphs per cell")
    e.add_argument("--tasks", type=_int_list, help="comma-separated task counts")
    e.add_argument("--permutations", type=_int_list, help="rate permutation indices 0..5")
    e.add_argument("--seed", type=int)
    e.add_argument("--alpha-step", type=float)
    e.add_argument("--workers", type=int)
    e.add_argument("-o", "--out-dir")

    c = sub.add_parser("gantt", help="render a schedule file")
    c.add_argument("schedule")
    c.add_argument("-o", "--out", help="SVG path (default: print ASCII)")
    c.add_argument("--ascii", action="store_true")
    c.add_argument("--width", type=int, default=72)

    v = sub.add_parser("validate", help="check a schedule against its graph and topology")
    v.add_argument("schedule")
    v.add_argument("graph")
    v.add_argument("--topology")
    return p


def cmd_generate(args) -> int:
    topo = _topology(args.topology)
    params = GeneratorParams(
        task_count=args.tasks, max_in_degree=args.max_in, max_out_degree=args.max_out,
        min_entry=args.min_entry, min_exit=args.min_exit, weight_range=tuple(args.weights),
        volume_range=tuple(args.volumes), ccr=args.ccr, constrain_outdegree=not args.unconstrained,
        seed=args.seed, period=args.period,
    )
    g = generate_random(params, topo)
    graphmod.store(g, args.out)
    ccr = measured_ccr(g, topo) if g.edges else 0.0
    print(f"{args.out}: {len(g.tasks)} tasks, {len(g.edges)} edges, CCR {float(ccr):.6g}")
    return EXIT_OK


def _sibling(out: Path, suffix: str) -> Path:
    return out.with_name(out.stem + suffix)


def cmd_schedule(args) -> int:
    g = graphmod.load(args.graph)
    topo = _topology(args.topology)
    out = Path(args.out)
    try:
        if args.alpha is not None:
            sched = schedule_once(g, topo, args.variant, args.alpha, rounding=args.rounding, exact=args.exact,
                                  depth_power=args.depth_power)
            sched.curve = [(sched.alpha, sched.makespan)]
        else:
            grid = AlphaGrid(args.alpha_start, args.alpha_stop, args.alpha_step)
            if args.variant == Variant.HSV_CC.value:
                grid = [0]
            sched = schedule_sweep(g, topo, args.variant, grid, rounding=args.rounding, exact=args.exact,
                                   depth_power=args.depth_power)
    except SchedulingFailure as exc:
        _sibling(out, ".failure.json").write_text(
            json.dumps({"variant": args.variant, "task": exc.task, "predecessor": exc.predecessor,
                        "message": str(exc)}, indent=2) + "\n")
        print(f"scheduling failed: {exc}", file=sys.stderr)
        return EXIT_SCHED
    dump_schedule(sched, out)
    m = report(sched, g, topo)
    gid = Path(args.graph).stem
    _sibling(out, ".metrics.csv").write_text(
        metrics_csv([(gid, sched.variant, sched.alpha, m.makespan, m.slr, m.speedup, m.lb)]))
    _sibling(out, ".svg").write_text(render_svg(sched))
    curve = "alpha,makespan\n" + "".join(f"{float(a)!r},{float(ms)!r}\n" for a, ms in sched.curve)
    _sibling(out, ".curve.csv").write_text(curve)
    problems = check_schedule(sched, g, topo)
    print(f"{out}: {sched.variant} alpha {float(sched.alpha):g} makespan {m.makespan:.6g} "
          f"SLR {m.slr:.4f} speedup {m.speedup:.4f} LB {m.lb:.4f}")
    if problems:
        for msg in problems:
            print(f"invalid: {msg}", file=sys.stderr)
        return EXIT_INVALID
    return EXIT_OK


def cmd_experiment(args) -> int:
    if args.config:
        cfg = load_config(args.config)
        if args.name and args.name != cfg.experiment:
            raise _UsageError(f"config is for {cfg.experiment}, not {args.name}")
    elif args.name:
        cfg = default_config(args.name)
    else:
        raise _UsageError("give an experiment name or --config")
    overrides = {
        "graphs_per_cell": args.graphs, "task_counts": args.tasks, "permutations": args.permutations,
        "seed": args.seed, "alpha_step": args.alpha_step, "workers": args.workers, "output_dir": args.out_dir,
    }
    cfg = replace(cfg, **{k: v for k, v in overrides.items() if v is not None})
    result = run_experiment(cfg)
    print(f"{cfg.experiment}: {len(result.rows)} rows, {result.failures} scheduling failures, "
          f"{result.invalid} invalid; output in {result.output_dir}")
    return EXIT_INVALID if result.invalid else EXIT_OK


def cmd_gantt(args) -> int:
    sched = load_schedule(args.schedule)
    if args.out and not args.ascii:
        Path(args.out).write_text(render_svg(sched))
    else:
        text = render_ascii(sched, width=args.width)
        if args.out:
            Path(args.out).write_text(text)
        else:
            sys.stdout.write(text)
    return EXIT_OK


def cmd_validate(args) -> int:
    sched = load_schedule(args.schedule)
    g = graphmod.load(args.graph)
    problems = check_schedule(sched, g, _topology(args.topology))
    for msg in problems:
        print(msg)
    print(f"{len(problems)} violation(s)")
    return EXIT_INVALID if problems else EXIT_OK


_COMMANDS = {"generate": cmd_generate, "schedule": cmd_schedule, "experiment": cmd_experiment,
             "gantt": cmd_gantt, "validate": cmd_validate}


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        return _COMMANDS[args.command](args)
    except _UsageError as exc:
        print(exc, file=sys.stderr)
        return EXIT_USAGE
    except (GraphError, TopologyError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
