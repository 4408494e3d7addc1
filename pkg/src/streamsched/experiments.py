"""Seeded batch experiments.

``exp1``  SLR and speedup against task count, every rate permutation.
``exp2``  load-balance metric against task count (same runs as exp1).
``exp3``  SLR against CCR at a fixed task count.
``exp4``  scheduling failure rate of three priority schemes on unconstrained DAGs.
``exp5``  precision of imprecise tasks against the input-rate factor on the bundled fixture.

Every graph seed is derived from (base seed, task count, CCR, index), so a
cell's graphs do not depend on which other cells run. Results are collected
in job order; the worker count changes wall time only.
"""

from __future__ import annotations

import configparser
import csv
import io
import itertools
import json
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from fractions import Fraction
from importlib import resources
from pathlib import Path

import numpy as np

from . import graph as graphmod
from .gantt import render_svg
from .graph import GeneratorParams, generate_random
from .imprecise import find_holes, precision_csv, simulate_precision
from .metrics import report
from .network import PAPER_RATES, Topology, reference_topology
from .plots import bar_chart, line_chart
from .scheduler import AlphaGrid, SchedulingFailure, dumps_schedule, schedule_once, schedule_sweep
from .validator import check_schedule

__all__ = ["ExperimentConfig", "ExperimentResult", "RATE_PERMUTATIONS", "default_config", "load_config",
           "run_experiment", "graph_seed", "worker_count", "SFR_SCHEMES"]

RATE_PERMUTATIONS = tuple(itertools.permutations(PAPER_RATES))
EXPERIMENTS = ("exp1", "exp2", "exp3", "exp4", "exp5")
# (label, variant, depth exponent)
SFR_SCHEMES = (("HSV_CC", "HSV_CC", 2), ("HVLB_CC(depth)", "HVLB_CC_B", 1), ("HVLB_CC(depth^2)", "HVLB_CC_B", 2))
WORKERS_ENV = "STREAMSCHED_WORKERS"


def perm_label(rates) -> str:
    return "-".join(f"{float(r):.2f}" for r in rates)


@dataclass(frozen=True)
class ExperimentConfig:
    experiment: str
    task_counts: tuple = (10, 20, 30, 40, 50)
    ccrs: tuple = (1.0,)
    permutations: tuple = tuple(range(len(RATE_PERMUTATIONS)))
    graphs_per_cell: int = 100
    seed: int = 1
    alpha_start: float = 0.0
    alpha_stop: float = 20.0
    alpha_step: float = 0.01
    lambdas: tuple = tuple(round(1 + k / 10, 1) for k in range(11))
    output_dir: str = "results"
    workers: int | None = None

    def __post_init__(self):
        if self.experiment not in EXPERIMENTS:
            raise ValueError(f"unknown experiment {self.experiment!r}; expected one of {', '.join(EXPERIMENTS)}")
        if self.graphs_per_cell < 1:
            raise ValueError("graphs_per_cell must be at least 1")
        if not self.task_counts:
            raise ValueError("task_counts must not be empty")
        for p in self.permutations:
            if not 0 <= p < len(RATE_PERMUTATIONS):
                raise ValueError(f"permutation index {p} out of range 0..{len(RATE_PERMUTATIONS) - 1}")
        if any(lam < 1 for lam in self.lambdas):
            raise ValueError("input-rate factors must be >= 1")
        AlphaGrid(self.alpha_start, self.alpha_stop, self.alpha_step)

    @property
    def grid(self) -> AlphaGrid:
        return AlphaGrid(self.alpha_start, self.alpha_stop, self.alpha_step)


def default_config(experiment: str, **overrides) -> ExperimentConfig:
    base = {"experiment": experiment}
    if experiment == "exp3":
        base.update(task_counts=(20,), ccrs=(0.1, 0.5, 1.0, 5.0, 10.0))
    elif experiment == "exp4":
        base.update(graphs_per_cell=1000, permutations=(0,))
    base.update(overrides)
    return ExperimentConfig(**base)


_LIST_KEYS = {"task_counts": int, "ccrs": float, "permutations": int, "lambdas": float}
_SCALAR_KEYS = {"graphs_per_cell": int, "seed": int, "alpha_start": float, "alpha_stop": float,
                "alpha_step": float, "output_dir": str, "workers": int}


def load_config(path) -> ExperimentConfig:
    """Read an INI-style ``[experiment]`` section of ``key = value`` lines."""
    parser = configparser.ConfigParser()
    text = Path(path).read_text()
    try:
        parser.read_string(text, source=str(path))
    except configparser.Error as exc:
        raise ValueError(f"{path}: {exc}") from exc
    if not parser.has_section("experiment"):
        raise ValueError(f"{path}: missing [experiment] section")
    sec = parser["experiment"]
    if "experiment" not in sec:
        raise ValueError(f"{path}: 'experiment' key is required")
    values = {}
    for key, raw in sec.items():
        if key == "experiment":
            continue
        try:
            if key in _LIST_KEYS:
                values[key] = tuple(_LIST_KEYS[key](x.strip()) for x in raw.split(",") if x.strip())
            elif key in _SCALAR_KEYS:
                values[key] = _SCALAR_KEYS[key](raw.strip())
            else:
                raise ValueError(f"unknown key {key!r}")
        except ValueError as exc:
            raise ValueError(f"{path}: [experiment] {key}: {exc}") from exc
    return default_config(sec["experiment"].strip(), **values)


def worker_count(cfg: ExperimentConfig) -> int:
    if cfg.workers is not None:
        return max(1, cfg.workers)
    raw = os.environ.get(WORKERS_ENV, "1")
    try:
        return max(1, int(raw))
    except ValueError:
        raise ValueError(f"{WORKERS_ENV} must be an integer, got {raw!r}") from None


def graph_seed(base: int, task_count: int, ccr: float, index: int, *, constrained: bool = True) -> int:
    words = [base, task_count, int(round(ccr * 1000)), index, int(constrained)]
    return int(np.random.SeedSequence(words).generate_state(1)[0])


@dataclass
class ExperimentResult:
    experiment: str
    output_dir: Path
    files: list = field(default_factory=list)
    rows: list = field(default_factory=list)
    failures: int = 0
    invalid: int = 0


# --------------------------------------------------------------------------
# Jobs (top-level so they pickle for worker processes)

_ROW_FIELDS = ["graph", "n", "ccr", "rates", "variant", "alpha", "makespan", "slr", "speedup", "lb", "status", "detail"]


def _instance_job(job):
    cfg, n, ccr, index = job
    seed = graph_seed(cfg.seed, n, ccr, index)
    base_topo = reference_topology()
    g = generate_random(GeneratorParams(task_count=n, ccr=ccr, seed=seed), base_topo)
    gid = f"n{n}-ccr{ccr:g}-g{index:03d}"
    rows = []
    for p in cfg.permutations:
        rates = RATE_PERMUTATIONS[p]
        topo = base_topo.with_rates(rates)
        runs = [
            ("HSV_CC", lambda: schedule_once(g, topo, "HSV_CC", 0)),
            ("HVLB_CC_A", lambda: schedule_sweep(g, topo, "HVLB_CC_A", cfg.grid)),
            ("HVLB_CC_B", lambda: schedule_sweep(g, topo, "HVLB_CC_B", cfg.grid)),
            ("HVLB_CC_B_alpha0", lambda: schedule_once(g, topo, "HVLB_CC_B", 0)),
        ]
        for label, run in runs:
            row = {"graph": gid, "n": n, "ccr": ccr, "rates": perm_label(rates), "variant": label}
            try:
                s = run()
            except SchedulingFailure as exc:
                row.update(alpha="", makespan="", slr="", speedup="", lb="", status="failed", detail=str(exc))
                rows.append(row)
                continue
            problems = check_schedule(s, g, topo)
            m = report(s, g, topo)
            row.update(alpha=float(s.alpha), makespan=m.makespan, slr=m.slr, speedup=m.speedup, lb=m.lb,
                       status="invalid" if problems else "ok", detail="; ".join(problems[:3]))
            rows.append(row)
    return rows


def _sfr_job(job):
    cfg, index = job
    n = cfg.task_counts[index % len(cfg.task_counts)]
    ccr = cfg.ccrs[0]
    seed = graph_seed(cfg.seed, n, ccr, index, constrained=False)
    topo = reference_topology(RATE_PERMUTATIONS[cfg.permutations[0]])
    g = generate_random(GeneratorParams(task_count=n, ccr=ccr, seed=seed, constrain_outdegree=False), topo)
    rows = []
    for label, variant, power in SFR_SCHEMES:
        row = {"graph": f"g{index:04d}", "n": n, "scheme": label}
        try:
            s = schedule_once(g, topo, variant, 0, depth_power=power)
        except SchedulingFailure as exc:
            row.update(status="failed", detail=str(exc))
        else:
            problems = check_schedule(s, g, topo)
            row.update(status="invalid" if problems else "ok", detail="; ".join(problems[:3]))
        rows.append(row)
    return rows


def _map(fn, jobs, workers):
    if workers <= 1:
        return [fn(j) for j in jobs]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, jobs, chunksize=max(1, len(jobs) // (workers * 8))))


def _fmt_cell(v):
    if isinstance(v, float):
        return repr(v)
    return v


def _csv(rows, fields) -> str:
    buf = io.StringIO()
    w = csv.DictWriter(buf, fieldnames=fields, lineterminator="\n", extrasaction="ignore")
    w.writeheader()
    for r in rows:
        w.writerow({k: _fmt_cell(r.get(k, "")) for k in fields})
    return buf.getvalue()


def _write(result: ExperimentResult, name: str, text: str):
    path = result.output_dir / name
    path.write_text(text)
    result.files.append(path)


def _mean(xs):
    return sum(xs) / len(xs) if xs else float("nan")


# --------------------------------------------------------------------------
# Drivers


def _run_grid(cfg: ExperimentConfig, result: ExperimentResult, *, x_key: str, metrics: tuple):
    jobs = [(cfg, n, ccr, i) for n in cfg.task_counts for ccr in cfg.ccrs for i in range(cfg.graphs_per_cell)]
    rows = [r for batch in _map(_instance_job, jobs, worker_count(cfg)) for r in batch]
    result.rows = rows
    result.failures = sum(r["status"] == "failed" for r in rows)
    result.invalid = sum(r["status"] == "invalid" for r in rows)
    _write(result, "instances.csv", _csv(rows, _ROW_FIELDS))

    summary = []
    variants = list(dict.fromkeys(r["variant"] for r in rows))
    xs = cfg.task_counts if x_key == "n" else cfg.ccrs
    for p in cfg.permutations:
        label = perm_label(RATE_PERMUTATIONS[p])
        for v in variants:
            for x in xs:
                cell = [r for r in rows if r["rates"] == label and r["variant"] == v and r[x_key] == x]
                ok = [r for r in cell if r["status"] == "ok"]
                entry = {"rates": label, "variant": v, x_key: x, "instances": len(cell),
                         "failed": sum(r["status"] == "failed" for r in cell)}
                for m in metrics:
                    entry[m] = _mean([r[m] for r in ok])
                summary.append(entry)
    _write(result, "summary.csv", _csv(summary, ["rates", "variant", x_key, "instances", "failed", *metrics]))

    xlabel = "number of tasks" if x_key == "n" else "CCR"
    for p in cfg.permutations:
        label = perm_label(RATE_PERMUTATIONS[p])
        for m in metrics:
            series = {
                v: [(e[x_key], e[m]) for e in summary if e["rates"] == label and e["variant"] == v and e[m] == e[m]]
                for v in variants if v != "HVLB_CC_B_alpha0"
            }
            svg = line_chart(series, title=f"{cfg.experiment}: {m} (rates {label})", xlabel=xlabel, ylabel=m)
            _write(result, f"{m}_{label}.svg", svg)


def _run_sfr(cfg: ExperimentConfig, result: ExperimentResult):
    jobs = [(cfg, i) for i in range(cfg.graphs_per_cell)]
    rows = [r for batch in _map(_sfr_job, jobs, worker_count(cfg)) for r in batch]
    result.rows = rows
    result.invalid = sum(r["status"] == "invalid" for r in rows)
    result.failures = sum(r["status"] == "failed" for r in rows)
    _write(result, "instances.csv", _csv(rows, ["graph", "n", "scheme", "status", "detail"]))
    sfr = {}
    for label, _, _ in SFR_SCHEMES:
        mine = [r for r in rows if r["scheme"] == label]
        sfr[label] = 100.0 * sum(r["status"] == "failed" for r in mine) / len(mine)
    _write(result, "sfr.csv", _csv([{"scheme": k, "sfr": v, "graphs": cfg.graphs_per_cell} for k, v in sfr.items()],
                                   ["scheme", "sfr", "graphs"]))
    _write(result, "sfr.svg", bar_chart(sfr, title="scheduling failure rate", ylabel="SFR (%)"))


def fixture_graph(name: str = "imprecise_graph.json"):
    text = resources.files("streamsched.data").joinpath(name).read_text()
    return graphmod.loads(text, source=name)


def _run_precision(cfg: ExperimentConfig, result: ExperimentResult, graph=None, topology: Topology | None = None):
    g = graph or fixture_graph()
    topo = topology or reference_topology()
    s = schedule_sweep(g, topo, "HVLB_CC_B", cfg.grid, rounding=True, exact=True)
    problems = check_schedule(s, g, topo)
    result.invalid = len(problems)
    holes = find_holes(s, g, topo)
    lambdas = [Fraction(str(x)) for x in cfg.lambdas]
    res = simulate_precision(s, holes, lambdas)
    result.rows = [asdict(r) for r in res]
    _write(result, "schedule.json", dumps_schedule(s))
    _write(result, "gantt.svg", render_svg(s))
    hole_rows = [
        {"task": e.task, "processor": s.tasks[e.task].processor, "hole": float(e.hole), "mandatory": float(e.mandatory),
         "condition1": "" if e.condition1 is None else float(e.condition1),
         "condition2": "" if e.condition2 is None else float(e.condition2)}
        for e in holes.entries.values()
    ]
    _write(result, "holes.csv", _csv(hole_rows, ["task", "processor", "hole", "mandatory", "condition1", "condition2"]))
    _write(result, "precision.csv", precision_csv(res))
    series = {}
    for r in res:
        series.setdefault(f"{r.task} {r.mode}", []).append((float(r.lam), r.precision))
    _write(result, "precision.svg", line_chart(series, title="precision vs input-rate factor",
                                               xlabel="lambda", ylabel="precision (%)"))


def run_experiment(cfg: ExperimentConfig, *, graph=None, topology=None) -> ExperimentResult:
    out = Path(cfg.output_dir) / cfg.experiment
    out.mkdir(parents=True, exist_ok=True)
    result = ExperimentResult(cfg.experiment, out)
    if cfg.experiment in ("exp1", "exp2"):
        metrics = ("slr", "speedup") if cfg.experiment == "exp1" else ("lb",)
        _run_grid(cfg, result, x_key="n", metrics=metrics)
    elif cfg.experiment == "exp3":
        _run_grid(cfg, result, x_key="ccr", metrics=("slr",))
    elif cfg.experiment == "exp4":
        _run_sfr(cfg, result)
    else:
        _run_precision(cfg, result, graph, topology)
    settings = {k: list(v) if isinstance(v, tuple) else v for k, v in asdict(cfg).items()
                if k not in ("output_dir", "workers")}
    _write(result, "config.json", json.dumps(settings, indent=2, sort_keys=True) + "\n")
    return result
