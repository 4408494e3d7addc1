"""Task-graph model: structure queries, validation, random generation and I/O.

A :class:`TaskGraph` is an immutable weighted DAG. Task weights are
computational volumes (operations), edge volumes are tuple sizes (data
units) and ``period`` doubles as the end-to-end deadline.
"""

from __future__ import annotations

import heapq
import json
import math
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Iterable, Mapping, Sequence

import numpy as np

from ._util import div, dump_number, mean, natural_key, parse_number

__all__ = [
    "Task",
    "Edge",
    "TaskGraph",
    "StructureIndex",
    "ValidationReport",
    "GraphError",
    "CycleError",
    "GraphParseError",
    "GenerationError",
    "GeneratorParams",
    "derive_structure",
    "validate",
    "generate_random",
    "apply_ccr",
    "measured_ccr",
    "load",
    "store",
    "dumps",
    "loads",
]


class GraphError(ValueError):
    """Base class for malformed task graphs."""


class CycleError(GraphError):
    def __init__(self, member):
        super().__init__(f"task graph contains a cycle through {member!r}")
        self.member = member


class GraphParseError(GraphError):
    pass


class GenerationError(GraphError):
    pass


@dataclass(frozen=True)
class Task:
    id: str
    weight: float
    imprecise: bool = False
    mandatory_fraction: float = 1

    def __post_init__(self):
        if self.weight < 0:
            raise GraphError(f"task {self.id!r}: negative weight {self.weight}")
        if not 0 < self.mandatory_fraction <= 1:
            raise GraphError(f"task {self.id!r}: mandatory_fraction must lie in (0, 1]")


@dataclass(frozen=True)
class Edge:
    src: str
    dst: str
    volume: float

    def __post_init__(self):
        if self.volume < 0:
            raise GraphError(f"edge {self.src}->{self.dst}: negative volume {self.volume}")


@dataclass(frozen=True)
class TaskGraph:
    tasks: tuple[Task, ...]
    edges: tuple[Edge, ...]
    period: float = 100

    def __post_init__(self):
        object.__setattr__(self, "tasks", tuple(self.tasks))
        object.__setattr__(self, "edges", tuple(self.edges))

    @property
    def task_ids(self) -> list[str]:
        return [t.id for t in self.tasks]

    def task(self, task_id: str) -> Task:
        for t in self.tasks:
            if t.id == task_id:
                return t
        raise KeyError(task_id)

    def edge_map(self) -> dict[tuple[str, str], Edge]:
        return {(e.src, e.dst): e for e in self.edges}

    def canonical(self) -> "TaskGraph":
        """Same graph with tasks and edges sorted by id."""
        tasks = sorted(self.tasks, key=lambda t: natural_key(t.id))
        edges = sorted(self.edges, key=lambda e: (natural_key(e.src), natural_key(e.dst)))
        return replace(self, tasks=tuple(tasks), edges=tuple(edges))


@dataclass(frozen=True)
class StructureIndex:
    pred: Mapping[str, tuple[str, ...]]
    succ: Mapping[str, tuple[str, ...]]
    ind: Mapping[str, int]
    outd: Mapping[str, int]
    depth: Mapping[str, int]
    topo_order: tuple[str, ...]
    max_outd: int
    entries: tuple[str, ...] = field(default=())
    exits: tuple[str, ...] = field(default=())


@dataclass
class ValidationReport:
    violations: list[str] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.violations

    def __bool__(self) -> bool:
        return self.ok

    def __str__(self) -> str:
        if self.ok:
            return "graph is well-formed"
        return "\n".join(f"- {v}" for v in self.violations)


def _topological(ids: Sequence[str], succ: Mapping[str, Sequence[str]], ind: Mapping[str, int]):
    """Kahn's algorithm with smallest-id-first selection; returns (order, leftover)."""
    remaining = dict(ind)
    heap = [(natural_key(t), t) for t in ids if remaining[t] == 0]
    heapq.heapify(heap)
    order = []
    while heap:
        _, t = heapq.heappop(heap)
        order.append(t)
        for s in succ[t]:
            remaining[s] -= 1
            if remaining[s] == 0:
                heapq.heappush(heap, (natural_key(s), s))
    leftover = [t for t in ids if remaining[t] > 0]
    return order, leftover


def derive_structure(graph: TaskGraph) -> StructureIndex:
    """Predecessor/successor sets, degrees, depths and a topological order.

    Depth counts nodes on the longest path from any entry task, so entry tasks
    have depth 1.
    """
    ids = graph.task_ids
    pred: dict[str, list[str]] = {t: [] for t in ids}
    succ: dict[str, list[str]] = {t: [] for t in ids}
    for e in graph.edges:
        if e.src not in succ or e.dst not in pred:
            missing = e.src if e.src not in succ else e.dst
            raise GraphError(f"edge {e.src}->{e.dst} references unknown task {missing!r}")
        succ[e.src].append(e.dst)
        pred[e.dst].append(e.src)
    for t in ids:
        pred[t].sort(key=natural_key)
        succ[t].sort(key=natural_key)
    ind = {t: len(pred[t]) for t in ids}
    outd = {t: len(succ[t]) for t in ids}

    order, leftover = _topological(ids, succ, ind)
    if leftover:
        raise CycleError(min(leftover, key=natural_key))

    depth: dict[str, int] = {}
    for t in order:
        depth[t] = 1 + max((depth[p] for p in pred[t]), default=0)

    return StructureIndex(
        pred={t: tuple(v) for t, v in pred.items()},
        succ={t: tuple(v) for t, v in succ.items()},
        ind=ind,
        outd=outd,
        depth=depth,
        topo_order=tuple(order),
        max_outd=max(outd.values(), default=0),
        entries=tuple(t for t in order if ind[t] == 0),
        exits=tuple(t for t in order if outd[t] == 0),
    )


def validate(graph: TaskGraph) -> ValidationReport:
    """Collect every violated invariant instead of stopping at the first."""
    report = ValidationReport()
    v = report.violations
    if not graph.period > 0:
        v.append(f"period must be positive, got {graph.period}")

    seen: set[str] = set()
    for t in graph.tasks:
        if t.id in seen:
            v.append(f"duplicate task id {t.id!r}")
        seen.add(t.id)
        if t.weight < 0:
            v.append(f"task {t.id!r} has negative weight")
        if not 0 < t.mandatory_fraction <= 1:
            v.append(f"task {t.id!r} mandatory_fraction outside (0, 1]")

    if not graph.tasks:
        v.append("graph has no tasks (no entry task)")

    pairs: set[tuple[str, str]] = set()
    good_edges = []
    for e in graph.edges:
        bad = False
        for end in (e.src, e.dst):
            if end not in seen:
                v.append(f"edge {e.src}->{e.dst} references unknown task {end!r}")
                bad = True
        if e.src == e.dst:
            v.append(f"self-edge on {e.src!r}")
            bad = True
        if (e.src, e.dst) in pairs:
            v.append(f"duplicate edge {e.src}->{e.dst}")
            bad = True
        pairs.add((e.src, e.dst))
        if e.volume < 0:
            v.append(f"edge {e.src}->{e.dst} has negative volume")
        if not bad:
            good_edges.append(e)

    if graph.tasks:
        ids = list(dict.fromkeys(graph.task_ids))
        succ = {t: [] for t in ids}
        ind = {t: 0 for t in ids}
        for e in good_edges:
            succ[e.src].append(e.dst)
            ind[e.dst] += 1
        _, leftover = _topological(ids, succ, ind)
        if leftover:
            v.append("graph is not acyclic; cycle involves " + ", ".join(sorted(leftover, key=natural_key)))
        else:
            if not any(ind[t] == 0 for t in ids):
                v.append("graph has no entry task")
            if not any(not succ[t] for t in ids):
                v.append("graph has no exit task")
    return report


# --------------------------------------------------------------------------
# CCR calibration


def _mean_inverse(values) -> float:
    return mean([div(1, x) for x in values])


def measured_ccr(graph: TaskGraph, topology) -> float:
    """Mean per-source communication time over mean computation time.

    Communication of an edge is averaged over every processor acting as the
    source (volume / transfer speed of that processor); computation of a task
    is averaged over every processor (weight / rate).
    """
    from .network import processor_speed

    if not graph.edges:
        raise GraphError("CCR is undefined for a graph without edges")
    procs = topology.processor_ids
    inv_speed = _mean_inverse([processor_speed(topology, p) for p in procs])
    inv_rate = _mean_inverse([topology.rate(p) for p in procs])
    comm = mean([e.volume for e in graph.edges]) * inv_speed
    comp = mean([t.weight for t in graph.tasks]) * inv_rate
    if comp == 0:
        raise GraphError("CCR is undefined when every task weight is zero")
    return div(comm, comp)


def apply_ccr(graph: TaskGraph, topology, ccr) -> TaskGraph:
    """Scale every edge volume by one common factor so the graph hits ``ccr``."""
    if not ccr > 0:
        raise GraphError(f"ccr must be positive, got {ccr}")
    if not graph.edges:
        raise GraphError("cannot calibrate CCR of a graph without edges")
    if all(e.volume == 0 for e in graph.edges):
        raise GraphError("cannot scale all-zero edge volumes to a target CCR")
    current = measured_ccr(graph, topology)
    factor = div(ccr, current)
    if factor == 1:
        return graph
    edges = tuple(replace(e, volume=e.volume * factor) for e in graph.edges)
    return replace(graph, edges=edges)


# --------------------------------------------------------------------------
# Random generation


@dataclass(frozen=True)
class GeneratorParams:
    task_count: int = 20
    max_in_degree: int = 2
    max_out_degree: int = 3
    min_entry: int = 2
    min_exit: int = 2
    weight_range: tuple = (5, 20)
    volume_range: tuple = (1, 10)
    ccr: float = 1.0
    constrain_outdegree: bool = True
    seed: int = 0
    period: float | None = None

    def check(self) -> None:
        for name in ("task_count", "max_in_degree", "max_out_degree", "min_entry", "min_exit"):
            value = getattr(self, name)
            if int(value) != value or value < 1:
                raise GenerationError(f"{name} must be a positive integer, got {value}")
        if not self.ccr > 0:
            raise GenerationError(f"ccr must be positive, got {self.ccr}")
        lo, hi = self.weight_range
        if not 0 < lo <= hi:
            raise GenerationError(f"weight_range must be a positive interval, got {self.weight_range}")
        vlo, vhi = self.volume_range
        if not 0 < vlo <= vhi:
            raise GenerationError(f"volume_range must be a positive interval, got {self.volume_range}")
        if self.task_count > 1 and self.min_entry + self.min_exit > self.task_count:
            raise GenerationError(
                f"infeasible: min_entry + min_exit = {self.min_entry + self.min_exit} "
                f"exceeds task_count = {self.task_count}"
            )
        if self.period is not None and not self.period > 0:
            raise GenerationError("period must be positive")


def _draw(rng: np.random.Generator, bounds) -> float:
    lo, hi = bounds
    if isinstance(lo, int) and isinstance(hi, int):
        return int(rng.integers(lo, hi + 1))
    return float(rng.uniform(lo, hi))


_MAX_ATTEMPTS = 64


def _build_edges(params: GeneratorParams, rng: np.random.Generator):
    """Grow a DAG by random fan-out and fan-in steps.

    Starts from ``min_entry`` entry tasks. A fan-out step gives one open task
    (out-degree below its cap) between one and cap-many new children; a
    fan-in step creates one task joining up to ``max_in_degree`` open tasks.
    New tasks always get a parent, so the entry count stays at ``min_entry``.
    With ``constrain_outdegree`` a task's cap is also the smallest out-degree
    among its parents, which keeps ``outd(parent) >= outd(child)`` true at
    every step.
    """
    n = params.task_count
    max_out = params.max_out_degree
    preds: list[list[int]] = [[] for _ in range(params.min_entry)]
    outd = [0] * params.min_entry
    edges: list[tuple[int, int]] = []

    def cap(q: int) -> int:
        c = max_out
        if params.constrain_outdegree and preds[q]:
            c = min(c, min(outd[r] for r in preds[q]))
        return c - outd[q]

    count = params.min_entry
    while count < n:
        open_tasks = [q for q in range(count) if cap(q) > 0]
        if rng.random() < 0.5:
            q = int(rng.choice(open_tasks))
            k = min(int(rng.integers(1, cap(q) + 1)), n - count)
            for _ in range(k):
                preds.append([q])
                outd.append(0)
                edges.append((q, count))
                outd[q] += 1
                count += 1
        else:
            r = min(int(rng.integers(1, params.max_in_degree + 1)), len(open_tasks))
            parents = sorted(int(x) for x in rng.choice(open_tasks, size=r, replace=False))
            preds.append(parents)
            outd.append(0)
            for q in parents:
                edges.append((q, count))
                outd[q] += 1
            count += 1
    ind = [len(p) for p in preds]
    return edges, ind, outd


def generate_random(params: GeneratorParams, topology=None) -> TaskGraph:
    """Seeded random task graph with CCR calibrated against ``topology``.

    ``topology`` defaults to the bundled four-link reference network.
    """
    params.check()
    if topology is None:
        from .network import reference_topology

        topology = reference_topology()
    rng = np.random.default_rng(params.seed)
    n = params.task_count
    if n == 1:
        edges_idx = []
    else:
        # redraw (same stream) until the exit minimum holds
        for _ in range(_MAX_ATTEMPTS):
            edges_idx, ind, outd = _build_edges(params, rng)
            if sum(1 for d in outd if d == 0) >= params.min_exit:
                break
        else:
            raise GenerationError("could not satisfy the exit-task minimum with these degree limits")

    width = len(str(n))
    names = [f"n{i + 1:0{width}d}" for i in range(n)]
    tasks = tuple(Task(names[i], _draw(rng, params.weight_range)) for i in range(n))
    edges = tuple(Edge(names[a], names[b], _draw(rng, params.volume_range)) for a, b in edges_idx)

    period = params.period
    if period is None:
        inv_rate = _mean_inverse([topology.rate(p) for p in topology.processor_ids])
        period = math.ceil(float(sum(t.weight for t in tasks) * inv_rate))
    graph = TaskGraph(tasks, edges, period)
    if edges:
        graph = apply_ccr(graph, topology, params.ccr)
        # float volumes keep the generator fast; the scale factor is exact to ~1e-15
        graph = replace(graph, edges=tuple(replace(e, volume=float(e.volume)) for e in graph.edges))
    return graph


# --------------------------------------------------------------------------
# File format


def _task_to_json(t: Task) -> dict:
    return {
        "id": t.id,
        "weight": dump_number(t.weight),
        "imprecise": bool(t.imprecise),
        "mandatory_fraction": dump_number(t.mandatory_fraction),
    }


def to_dict(graph: TaskGraph) -> dict:
    g = graph.canonical()
    return {
        "period": dump_number(g.period),
        "tasks": [_task_to_json(t) for t in g.tasks],
        "edges": [
            {"src": e.src, "dst": e.dst, "volume": dump_number(e.volume)} for e in g.edges
        ],
    }


def dumps(graph: TaskGraph) -> str:
    return json.dumps(to_dict(graph), indent=2) + "\n"


def from_dict(data: Mapping, *, source: str = "<graph>") -> TaskGraph:
    def fail(msg):
        raise GraphParseError(f"{source}: {msg}")

    if not isinstance(data, Mapping):
        fail("top level must be an object")
    for key in ("period", "tasks", "edges"):
        if key not in data:
            fail(f"missing top-level key {key!r}")
    try:
        period = parse_number(data["period"], field="period")
        tasks = []
        for i, raw in enumerate(data["tasks"]):
            where = f"tasks[{i}]"
            if "id" not in raw or "weight" not in raw:
                fail(f"{where}: 'id' and 'weight' are required")
            tasks.append(
                Task(
                    id=str(raw["id"]),
                    weight=parse_number(raw["weight"], field=f"{where}.weight"),
                    imprecise=bool(raw.get("imprecise", False)),
                    mandatory_fraction=parse_number(
                        raw.get("mandatory_fraction", 1), field=f"{where}.mandatory_fraction"
                    ),
                )
            )
        ids = {t.id for t in tasks}
        edges = []
        for i, raw in enumerate(data["edges"]):
            where = f"edges[{i}]"
            for key in ("src", "dst", "volume"):
                if key not in raw:
                    fail(f"{where}: missing {key!r}")
            src, dst = str(raw["src"]), str(raw["dst"])
            for end_key, end in (("src", src), ("dst", dst)):
                if end not in ids:
                    fail(f"{where}.{end_key}: unknown task id {end!r}")
            edges.append(Edge(src, dst, parse_number(raw["volume"], field=f"{where}.volume")))
    except GraphParseError:
        raise
    except (ValueError, TypeError) as exc:
        fail(str(exc))
    return TaskGraph(tuple(tasks), tuple(edges), period)


def loads(text: str, *, source: str = "<graph>") -> TaskGraph:
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise GraphParseError(f"{source}: line {exc.lineno} column {exc.colno}: {exc.msg}") from exc
    return from_dict(data, source=source)


def load(path) -> TaskGraph:
    path = Path(path)
    return loads(path.read_text(), source=str(path))


def store(graph: TaskGraph, path) -> None:
    Path(path).write_text(dumps(graph))


def to_networkx(graph: TaskGraph):
    """Directed networkx view (weights on nodes, volumes on edges)."""
    import networkx as nx

    g = nx.DiGraph()
    for t in graph.tasks:
        g.add_node(t.id, weight=t.weight)
    for e in graph.edges:
        g.add_edge(e.src, e.dst, volume=e.volume)
    return g


def chain(weights: Iterable, volume=1, period=100) -> TaskGraph:
    """Linear chain ``n1 -> n2 -> ...``; handy in examples and tests."""
    weights = list(weights)
    tasks = tuple(Task(f"n{i + 1}", w) for i, w in enumerate(weights))
    edges = tuple(Edge(f"n{i + 1}", f"n{i + 2}", volume) for i in range(len(weights) - 1))
    return TaskGraph(tasks, edges, period)


__all__ += ["to_dict", "from_dict", "to_networkx", "chain"]
