"""Schedule quality metrics: SLR, speedup, load balance and failure rate."""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass
from fractions import Fraction

from ._util import natural_key
from .graph import TaskGraph, derive_structure
from .scheduler import comp_time

__all__ = ["MetricsReport", "critical_path", "critical_path_length", "slr", "speedup", "lb", "sfr",
           "report", "metrics_csv", "METRICS_HEADER"]

METRICS_HEADER = ["graph", "variant", "alpha", "makespan", "slr", "speedup", "lb"]


@dataclass(frozen=True)
class MetricsReport:
    makespan: float
    slr: float
    speedup: float
    lb: float
    avg: float
    critical_path: tuple[str, ...]


def _min_comp(graph: TaskGraph, topology, rounding: bool) -> dict:
    return {
        t.id: min(Fraction(comp_time(t.weight, topology.rate(p), rounding=rounding)) for p in topology.processor_ids)
        for t in graph.tasks
    }


def critical_path(graph: TaskGraph, topology, *, rounding: bool = False) -> tuple[str, ...]:
    """Entry-to-exit path with the largest sum of fastest computation times.

    Communication is ignored. Among equally long paths the lexicographically
    smallest id sequence is returned.
    """
    st = derive_structure(graph)
    cost = _min_comp(graph, topology, rounding)
    tail = {}
    for t in reversed(st.topo_order):
        tail[t] = cost[t] + max((tail[s] for s in st.succ[t]), default=0)
    best = max(tail[t] for t in st.entries)
    node = min((t for t in st.entries if tail[t] == best), key=natural_key)
    path = [node]
    while st.succ[node]:
        need = tail[node] - cost[node]
        node = min((s for s in st.succ[node] if tail[s] == need), key=natural_key)
        path.append(node)
    return tuple(path)


def critical_path_length(graph: TaskGraph, topology, *, rounding: bool = False) -> Fraction:
    cost = _min_comp(graph, topology, rounding)
    return sum((cost[t] for t in critical_path(graph, topology, rounding=rounding)), Fraction(0))


def slr(schedule, graph: TaskGraph, topology) -> float:
    denom = critical_path_length(graph, topology, rounding=schedule.rounding)
    if denom == 0:
        raise ZeroDivisionError("critical path has zero computation time")
    return _ratio(schedule.makespan, denom)


def speedup(schedule, graph: TaskGraph, topology) -> float:
    if schedule.makespan == 0:
        raise ZeroDivisionError("zero makespan")
    sequential = min(
        sum((Fraction(comp_time(t.weight, topology.rate(p), rounding=schedule.rounding)) for t in graph.tasks), Fraction(0))
        for p in topology.processor_ids
    )
    return _ratio(sequential, schedule.makespan)


def lb(schedule) -> float:
    """Makespan over the mean busy time of all processors (idle ones count)."""
    procs = schedule.processors or tuple({s.processor for s in schedule.tasks.values()})
    busy = sum((s.finish - s.start for s in schedule.tasks.values()), 0)
    avg = busy / len(procs)
    if avg == 0:
        raise ZeroDivisionError("no processor did any work")
    return _ratio(schedule.makespan, avg)


def sfr(outcomes) -> float:
    """Percentage of failed runs; ``outcomes`` holds booleans (True = failed)."""
    outcomes = list(outcomes)
    if not outcomes:
        raise ValueError("empty batch")
    return 100.0 * sum(1 for o in outcomes if o) / len(outcomes)


def _ratio(a, b) -> float:
    if isinstance(a, float) or isinstance(b, float):
        return float(a) / float(b)
    return float(Fraction(a) / Fraction(b))


def report(schedule, graph: TaskGraph, topology) -> MetricsReport:
    procs = schedule.processors or tuple({s.processor for s in schedule.tasks.values()})
    busy = sum((s.finish - s.start for s in schedule.tasks.values()), 0)
    return MetricsReport(
        makespan=float(schedule.makespan),
        slr=slr(schedule, graph, topology),
        speedup=speedup(schedule, graph, topology),
        lb=lb(schedule),
        avg=float(busy) / len(procs),
        critical_path=critical_path(graph, topology, rounding=schedule.rounding),
    )


def metrics_csv(rows, header=True) -> str:
    """CSV text; each row is (graph, variant, alpha, makespan, slr, speedup, lb)."""
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    if header:
        w.writerow(METRICS_HEADER)
    for graph_id, variant, alpha, makespan, s, sp, b in rows:
        w.writerow([graph_id, variant, repr(float(alpha)), repr(float(makespan)), repr(float(s)),
                    repr(float(sp)), repr(float(b))])
    return buf.getvalue()
