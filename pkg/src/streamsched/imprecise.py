"""Schedule holes and precision of imprecise tasks under inflated input rates.

A task following the imprecise-computation model runs a mandatory part and,
when time allows, an optional part. On a frozen schedule the optional part
can only use the idle time right after the task (its *hole*): the largest
extension that moves no other task, keeps every outgoing message's arrival
time, and leaves the makespan alone.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass

from .graph import TaskGraph, derive_structure

__all__ = ["HoleEntry", "HoleReport", "PrecisionResult", "find_holes", "latest_message_start",
           "simulate_precision", "precision_csv"]


@dataclass(frozen=True)
class HoleEntry:
    task: str
    hole: object
    condition1: object | None
    condition2: object | None
    mandatory: object


@dataclass(frozen=True)
class HoleReport:
    entries: dict[str, HoleEntry]

    def __getitem__(self, task: str) -> HoleEntry:
        return self.entries[task]

    def holes(self) -> dict[str, object]:
        return {t: e.hole for t, e in self.entries.items()}


@dataclass(frozen=True)
class PrecisionResult:
    task: str
    lam: object
    mode: str
    requested: object
    executed: object
    precision: float


def latest_message_start(message, topology, reservations) -> object:
    """Latest first-link start that keeps the message's final arrival time.

    Walks the route backwards. On every link the message may not run past the
    next reservation on that link, and on the last link it may not finish
    later than it does now.
    """
    hops = message.hops
    durations = [message.volume / topology.link(link).speed for link, _, _ in hops]
    next_start = []
    for link, s, f in hops:
        later = [r[0] for r in reservations.get(link, ()) if r[2] != (message.src, message.dst) and r[0] >= f]
        next_start.append(min(later, default=math.inf))
    k = len(hops)
    finish_cap = hops[-1][2]
    start_cap = math.inf
    for x in range(k - 1, 0, -1):
        start_cap = min(start_cap, finish_cap - durations[x])
        finish_cap = min(next_start[x - 1], finish_cap)
    return min(start_cap, finish_cap - durations[0])


def find_holes(schedule, graph: TaskGraph, topology, tasks=None) -> HoleReport:
    """Exploitable idle time after each task (default: the imprecise ones)."""
    st = derive_structure(graph)
    volume = {(e.src, e.dst): e.volume for e in graph.edges}
    if tasks is None:
        tasks = [t.id for t in graph.tasks if t.imprecise]
    fraction = {t.id: t.mandatory_fraction for t in graph.tasks}
    slots = schedule.tasks
    next_on_proc: dict[str, object] = {}
    for proc in {s.processor for s in slots.values()}:
        items = schedule.on_processor(proc)
        for a, b in zip(items, items[1:]):
            next_on_proc[a.task] = b.start
    reservations = schedule.link_reservations()
    messages = {(m.src, m.dst): m for m in schedule.messages}

    entries = {}
    for t in tasks:
        slot = slots[t]
        aft = slot.start + (slot.finish - slot.start)
        nxt = next_on_proc.get(t, math.inf)
        cond1 = cond2 = None
        for s in st.succ[t]:
            m = messages.get((t, s))
            if m is None:
                value = min(slots[s].start, nxt) - aft
                cond1 = value if cond1 is None else min(cond1, value)
            else:
                lst2 = latest_message_start(m, topology, reservations)
                value = min(slots[s].start, nxt, lst2) - aft
                cond2 = value if cond2 is None else min(cond2, value)
        applicable = [c for c in (cond1, cond2) if c is not None]
        if applicable:
            hole = min(applicable)
        else:
            # exit task: bounded by the next task on the processor and the makespan
            hole = min(nxt, schedule.makespan) - aft
        if hole < 0:
            hole = 0 * hole
        mandatory = fraction[t] * (slot.finish - slot.start)
        entries[t] = HoleEntry(t, hole, cond1, cond2, mandatory)
    return HoleReport(entries)


def simulate_precision(schedule, holes: HoleReport, lambdas, *, modes=("IC", "no-IC")) -> list[PrecisionResult]:
    """Precision (percent) per imprecise task for each input-rate factor.

    The requested time at factor ``lam`` is ``lam * mandatory``. With
    imprecise computation ("IC") the optional part may fill the hole; without
    it ("no-IC") only the mandatory part runs.
    """
    results = []
    for lam in lambdas:
        if lam < 1:
            raise ValueError(f"input-rate factor must be >= 1, got {lam}")
        for task, e in holes.entries.items():
            mp = e.mandatory
            requested = lam * mp
            for mode in modes:
                if mode == "IC":
                    executed = mp + min((lam - 1) * mp, e.hole)
                elif mode == "no-IC":
                    executed = mp
                else:
                    raise ValueError(f"unknown mode {mode!r}")
                precision = 100.0 if requested == 0 else float(executed / requested * 100)
                results.append(PrecisionResult(task, lam, mode, requested, executed, precision))
    return results


def precision_csv(results) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["task", "lambda", "mode", "precision"])
    for r in results:
        w.writerow([r.task, f"{float(r.lam):.2f}", r.mode, repr(float(r.precision))])
    return buf.getvalue()
