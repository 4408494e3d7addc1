"""Stand-alone schedule checker.

Recomputes everything it needs from the graph and topology files; it does
not import the scheduler so a bug there cannot hide here.
"""

from __future__ import annotations

import math
from fractions import Fraction

from .graph import TaskGraph
from .network import Topology

__all__ = ["check_schedule", "check_link_calendars"]


def _comp(weight, rate, rounding):
    q = Fraction(weight) / Fraction(rate)
    if rounding:
        return math.floor(q + Fraction(1, 2))
    return q


def _close(a, b, tol):
    return abs(a - b) <= tol * max(1, abs(a), abs(b))


def check_link_calendars(reservations, tol=1e-9) -> list[str]:
    """Sweep-line overlap check; ``reservations`` maps link -> [(start, finish, tag)]."""
    problems = []
    for link, slots in reservations.items():
        events = sorted(slots, key=lambda r: (r[0], r[1]))
        busy_until = -math.inf
        owner = None
        for start, finish, tag in events:
            if finish < start:
                problems.append(f"link {link}: reservation {tag} ends before it starts")
            if start < busy_until - tol * max(1, abs(busy_until)):
                problems.append(f"link {link}: {tag} starts at {start} while {owner} holds it until {busy_until}")
            if finish > busy_until:
                busy_until, owner = finish, tag
    return problems


def check_schedule(schedule, graph: TaskGraph, topology: Topology, *, tol: float = 1e-9) -> list[str]:
    """Return every violated schedule property (empty list when valid)."""
    problems: list[str] = []
    rate = {p.id: p.rate for p in topology.processors}
    speed = {l.id: l.speed for l in topology.links}
    ends = {l.id: {l.a, l.b} for l in topology.links}
    weight = {t.id: t.weight for t in graph.tasks}
    preds: dict[str, list[str]] = {t.id: [] for t in graph.tasks}
    succs: dict[str, list[str]] = {t.id: [] for t in graph.tasks}
    volume = {}
    for e in graph.edges:
        preds[e.dst].append(e.src)
        succs[e.src].append(e.dst)
        volume[(e.src, e.dst)] = e.volume

    slots = schedule.tasks
    missing = set(weight) - set(slots)
    extra = set(slots) - set(weight)
    for t in sorted(missing):
        problems.append(f"task {t} is not scheduled")
    for t in sorted(extra):
        problems.append(f"unknown task {t} in schedule")

    for t, s in slots.items():
        if t not in weight:
            continue
        if s.processor not in rate:
            problems.append(f"task {t} on unknown processor {s.processor}")
            continue
        if s.start < -tol:
            problems.append(f"task {t} starts before time 0")
        want = _comp(weight[t], rate[s.processor], schedule.rounding)
        if not _close(s.finish - s.start, want, tol):
            problems.append(f"task {t}: duration {s.finish - s.start} != computation time {float(want)}")

    by_proc: dict[str, list] = {}
    for s in slots.values():
        by_proc.setdefault(s.processor, []).append(s)
    for proc, items in by_proc.items():
        items.sort(key=lambda s: (s.start, s.finish))
        for a, b in zip(items, items[1:]):
            if b.start < a.finish - tol * max(1, abs(a.finish)) and b.finish > b.start and a.finish > a.start:
                problems.append(f"processor {proc}: {a.task} [{a.start},{a.finish}) overlaps {b.task} [{b.start},{b.finish})")

    messages = {}
    for m in schedule.messages:
        key = (m.src, m.dst)
        if key in messages:
            problems.append(f"edge {key} has more than one message")
        messages[key] = m
        if key not in volume:
            problems.append(f"message on non-existent edge {key}")
            continue
        if m.src not in slots or m.dst not in slots:
            continue
        if m.src_proc != slots[m.src].processor or m.dst_proc != slots[m.dst].processor:
            problems.append(f"message {key}: endpoints do not match task placement")
        if m.src_proc == m.dst_proc:
            problems.append(f"message {key} between tasks on the same processor")
        links = [h[0] for h in m.hops]
        if tuple(links) != tuple(m.route):
            problems.append(f"message {key}: hop links differ from route")
        node = m.src_proc
        for link in links:
            if link not in ends or node not in ends[link]:
                problems.append(f"message {key}: route is not a path from {m.src_proc}")
                break
            (node,) = ends[link] - {node}
        else:
            if node != m.dst_proc:
                problems.append(f"message {key}: route ends at {node}, not {m.dst_proc}")
        if len(set(links)) != len(links):
            problems.append(f"message {key}: route repeats a link")
        aft = slots[m.src].finish
        prev = None
        for link, s, f in m.hops:
            if link not in speed:
                continue
            need = Fraction(volume[key]) / Fraction(speed[link]) if not isinstance(volume[key], float) else volume[key] / speed[link]
            if f - s < need - tol * max(1, abs(need)):
                problems.append(f"message {key} on {link}: interval shorter than transmission time")
            if prev is None:
                if s < aft - tol * max(1, abs(aft)):
                    problems.append(f"message {key} leaves {link} before its source finishes")
            else:
                if s < prev[0] - tol * max(1, abs(prev[0])):
                    problems.append(f"message {key}: start on {link} precedes start on previous link")
                if f < prev[1] - tol * max(1, abs(prev[1])):
                    problems.append(f"message {key}: finish on {link} precedes finish on previous link")
            prev = (s, f)

    for (src, dst), vol in volume.items():
        if src not in slots or dst not in slots:
            continue
        cross = slots[src].processor != slots[dst].processor and vol > 0
        if cross and (src, dst) not in messages:
            problems.append(f"edge {src}->{dst} crosses processors but has no message")
        if cross and (src, dst) in messages:
            arrival = messages[(src, dst)].hops[-1][2]
        else:
            arrival = slots[src].finish
        if slots[dst].start < arrival - tol * max(1, abs(arrival)):
            problems.append(f"task {dst} starts at {slots[dst].start} before data from {src} arrives at {arrival}")

    reservations: dict[str, list] = {}
    for m in schedule.messages:
        for link, s, f in m.hops:
            if f > s:
                reservations.setdefault(link, []).append((s, f, (m.src, m.dst)))
    problems.extend(check_link_calendars(reservations, tol))

    exits = [t for t in weight if not succs[t] and t in slots]
    if exits:
        ms = max(slots[t].finish for t in exits)
        if not _close(ms, schedule.makespan, tol):
            problems.append(f"makespan {schedule.makespan} != latest exit finish {ms}")
    return problems
