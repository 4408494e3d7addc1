"""Two-phase list scheduling with link contention.

Phase one orders tasks by a priority value built from per-processor upward
ranks. Phase two places each dequeued task on the (processor, sub-route)
pair with the smallest selection value, reserving the links its incoming
messages cross. Three variants are provided:

``HSV_CC``
    selection value ``EFT * LDET``, priority ``hrank * outd``.
``HVLB_CC_A``
    selection value ``EFT * LDET * BP`` with the balancing parameter
    ``BP = 1 + load/period * alpha``; same priority as ``HSV_CC``.
``HVLB_CC_B``
    as A, with priority ``hrank * outd/max_outd / depth**2``.

Tie-breaking is deterministic everywhere: priorities by smaller task id,
candidates by processor declaration order then lexicographically smaller
route, sweep points by smaller alpha.
"""

from __future__ import annotations

import itertools
import json
import math
from dataclasses import dataclass, field
from enum import Enum
from fractions import Fraction
from pathlib import Path
from typing import Iterable, Mapping, Sequence

from ._util import dump_number, natural_key, parse_number
from .graph import StructureIndex, TaskGraph, derive_structure
from .network import LinkCalendar, Topology, processor_speed

__all__ = [
    "Variant",
    "AlphaGrid",
    "SchedulingFailure",
    "PriorityTable",
    "TaskSlot",
    "MessageSlot",
    "Schedule",
    "Estimate",
    "comp_time",
    "compute_rank",
    "compute_hrank",
    "compute_priority",
    "ldet_cc",
    "bp",
    "selection_value",
    "ScheduleBuilder",
    "schedule_once",
    "schedule_sweep",
    "schedule_to_dict",
    "schedule_from_dict",
    "dump_schedule",
    "load_schedule",
]

# Relative margin used when deciding that a float comparison is stable
# across neighbouring alpha values.
STABILITY_TOL = 1e-9


class Variant(str, Enum):
    HSV_CC = "HSV_CC"
    HVLB_CC_A = "HVLB_CC_A"
    HVLB_CC_B = "HVLB_CC_B"

    @property
    def balanced(self) -> bool:
        return self is not Variant.HSV_CC


class SchedulingFailure(RuntimeError):
    """A task reached the head of the queue before one of its predecessors."""

    def __init__(self, task, predecessor):
        super().__init__(f"task {task!r} dequeued before its predecessor {predecessor!r}")
        self.task = task
        self.predecessor = predecessor


@dataclass(frozen=True)
class AlphaGrid:
    start: float = 0
    stop: float = 20
    step: float = 0.01

    def __post_init__(self):
        if not self.step > 0:
            raise ValueError("alpha step must be positive")
        if self.start > self.stop:
            raise ValueError("alpha start must not exceed stop")

    def values(self, exact: bool = False) -> list:
        start, stop, step = (Fraction(str(x)) for x in (self.start, self.stop, self.step))
        count = int((stop - start) / step) + 1
        pts = [start + k * step for k in range(count)]
        return pts if exact else [float(p) for p in pts]


# --------------------------------------------------------------------------
# Costs


def comp_time(weight, rate, *, rounding: bool = False):
    """Computation time ``weight / rate``; ``rounding`` rounds half up to an int."""
    if rounding:
        q = Fraction(weight) / Fraction(rate)
        return math.floor(q + Fraction(1, 2))
    if isinstance(weight, (int, Fraction)) and isinstance(rate, (int, Fraction)):
        return Fraction(weight) / Fraction(rate)
    return weight / rate


def _num(exact: bool):
    return Fraction if exact else float


class _Costs:
    """Numeric tables shared by the priority and selection phases."""

    def __init__(self, graph: TaskGraph, topology: Topology, *, rounding=False, exact=False,
                 structure: StructureIndex | None = None):
        num = _num(exact)
        self.exact = exact
        self.rounding = rounding
        self.graph = graph
        self.topology = topology
        self.structure = structure or derive_structure(graph)
        self.procs = topology.processor_ids
        self.proc_index = {p: i for i, p in enumerate(self.procs)}
        self.period = num(graph.period)
        self.comp = {
            t.id: {p: num(comp_time(t.weight, topology.rate(p), rounding=rounding)) for p in self.procs}
            for t in graph.tasks
        }
        self.volume = {(e.src, e.dst): num(e.volume) for e in graph.edges}
        self.link_speed = {l.id: num(l.speed) for l in topology.links}
        if len(self.procs) > 1:
            self.proc_speed = {p: num(processor_speed(topology, p)) for p in self.procs}
        else:
            self.proc_speed = {}
        self.routes = topology.routes
        self.route_key = {
            pair: [tuple(natural_key(l) for l in r) for r in rs] for pair, rs in self.routes.items()
        }
        self.zero = num(0)
        self.one = num(1)


def compute_rank(graph: TaskGraph, structure: StructureIndex, topology: Topology, processor: str,
                 *, rounding: bool = False, _costs: _Costs | None = None) -> dict:
    """Upward rank of every task when the whole tail runs on ``processor``.

    Communication to each successor is charged at the processor's transfer
    speed regardless of where the successor lands.
    """
    costs = _costs or _Costs(graph, topology, rounding=rounding, exact=True, structure=structure)
    comp = costs.comp
    rank = {}
    speed = costs.proc_speed.get(processor)
    for t in reversed(structure.topo_order):
        tail = costs.zero
        for s in structure.succ[t]:
            vol = costs.volume[(t, s)]
            # a single processor has nowhere to send to
            comm = vol / speed if vol and speed is not None else costs.zero
            cand = rank[s] + comm
            if cand > tail:
                tail = cand
        rank[t] = comp[t][processor] + tail
    return rank


def compute_hrank(ranks: Mapping[str, Mapping[str, object]]) -> dict:
    """Mean rank across processors; ``ranks`` maps processor -> task -> rank."""
    procs = list(ranks)
    if not procs:
        raise ValueError("no processors")
    tasks = list(ranks[procs[0]])
    out = {}
    for t in tasks:
        total = sum((ranks[p][t] for p in procs[1:]), ranks[procs[0]][t])
        if isinstance(total, (int, Fraction)):
            out[t] = Fraction(total) / len(procs)
        else:
            out[t] = total / len(procs)
    return out


@dataclass(frozen=True)
class PriorityTable:
    rank: Mapping[tuple[str, str], object]
    hrank: Mapping[str, object]
    depth: Mapping[str, int]
    outd: Mapping[str, int]
    hprv: Mapping[str, object]
    order: tuple[str, ...]


def compute_priority(graph: TaskGraph, structure: StructureIndex, hrank: Mapping[str, object],
                     variant: Variant | str, *, depth_power: int = 2,
                     rank: Mapping | None = None) -> PriorityTable:
    """Priority values and the dequeue order (non-increasing, ties by id)."""
    variant = Variant(variant)
    hprv = {}
    max_outd = structure.max_outd
    for t in graph.task_ids:
        od = structure.outd[t]
        if variant is Variant.HVLB_CC_B:
            if od == 0:
                hprv[t] = 0 * hrank[t]
            else:
                scale = Fraction(od, max_outd * structure.depth[t] ** depth_power)
                hprv[t] = hrank[t] * (scale if isinstance(hrank[t], (int, Fraction)) else float(scale))
        else:
            hprv[t] = hrank[t] * od
    order = sorted(graph.task_ids, key=lambda t: (-hprv[t], natural_key(t)))
    return PriorityTable(
        rank=dict(rank or {}),
        hrank=dict(hrank),
        depth=dict(structure.depth),
        outd=dict(structure.outd),
        hprv=hprv,
        order=tuple(order),
    )


def ldet_cc(rank_value, comp_value, *, is_exit: bool):
    """Longest distance exit time; pinned to 1.0 for exit tasks."""
    if is_exit:
        return 1.0 if isinstance(rank_value, float) else 1
    return rank_value - comp_value


def bp(load, period, alpha):
    """Balancing parameter ``1 + load/period * alpha``."""
    if not period > 0:
        raise ValueError("period must be positive")
    if alpha < 0:
        raise ValueError("alpha must be non-negative")
    return 1 + load / period * alpha


def selection_value(eft, ldet, balance, variant: Variant | str, *, is_exit: bool):
    """Candidate score; the smallest wins."""
    variant = Variant(variant)
    if variant is Variant.HSV_CC:
        return eft * ldet
    if is_exit:
        return eft
    return eft * ldet * balance


# --------------------------------------------------------------------------
# Schedules


@dataclass(frozen=True)
class TaskSlot:
    task: str
    processor: str
    start: object
    finish: object


@dataclass(frozen=True)
class MessageSlot:
    src: str
    dst: str
    volume: object
    src_proc: str
    dst_proc: str
    route: tuple[str, ...]
    hops: tuple[tuple[str, object, object], ...]

    @property
    def first_start(self):
        return self.hops[0][1]

    @property
    def arrival(self):
        return self.hops[-1][2]


@dataclass
class Schedule:
    variant: str
    alpha: object
    tasks: dict[str, TaskSlot]
    messages: list[MessageSlot]
    makespan: object
    processors: tuple[str, ...] = ()
    rounding: bool = False
    curve: list[tuple[object, object]] = field(default_factory=list)

    @property
    def order(self) -> list[str]:
        """Commit order of the tasks."""
        return list(self.tasks)

    def processor_of(self, task: str) -> str:
        return self.tasks[task].processor

    def on_processor(self, proc: str) -> list[TaskSlot]:
        return sorted((s for s in self.tasks.values() if s.processor == proc), key=lambda s: (s.start, s.finish))

    def message(self, src: str, dst: str) -> MessageSlot | None:
        for m in self.messages:
            if m.src == src and m.dst == dst:
                return m
        return None

    def link_reservations(self) -> dict[str, list[tuple[object, object, tuple[str, str]]]]:
        out: dict[str, list] = {}
        for m in self.messages:
            for link, s, f in m.hops:
                out.setdefault(link, []).append((s, f, (m.src, m.dst)))
        for v in out.values():
            v.sort(key=lambda r: (r[0], r[1]))
        return out


@dataclass(frozen=True)
class Estimate:
    """Result of an EST/EFT query for one (task, processor, routes) candidate."""

    processor: str
    routes: tuple[tuple[str, ...], ...]
    est: object
    eft: object
    messages: tuple[tuple[str, tuple[tuple[str, object, object], ...]], ...]


class ScheduleBuilder:
    """Mutable state of one scheduling run (processor and link availability)."""

    def __init__(self, graph: TaskGraph, topology: Topology, *, rounding=False, exact=False,
                 costs: _Costs | None = None):
        self.costs = costs or _Costs(graph, topology, rounding=rounding, exact=exact)
        c = self.costs
        self.graph = graph
        self.structure = c.structure
        self.proc_of: dict[str, str] = {}
        self.start: dict[str, object] = {}
        self.aft: dict[str, object] = {}
        self.commit_index: dict[str, int] = {}
        self.avail = {p: c.zero for p in c.procs}
        self.load = {p: c.zero for p in c.procs}
        self.link_avail: dict[str, object] = {}
        self.calendar = LinkCalendar()
        self.messages: list[MessageSlot] = []
        self._ctml: dict[tuple[tuple[str, str], str], object] = {}

    # -- queries ---------------------------------------------------------

    def _ctml_of(self, edge, link):
        key = (edge, link)
        v = self._ctml.get(key)
        if v is None:
            v = self.costs.volume[edge] / self.costs.link_speed[link]
            self._ctml[key] = v
        return v

    def _chain(self, edge, route, ready, tmp):
        """Per-link start/finish of one message; updates ``tmp`` link availability."""
        hops = []
        lst = lft = None
        link_avail = self.link_avail
        zero = self.costs.zero
        for i, link in enumerate(route):
            av = tmp.get(link)
            if av is None:
                av = link_avail.get(link, zero)
            dur = self._ctml_of(edge, link)
            if i == 0:
                lst = ready if ready >= av else av
                lft = lst + dur
            else:
                lst = lst if lst >= av else av
                end = lst + dur
                lft = lft if lft >= end else end
            tmp[link] = lft
            hops.append((link, lst, lft))
        return lft, hops

    def split_predecessors(self, task: str, dest: str):
        """(local arrival time, cross-processor predecessors in commit order)."""
        local = self.costs.zero
        cross = []
        for p in self.structure.pred[task]:
            if p not in self.proc_of:
                raise SchedulingFailure(task, p)
            if self.proc_of[p] == dest or not self.costs.volume[(p, task)]:
                if self.aft[p] > local:
                    local = self.aft[p]
            else:
                cross.append(p)
        cross.sort(key=self.commit_index.__getitem__)
        return local, cross

    def est_eft(self, task: str, dest: str, routes: Mapping[str, Sequence[str]] | Sequence | None = None) -> Estimate:
        """EST/EFT of ``task`` on ``dest`` with given routes; commits nothing."""
        local, cross = self.split_predecessors(task, dest)
        if routes is None:
            chosen = [self.costs.routes[(self.proc_of[p], dest)][0] for p in cross]
        elif isinstance(routes, Mapping):
            chosen = [tuple(routes[p]) for p in cross]
        else:
            chosen = [tuple(r) for r in routes]
        for p, r in zip(cross, chosen):
            if r not in self.costs.routes[(self.proc_of[p], dest)]:
                raise ValueError(f"route {r} does not connect {self.proc_of[p]} to {dest}")
        tmp: dict = {}
        arrival = local
        msgs = []
        for p, r in zip(cross, chosen):
            lft, hops = self._chain((p, task), r, self.aft[p], tmp)
            if lft > arrival:
                arrival = lft
            msgs.append((p, tuple(hops)))
        est = self.avail[dest] if self.avail[dest] >= arrival else arrival
        eft = est + self.costs.comp[task][dest]
        return Estimate(dest, tuple(chosen), est, eft, tuple(msgs))

    # -- commit ----------------------------------------------------------

    def commit(self, task: str, est: Estimate) -> None:
        dest = est.processor
        for pred, hops in est.messages:
            edge = (pred, task)
            route = tuple(h[0] for h in hops)
            for link, s, f in hops:
                if f > s:
                    self.calendar.reserve(link, edge, s, f)
                if f > self.link_avail.get(link, self.costs.zero):
                    self.link_avail[link] = f
            self.messages.append(
                MessageSlot(pred, task, self.costs.volume[edge], self.proc_of[pred], dest, route, hops)
            )
        self.commit_index[task] = len(self.commit_index)
        self.proc_of[task] = dest
        self.start[task] = est.est
        self.aft[task] = est.eft
        self.avail[dest] = est.eft
        self.load[dest] = self.load[dest] + self.costs.comp[task][dest]

    # -- candidate search ------------------------------------------------

    def candidates(self, task: str):
        """Yield estimates for every (processor, route combination) in tie-break order."""
        costs = self.costs
        for dest in costs.procs:
            local, cross = self.split_predecessors(task, dest)
            options = [costs.routes[(self.proc_of[p], dest)] for p in cross]
            if len(cross) <= 2:
                combos = itertools.product(*options)
            else:
                combos = [self._greedy_routes(task, cross, options)]
            comp = costs.comp[task][dest]
            avail = self.avail[dest]
            for combo in combos:
                tmp: dict = {}
                arrival = local
                msgs = []
                for p, r in zip(cross, combo):
                    lft, hops = self._chain((p, task), r, self.aft[p], tmp)
                    if lft > arrival:
                        arrival = lft
                    msgs.append((p, tuple(hops)))
                est = avail if avail >= arrival else arrival
                yield Estimate(dest, combo, est, est + comp, tuple(msgs))

    def _greedy_routes(self, task, cross, options):
        tmp: dict = {}
        combo = []
        for p, opts in zip(cross, options):
            best = None
            for r in opts:
                trial = dict(tmp)
                lft, _ = self._chain((p, task), r, self.aft[p], trial)
                if best is None or lft < best[0]:
                    best = (lft, r, trial)
            combo.append(best[1])
            tmp = best[2]
        return tuple(combo)

    def to_schedule(self, variant, alpha) -> Schedule:
        exits = self.structure.exits
        makespan = max((self.aft[t] for t in exits), default=self.costs.zero)
        tasks = {
            t: TaskSlot(t, self.proc_of[t], self.start[t], self.aft[t])
            for t in sorted(self.commit_index, key=self.commit_index.__getitem__)
        }
        return Schedule(
            variant=Variant(variant).value,
            alpha=alpha,
            tasks=tasks,
            messages=list(self.messages),
            makespan=makespan,
            processors=tuple(self.costs.procs),
            rounding=self.costs.rounding,
        )


# --------------------------------------------------------------------------
# Drivers


class _Prepared:
    """Per-(graph, topology, variant) data reused across alpha values."""

    def __init__(self, graph, topology, variant, *, rounding, exact, depth_power):
        self.variant = Variant(variant)
        self.costs = _Costs(graph, topology, rounding=rounding, exact=exact)
        st = self.costs.structure
        ranks = {p: compute_rank(graph, st, topology, p, _costs=self.costs) for p in self.costs.procs}
        hrank = compute_hrank(ranks)
        self.priority = compute_priority(
            graph, st, hrank, self.variant, depth_power=depth_power,
            rank={(t, p): ranks[p][t] for p in ranks for t in ranks[p]},
        )
        exits = set(st.exits)
        self.is_exit = {t: t in exits for t in graph.task_ids}
        one = self.costs.one
        self.ldet = {
            t: {p: one if self.is_exit[t] else ranks[p][t] - self.costs.comp[t][p] for p in self.costs.procs}
            for t in graph.task_ids
        }
        self.graph = graph
        self.topology = topology


def _run(prep: _Prepared, alpha, track: bool):
    """One pass of the greedy placement; returns (schedule, stability cutoff)."""
    costs = prep.costs
    b = ScheduleBuilder(prep.graph, prep.topology, costs=costs)
    balanced = prep.variant.balanced
    inv_period = costs.one / costs.period
    tol = 0 if costs.exact else STABILITY_TOL
    cutoff = math.inf
    if costs.exact and not isinstance(alpha, Fraction):
        alpha = Fraction(str(alpha)) if isinstance(alpha, float) else Fraction(alpha)
    for task in prep.priority.order:
        for p in prep.costs.structure.pred[task]:
            if p not in b.proc_of:
                raise SchedulingFailure(task, p)
        is_exit = prep.is_exit[task]
        ldet = prep.ldet[task]
        best = None
        best_val = None
        scores = [] if track else None
        for est in b.candidates(task):
            dest = est.processor
            if balanced and is_exit:
                a, s = est.eft, costs.zero
            elif balanced:
                a = est.eft * ldet[dest]
                s = a * (b.load[dest] * inv_period)
            else:
                a, s = est.eft * ldet[dest], costs.zero
            val = a * (1 + b.load[dest] * inv_period * alpha) if (balanced and not is_exit) else a
            if best_val is None or val < best_val:
                best, best_val = est, val
                win = len(scores) if track else 0
            if track:
                scores.append((a, s))
        if track and prep.variant.balanced:
            aw, sw = scores[win]
            for idx, (ac, sc) in enumerate(scores):
                if idx == win:
                    continue
                A = ac - aw
                B = sc - sw
                if A == 0 and B == 0:
                    continue
                c0 = A - tol * (abs(ac) + abs(aw))
                c1 = B - tol * (abs(sc) + abs(sw))
                if c1 >= 0:
                    if not c0 + c1 * alpha > 0:
                        cutoff = alpha
                else:
                    root = -c0 / c1
                    if root < cutoff:
                        cutoff = root if root > alpha else alpha
        b.commit(task, best)
    return b.to_schedule(prep.variant, alpha), cutoff


def schedule_once(graph: TaskGraph, topology: Topology, variant: Variant | str = Variant.HVLB_CC_A,
                  alpha=0, *, rounding: bool = False, exact: bool = False,
                  depth_power: int = 2) -> Schedule:
    """Place every task once at a fixed ``alpha``.

    Raises :class:`SchedulingFailure` if the priority order dequeues a task
    before one of its predecessors.
    """
    if alpha < 0:
        raise ValueError("alpha must be non-negative")
    prep = _Prepared(graph, topology, variant, rounding=rounding, exact=exact, depth_power=depth_power)
    schedule, _ = _run(prep, alpha, track=False)
    return schedule


def schedule_sweep(graph: TaskGraph, topology: Topology, variant: Variant | str = Variant.HVLB_CC_A,
                   grid: AlphaGrid | Iterable = AlphaGrid(), *, rounding: bool = False,
                   exact: bool = False, depth_power: int = 2) -> Schedule:
    """Best schedule over a grid of alpha values (smallest makespan, then smallest alpha).

    Grid points whose every placement decision provably matches an earlier
    run are not re-run; they inherit its makespan in ``schedule.curve``.
    """
    prep = _Prepared(graph, topology, variant, rounding=rounding, exact=exact, depth_power=depth_power)
    if isinstance(grid, AlphaGrid):
        points = grid.values(exact=exact)
    else:
        points = [Fraction(str(a)) if exact and isinstance(a, float) else a for a in grid]
        points = sorted(points)
    if not points:
        raise ValueError("empty alpha grid")
    curve = []
    best = None
    i = 0
    while i < len(points):
        alpha = points[i]
        sched, cutoff = _run(prep, alpha, track=True)
        curve.append((alpha, sched.makespan))
        if best is None or sched.makespan < best.makespan:
            best = sched
        j = i + 1
        while j < len(points) and points[j] < cutoff:
            curve.append((points[j], sched.makespan))
            j += 1
        i = j
    best.curve = curve
    return best


# --------------------------------------------------------------------------
# File format


def schedule_to_dict(schedule: Schedule) -> dict:
    return {
        "variant": schedule.variant,
        "alpha": dump_number(schedule.alpha),
        "makespan": dump_number(schedule.makespan),
        "rounding": schedule.rounding,
        "processors": list(schedule.processors),
        "tasks": [
            {"id": s.task, "processor": s.processor, "start": dump_number(s.start), "finish": dump_number(s.finish)}
            for s in schedule.tasks.values()
        ],
        "messages": [
            {
                "edge": [m.src, m.dst],
                "volume": dump_number(m.volume),
                "src_proc": m.src_proc,
                "dst_proc": m.dst_proc,
                "route": list(m.route),
                "links": [{"id": l, "start": dump_number(s), "finish": dump_number(f)} for l, s, f in m.hops],
            }
            for m in schedule.messages
        ],
        "curve": [[dump_number(a), dump_number(ms)] for a, ms in schedule.curve],
    }


def dumps_schedule(schedule: Schedule) -> str:
    return json.dumps(schedule_to_dict(schedule), indent=2) + "\n"


def schedule_from_dict(data: Mapping, *, source: str = "<schedule>") -> Schedule:
    try:
        tasks = {}
        for raw in data["tasks"]:
            tasks[str(raw["id"])] = TaskSlot(
                str(raw["id"]), str(raw["processor"]),
                parse_number(raw["start"], field="start"), parse_number(raw["finish"], field="finish"),
            )
        messages = []
        for raw in data.get("messages", []):
            src, dst = raw["edge"]
            hops = tuple(
                (str(h["id"]), parse_number(h["start"], field="start"), parse_number(h["finish"], field="finish"))
                for h in raw["links"]
            )
            messages.append(
                MessageSlot(str(src), str(dst), parse_number(raw.get("volume", 0), field="volume"),
                            str(raw["src_proc"]), str(raw["dst_proc"]), tuple(raw["route"]), hops)
            )
        procs = tuple(data.get("processors") or sorted({s.processor for s in tasks.values()}, key=natural_key))
        return Schedule(
            variant=str(data.get("variant", "")),
            alpha=parse_number(data.get("alpha", 0), field="alpha"),
            tasks=tasks,
            messages=messages,
            makespan=parse_number(data["makespan"], field="makespan"),
            processors=procs,
            rounding=bool(data.get("rounding", False)),
            curve=[(parse_number(a), parse_number(m)) for a, m in data.get("curve", [])],
        )
    except (KeyError, TypeError, ValueError) as exc:
        raise ValueError(f"{source}: malformed schedule ({exc})") from exc


def dump_schedule(schedule: Schedule, path) -> None:
    Path(path).write_text(dumps_schedule(schedule))


def load_schedule(path) -> Schedule:
    path = Path(path)
    try:
        data = json.loads(path.read_text())
    except json.JSONDecodeError as exc:
        raise ValueError(f"{path}: line {exc.lineno} column {exc.colno}: {exc.msg}") from exc
    return schedule_from_dict(data, source=str(path))


__all__ += ["dumps_schedule", "STABILITY_TOL"]
