"""Heterogeneous switched network: topology, routes, speeds and link calendars."""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from fractions import Fraction
from importlib import resources
from pathlib import Path
from typing import Mapping, Sequence

from ._util import div, dump_number, mean, natural_key, parse_number

__all__ = [
    "Processor",
    "Link",
    "Topology",
    "TopologyError",
    "ContentionError",
    "LinkCalendar",
    "Reservation",
    "enumerate_routes",
    "route_speed",
    "pair_speed",
    "processor_speed",
    "comm_time",
    "ctml",
    "reference_topology",
    "load_topology",
    "store_topology",
    "PAPER_RATES",
]

# Execution rates printed as 0.67 / 1.0 / 0.83; the exact values are 2/3 and 5/6.
PAPER_RATES = (Fraction(2, 3), 1, Fraction(5, 6))


class TopologyError(ValueError):
    pass


class ContentionError(RuntimeError):
    """Two reservations on one link overlap."""


@dataclass(frozen=True)
class Processor:
    id: str
    rate: float

    def __post_init__(self):
        if not self.rate > 0:
            raise TopologyError(f"processor {self.id!r}: rate must be positive")


@dataclass(frozen=True)
class Link:
    id: str
    a: str
    b: str
    speed: float

    def __post_init__(self):
        if not self.speed > 0:
            raise TopologyError(f"link {self.id!r}: speed must be positive")
        if self.a == self.b:
            raise TopologyError(f"link {self.id!r} is a loop")

    def other(self, node: str) -> str:
        return self.b if node == self.a else self.a


Route = tuple[str, ...]


@dataclass(frozen=True)
class Topology:
    """Processors and switches joined by undirected links of given speed.

    Routes for every ordered processor pair are enumerated once at
    construction and kept in ``routes``.
    """

    processors: tuple[Processor, ...]
    switches: tuple[str, ...]
    links: tuple[Link, ...]
    routes: Mapping[tuple[str, str], tuple[Route, ...]] = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "processors", tuple(self.processors))
        object.__setattr__(self, "switches", tuple(self.switches))
        object.__setattr__(self, "links", tuple(self.links))
        nodes = [p.id for p in self.processors] + list(self.switches)
        if len(set(nodes)) != len(nodes):
            raise TopologyError("processor and switch ids must be unique")
        if len({l.id for l in self.links}) != len(self.links):
            raise TopologyError("link ids must be unique")
        for l in self.links:
            for end in (l.a, l.b):
                if end not in nodes:
                    raise TopologyError(f"link {l.id!r} references unknown node {end!r}")
        object.__setattr__(self, "_link_by_id", {l.id: l for l in self.links})
        object.__setattr__(self, "_rate", {p.id: p.rate for p in self.processors})
        routes = {}
        for src in self.processor_ids:
            for dst in self.processor_ids:
                if src != dst:
                    routes[(src, dst)] = tuple(enumerate_routes(self, src, dst))
        object.__setattr__(self, "routes", routes)

    @property
    def processor_ids(self) -> list[str]:
        return [p.id for p in self.processors]

    def rate(self, proc: str):
        return self._rate[proc]

    def link(self, link_id: str) -> Link:
        return self._link_by_id[link_id]

    def with_rates(self, rates: Sequence) -> "Topology":
        """Same wiring, processor rates replaced in declaration order."""
        if len(rates) != len(self.processors):
            raise TopologyError("one rate per processor is required")
        procs = tuple(Processor(p.id, r) for p, r in zip(self.processors, rates))
        return Topology(procs, self.switches, self.links)


def enumerate_routes(topology: Topology, src: str, dst: str) -> list[Route]:
    """All simple paths from ``src`` to ``dst`` as sequences of link ids.

    Intermediate hops may be switches or other processors. Paths are ordered
    lexicographically by their link ids.
    """
    if src == dst:
        raise TopologyError("source and destination must differ")
    pids = set(topology.processor_ids)
    for p in (src, dst):
        if p not in pids:
            raise TopologyError(f"unknown processor {p!r}")
    adjacency: dict[str, list[Link]] = {}
    for l in topology.links:
        adjacency.setdefault(l.a, []).append(l)
        adjacency.setdefault(l.b, []).append(l)

    found: list[Route] = []
    visited = {src}
    path: list[str] = []

    def walk(node: str) -> None:
        for l in adjacency.get(node, ()):
            nxt = l.other(node)
            if nxt in visited:
                continue
            path.append(l.id)
            if nxt == dst:
                found.append(tuple(path))
            else:
                visited.add(nxt)
                walk(nxt)
                visited.discard(nxt)
            path.pop()

    walk(src)
    if not found:
        raise TopologyError(f"no route between {src!r} and {dst!r}")
    found.sort(key=lambda r: tuple(natural_key(x) for x in r))
    return found


def route_speed(topology: Topology, route: Sequence[str]):
    """Bottleneck speed of one sub-route."""
    if not route:
        raise TopologyError("empty route")
    return min(topology.link(l).speed for l in route)


def pair_speed(topology: Topology, src: str, dst: str):
    """Mean bottleneck speed over every sub-route between two processors."""
    routes = topology.routes.get((src, dst))
    if not routes:
        raise TopologyError(f"no routes between {src!r} and {dst!r}")
    return mean([route_speed(topology, r) for r in routes])


def processor_speed(topology: Topology, src: str):
    """Data-transfer speed of a source processor: mean pair speed to every other processor."""
    others = [p for p in topology.processor_ids if p != src]
    if not others:
        raise TopologyError("transfer speed needs at least two processors")
    return mean([pair_speed(topology, src, d) for d in others])


def comm_time(topology: Topology, volume, src: str, *, same_processor: bool = False):
    """Estimated transfer time of ``volume`` data units sent from ``src``."""
    if same_processor or volume == 0:
        return 0
    return div(volume, processor_speed(topology, src))


def ctml(volume, link: Link):
    """Time to push ``volume`` data units through one link."""
    return div(volume, link.speed)


# --------------------------------------------------------------------------
# Link calendars


@dataclass(frozen=True)
class Reservation:
    message: object
    start: float
    finish: float


class LinkCalendar:
    """Exclusive, non-preemptive reservations per link (half-open intervals)."""

    def __init__(self):
        self._slots: dict[str, list[Reservation]] = {}
        self._avail: dict[str, float] = {}

    def avail(self, link: str):
        return self._avail.get(link, 0)

    def reservations(self, link: str) -> list[Reservation]:
        return list(self._slots.get(link, ()))

    def links(self) -> list[str]:
        return sorted(self._slots, key=natural_key)

    def reserve(self, link: str, message, start, finish) -> "LinkCalendar":
        if not finish > start:
            raise ValueError(f"reservation on {link!r} must have finish > start")
        slots = self._slots.setdefault(link, [])
        for r in slots:
            if start < r.finish and r.start < finish:
                raise ContentionError(
                    f"link {link!r}: [{start}, {finish}) overlaps [{r.start}, {r.finish}) of {r.message!r}"
                )
        slots.append(Reservation(message, start, finish))
        slots.sort(key=lambda r: (r.start, r.finish))
        if finish > self._avail.get(link, 0):
            self._avail[link] = finish
        return self

    def copy(self) -> "LinkCalendar":
        other = LinkCalendar()
        other._slots = {k: list(v) for k, v in self._slots.items()}
        other._avail = dict(self._avail)
        return other


# --------------------------------------------------------------------------
# File format


def topology_to_dict(topology: Topology) -> dict:
    return {
        "processors": [{"id": p.id, "rate": dump_number(p.rate)} for p in topology.processors],
        "switches": [{"id": s} for s in topology.switches],
        "links": [
            {"id": l.id, "a": l.a, "b": l.b, "speed": dump_number(l.speed)} for l in topology.links
        ],
    }


def topology_from_dict(data: Mapping, *, source: str = "<topology>") -> Topology:
    try:
        procs = tuple(
            Processor(str(p["id"]), parse_number(p["rate"], field=f"processors[{i}].rate"))
            for i, p in enumerate(data["processors"])
        )
        switches = tuple(
            str(s["id"]) if isinstance(s, Mapping) else str(s) for s in data.get("switches", ())
        )
        links = tuple(
            Link(str(l["id"]), str(l["a"]), str(l["b"]), parse_number(l["speed"], field=f"links[{i}].speed"))
            for i, l in enumerate(data["links"])
        )
    except KeyError as exc:
        raise TopologyError(f"{source}: missing key {exc.args[0]!r}") from exc
    except (TypeError, ValueError) as exc:
        raise TopologyError(f"{source}: {exc}") from exc
    return Topology(procs, switches, links)


def load_topology(path) -> Topology:
    path = Path(path)
    try:
        data = json.loads(path.read_text())
    except json.JSONDecodeError as exc:
        raise TopologyError(f"{path}: line {exc.lineno} column {exc.colno}: {exc.msg}") from exc
    return topology_from_dict(data, source=str(path))


def store_topology(topology: Topology, path) -> None:
    Path(path).write_text(json.dumps(topology_to_dict(topology), indent=2) + "\n")


def reference_topology(rates: Sequence | None = None) -> Topology:
    """Three processors, one switch and four links (bundled fixture).

    Wiring: p1-l1-S1, S1-l2-p2, p2-l3-p3, S1-l4-p3 with link speeds
    1, 1, 3 and 2.
    """
    text = resources.files("streamsched.data").joinpath("fig2_topology.json").read_text()
    topo = topology_from_dict(json.loads(text), source="fig2_topology.json")
    return topo.with_rates(rates) if rates is not None else topo


__all__ += ["topology_to_dict", "topology_from_dict", "Route"]
