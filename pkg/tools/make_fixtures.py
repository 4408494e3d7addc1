"""Regenerate the bundled example graphs (volumes scaled to CCR = 1)."""

from fractions import Fraction
from pathlib import Path

from streamsched.graph import Edge, Task, TaskGraph, apply_ccr, measured_ccr, store
from streamsched.network import reference_topology

DATA = Path(__file__).resolve().parents[1] / "src" / "streamsched" / "data"

STRUCTURE = [
    ("n1", "n4", 10), ("n1", "n5", 8), ("n2", "n5", 6), ("n2", "n6", 9),
    ("n3", "n5", 12), ("n3", "n6", 7), ("n4", "n7", 14), ("n4", "n8", 5),
    ("n5", "n7", 6), ("n5", "n8", 11), ("n6", "n10", 15), ("n7", "n10", 17),
    ("n8", "n9", 9),
]

# weights equal the computation times on the unit-rate processor
SPG_WEIGHTS = [12, 8, 8, 14, 6, 10, 17, 9, 13, 10]
IMPRECISE_WEIGHTS = [17, 17, 9, 8, 11, 20, 6, 18, 18, 20]


def build(weights, imprecise=()):
    tasks = tuple(Task(f"n{i + 1}", w, imprecise=f"n{i + 1}" in imprecise) for i, w in enumerate(weights))
    edges = tuple(Edge(a, b, Fraction(v)) for a, b, v in STRUCTURE)
    graph = TaskGraph(tasks, edges, period=100)
    topo = reference_topology()
    graph = apply_ccr(graph, topo, 1)
    assert measured_ccr(graph, topo) == 1
    return graph


if __name__ == "__main__":
    store(build(SPG_WEIGHTS), DATA / "fig3_graph.json")
    store(build(IMPRECISE_WEIGHTS, imprecise={"n2", "n4", "n5", "n6"}), DATA / "imprecise_graph.json")
