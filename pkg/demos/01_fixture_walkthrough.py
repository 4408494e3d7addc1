# %% [markdown]
# # Scheduling the reference stream graph
#
# The bundled ten-task stream graph on the three-processor, two-switch
# network. We look at routes, ranks and priorities, then schedule it with
# each variant and draw the result.

# %%
from fractions import Fraction

import numpy as np

from streamsched.experiments import fixture_graph
from streamsched.graph import derive_structure
from streamsched.metrics import report
from streamsched.network import pair_speed, processor_speed, reference_topology
from streamsched.gantt import render_ascii
from streamsched.scheduler import AlphaGrid, compute_rank, schedule_once, schedule_sweep
from streamsched.validator import check_schedule

topo = reference_topology()
graph = fixture_graph("fig3_graph.json")
len(graph.tasks), len(graph.edges)

# %% routes between every ordered pair, with the speed of the fastest one
for (src, dst), routes in sorted(topo.routes.items()):
    print(src, "->", dst, [list(r) for r in routes], "speed", pair_speed(topo, src, dst))

# transfer speed seen from each processor
print({p: str(processor_speed(topo, p)) for p in topo.processor_ids})

# %% per-processor upward ranks as a task x processor matrix
st = derive_structure(graph)
ranks = {p: compute_rank(graph, st, topo, p, rounding=True) for p in topo.processor_ids}
table = np.array([[float(ranks[p][t.id]) for p in topo.processor_ids] for t in graph.tasks])
print(np.round(table, 2))
print("hrank", dict(zip([t.id for t in graph.tasks], np.round(table.mean(axis=1), 2))))

# %% one schedule per variant, all checked by the validator
runs = {
    "HSV_CC": schedule_once(graph, topo, "HSV_CC", rounding=True, exact=True),
    "HVLB_CC_A": schedule_sweep(graph, topo, "HVLB_CC_A", AlphaGrid(0, 20, 0.1), rounding=True, exact=True),
    "HVLB_CC_B": schedule_sweep(graph, topo, "HVLB_CC_B", AlphaGrid(0, 20, 0.1), rounding=True, exact=True),
}
for name, s in runs.items():
    m = report(s, graph, topo)
    assert check_schedule(s, graph, topo) == []
    print(f"{name:10s} alpha={float(s.alpha):5.2f} makespan={m.makespan:7.2f} slr={m.slr:.3f} "
          f"speedup={m.speedup:.3f} lb={m.lb:.3f}")

# %% the winner as a text chart; links carrying messages get their own rows
print(render_ascii(runs["HVLB_CC_A"], width=72))

# %% messages that crossed the network and the links they reserved
for m in runs["HVLB_CC_A"].messages:
    if m.hops:
        print(f"{m.src}->{m.dst}", m.src_proc, "->", m.dst_proc,
              [(l, str(Fraction(a)), str(Fraction(b))) for l, a, b in m.hops])
