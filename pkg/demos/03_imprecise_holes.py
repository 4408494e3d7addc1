# %% [markdown]
# # Spare time for optional work
#
# When the input rate rises by a factor lam, each imprecise task needs
# lam times its mandatory time. A hole is idle time after a task that can
# absorb the extra part without delaying anything else.

# %%
from fractions import Fraction

import numpy as np

from streamsched.experiments import fixture_graph
from streamsched.gantt import render_ascii
from streamsched.imprecise import find_holes, simulate_precision
from streamsched.network import reference_topology
from streamsched.scheduler import AlphaGrid, schedule_sweep

topo = reference_topology()
graph = fixture_graph()
s = schedule_sweep(graph, topo, "HVLB_CC_B", AlphaGrid(0, 20, 0.01), rounding=True, exact=True)
print("alpha", s.alpha, "makespan", float(s.makespan))
print(render_ascii(s, width=72))

# %% holes per imprecise task and the two conditions that bound them
holes = find_holes(s, graph, topo)
for t, e in holes.entries.items():
    c1 = None if e.condition1 is None else round(float(e.condition1), 3)
    c2 = None if e.condition2 is None else round(float(e.condition2), 3)
    print(t, "mandatory", e.mandatory, "hole", round(float(e.hole), 3), "bounds", c1, c2)

# %% precision with and without the optional part as lam goes from 1 to 2
lams = [Fraction(10 + k, 10) for k in range(11)]
res = simulate_precision(s, holes, lams)
tasks = list(holes.entries)
ic = np.array([[r.precision for r in res if r.task == t and r.mode == "IC"] for t in tasks])
plain = np.array([[r.precision for r in res if r.task == t and r.mode == "no-IC"] for t in tasks])
print("lam  ", [float(x) for x in lams])
for t, a, b in zip(tasks, ic, plain):
    print(t, "IC   ", np.round(a, 1))
    print(t, "no-IC", np.round(b, 1))
assert (ic >= plain).all()
