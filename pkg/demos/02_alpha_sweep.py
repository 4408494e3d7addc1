# %% [markdown]
# # How the balancing factor moves the makespan
#
# alpha = 0 reproduces the unbalanced baseline. Larger values penalise busy
# processors. The sweep keeps the best schedule over the grid, so its
# makespan can only improve on alpha = 0.

# %%
import numpy as np

from streamsched.graph import GeneratorParams, generate_random
from streamsched.network import reference_topology
from streamsched.plots import line_chart
from streamsched.scheduler import AlphaGrid, schedule_once, schedule_sweep

topo = reference_topology()
grid = AlphaGrid(0, 20, 0.1)

# %% the full curve for one 40-task graph
g = generate_random(GeneratorParams(task_count=40, seed=4), topo)
best = schedule_sweep(g, topo, "HVLB_CC_A", grid)
curve = np.array([(float(a), float(ms)) for a, ms in best.curve])
print("evaluated", len(curve), "alphas; best", float(best.alpha), float(best.makespan))
print("alpha=0 makespan", float(schedule_once(g, topo, "HSV_CC").makespan))

# the curve is piecewise constant: runs of alphas produce the same schedule
changes = np.flatnonzero(np.diff(curve[:, 1]) != 0)
print("distinct plateaus", len(changes) + 1)

# %% improvement over the baseline across 30 graphs of each size
gain = {}
for n in (10, 20, 30, 40, 50):
    ratios = []
    for seed in range(30):
        g = generate_random(GeneratorParams(task_count=n, seed=1000 * n + seed), topo)
        base = schedule_once(g, topo, "HSV_CC").makespan
        swept = schedule_sweep(g, topo, "HVLB_CC_A", AlphaGrid(0, 20, 0.5)).makespan
        ratios.append(float(swept / base))
    gain[n] = np.mean(ratios)
    print(n, "mean makespan ratio", round(gain[n], 4), "improved on", sum(r < 1 for r in ratios), "of 30")

# %% write the curve of the first graph as an SVG next to this script
svg = line_chart({"HVLB_CC_A": [tuple(p) for p in curve]}, title="makespan vs alpha", xlabel="alpha",
                 ylabel="makespan")
open("alpha_curve.svg", "w").write(svg)
