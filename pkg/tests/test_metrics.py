import math
from dataclasses import replace
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from oracles import critical_path_by_paths, small_graph
from streamsched.graph import Edge, GeneratorParams, Task, TaskGraph, chain, generate_random
from streamsched.metrics import (critical_path, critical_path_length, lb, metrics_csv, report, sfr, slr, speedup)
from streamsched.network import Processor, Topology, reference_topology
from streamsched.scheduler import Schedule, TaskSlot, schedule_once

UNIT = reference_topology((1, 1, 1))


def _sched(slots, makespan, procs=("p1", "p2", "p3")):
    return Schedule("HVLB_CC_A", 0, {s.task: s for s in slots}, [], makespan, procs)


def test_chain_is_its_own_critical_path(topo):
    g = chain([2, 3, 4])
    assert critical_path(g, topo) == ("n1", "n2", "n3")
    assert critical_path_length(g, topo) == 9


def test_diamond_picks_heavy_branch():
    g = TaskGraph(
        (Task("a", 1), Task("b", 10), Task("c", 2), Task("d", 1)),
        (Edge("a", "b", 1), Edge("a", "c", 50), Edge("b", "d", 1), Edge("c", "d", 50)),
    )
    assert critical_path(g, UNIT) == ("a", "b", "d")


def test_ties_break_lexicographically():
    g = TaskGraph((Task("a", 1), Task("b", 5), Task("c", 5), Task("d", 1)),
                  (Edge("a", "c", 1), Edge("a", "b", 1), Edge("b", "d", 1), Edge("c", "d", 1)))
    assert critical_path(g, UNIT) == ("a", "b", "d")


@given(seed=st.integers(0, 10_000), n=st.integers(1, 10), rounding=st.booleans())
def test_critical_path_matches_enumeration(seed, n, rounding, topo):
    g = small_graph(np.random.default_rng(seed), n)
    path, length = critical_path_by_paths(g, topo, rounding)
    assert critical_path(g, topo, rounding=rounding) == path
    assert critical_path_length(g, topo, rounding=rounding) == length


@given(seed=st.integers(0, 1000), factor=st.fractions(Fraction(1, 10), 10))
def test_critical_path_ignores_volumes(seed, factor, topo):
    g = small_graph(np.random.default_rng(seed), 8)
    scaled = replace(g, edges=tuple(replace(e, volume=e.volume * factor) for e in g.edges))
    assert critical_path(g, topo) == critical_path(scaled, topo)
    assert critical_path_length(g, topo) == critical_path_length(scaled, topo)


def test_slr_examples(topo):
    one = TaskGraph((Task("a", 6),), ())
    s = schedule_once(one, topo, "HVLB_CC_A", exact=True)
    assert s.tasks["a"].processor == "p2" and slr(s, one, topo) == 1.0
    g = chain([10, 10])
    assert slr(_sched([TaskSlot("n1", "p2", 0, 10), TaskSlot("n2", "p2", 63, 73)], 73), g, UNIT) == 3.65
    with pytest.raises(ZeroDivisionError):
        slr(_sched([TaskSlot("a", "p1", 0, 0)], 0), TaskGraph((Task("a", 0),), ()), UNIT)


def test_speedup_examples():
    g = chain([3, 4])
    serial = _sched([TaskSlot("n1", "p1", 0, 3), TaskSlot("n2", "p1", 3, 7)], 7)
    assert speedup(serial, g, UNIT) == 1.0
    pair = TaskGraph((Task("a", 5), Task("b", 5)), ())
    split = _sched([TaskSlot("a", "p1", 0, 5), TaskSlot("b", "p2", 0, 5)], 5)
    assert speedup(split, pair, UNIT) == 2.0
    with pytest.raises(ZeroDivisionError):
        speedup(_sched([], 0), pair, UNIT)


def test_lb_examples():
    balanced = _sched([TaskSlot(f"t{i}", f"p{i}", 0, 4) for i in (1, 2, 3)], 4)
    assert lb(balanced) == 1.0
    lopsided = _sched([TaskSlot("a", "p1", 0, 4), TaskSlot("b", "p1", 4, 9)], 9)
    assert lb(lopsided) == 3.0
    with pytest.raises(ZeroDivisionError):
        lb(_sched([TaskSlot("a", "p1", 0, 0)], 0))


def test_sfr():
    assert sfr([False] * 1000) == 0
    assert sfr([True] * 780 + [False] * 220) == 78.0
    assert sfr([True] * 290 + [False] * 710) == 29.0
    with pytest.raises(ValueError):
        sfr([])


@given(st.lists(st.booleans(), min_size=1, max_size=50), st.randoms(use_true_random=False))
def test_sfr_is_order_independent(outcomes, rnd):
    shuffled = list(outcomes)
    rnd.shuffle(shuffled)
    assert sfr(outcomes) == sfr(shuffled)


@given(seed=st.integers(0, 5000), n=st.integers(2, 30), variant=st.sampled_from(["HSV_CC", "HVLB_CC_A",
                                                                                  "HVLB_CC_B"]))
def test_metric_bounds(seed, n, variant, topo):
    g = generate_random(GeneratorParams(task_count=n, seed=seed, min_entry=1, min_exit=1))
    s = schedule_once(g, topo, variant, 1.0)
    m = report(s, g, topo)
    assert m.lb >= 1 - 1e-12
    assert 0 < m.speedup <= len(topo.processors) + 1e-12
    assert m.makespan == float(s.makespan)


def test_report_recomputes_by_hand(spg, topo):
    s = schedule_once(spg, topo, "HVLB_CC_A", 0.5, rounding=True, exact=True)
    m = report(s, spg, topo)
    busy = {p: sum(x.finish - x.start for x in s.tasks.values() if x.processor == p) for p in topo.processor_ids}
    avg = sum(busy.values()) / 3
    assert m.lb == pytest.approx(float(s.makespan / avg), rel=1e-12)
    assert m.avg == pytest.approx(float(avg), rel=1e-12)
    seq = min(sum(math.floor(Fraction(t.weight) / Fraction(topo.rate(p)) + Fraction(1, 2)) for t in spg.tasks)
              for p in topo.processor_ids)
    assert m.speedup == pytest.approx(float(seq / s.makespan), rel=1e-12)
    assert m.slr == pytest.approx(float(s.makespan / critical_path_length(spg, topo, rounding=True)), rel=1e-12)


def test_single_processor_metrics():
    t = Topology((Processor("p1", 1),), (), ())
    g = chain([1, 2])
    s = schedule_once(g, t, "HSV_CC")
    m = report(s, g, t)
    assert (m.slr, m.speedup, m.lb) == (1.0, 1.0, 1.0)


def test_metrics_csv():
    text = metrics_csv([("g1", "HSV_CC", 0, Fraction(73), 3.65, 1.5, Fraction(3, 2))])
    assert text == "graph,variant,alpha,makespan,slr,speedup,lb\ng1,HSV_CC,0.0,73.0,3.65,1.5,1.5\n"
    assert metrics_csv([], header=False) == ""
