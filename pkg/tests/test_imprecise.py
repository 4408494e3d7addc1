from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from oracles import extension_is_harmless, small_graph
from streamsched.graph import Edge, Task, TaskGraph
from streamsched.imprecise import (HoleEntry, HoleReport, find_holes, latest_message_start, precision_csv,
                                   simulate_precision)
from streamsched.network import reference_topology
from streamsched.scheduler import (AlphaGrid, MessageSlot, Schedule, SchedulingFailure, TaskSlot, schedule_once,
                                   schedule_sweep)
from streamsched.validator import check_schedule

UNIT = reference_topology((1, 1, 1))


@pytest.fixture(scope="module")
def hand():
    # b's large message holds l1 until 10, so a's message waits although a ends at 5
    g = TaskGraph(
        (Task("a", 3, imprecise=True), Task("b", 2, imprecise=True), Task("c", 1), Task("d", 1, imprecise=True,
                                                                                     mandatory_fraction=0.5)),
        (Edge("b", "d", 8), Edge("a", "c", 4)),
    )
    s = Schedule(
        variant="HVLB_CC_A", alpha=0,
        tasks={
            "b": TaskSlot("b", "p1", 0, 2),
            "a": TaskSlot("a", "p1", 2, 5),
            "d": TaskSlot("d", "p2", 10, 11),
            "c": TaskSlot("c", "p2", 14, 15),
        },
        messages=[
            MessageSlot("b", "d", 8, "p1", "p2", ("l1", "l2"), (("l1", 2, 10), ("l2", 2, 10))),
            MessageSlot("a", "c", 4, "p1", "p2", ("l1", "l2"), (("l1", 10, 14), ("l2", 10, 14))),
        ],
        makespan=15, processors=("p1", "p2", "p3"),
    )
    assert check_schedule(s, g, UNIT) == []
    return g, s


def test_hand_holes(hand):
    g, s = hand
    report = find_holes(s, g, UNIT)
    assert set(report.entries) == {"a", "b", "d"}
    assert report["a"].hole == 5 and report["a"].condition2 == 5 and report["a"].condition1 is None
    assert report["b"].hole == 0  # a follows b immediately on p1
    assert report["d"].hole == 3  # exit task: next task on p2 starts at 14
    assert report["d"].mandatory == 0.5
    for t, e in report.entries.items():
        assert extension_is_harmless(s, g, UNIT, t, e.hole)
        assert not extension_is_harmless(s, g, UNIT, t, e.hole + Fraction(1, 1000))


def test_latest_message_start(hand):
    _, s = hand
    res = s.link_reservations()
    assert latest_message_start(s.messages[1], UNIT, res) == 10
    assert latest_message_start(s.messages[0], UNIT, res) == 2


def test_exit_task_on_last_slot_is_bounded_by_makespan():
    g = TaskGraph((Task("a", 2, imprecise=True), Task("b", 6)), ())
    s = schedule_once(g, UNIT, "HVLB_CC_A", exact=True)
    report = find_holes(s, g, UNIT)
    assert report["a"].hole == s.makespan - s.tasks["a"].finish


def _random_cases(count, seed=0):
    rng = np.random.default_rng(seed)
    variants = ["HSV_CC", "HVLB_CC_A", "HVLB_CC_B"]
    out = []
    while len(out) < count:
        g = small_graph(rng, int(rng.integers(2, 11)))
        v = variants[len(out) % 3]
        alpha = float(rng.choice([0, 0.5, 2, 10]))
        topo = UNIT if len(out) % 2 else reference_topology()
        try:
            s = schedule_once(g, topo, v, alpha, exact=True)
        except SchedulingFailure:
            continue
        out.append((g, s, topo))
    return out


def test_holes_match_resimulation_oracle():
    eps = Fraction(1, 10**6)
    positive = 0
    for g, s, topo in _random_cases(40, seed=3):
        assert check_schedule(s, g, topo) == []
        report = find_holes(s, g, topo, tasks=g.task_ids)
        for t, e in report.entries.items():
            assert e.hole >= 0
            assert extension_is_harmless(s, g, topo, t, e.hole), (t, e)
            assert not extension_is_harmless(s, g, topo, t, e.hole + eps), (t, e)
            positive += e.hole > 0
    assert positive > 10


@given(hole=st.fractions(0, 20), mp=st.fractions(Fraction(1, 10), 20),
       lams=st.lists(st.fractions(1, 3), min_size=2, max_size=6))
def test_precision_properties(hole, mp, lams):
    report = HoleReport({"x": HoleEntry("x", hole, None, None, mp)})
    lams = sorted(lams)
    res = simulate_precision(None, report, lams)
    ic = [r.precision for r in res if r.mode == "IC"]
    plain = [r.precision for r in res if r.mode == "no-IC"]
    for lam, a, b in zip(lams, ic, plain):
        assert 0 < b <= a <= 100
        assert b == pytest.approx(100 / float(lam), rel=1e-12)
        if lam == 1:
            assert a == b == 100
        elif hole > 0:
            assert a > b
        if hole >= (lam - 1) * mp:
            assert a == 100
        else:
            assert a == pytest.approx(float((mp + hole) / (lam * mp) * 100), rel=1e-12)
    assert ic == sorted(ic, reverse=True)
    assert plain == sorted(plain, reverse=True)


def test_precision_errors_and_csv(hand):
    g, s = hand
    report = find_holes(s, g, UNIT)
    with pytest.raises(ValueError):
        simulate_precision(s, report, [0.9])
    with pytest.raises(ValueError):
        simulate_precision(s, report, [1.0], modes=("bogus",))
    res = simulate_precision(s, report, [1.0, 2.0])
    text = precision_csv(res)
    lines = text.splitlines()
    assert lines[0] == "task,lambda,mode,precision"
    assert len(lines) == 1 + 2 * 3 * 2
    assert "a,2.00,no-IC,50.0" in lines
    assert "a,2.00,IC,100.0" in lines


def test_fixture_holes_regression(imprecise_graph, topo):
    s = schedule_sweep(imprecise_graph, topo, "HVLB_CC_B", AlphaGrid(0, 20, 0.01), rounding=True, exact=True)
    assert s.alpha == Fraction(29, 100)
    assert s.makespan == Fraction(674556, 7525)
    holes = {t: float(h) for t, h in find_holes(s, imprecise_graph, topo).holes().items()}
    assert set(holes) == {"n2", "n4", "n5", "n6"}
    assert holes["n2"] == 0 and holes["n5"] == 0
    assert holes["n4"] == pytest.approx(10.602, abs=1e-3)
    assert holes["n6"] == pytest.approx(10.642, abs=1e-3)
