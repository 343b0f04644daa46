import itertools
import random

import numpy as np
import pytest

from rtcheck import checker as C
from rtcheck.demo import SUP_R1, SUP_R2, SUP_R3, hand_r1, hand_r2
from rtcheck.logic import (
    FALSE,
    TRUE,
    CLOCK_TRUE,
    StructuralError,
    TimedAutomaton,
    Transition,
    Var,
    classify,
    neg,
    validate_complete,
    validate_deterministic,
)
from rtcheck.randgen import random_sup
from rtcheck.semantics import build_graph, run_trace
from rtcheck.sup import SupRequirement, compile_sup

from oracles import all_letters, point_sup_failure

p, q = Var("p"), Var("q")


def test_window_invariants():
    with pytest.raises(StructuralError):
        SupRequirement(p, p, p, q, q, q, tmin=3, tmax=2)
    with pytest.raises(StructuralError):
        SupRequirement(p, p, p, q, q, q, lmin=-1)


def test_r1_compiles_to_three_states():
    ta = compile_sup(SUP_R1, "R1")
    assert ta.states == ("idle", "delay", "error")
    assert ta.accepting == frozenset({"idle", "delay"})
    assert classify(ta) == "safety"
    assert validate_deterministic(ta) == [] and validate_complete(ta) == []


def _same_acceptance(a: TimedAutomaton, b: TimedAutomaton) -> bool:
    """Product-based equivalence: no reachable pair disagrees on acceptance."""
    g = build_graph([a, b])
    fa = g.factor_accepting(0)
    fb = g.factor_accepting(1)
    return bool(np.all(fa == fb))


def test_r1_equivalent_to_hand_encoding():
    assert _same_acceptance(compile_sup(SUP_R1, "R1"), hand_r1().rename_clocks({"c": "h"}))


def test_r1_equivalent_to_hand_encoding_by_enumeration():
    a, b = compile_sup(SUP_R1, "R1"), hand_r1()
    letters = all_letters(("request", "response"))
    for n in range(7):
        for trace in itertools.product(letters, repeat=n):
            ra, rb = run_trace(a, trace), run_trace(b, trace)
            assert [c.state in a.accepting for c in ra] == [c.state in b.accepting for c in rb]


def test_r1_enters_error_without_response():
    ta = compile_sup(SUP_R1, "R1")
    run = run_trace(ta, [{"request"}, set(), set(), set(), set()])
    assert [c.state for c in run] == ["idle", "delay", "delay", "delay", "delay", "error"]
    assert run[4]["c"] == 4


def test_r2_response_at_delay_end_is_an_error():
    ta = compile_sup(SUP_R2, "R2")
    run = run_trace(ta, [{"repair"}, set(), set(), set(), set(), {"response"}])
    assert run[-2].state == "delay" and run[-2]["c"] == 5
    assert run[-1].state == "error"


def test_r2_matches_hand_encoding_without_rearming():
    # the drawn automaton re-arms on a repair that completes the action phase;
    # the compiled one ignores it, so they agree on every trace without such a repair
    a, b = compile_sup(SUP_R2, "R2"), hand_r2()
    letters = all_letters(("response", "repair"))
    rng = random.Random(5)
    for _ in range(400):
        trace = [rng.choice(letters) for _ in range(rng.randint(0, 14))]
        ra, rb = run_trace(a, trace), run_trace(b, trace)
        rearm = any(
            rb[i].state == "A2" and rb[i + 1].state == "D2" for i in range(len(trace))
        )
        if rearm:
            continue
        assert [c.state in a.accepting for c in ra] == [c.state in b.accepting for c in rb]


def test_false_trigger_never_leaves_idle():
    ta = compile_sup(SupRequirement.simple(FALSE, q), "R")
    assert ta.states == ("idle",)
    g = build_graph(ta)
    assert not C.error_set(g, 0).any()


def test_r3_blocks_requests_after_repair():
    ta = compile_sup(SUP_R3, "R3")
    assert run_trace(ta, [{"repair"}, set(), set(), {"request"}])[-1].state == "error"
    assert run_trace(ta, [{"repair"}] + [set()] * 5 + [{"request"}])[-1].state == "idle"


@pytest.mark.parametrize("lo, hi", [(0, 0), (0, 1), (1, 1), (0, 2), (2, 3), (3, 4)])
def test_point_pattern_matches_window_oracle(lo, hi):
    ta = compile_sup(SupRequirement.simple(p, q, delay=(lo, hi)), "R")
    g = build_graph(ta)
    err = C.error_set(g, 0)
    letters = all_letters(("p", "q"))
    for n in range(hi + 3):
        for trace in itertools.product(letters, repeat=n):
            node = g.run(trace)[-1]
            expected = point_sup_failure(trace, lambda l: "p" in l, lambda l: "q" in l, lo, hi)
            assert bool(err[node]) == (expected is not None), trace


def test_compiled_random_sups_are_valid_safety_automata():
    rng = random.Random(11)
    props = ("a", "b", "c")
    for i in range(60):
        r = random_sup(rng, props, timed=i % 3 != 0)
        ta = compile_sup(r, "R")
        assert validate_deterministic(ta) == []
        assert validate_complete(ta) == []
        assert classify(ta) == "safety"
        g = build_graph(ta)
        # in a safety automaton the error set is exactly the non-accepting set
        assert np.array_equal(C.error_set(g, 0), (g.factor_accepting(0) == 0).astype(np.uint8))


def test_only_error_is_rejecting_and_it_is_a_trap():
    for r in (SUP_R1, SUP_R2, SUP_R3):
        ta = compile_sup(r, "R")
        assert set(ta.states) - ta.accepting == {"error"}
        assert {t.tgt for t in ta.transitions if t.src == "error"} == {"error"}


def test_classify_examples():
    assert classify(hand_r1()) == "safety"
    all_acc = TimedAutomaton("A", ("s", "t"), ("s",), (), (), (
        Transition("s", TRUE, CLOCK_TRUE, frozenset(), "t"),
        Transition("t", TRUE, CLOCK_TRUE, frozenset(), "s"),
    ), frozenset({"s", "t"}))
    assert classify(all_acc) == "safety"
    both_ways = TimedAutomaton("B", ("s", "t"), ("s",), (), (), (
        Transition("s", TRUE, CLOCK_TRUE, frozenset(), "t"),
        Transition("t", TRUE, CLOCK_TRUE, frozenset(), "s"),
    ), frozenset({"s"}))
    assert classify(both_ways) == "neither"
    cosafety = TimedAutomaton("C", ("s", "t"), ("s",), ("a",), (), (
        Transition("s", neg(Var("a")), CLOCK_TRUE, frozenset(), "s"),
        Transition("s", Var("a"), CLOCK_TRUE, frozenset(), "t"),
        Transition("t", TRUE, CLOCK_TRUE, frozenset(), "t"),
    ), frozenset({"t"}))
    assert classify(cosafety) == "co-safety"


def test_overlap_merging_only_for_point_patterns():
    assert SUP_R3.merges_overlaps
    assert not SUP_R1.merges_overlaps
    assert not SUP_R2.merges_overlaps
