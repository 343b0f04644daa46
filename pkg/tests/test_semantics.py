import itertools
import random

import numpy as np
import pytest

from rtcheck.demo import hand_r1, hand_r2, hand_requirements, sup_requirements
from rtcheck.logic import CLOCK_TRUE, TRUE, ClockAtom, ClockGuard, StructuralError, TimedAutomaton, Transition, Var, neg
from rtcheck.randgen import random_sup
from rtcheck.semantics import (
    AmbiguityError,
    CompletenessError,
    Configuration,
    DeterminismError,
    ResourceLimitError,
    build_graph,
    initial_configs,
    product,
    reach_k,
    run_trace,
    successor,
)
from rtcheck.sup import compile_sup

from oracles import NaiveGraph, all_letters, cap, run_uncapped, step_uncapped

EXAMPLE_TRACE = [{"repair"}, set(), set(), {"request"}]


def r1r2():
    return hand_r1(), hand_r2().rename_clocks({"c": "c2"})


def test_initial_configs():
    assert initial_configs(hand_r1()) == [Configuration("I1", ("c",), (0,))]
    a, b = r1r2()
    assert initial_configs([a, b]) == [Configuration(("I1", "I2"), ("c", "c2"), (0, 0))]
    two = TimedAutomaton("T", ("s", "t"), ("s", "t"), (), (), (
        Transition("s", TRUE, CLOCK_TRUE, frozenset(), "s"),
        Transition("t", TRUE, CLOCK_TRUE, frozenset(), "t"),
    ), frozenset({"s", "t"}))
    assert len(initial_configs(two)) == 2


def test_successor_examples():
    a, b = r1r2()
    start = Configuration(("I1", "I2"), ("c", "c2"), (0, 0))
    assert successor([a, b], start, {"repair"}) == Configuration(("I1", "D2"), ("c", "c2"), (1, 1))
    mid = Configuration(("I1", "D2"), ("c", "c2"), (3, 3))
    assert successor([a, b], mid, {"request"}) == Configuration(("D1", "D2"), ("c", "c2"), (1, 4))
    ra = TimedAutomaton("A", ("s",), ("s",), (), ("x", "y"), (
        Transition("s", TRUE, CLOCK_TRUE, frozenset({"x", "y"}), "s"),
    ), frozenset({"s"}))
    assert successor(ra, Configuration("s", ("x", "y"), (0, 0)), set()).values == (1, 1)


def test_successor_reports_incomplete_and_nondeterministic():
    x = Var("a")
    gap = TimedAutomaton("G", ("s",), ("s",), ("a",), (), (Transition("s", x, CLOCK_TRUE, frozenset(), "s"),), frozenset())
    with pytest.raises(CompletenessError):
        successor(gap, Configuration("s", (), ()), set())
    clash = TimedAutomaton("D", ("s", "t"), ("s",), (), (), (
        Transition("s", TRUE, CLOCK_TRUE, frozenset(), "s"),
        Transition("s", TRUE, CLOCK_TRUE, frozenset(), "t"),
    ), frozenset())
    with pytest.raises(DeterminismError):
        successor(clash, Configuration("s", (), ()), set())
    with pytest.raises(DeterminismError):
        build_graph(clash)
    with pytest.raises(CompletenessError):
        build_graph(gap)


def test_run_trace_examples():
    a, b = r1r2()
    assert run_trace([a, b], EXAMPLE_TRACE)[-1] == Configuration(("D1", "D2"), ("c", "c2"), (1, 4))
    assert run_trace(a, []) == initial_configs(a)
    assert run_trace(a, [{"request"}])[-1] == Configuration("D1", ("c",), (1,))


def test_run_trace_ambiguous_initial():
    two = TimedAutomaton("T", ("s", "t"), ("s", "t"), (), (), (
        Transition("s", TRUE, CLOCK_TRUE, frozenset(), "s"),
        Transition("t", TRUE, CLOCK_TRUE, frozenset(), "t"),
    ), frozenset({"s", "t"}))
    with pytest.raises(AmbiguityError):
        run_trace(two, [])
    with pytest.raises(AmbiguityError):
        build_graph(two).run([])


def test_product_structure():
    a, b = r1r2()
    ab = product(a, b)
    assert len(ab.states) == 12
    assert ab.accepting == frozenset(itertools.product(a.accepting, b.accepting))
    g = build_graph(ab)
    assert g.find(("D1", "D2"), c=1, c2=4) is not None
    with pytest.raises(StructuralError):
        product(a, a)


def test_syntactic_product_agrees_with_on_the_fly_product():
    a, b = r1r2()
    g1 = build_graph(product(a, b), ("request", "response", "repair"))
    g2 = build_graph([a, b], ("request", "response", "repair"))
    assert {g1.configuration(u) for u in range(g1.n)} == {g2.configuration(u) for u in range(g2.n)}
    for u in range(g2.n):
        cfg = g2.configuration(u)
        for letter in all_letters(g2.ap):
            assert g1.configuration(g1.step(g1.node_of(cfg), letter)) == g2.configuration(g2.step(u, letter))


def _canonical(g):
    """Reachable graph as a set of (config, letter, config) with flattened states."""
    def flat(s):
        if isinstance(s, tuple):
            return tuple(x for part in s for x in flat(part))
        return (s,)

    out = set()
    for u in range(g.n):
        cu = g.configuration(u)
        for e, letters, v in g.edges(u):
            cv = g.configuration(v)
            out.add(((flat(cu.state), cu.values), letters, (flat(cv.state), cv.values)))
    return out


def test_product_identity_element():
    a = hand_r1()
    unit = TimedAutomaton("U", ("u",), ("u",), (), (), (Transition("u", TRUE, CLOCK_TRUE, frozenset(), "u"),), frozenset({"u"}))
    ga = build_graph(a)
    gu = build_graph(product(a, unit), a.props)
    assert ga.n == gu.n
    strip = {((s[:1], v), l, (t[:1], w)) for (s, v), l, (t, w) in _canonical(gu)}
    assert strip == _canonical(ga)


def test_product_associativity():
    rng = random.Random(3)
    ap = ("a", "b")
    autos = []
    for k in range(3):
        transitions = []
        clock = f"x{k}"
        early = ClockGuard((ClockAtom(clock, "<", 2),))
        late = ClockGuard((ClockAtom(clock, ">=", 2),))
        for s in ("s0", "s1"):
            x = Var(rng.choice(ap))
            transitions.append(Transition(s, x, early, frozenset({clock}), rng.choice(("s0", "s1"))))
            transitions.append(Transition(s, x, late, frozenset(), rng.choice(("s0", "s1"))))
            transitions.append(Transition(s, neg(x), CLOCK_TRUE, frozenset(), rng.choice(("s0", "s1"))))
        autos.append(TimedAutomaton(f"A{k}", ("s0", "s1"), ("s0",), ap, (f"x{k}",), tuple(transitions), frozenset({"s0"})))
    a, b, c = autos
    left = build_graph(product(product(a, b), c), ap)
    right = build_graph(product(a, product(b, c)), ap)
    assert _canonical(left) == _canonical(right)


def test_r1_reachable_nodes_are_capped():
    g = build_graph(hand_r1())
    nodes = {(g.configuration(u).state, g.configuration(u)["c"]) for u in range(g.n)}
    allowed = {(s, v) for s in ("I1", "D1", "E1") for v in range(0, 6)}
    assert nodes <= allowed
    # uncapped exploration to depth 12, quotiented by capping, finds the same set
    seen = set()
    letters = all_letters(("request", "response"))
    frontier = {("I1", (0,))}
    for _ in range(12):
        nxt = set()
        for s, v in frontier:
            seen.add((s, cap(hand_r1(), v)[0]))
            for letter in letters:
                nxt.add(step_uncapped(hand_r1(), s, v, letter))
        frontier = nxt
    assert nodes == seen


def test_clockless_graph_has_one_node_per_reachable_state():
    x = Var("a")
    ta = TimedAutomaton("N", ("s", "t", "u"), ("s",), ("a",), (), (
        Transition("s", x, CLOCK_TRUE, frozenset(), "t"),
        Transition("s", neg(x), CLOCK_TRUE, frozenset(), "s"),
        Transition("t", TRUE, CLOCK_TRUE, frozenset(), "t"),
        Transition("u", TRUE, CLOCK_TRUE, frozenset(), "u"),
    ), frozenset({"s", "t", "u"}))
    g = build_graph(ta)
    assert {g.configuration(u).state for u in range(g.n)} == {"s", "t"}


@pytest.mark.parametrize("make", [hand_requirements, sup_requirements])
def test_graph_matches_naive_enumeration(make):
    rs = make()
    factors = [r.automaton for r in rs]
    g = build_graph(factors, rs.props)
    naive = NaiveGraph(factors, rs.props)
    assert g.n == len(naive)
    states = {tuple((s, v) for s, v in zip(*_split(g, u))) for u in range(g.n)}
    assert states == set(naive.nodes)


def _split(g, u):
    states, vals = [], []
    for f, lg in enumerate(g.locals):
        s, v = lg.configs[g.local_ids[u, f]]
        states.append(s)
        vals.append(v)
    return states, vals


def test_graph_is_total_and_deterministic():
    rs = sup_requirements(with_r3=True)
    g = build_graph([r.automaton for r in rs], rs.props)
    full = (1 << (1 << len(g.ap))) - 1
    for u in range(g.n):
        seen = 0
        for _, letters, _ in g.edges(u):
            assert seen & letters == 0
            seen |= letters
        assert seen == full


def test_reach_k():
    rs = hand_requirements()
    g = build_graph([r.automaton for r in rs], rs.props)
    r0 = reach_k(g, 0)
    assert set(np.flatnonzero(r0)) == set(g.initial.tolist())
    prev = r0
    for k in range(1, 40):
        cur = reach_k(g, k)
        assert np.all(cur >= prev)
        prev = cur
    assert prev.all()
    u = g.find(("D1", "D2"), c=1, **{"R2.c": 4})
    assert reach_k(g, 4)[u] and not reach_k(g, 3)[u]


def test_resource_limit():
    rs = sup_requirements()
    with pytest.raises(ResourceLimitError) as e:
        build_graph([r.automaton for r in rs], rs.props, max_nodes=10)
    assert e.value.limit == 10


def test_depth_bounded_graph_marks_frontier():
    rs = sup_requirements()
    g = build_graph([r.automaton for r in rs], rs.props, max_depth=3)
    assert not g.complete
    assert np.all((g.depth < 3) == (g.expanded == 1))
    assert g.depth.max() == 3


def test_capping_soundness_on_random_traces():
    rng = random.Random(17)
    rs = hand_requirements(with_r3=True)
    letters = all_letters(rs.props)
    for _ in range(200):
        trace = [rng.choice(letters) for _ in range(rng.randint(0, 12))]
        for r in rs:
            ta = r.automaton
            uncapped = run_uncapped(ta, trace)
            capped = run_trace(ta, trace)
            assert [c.state for c in capped] == [s for s, _ in uncapped]
            assert [c.values for c in capped] == [cap(ta, v) for _, v in uncapped]
            # every guard atom has the same truth value on capped and uncapped clocks
            for (s, v), c in zip(uncapped, capped):
                for t in ta.transitions:
                    for a in t.clock_guard.atoms:
                        i = ta.clocks.index(a.clock)
                        assert a.holds(c.values[i]) == a.holds(v[i])


def test_failing_prefix_fails_superset():
    rng = random.Random(23)
    props = ("a", "b", "c")
    reqs = [compile_sup(random_sup(rng, props), f"R{i}") for i in range(4)]
    reqs = [r.rename_clocks({"c": f"c{i}"}) for i, r in enumerate(reqs)]
    letters = all_letters(props)
    for _ in range(200):
        trace = [rng.choice(letters) for _ in range(rng.randint(0, 10))]
        small = run_trace(reqs[:2], trace)[-1]
        big = run_trace(reqs, trace)[-1]
        small_fails = any(s == "error" for s in small.state)
        big_fails = any(s == "error" for s in big.state)
        assert not small_fails or big_fails
