"""The request/repair running example, hand-encoded and as SUP patterns.

``R1``: every request is answered within 3 to 4 steps.
``R2``: 5 steps after a repair the system stays silent for 3 steps.
``R3``: no request during the 5 steps following a repair.
"""
from __future__ import annotations

from .logic import (
    CLOCK_TRUE,
    TRUE,
    ClockAtom,
    ClockGuard,
    Requirement,
    RequirementSet,
    TimedAutomaton,
    Transition,
    Var,
    conj,
    neg,
)
from .sup import SupRequirement, compile_sup

PROPS = ("request", "response", "repair")

request, response, repair = Var("request"), Var("response"), Var("repair")


def _g(*atoms):
    return ClockGuard(tuple(ClockAtom("c", op, n) for op, n in atoms))


def _t(src, guard, cg, tgt, reset=False):
    return Transition(src, guard, cg, frozenset({"c"}) if reset else frozenset(), tgt)


def hand_r1() -> TimedAutomaton:
    """Three-state automaton I1/D1/E1 for ``request --[3,4]--> response``."""
    return TimedAutomaton(
        name="R1",
        states=("I1", "D1", "E1"),
        initial=("I1",),
        props=("request", "response"),
        clocks=("c",),
        transitions=(
            _t("I1", neg(request), CLOCK_TRUE, "I1"),
            _t("I1", request, CLOCK_TRUE, "D1", reset=True),
            _t("D1", response, _g(("<", 3)), "D1"),
            _t("D1", neg(response), _g(("<", 4)), "D1"),
            _t("D1", response, _g((">=", 3)), "I1", reset=True),
            _t("D1", neg(response), _g((">=", 4)), "E1"),
            _t("E1", TRUE, CLOCK_TRUE, "E1"),
        ),
        accepting=frozenset({"I1", "D1"}),
    )


def hand_r2() -> TimedAutomaton:
    """Four-state automaton I2/D2/A2/E2 for ``repair --[5,5]--> !response[3,3]``.

    Exits guarded by ``c == 5`` and ``c == 3`` are written ``c >= 5`` and
    ``c >= 3``: larger values are unreachable there, and the automaton is
    then complete over every capped valuation.
    """
    return TimedAutomaton(
        name="R2",
        states=("I2", "D2", "A2", "E2"),
        initial=("I2",),
        props=("response", "repair"),
        clocks=("c",),
        transitions=(
            _t("I2", neg(repair), CLOCK_TRUE, "I2"),
            _t("I2", repair, CLOCK_TRUE, "D2", reset=True),
            _t("D2", TRUE, _g(("<", 5)), "D2"),
            _t("D2", neg(response), _g((">=", 5)), "A2", reset=True),
            _t("D2", response, _g((">=", 5)), "E2"),
            _t("A2", neg(response), _g(("<", 3)), "A2"),
            _t("A2", conj(neg(response), neg(repair)), _g((">=", 3)), "I2", reset=True),
            _t("A2", conj(neg(response), repair), _g((">=", 3)), "D2", reset=True),
            _t("A2", response, CLOCK_TRUE, "E2"),
            _t("E2", TRUE, CLOCK_TRUE, "E2"),
        ),
        accepting=frozenset({"I2", "D2", "A2"}),
    )


SUP_R1 = SupRequirement.simple(request, response, delay=(3, 4))
SUP_R2 = SupRequirement.simple(repair, neg(response), delay=(5, 5), duration=(3, 3))
SUP_R3 = SupRequirement.simple(repair, neg(request), delay=(0, 0), duration=(5, 5))


def sup_requirements(with_r3: bool = False) -> RequirementSet:
    sups = [("R1", SUP_R1), ("R2", SUP_R2)] + ([("R3", SUP_R3)] if with_r3 else [])
    return RequirementSet(PROPS, tuple(Requirement(n, compile_sup(s, n), s) for n, s in sups))


def hand_requirements(with_r3: bool = False) -> RequirementSet:
    """Hand-written R1 and R2; R3 (not drawn by hand) is always compiled."""
    reqs = [Requirement("R1", hand_r1()), Requirement("R2", hand_r2())]
    if with_r3:
        reqs.append(Requirement("R3", compile_sup(SUP_R3, "R3"), SUP_R3))
    return RequirementSet(PROPS, tuple(reqs))
