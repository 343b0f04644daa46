"""Compilation of SUP requirements into complete deterministic safety automata.

The automaton has one clock ``c`` and the phases idle, trigger, delay,
action and error.  The clock always measures the number of steps since the
current phase started; a phase that starts on a letter resets it, so on the
next letter ``c == 1``.

Each step is written once, as ordinary Python (:func:`_step`), against an
``ask`` oracle that answers questions about the current letter and clock.
:func:`_decision_paths` enumerates every answer sequence, which yields
mutually exclusive and jointly exhaustive guards by construction.
"""
from __future__ import annotations

from dataclasses import dataclass

from .logic import (
    CLOCK_TRUE,
    ClockAtom,
    ClockGuard,
    Expr,
    StructuralError,
    TimedAutomaton,
    Transition,
    bool_satisfiable,
    conj,
    disj,
    neg,
)

IDLE, TRIGGER, DELAY, ACTION, ERROR = "idle", "trigger", "delay", "action", "error"
PHASES = (IDLE, TRIGGER, DELAY, ACTION, ERROR)
CLOCK = "c"


@dataclass(frozen=True)
class SupRequirement:
    """``(tse, tc, tee)[tmin, tmax] --[lmin, lmax]--> (ase, ac, aee)[amin, amax]``."""

    tse: Expr
    tc: Expr
    tee: Expr
    ase: Expr
    ac: Expr
    aee: Expr
    tmin: int = 0
    tmax: int = 0
    lmin: int = 0
    lmax: int = 0
    amin: int = 0
    amax: int = 0

    def __post_init__(self):
        for lo, hi, what in (
            (self.tmin, self.tmax, "trigger"),
            (self.lmin, self.lmax, "delay"),
            (self.amin, self.amax, "action"),
        ):
            if not (isinstance(lo, int) and isinstance(hi, int)) or lo < 0 or hi < 0:
                raise StructuralError(f"{what} bounds must be nonnegative integers")
            if lo > hi:
                raise StructuralError(f"{what} window [{lo}, {hi}] is empty")

    @classmethod
    def simple(cls, p: Expr, q: Expr, delay=(0, 1), duration=(0, 0)) -> SupRequirement:
        """``p --[l, u]--> q[a, b]``: point trigger on ``p``, ``q`` held over ``[a, b]``."""
        return cls(p, p, p, q, q, q, 0, 0, delay[0], delay[1], duration[0], duration[1])

    def props(self) -> frozenset[str]:
        return frozenset().union(
            *(e.props() for e in (self.tse, self.tc, self.tee, self.ase, self.ac, self.aee))
        )

    @property
    def merges_overlaps(self) -> bool:
        """Whether overlapping instances collapse into one action window.

        With a point trigger, no delay and ``AC == AEE``, an instance started
        during another's action phase subsumes the remaining obligation of the
        older one, so restarting the window is exact.
        """
        return self.tmax == 0 and self.lmax == 0 and self.ac == self.aee

    def __str__(self):
        return (
            f"({self.tse}, {self.tc}, {self.tee})[{self.tmin}, {self.tmax}]"
            f" --[{self.lmin}, {self.lmax}]--> "
            f"({self.ase}, {self.ac}, {self.aee})[{self.amin}, {self.amax}]"
        )


class _Clock:
    """Symbolic phase duration: the value of clock ``c``."""


_C = _Clock()


def _step(r: SupRequirement, phase: str, ask):
    """Successor phase and whether the clock is reset."""

    def ge(d, n):
        if d is _C:
            return n == 0 or ask(("c", ">=", n))
        return d >= n

    def le(d, n):
        if d is _C:
            return ask(("c", "<=", n))
        return d <= n

    def trigger_at(d):
        if not ask(("e", "tc")):
            return IDLE, True
        if ge(d, r.tmin) and le(d, r.tmax) and ask(("e", "tee")):
            return delay_at(0)
        if ge(d, r.tmax):
            return IDLE, True
        return TRIGGER, d == 0

    def delay_at(d):
        if ge(d, r.lmin) and le(d, r.lmax) and ask(("e", "ase")):
            return action_at(0)
        if ge(d, r.lmax):
            return ERROR, True
        return DELAY, d == 0

    def action_at(d):
        if not ask(("e", "ac")):
            return ERROR, True
        if ge(d, r.amin) and le(d, r.amax) and ask(("e", "aee")):
            return IDLE, True
        if ge(d, r.amax):
            return ERROR, True
        return ACTION, d == 0

    if phase == ERROR:
        return ERROR, True
    if phase == IDLE:
        if ask(("e", "tse")):
            return trigger_at(0)
        return IDLE, True
    if phase == TRIGGER:
        return trigger_at(_C)
    if phase == DELAY:
        return delay_at(_C)
    if r.merges_overlaps and ask(("e", "tse")) and ask(("e", "tc")) and ask(("e", "tee")):
        return delay_at(0)
    return action_at(_C)


def _decision_paths(fn):
    """Run ``fn(ask)`` under every sequence of answers; yield (answers, result)."""
    pending = [()]
    while pending:
        forced = pending.pop()
        trail: list = []

        def ask(q, forced=forced, trail=trail):
            k = len(trail)
            if k < len(forced):
                ans = forced[k]
            else:
                ans = True
                pending.append(tuple(a for _, a in trail) + (False,))
            trail.append((q, ans))
            return ans

        result = fn(ask)
        yield tuple(trail), result


def _path_guards(r: SupRequirement, trail) -> tuple[Expr, ClockGuard] | None:
    exprs = []
    atoms = []
    for (kind, *q), ans in trail:
        if kind == "e":
            e = getattr(r, q[0])
            exprs.append(e if ans else neg(e))
        else:
            op, n = q
            if op == ">=":
                atoms.append(ClockAtom(CLOCK, ">=" if ans else "<", n))
            else:
                atoms.append(ClockAtom(CLOCK, "<=" if ans else ">", n))
    guard = conj(*exprs)
    cg = ClockGuard(tuple(atoms))
    if not cg.satisfiable() or not bool_satisfiable(guard):
        return None
    return guard, cg.simplified()


def compile_sup(r: SupRequirement, name: str = "R") -> TimedAutomaton:
    """Complete deterministic safety automaton for ``r``.

    Semantics: a TSE letter starts a trigger; the trigger is realized when
    TC has held throughout and TEE occurs with duration in [tmin, tmax],
    otherwise it is aborted (back to idle, never an error).  ASE must then
    occur within [lmin, lmax] steps, after which AC must hold until AEE
    occurs with duration in [amin, amax]; any miss enters the error trap.
    While an instance is active new TSE letters are ignored, except for
    patterns where overlapping instances merge (see
    :attr:`SupRequirement.merges_overlaps`).  A letter that completes an
    instance does not start a new one.
    """
    transitions: dict[tuple, dict] = {}
    reachable = [IDLE]
    seen = {IDLE}
    while reachable:
        phase = reachable.pop()
        grouped: dict[tuple, list[Expr]] = {}
        for trail, (tgt, reset) in _decision_paths(lambda ask: _step(r, phase, ask)):
            g = _path_guards(r, trail)
            if g is None:
                continue
            guard, cg = g
            if phase in (IDLE, ERROR):
                cg = CLOCK_TRUE
            grouped.setdefault((tgt, reset, cg), []).append(guard)
            if tgt not in seen:
                seen.add(tgt)
                reachable.append(tgt)
        transitions[phase] = grouped

    states = tuple(p for p in PHASES if p in seen)
    ts = []
    for phase in states:
        for (tgt, reset, cg), guards in transitions[phase].items():
            ts.append(
                Transition(
                    phase,
                    disj(*guards),
                    cg,
                    frozenset((CLOCK,)) if reset else frozenset(),
                    tgt,
                )
            )
    props = tuple(sorted(r.props()))
    return TimedAutomaton(
        name=name,
        states=states,
        initial=(IDLE,),
        props=props,
        clocks=(CLOCK,),
        transitions=tuple(ts),
        accepting=frozenset(s for s in states if s != ERROR),
        phases=tuple((s, s) for s in states),
    )
