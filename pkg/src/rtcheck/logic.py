"""Boolean and clock constraints, timed automata and requirement sets.

A *letter* is the set of atomic propositions that are true at one step
(``frozenset[str]``); every proposition outside the set is false, so a
letter is total over any proposition set by construction.  Public helpers
also accept a ``{name: bool}`` mapping wherever a letter is expected.
"""
from __future__ import annotations

import functools
import itertools
from dataclasses import dataclass, field, replace
from typing import Iterable, Mapping, Sequence

Letter = frozenset


class StructuralError(ValueError):
    """Malformed automaton, guard or requirement set."""


# ---------------------------------------------------------------------------
# Boolean constraints
# ---------------------------------------------------------------------------


class Expr:
    """Propositional formula over atomic propositions."""

    __slots__ = ()

    def props(self) -> frozenset[str]:
        raise NotImplementedError

    def holds(self, true_props: frozenset[str]) -> bool:
        raise NotImplementedError

    def bits(self, var_bits: Mapping[str, int], full: int) -> int:
        """Evaluate over all letters at once; see :func:`letter_set`."""
        raise NotImplementedError

    def __and__(self, other: Expr) -> Expr:
        return conj(self, other)

    def __or__(self, other: Expr) -> Expr:
        return disj(self, other)

    def __invert__(self) -> Expr:
        return neg(self)


@dataclass(frozen=True)
class Const(Expr):
    value: bool

    def props(self):
        return frozenset()

    def holds(self, true_props):
        return self.value

    def bits(self, var_bits, full):
        return full if self.value else 0

    def __str__(self):
        return "true" if self.value else "false"


@dataclass(frozen=True)
class Var(Expr):
    name: str

    def props(self):
        return frozenset((self.name,))

    def holds(self, true_props):
        return self.name in true_props

    def bits(self, var_bits, full):
        return var_bits[self.name]

    def __str__(self):
        return self.name


@dataclass(frozen=True)
class Not(Expr):
    arg: Expr

    def props(self):
        return self.arg.props()

    def holds(self, true_props):
        return not self.arg.holds(true_props)

    def bits(self, var_bits, full):
        return full ^ self.arg.bits(var_bits, full)

    def __str__(self):
        inner = str(self.arg)
        if isinstance(self.arg, (And, Or)):
            inner = f"({inner})"
        return f"!{inner}"


@dataclass(frozen=True)
class And(Expr):
    args: tuple[Expr, ...]

    def props(self):
        return frozenset().union(*(a.props() for a in self.args))

    def holds(self, true_props):
        return all(a.holds(true_props) for a in self.args)

    def bits(self, var_bits, full):
        out = full
        for a in self.args:
            out &= a.bits(var_bits, full)
        return out

    def __str__(self):
        return " & ".join(f"({a})" if isinstance(a, Or) else str(a) for a in self.args)


@dataclass(frozen=True)
class Or(Expr):
    args: tuple[Expr, ...]

    def props(self):
        return frozenset().union(*(a.props() for a in self.args))

    def holds(self, true_props):
        return any(a.holds(true_props) for a in self.args)

    def bits(self, var_bits, full):
        out = 0
        for a in self.args:
            out |= a.bits(var_bits, full)
        return out

    def __str__(self):
        return " | ".join(f"({a})" if isinstance(a, And) else str(a) for a in self.args)


TRUE = Const(True)
FALSE = Const(False)


def conj(*exprs: Expr) -> Expr:
    flat: list[Expr] = []
    for e in exprs:
        if isinstance(e, And):
            items: Iterable[Expr] = e.args
        else:
            items = (e,)
        for item in items:
            if item == FALSE:
                return FALSE
            if item != TRUE and item not in flat:
                flat.append(item)
    if not flat:
        return TRUE
    if len(flat) == 1:
        return flat[0]
    return And(tuple(flat))


def disj(*exprs: Expr) -> Expr:
    flat: list[Expr] = []
    for e in exprs:
        items: Iterable[Expr] = e.args if isinstance(e, Or) else (e,)
        for item in items:
            if item == TRUE:
                return TRUE
            if item != FALSE and item not in flat:
                flat.append(item)
    if not flat:
        return FALSE
    if len(flat) == 1:
        return flat[0]
    return Or(tuple(flat))


def neg(e: Expr) -> Expr:
    if isinstance(e, Const):
        return Const(not e.value)
    if isinstance(e, Not):
        return e.arg
    return Not(e)


def as_letter(letter) -> frozenset[str]:
    """Normalise a letter given as a set of true props or a ``{prop: bool}`` map."""
    if isinstance(letter, Mapping):
        return frozenset(k for k, v in letter.items() if v)
    return frozenset(letter)


def eval_bool(expr: Expr, letter, props: Iterable[str] | None = None) -> bool:
    """Evaluate ``expr`` on one letter.

    With a mapping letter, every proposition of ``expr`` must be a key; with
    ``props`` given, every proposition of ``expr`` must be declared there.
    """
    needed = expr.props()
    if props is not None:
        undeclared = needed - frozenset(props)
        if undeclared:
            raise StructuralError(f"undeclared proposition(s): {', '.join(sorted(undeclared))}")
    if isinstance(letter, Mapping):
        missing = needed - letter.keys()
        if missing:
            raise StructuralError(f"letter is not total: missing {', '.join(sorted(missing))}")
    return expr.holds(as_letter(letter))


def letter_bit(letter: frozenset[str], ap: Sequence[str]) -> int:
    """Index of ``letter`` among the ``2**len(ap)`` letters over ``ap``.

    The first proposition is the most significant bit, so numeric order is
    the lexicographic order on (v(ap[0]), v(ap[1]), ...) with false < true.
    """
    n = len(ap)
    idx = 0
    for i, p in enumerate(ap):
        if p in letter:
            idx |= 1 << (n - 1 - i)
    return idx


def letter_from_bit(idx: int, ap: Sequence[str]) -> frozenset[str]:
    n = len(ap)
    return frozenset(p for i, p in enumerate(ap) if idx >> (n - 1 - i) & 1)


def var_bitsets(ap: Sequence[str]) -> dict[str, int]:
    """For each proposition, the set of letter indices where it is true."""
    return _var_bitsets(tuple(ap))


@functools.lru_cache(maxsize=256)
def _var_bitsets(ap: tuple[str, ...]) -> dict[str, int]:
    n = len(ap)
    out = {}
    for i, p in enumerate(ap):
        bit = n - 1 - i
        mask = 0
        for idx in range(1 << n):
            if idx >> bit & 1:
                mask |= 1 << idx
        out[p] = mask
    return out


def letter_set(expr: Expr, ap: Sequence[str], _cache: dict | None = None) -> int:
    """Bitset (as an int) of the letters over ``ap`` satisfying ``expr``."""
    vb = var_bitsets(ap) if _cache is None else _cache
    missing = expr.props() - vb.keys()
    if missing:
        raise StructuralError(f"undeclared proposition(s): {', '.join(sorted(missing))}")
    return expr.bits(vb, (1 << (1 << len(ap))) - 1)


def bool_satisfiable(expr: Expr) -> bool:
    return letter_set(expr, sorted(expr.props())) != 0


# ---------------------------------------------------------------------------
# Clock constraints
# ---------------------------------------------------------------------------

CLOCK_OPS = ("<", "<=", "==", ">=", ">")
_OP_ALIASES = {"=": "==", "≤": "<=", "≥": ">=", "=<": "<=", "=>": ">="}


@dataclass(frozen=True)
class ClockAtom:
    clock: str
    op: str
    bound: int

    def __post_init__(self):
        op = _OP_ALIASES.get(self.op, self.op)
        if op not in CLOCK_OPS:
            raise StructuralError(f"unknown clock comparison {self.op!r}")
        object.__setattr__(self, "op", op)
        if not isinstance(self.bound, int) or self.bound < 0:
            raise StructuralError(f"clock bound must be a nonnegative integer, got {self.bound!r}")

    def holds(self, value: int) -> bool:
        b = self.bound
        op = self.op
        if op == "<":
            return value < b
        if op == "<=":
            return value <= b
        if op == "==":
            return value == b
        if op == ">=":
            return value >= b
        return value > b

    def interval(self) -> tuple[int, float]:
        b = self.bound
        return {
            "<": (0, b - 1),
            "<=": (0, b),
            "==": (b, b),
            ">=": (b, float("inf")),
            ">": (b + 1, float("inf")),
        }[self.op]

    def __str__(self):
        return f"{self.clock} {self.op} {self.bound}"


@dataclass(frozen=True)
class ClockGuard:
    """Conjunction of clock atoms; the empty conjunction is ``true``."""

    atoms: tuple[ClockAtom, ...] = ()

    def clocks(self) -> frozenset[str]:
        return frozenset(a.clock for a in self.atoms)

    def holds(self, valuation: Mapping[str, int]) -> bool:
        for a in self.atoms:
            if a.clock not in valuation:
                raise StructuralError(f"unknown clock {a.clock!r}")
            if not a.holds(valuation[a.clock]):
                return False
        return True

    def intervals(self) -> dict[str, tuple[int, float]]:
        out: dict[str, tuple[int, float]] = {}
        for a in self.atoms:
            lo, hi = a.interval()
            plo, phi = out.get(a.clock, (0, float("inf")))
            out[a.clock] = (max(lo, plo), min(hi, phi))
        return out

    def satisfiable(self) -> bool:
        return all(lo <= hi for lo, hi in self.intervals().values())

    def simplified(self) -> ClockGuard:
        """Drop duplicate atoms and atoms implied by the others."""
        atoms = list(dict.fromkeys(self.atoms))
        i = 0
        while i < len(atoms):
            rest = ClockGuard(tuple(atoms[:i] + atoms[i + 1:]))
            a = atoms[i]
            lo, hi = rest.intervals().get(a.clock, (0, float("inf")))
            alo, ahi = a.interval()
            if alo <= lo and hi <= ahi:
                atoms.pop(i)
            else:
                i += 1
        return ClockGuard(tuple(atoms))

    def __and__(self, other: ClockGuard) -> ClockGuard:
        return ClockGuard(self.atoms + other.atoms)

    def __str__(self):
        return " & ".join(map(str, self.atoms)) if self.atoms else "true"


CLOCK_TRUE = ClockGuard()


def eval_clock_guard(g: ClockGuard, valuation: Mapping[str, int]) -> bool:
    """Evaluate ``g`` at ``valuation``.

    Capped values (``M_c + 1`` for the largest constant ``M_c`` compared
    with clock ``c``) compare correctly with plain integer arithmetic since
    every bound in the automaton is at most ``M_c``.
    """
    return g.holds(valuation)


def clock_guard_satisfiable(g1: ClockGuard, g2: ClockGuard = CLOCK_TRUE) -> bool:
    return (g1 & g2).satisfiable()


# ---------------------------------------------------------------------------
# Timed automata
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Transition:
    src: object
    guard: Expr
    clock_guard: ClockGuard
    resets: frozenset[str]
    tgt: object

    def __str__(self):
        parts = [f"{self.src} -> {self.tgt}"]
        if self.guard != TRUE:
            parts.append(f"when {self.guard}")
        if self.clock_guard.atoms:
            parts.append(f"guard {self.clock_guard}")
        if self.resets:
            parts.append("reset " + ", ".join(sorted(self.resets)))
        return " ".join(parts)


@dataclass(frozen=True)
class TimedAutomaton:
    """Timed automaton over integer clocks.

    ``phases`` optionally labels states (e.g. idle/trigger/delay/action/error
    for compiled patterns); it is only used for reporting.
    """

    name: str
    states: tuple
    initial: tuple
    props: tuple[str, ...]
    clocks: tuple[str, ...]
    transitions: tuple[Transition, ...]
    accepting: frozenset
    phases: tuple[tuple[object, str], ...] = ()

    def __post_init__(self):
        states = set(self.states)
        if len(states) != len(self.states):
            raise StructuralError(f"{self.name}: duplicate state names")
        if len(set(self.props)) != len(self.props):
            raise StructuralError(f"{self.name}: duplicate propositions")
        for s in self.initial:
            if s not in states:
                raise StructuralError(f"{self.name}: initial state {s!r} is not a state")
        for s in self.accepting:
            if s not in states:
                raise StructuralError(f"{self.name}: accepting state {s!r} is not a state")
        clocks = set(self.clocks)
        props = set(self.props)
        for t in self.transitions:
            if t.src not in states or t.tgt not in states:
                raise StructuralError(f"{self.name}: transition {t} uses an unknown state")
            if not t.resets <= clocks or not t.clock_guard.clocks() <= clocks:
                raise StructuralError(f"{self.name}: transition {t} uses an undeclared clock")
            undeclared = t.guard.props() - props
            if undeclared:
                raise StructuralError(
                    f"{self.name}: undeclared proposition(s) {', '.join(sorted(undeclared))}"
                )

    def max_constants(self) -> dict[str, int]:
        out = {c: 0 for c in self.clocks}
        for t in self.transitions:
            for a in t.clock_guard.atoms:
                out[a.clock] = max(out[a.clock], a.bound)
        return out

    def phase_of(self, state) -> str | None:
        return dict(self.phases).get(state)

    def outgoing(self, state) -> list[Transition]:
        return [t for t in self.transitions if t.src == state]

    def with_props(self, props: Sequence[str]) -> TimedAutomaton:
        return replace(self, props=tuple(props))

    def rename_clocks(self, mapping: Mapping[str, str]) -> TimedAutomaton:
        def rn(c):
            return mapping.get(c, c)

        transitions = tuple(
            replace(
                t,
                clock_guard=ClockGuard(tuple(replace(a, clock=rn(a.clock)) for a in t.clock_guard.atoms)),
                resets=frozenset(rn(c) for c in t.resets),
            )
            for t in self.transitions
        )
        return replace(self, clocks=tuple(rn(c) for c in self.clocks), transitions=transitions)


@dataclass(frozen=True)
class Violation:
    kind: str  # "determinism" | "completeness"
    state: object
    detail: str
    letter: frozenset | None = None
    valuation: tuple[tuple[str, int], ...] | None = None

    def __str__(self):
        return f"{self.kind} violation at {self.state!r}: {self.detail}"


def validate_deterministic(ta: TimedAutomaton) -> list[Violation]:
    out = []
    for s in ta.states:
        ts = ta.outgoing(s)
        for t1, t2 in itertools.combinations(ts, 2):
            if t1.tgt == t2.tgt and t1.resets == t2.resets:
                continue
            if bool_satisfiable(conj(t1.guard, t2.guard)) and clock_guard_satisfiable(
                t1.clock_guard, t2.clock_guard
            ):
                out.append(Violation("determinism", s, f"overlapping guards: [{t1}] and [{t2}]"))
    return out


def capped_points(ta: TimedAutomaton, max_const: Mapping[str, int] | None = None):
    """All capped valuations: each clock ranges over ``0..M_c+1``."""
    mc = ta.max_constants() if max_const is None else dict(max_const)
    ranges = [range(mc[c] + 2) for c in ta.clocks]
    for values in itertools.product(*ranges):
        yield dict(zip(ta.clocks, values))


def validate_complete(ta: TimedAutomaton, max_const: Mapping[str, int] | None = None) -> list[Violation]:
    """One violation per (state, capped valuation, letter) without an enabled transition."""
    ap = ta.props
    vb = var_bitsets(ap)
    full = (1 << (1 << len(ap))) - 1
    sets = [letter_set(t.guard, ap, vb) for t in ta.transitions]
    out = []
    for s in ta.states:
        idx = [i for i, t in enumerate(ta.transitions) if t.src == s]
        for val in capped_points(ta, max_const):
            covered = 0
            for i in idx:
                if ta.transitions[i].clock_guard.holds(val):
                    covered |= sets[i]
            missing = full & ~covered
            while missing:
                low = missing & -missing
                bit = low.bit_length() - 1
                letter = letter_from_bit(bit, ap)
                out.append(
                    Violation(
                        "completeness",
                        s,
                        f"no transition for letter {sorted(letter)} at {val}",
                        letter=letter,
                        valuation=tuple(val.items()),
                    )
                )
                missing ^= low
    return out


def _point_guard(ta: TimedAutomaton, val: Mapping[str, int], mc: Mapping[str, int]) -> ClockGuard:
    atoms = []
    for c in ta.clocks:
        if val[c] > mc[c]:
            atoms.append(ClockAtom(c, ">", mc[c]))
        else:
            atoms.append(ClockAtom(c, "==", val[c]))
    return ClockGuard(tuple(atoms))


def complete(ta: TimedAutomaton, policy: str = "to-trap") -> TimedAutomaton:
    """Add transitions so that every (state, valuation, letter) is covered.

    ``to-trap`` routes missing combinations to a fresh non-accepting sink;
    ``to-self`` adds identity self-loops without resets.
    """
    if policy not in ("to-trap", "to-self"):
        raise ValueError(f"unknown completion policy {policy!r}")
    mc = ta.max_constants()
    points = list(capped_points(ta, mc))
    ap = ta.props
    vb = var_bitsets(ap)
    full = (1 << (1 << len(ap))) - 1
    sets = [letter_set(t.guard, ap, vb) for t in ta.transitions]

    trap = None
    if policy == "to-trap":
        trap = f"{ta.name}_trap"
        while trap in ta.states:
            trap += "_"

    added: list[Transition] = []
    for s in ta.states:
        idx = [i for i, t in enumerate(ta.transitions) if t.src == s]
        by_guard: dict[Expr, list[dict]] = {}
        for val in points:
            enabled = [i for i in idx if ta.transitions[i].clock_guard.holds(val)]
            covered = 0
            for i in enabled:
                covered |= sets[i]
            if covered == full:
                continue
            missing = neg(disj(*(ta.transitions[i].guard for i in enabled)))
            by_guard.setdefault(missing, []).append(val)
        target = trap if trap is not None else s
        for guard, vals in by_guard.items():
            if len(vals) == len(points):
                added.append(Transition(s, guard, CLOCK_TRUE, frozenset(), target))
            else:
                for val in vals:
                    added.append(Transition(s, guard, _point_guard(ta, val, mc), frozenset(), target))

    if not added:
        return ta
    states = ta.states
    phases = ta.phases
    if trap is not None:
        states = states + (trap,)
        added.append(Transition(trap, TRUE, CLOCK_TRUE, frozenset(), trap))
        if phases:
            phases = phases + ((trap, "error"),)
    return replace(ta, states=states, transitions=ta.transitions + tuple(added), phases=phases)


def classify(ta: TimedAutomaton) -> str:
    """``safety``, ``co-safety`` or ``neither`` (both-shaped automata are ``safety``)."""
    f = ta.accepting
    if not any(t.src not in f and t.tgt in f for t in ta.transitions):
        return "safety"
    if not any(t.src in f and t.tgt not in f for t in ta.transitions):
        return "co-safety"
    return "neither"


# ---------------------------------------------------------------------------
# Requirement sets
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Requirement:
    name: str
    automaton: TimedAutomaton
    source: object = None  # SupRequirement for compiled patterns

    @property
    def is_sup(self) -> bool:
        return self.source is not None


@dataclass(frozen=True)
class RequirementSet:
    """Ordered requirements over shared propositions.

    Order is significant: every "choose a requirement" step of the checking
    algorithms picks the lowest index.  Clocks that collide with a clock of
    an earlier requirement are renamed ``<requirement>.<clock>``.
    """

    props: tuple[str, ...]
    requirements: tuple[Requirement, ...] = field(default=())

    def __post_init__(self):
        if len(set(self.props)) != len(self.props):
            raise StructuralError("duplicate proposition declarations")
        for p in self.props:
            if not p:
                raise StructuralError("empty proposition name")
        names = [r.name for r in self.requirements]
        dup = {n for n in names if names.count(n) > 1}
        if dup:
            raise StructuralError(f"duplicate requirement name(s): {', '.join(sorted(dup))}")
        declared = set(self.props)
        seen_clocks: set[str] = set()
        normalised = []
        for r in self.requirements:
            ta = r.automaton
            used = set().union(*(t.guard.props() for t in ta.transitions)) | set(ta.props)
            undeclared = used - declared
            if undeclared:
                raise StructuralError(
                    f"requirement {r.name}: undeclared proposition(s) {', '.join(sorted(undeclared))}"
                )
            ta = ta.with_props(tuple(p for p in self.props if p in used))
            clash = {c: f"{r.name}.{c}" for c in ta.clocks if c in seen_clocks}
            if clash:
                ta = ta.rename_clocks(clash)
            if seen_clocks & set(ta.clocks):
                raise StructuralError(f"requirement {r.name}: cannot make clock names disjoint")
            seen_clocks |= set(ta.clocks)
            normalised.append(replace(r, automaton=ta))
        object.__setattr__(self, "requirements", tuple(normalised))

    def __len__(self):
        return len(self.requirements)

    def __iter__(self):
        return iter(self.requirements)

    def __getitem__(self, i) -> Requirement:
        return self.requirements[i]

    @property
    def names(self) -> tuple[str, ...]:
        return tuple(r.name for r in self.requirements)

    def index(self, name: str) -> int:
        try:
            return self.names.index(name)
        except ValueError:
            raise KeyError(name) from None

    def indices(self, subset) -> tuple[int, ...]:
        """Normalise a subset given by names or indices (``None`` = all)."""
        if subset is None:
            return tuple(range(len(self)))
        out = {self.index(x) if isinstance(x, str) else int(x) for x in subset}
        return tuple(sorted(out))

    def ap_of(self, subset) -> tuple[str, ...]:
        used: set[str] = set()
        for i in self.indices(subset):
            used.update(self.requirements[i].automaton.props)
        return tuple(p for p in self.props if p in used)

    def letter(self, true_props: Iterable[str]) -> frozenset[str]:
        letter = frozenset(true_props)
        unknown = letter - set(self.props)
        if unknown:
            raise StructuralError(f"undeclared proposition(s): {', '.join(sorted(unknown))}")
        return letter
