"""Finite discrete-time semantics of complete deterministic timed automata.

A step reads one letter, fires the unique enabled transition, applies its
resets and lets one time unit elapse.  Clock ``c`` is capped at
``M_c + 1`` (``M_c`` = largest constant compared with ``c``), which stands
for every value above ``M_c``; guards cannot tell those values apart.

Graphs of products are built from one :class:`LocalGraph` per factor: a
product node is a tuple of local configurations and its out-edges are the
non-empty intersections of the factors' letter classes.  Edges carry a
letter *class* (a bitset over the letters of the graph's propositions)
rather than one edge per letter.
"""
from __future__ import annotations

import functools
import itertools
from collections import deque
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .logic import (
    ClockGuard,
    StructuralError,
    TimedAutomaton,
    Transition,
    as_letter,
    bool_satisfiable,
    conj,
    letter_bit,
    letter_from_bit,
    letter_set,
    var_bitsets,
)

DEFAULT_MAX_NODES = 5_000_000


class SemanticError(RuntimeError):
    """The automaton is not complete or not deterministic at some configuration."""


class CompletenessError(SemanticError):
    pass


class DeterminismError(SemanticError):
    pass


class AmbiguityError(SemanticError):
    """A run was requested from more than one initial configuration."""


class ResourceLimitError(RuntimeError):
    def __init__(self, count: int, limit: int, what: str = ""):
        self.count = count
        self.limit = limit
        self.what = what
        super().__init__(f"node limit exceeded{' for ' + what if what else ''}: {count} > {limit}")


@dataclass(frozen=True)
class Configuration:
    """Automaton state (a tuple of states for products) plus clock values."""

    state: object
    clocks: tuple[str, ...]
    values: tuple[int, ...]

    @property
    def valuation(self) -> dict[str, int]:
        return dict(zip(self.clocks, self.values))

    def __getitem__(self, clock: str) -> int:
        return self.values[self.clocks.index(clock)]

    def __str__(self):
        vals = ", ".join(f"{c}={v}" for c, v in zip(self.clocks, self.values))
        return f"({self.state}{', ' + vals if vals else ''})"


Trace = tuple  # tuple of letters (frozenset[str])


def make_trace(letters: Iterable) -> Trace:
    return tuple(as_letter(x) for x in letters)


# ---------------------------------------------------------------------------
# Single automaton
# ---------------------------------------------------------------------------


def _caps(ta: TimedAutomaton) -> tuple[int, ...]:
    mc = ta.max_constants()
    return tuple(mc[c] + 1 for c in ta.clocks)


def _advance(values: Sequence[int], reset_mask: Sequence[bool], caps: Sequence[int]) -> tuple[int, ...]:
    return tuple(min((0 if r else v) + 1, cap) for v, r, cap in zip(values, reset_mask, caps))


def initial_configs(ta) -> list[Configuration]:
    """Initial configurations of an automaton or of a product of factors."""
    if isinstance(ta, TimedAutomaton):
        zeros = (0,) * len(ta.clocks)
        return [Configuration(s, ta.clocks, zeros) for s in ta.initial]
    factors = list(ta)
    clocks = tuple(c for f in factors for c in f.clocks)
    zeros = (0,) * len(clocks)
    return [
        Configuration(tuple(states), clocks, zeros)
        for states in itertools.product(*(f.initial for f in factors))
    ]


def enabled(ta: TimedAutomaton, cfg: Configuration, letter) -> list[Transition]:
    letter = as_letter(letter)
    val = cfg.valuation
    return [
        t
        for t in ta.transitions
        if t.src == cfg.state and t.guard.holds(letter) and t.clock_guard.holds(val)
    ]


def successor(ta, cfg: Configuration, letter) -> Configuration:
    """Unique successor of ``cfg`` on ``letter`` (reset, then one time unit)."""
    if not isinstance(ta, TimedAutomaton):
        factors = list(ta)
        states, values = [], []
        pos = 0
        for f in factors:
            k = len(f.clocks)
            local = Configuration(cfg.state[len(states)], f.clocks, cfg.values[pos:pos + k])
            nxt = successor(f, local, letter)
            states.append(nxt.state)
            values.extend(nxt.values)
            pos += k
        return Configuration(tuple(states), cfg.clocks, tuple(values))
    ts = enabled(ta, cfg, letter)
    if not ts:
        raise CompletenessError(f"{ta.name}: no transition enabled at {cfg} on {sorted(as_letter(letter))}")
    first = ts[0]
    for t in ts[1:]:
        if t.tgt != first.tgt or t.resets != first.resets:
            raise DeterminismError(f"{ta.name}: transitions [{first}] and [{t}] both enabled at {cfg}")
    mask = [c in first.resets for c in ta.clocks]
    return Configuration(first.tgt, ta.clocks, _advance(cfg.values, mask, _caps(ta)))


def run_trace(ta, trace: Iterable) -> list[Configuration]:
    """Configurations visited by ``trace``; ``len(trace) + 1`` entries."""
    inits = initial_configs(ta)
    if len(inits) != 1:
        raise AmbiguityError(f"run requires a unique initial configuration, found {len(inits)}")
    out = [inits[0]]
    for letter in trace:
        out.append(successor(ta, out[-1], letter))
    return out


def product(a: TimedAutomaton, b: TimedAutomaton) -> TimedAutomaton:
    """Synchronous product: paired states, conjoined guards, united resets."""
    overlap = set(a.clocks) & set(b.clocks)
    if overlap:
        raise StructuralError(f"product of automata sharing clocks: {', '.join(sorted(overlap))}")
    props = a.props + tuple(p for p in b.props if p not in a.props)
    transitions = []
    for t1 in a.transitions:
        for t2 in b.transitions:
            guard = conj(t1.guard, t2.guard)
            cg = t1.clock_guard & t2.clock_guard
            if not cg.satisfiable() or not bool_satisfiable(guard):
                continue
            transitions.append(
                Transition((t1.src, t2.src), guard, cg, t1.resets | t2.resets, (t1.tgt, t2.tgt))
            )
    states = tuple((s1, s2) for s1 in a.states for s2 in b.states)
    return TimedAutomaton(
        name=f"{a.name}*{b.name}",
        states=states,
        initial=tuple((s1, s2) for s1 in a.initial for s2 in b.initial),
        props=props,
        clocks=a.clocks + b.clocks,
        transitions=tuple(transitions),
        accepting=frozenset((s1, s2) for s1 in a.accepting for s2 in b.accepting),
    )


# ---------------------------------------------------------------------------
# Local graphs
# ---------------------------------------------------------------------------


def _csr(edges: list[list[tuple[int, int]]]):
    n = len(edges)
    ptr = np.zeros(n + 1, dtype=np.int64)
    for u, es in enumerate(edges):
        ptr[u + 1] = ptr[u] + len(es)
    succ = np.fromiter((v for es in edges for _, v in es), dtype=np.int32, count=int(ptr[-1]))
    letters = [ls for es in edges for ls, _ in es]
    return ptr, succ, letters


def _reverse(ptr: np.ndarray, succ: np.ndarray):
    n = len(ptr) - 1
    src = np.repeat(np.arange(n, dtype=np.int32), np.diff(ptr))
    order = np.argsort(succ, kind="stable")
    rsrc = np.ascontiguousarray(src[order], dtype=np.int32)
    counts = np.bincount(succ, minlength=n)
    rptr = np.zeros(n + 1, dtype=np.int64)
    np.cumsum(counts, out=rptr[1:])
    return rptr, rsrc, src


class LocalGraph:
    """All capped configurations reachable in one automaton, with letter classes over its own propositions."""

    def __init__(self, ta: TimedAutomaton, max_nodes: int = DEFAULT_MAX_NODES):
        self.ta = ta
        self.ap = ta.props
        self.caps = _caps(ta)
        vb = var_bitsets(self.ap)
        full = (1 << (1 << len(self.ap))) - 1
        self.full = full
        sets = [letter_set(t.guard, self.ap, vb) for t in ta.transitions]
        by_src: dict[object, list[int]] = {}
        for i, t in enumerate(ta.transitions):
            if sets[i]:
                by_src.setdefault(t.src, []).append(i)
        resets = [tuple(c in t.resets for c in ta.clocks) for t in ta.transitions]

        self.configs: list[tuple[object, tuple[int, ...]]] = []
        self.index: dict = {}
        edges: list[list[tuple[int, int]]] = []
        self.edge_transitions: list[list[int]] = []

        def add(cfg):
            i = self.index.get(cfg)
            if i is None:
                i = len(self.configs)
                if i >= max_nodes:
                    raise ResourceLimitError(i + 1, max_nodes, ta.name)
                self.index[cfg] = i
                self.configs.append(cfg)
                queue.append(i)
            return i

        queue: deque[int] = deque()
        zeros = (0,) * len(ta.clocks)
        self.initial = [add((s, zeros)) for s in ta.initial]
        while queue:
            u = queue.popleft()
            state, values = self.configs[u]
            val = dict(zip(ta.clocks, values))
            outs: list[tuple[int, tuple]] = []  # (letters, (tgt, resets)) merged by outcome
            covered = 0
            for i in by_src.get(state, ()):
                t = ta.transitions[i]
                if not t.clock_guard.holds(val):
                    continue
                key = (t.tgt, resets[i])
                ls = sets[i]
                if covered & ls:
                    for j, (ols, okey) in enumerate(outs):
                        if ols & ls and okey != key:
                            raise DeterminismError(
                                f"{ta.name}: overlapping transitions from {state} at {val} "
                                f"on letter {sorted(letter_from_bit((ols & ls).bit_length() - 1, self.ap))}"
                            )
                covered |= ls
                for j, (ols, okey) in enumerate(outs):
                    if okey == key:
                        outs[j] = (ols | ls, okey)
                        break
                else:
                    outs.append((ls, key))
            if covered != full:
                missing = full & ~covered
                bit = (missing & -missing).bit_length() - 1
                raise CompletenessError(
                    f"{ta.name}: no transition from {state} at {val} on letter {sorted(letter_from_bit(bit, self.ap))}"
                )
            row = []
            for ls, (tgt, rmask) in outs:
                v = add((tgt, _advance(values, rmask, self.caps)))
                row.append((ls, v))
            edges.append(row)

        self.ptr, self.succ, self.letters = _csr(edges)
        self.rptr, self.rsrc, self.edge_src = _reverse(self.ptr, self.succ)
        self.accepting = np.fromiter(
            (s in ta.accepting for s, _ in self.configs), dtype=np.uint8, count=len(self.configs)
        )

    def __len__(self):
        return len(self.configs)

    def configuration(self, i: int) -> Configuration:
        s, v = self.configs[i]
        return Configuration(s, self.ta.clocks, v)

    def step(self, u: int, letter_idx: int) -> int:
        for e in range(self.ptr[u], self.ptr[u + 1]):
            if self.letters[e] >> letter_idx & 1:
                return int(self.succ[e])
        raise CompletenessError(f"{self.ta.name}: no edge for letter {letter_idx}")

    def run(self, trace: Iterable) -> list[int]:
        if len(self.initial) != 1:
            raise AmbiguityError(f"{self.ta.name}: {len(self.initial)} initial configurations")
        out = [self.initial[0]]
        for letter in trace:
            out.append(self.step(out[-1], letter_bit(as_letter(letter), self.ap)))
        return out


# ---------------------------------------------------------------------------
# Product graphs
# ---------------------------------------------------------------------------


@functools.lru_cache(maxsize=256)
def _projection_masks(ap: tuple[str, ...], fap: tuple[str, ...]) -> tuple[int, ...]:
    """For each letter over ``fap``, the bitset of letters over ``ap`` projecting onto it."""
    n, nf = len(ap), len(fap)
    pos = [n - 1 - ap.index(p) for p in fap]
    masks = [0] * (1 << nf)
    for big in range(1 << n):
        small = 0
        for j, b in enumerate(pos):
            if big >> b & 1:
                small |= 1 << (nf - 1 - j)
        masks[small] |= 1 << big
    return tuple(masks)


class SemanticGraph:
    """Reachable capped configurations of a product of automata.

    ``local_ids[u, f]`` is the configuration of factor ``f`` at node ``u`` in
    that factor's :class:`LocalGraph`.  When built with ``max_depth``, nodes
    at that BFS depth are present but not expanded (``expanded[u] == 0``).
    """

    def __init__(
        self,
        factors: Sequence[TimedAutomaton],
        locals_: Sequence[LocalGraph],
        ap: tuple[str, ...],
        local_ids: np.ndarray,
        ptr: np.ndarray,
        succ: np.ndarray,
        letters: list[int],
        depth: np.ndarray,
        expanded: np.ndarray,
        initial: np.ndarray,
    ):
        self.factors = tuple(factors)
        self.locals = tuple(locals_)
        self.ap = ap
        self.local_ids = local_ids
        self.ptr = ptr
        self.succ = succ
        self.letters = letters
        self.depth = depth
        self.expanded = expanded
        self.initial = initial
        self.rptr, self.rsrc, self.edge_src = _reverse(ptr, succ)
        self._index = None

    @property
    def n(self) -> int:
        return len(self.ptr) - 1

    def __len__(self):
        return self.n

    @property
    def complete(self) -> bool:
        return bool(self.expanded.all())

    def successors(self, u: int) -> list[int]:
        return [int(v) for v in self.succ[self.ptr[u]:self.ptr[u + 1]]]

    def edges(self, u: int):
        for e in range(self.ptr[u], self.ptr[u + 1]):
            yield e, self.letters[e], int(self.succ[e])

    def letter_index(self, letter) -> int:
        return letter_bit(as_letter(letter), self.ap)

    def letter(self, idx: int) -> frozenset[str]:
        return letter_from_bit(idx, self.ap)

    @staticmethod
    def smallest(letters: int) -> int:
        return (letters & -letters).bit_length() - 1

    def step(self, u: int, letter) -> int:
        if not self.expanded[u]:
            raise ValueError(f"node {u} lies on the exploration frontier")
        idx = letter if isinstance(letter, int) else self.letter_index(letter)
        for e in range(self.ptr[u], self.ptr[u + 1]):
            if self.letters[e] >> idx & 1:
                return int(self.succ[e])
        raise CompletenessError(f"no edge for letter {idx} at node {u}")

    def run(self, trace: Iterable) -> list[int]:
        if len(self.initial) != 1:
            raise AmbiguityError(f"run requires a unique initial configuration, found {len(self.initial)}")
        out = [int(self.initial[0])]
        for letter in trace:
            out.append(self.step(out[-1], letter))
        return out

    def configuration(self, u: int) -> Configuration:
        states, clocks, values = [], [], []
        for f, lg in enumerate(self.locals):
            s, v = lg.configs[self.local_ids[u, f]]
            states.append(s)
            clocks.extend(lg.ta.clocks)
            values.extend(v)
        state = states[0] if len(states) == 1 else tuple(states)
        return Configuration(state, tuple(clocks), tuple(values))

    def factor_configuration(self, u: int, f: int) -> Configuration:
        return self.locals[f].configuration(int(self.local_ids[u, f]))

    def node_of(self, cfg: Configuration) -> int | None:
        if self._index is None:
            self._index = {self.configuration(u): u for u in range(self.n)}
        return self._index.get(cfg)

    def find(self, state, **values) -> int | None:
        """Node with the given state (tuple for products) and clock values, if reachable."""
        for u in range(self.n):
            cfg = self.configuration(u)
            if cfg.state == state and all(cfg[c] == v for c, v in values.items()):
                return u
        return None

    def lift(self, f: int, local_mask: np.ndarray) -> np.ndarray:
        """Node set of nodes whose factor-``f`` configuration lies in ``local_mask``."""
        return np.ascontiguousarray(local_mask[self.local_ids[:, f]], dtype=np.uint8)

    def factor_accepting(self, f: int) -> np.ndarray:
        return self.lift(f, self.locals[f].accepting)


def build_graph(
    ta,
    ap: Sequence[str] | None = None,
    max_nodes: int = DEFAULT_MAX_NODES,
    max_depth: int | None = None,
    locals_: Sequence[LocalGraph] | None = None,
) -> SemanticGraph:
    """Breadth-first enumeration of the reachable capped configurations.

    ``ta`` is one automaton or a sequence of factors with disjoint clocks.
    """
    factors = [ta] if isinstance(ta, TimedAutomaton) else list(ta)
    seen_clocks: set[str] = set()
    for f in factors:
        if seen_clocks & set(f.clocks):
            raise StructuralError("product factors must have disjoint clock sets")
        seen_clocks |= set(f.clocks)
    if ap is None:
        ap_list: list[str] = []
        for f in factors:
            ap_list.extend(p for p in f.props if p not in ap_list)
        ap = tuple(ap_list)
    else:
        ap = tuple(ap)
    if locals_ is None:
        locals_ = [LocalGraph(f, max_nodes) for f in factors]
    nf = len(factors)
    full = (1 << (1 << len(ap))) - 1

    # lifted out-edges per (factor, local config), computed on demand
    lifted: list[dict[int, list[tuple[int, int]]]] = [dict() for _ in range(nf)]
    masks = [_projection_masks(ap, f.props) for f in factors]
    lift_cache: list[dict[int, int]] = [dict() for _ in range(nf)]

    def lifted_edges(f: int, i: int) -> list[tuple[int, int]]:
        row = lifted[f].get(i)
        if row is None:
            lg = locals_[f]
            mk = masks[f]
            cache = lift_cache[f]
            row = []
            for e in range(lg.ptr[i], lg.ptr[i + 1]):
                ls = lg.letters[e]
                big = cache.get(ls)
                if big is None:
                    big = 0
                    rest = ls
                    while rest:
                        low = rest & -rest
                        big |= mk[low.bit_length() - 1]
                        rest ^= low
                    cache[ls] = big
                row.append((big, int(lg.succ[e])))
            lifted[f][i] = row
        return row

    index: dict[tuple, int] = {}
    keys: list[tuple] = []
    depth: list[int] = []
    edges: list[list[tuple[int, int]]] = []
    queue: deque[int] = deque()

    def add(key, d):
        u = index.get(key)
        if u is None:
            u = len(keys)
            if u >= max_nodes:
                raise ResourceLimitError(u + 1, max_nodes, "+".join(f.name for f in factors))
            index[key] = u
            keys.append(key)
            depth.append(d)
            edges.append([])
            queue.append(u)
        return u

    initial = [add(tuple(k), 0) for k in itertools.product(*(lg.initial for lg in locals_))]
    while queue:
        u = queue.popleft()
        d = depth[u]
        if max_depth is not None and d >= max_depth:
            continue
        key = keys[u]
        rows = [lifted_edges(f, key[f]) for f in range(nf)]
        out = []
        if nf == 1:
            for ls, v in rows[0]:
                out.append((ls, add((v,), d + 1)))
        else:
            stack = [(0, full, ())]
            # depth-first over factors, pruning empty letter intersections;
            # pushed in reverse to keep edge order deterministic
            while stack:
                f, acc, tgt = stack.pop()
                if f == nf:
                    out.append((acc, add(tgt, d + 1)))
                    continue
                nxt = []
                for ls, v in rows[f]:
                    inter = acc & ls
                    if inter:
                        nxt.append((f + 1, inter, tgt + (v,)))
                stack.extend(reversed(nxt))
        edges[u] = out

    n = len(keys)
    exp = np.zeros(n, dtype=np.uint8)
    for u in range(n):
        if max_depth is None or depth[u] < max_depth:
            exp[u] = 1
    ptr, succ, letters = _csr(edges)
    local_ids = np.array(keys, dtype=np.int32).reshape(n, nf)
    return SemanticGraph(
        factors,
        locals_,
        ap,
        local_ids,
        ptr,
        succ,
        letters,
        np.array(depth, dtype=np.int32),
        exp,
        np.array(initial, dtype=np.int32),
    )


def reach_k(g: SemanticGraph, k: int) -> np.ndarray:
    """Nodes at BFS distance at most ``k`` from the initial nodes."""
    return (g.depth <= k).astype(np.uint8)
