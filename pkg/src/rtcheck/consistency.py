"""Trace relations and the incremental consistency-checking algorithms.

Three searches are provided:

* :func:`check_rt` looks for a reachable configuration outside the error
  set whose successors are all in it, on products of growing subsets.
* :func:`check_partial` looks for pairs of requirements with co-reachable
  action configurations that admit no common bounded continuation.
* :func:`check_partial_rt` looks for immediate conflicts of small subsets
  within a bounded horizon.

A trace found on a subset is reported only if it does not fail the full
set; otherwise a requirement it fails is added to the subset and the search
is repeated.  Requirements are always chosen by lowest index.
"""
from __future__ import annotations

import itertools
import time
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from . import checker as C
from .checker import WitnessTrace
from .logic import RequirementSet, as_letter
from .semantics import DEFAULT_MAX_NODES, LocalGraph, SemanticGraph, build_graph

CONSISTENT = "Consistent"
WITNESS = "InconsistencyWitness"
NONE_FOUND = "NoneFoundWithinBounds"


class CheckTimeout(RuntimeError):
    pass


@dataclass
class Verdict:
    kind: str
    method: str
    bounds: dict
    witness: WitnessTrace | None = None
    involved: tuple[str, ...] = ()
    confirmed: bool = False
    stats: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.kind == WITNESS and (self.witness is None or not self.confirmed):
            raise AssertionError("an inconsistency witness must be present and confirmed")

    @property
    def inconsistent(self) -> bool:
        return self.kind == WITNESS


@dataclass(frozen=True)
class Eq2Holds:
    holds = True


@dataclass(frozen=True)
class Eq2Counterexample:
    k: int
    sigma1: WitnessTrace
    sigma2: WitnessTrace
    holds = False


class Session:
    """Caches local graphs and subset products for one requirement set."""

    def __init__(self, rs: RequirementSet, max_nodes: int = DEFAULT_MAX_NODES, timeout: float | None = None):
        self.rs = rs
        self.max_nodes = max_nodes
        self.deadline = None if timeout is None else time.monotonic() + timeout
        self._locals: dict[int, LocalGraph] = {}
        self._graphs: dict[tuple, SemanticGraph] = {}
        self._local_err: dict[int, np.ndarray] = {}
        self._local_succ: dict[int, np.ndarray] = {}
        self.stats = {"graphs": 0, "nodes": 0, "max_graph": 0, "subsets": 0}

    def tick(self):
        if self.deadline is not None and time.monotonic() > self.deadline:
            raise CheckTimeout("time limit exceeded")

    def local(self, i: int) -> LocalGraph:
        lg = self._locals.get(i)
        if lg is None:
            lg = self._locals[i] = LocalGraph(self.rs[i].automaton, self.max_nodes)
        return lg

    def graph(self, subset, max_depth: int | None = None) -> SemanticGraph:
        """Product of ``subset`` (sorted indices), optionally explored to ``max_depth``."""
        idx = self.rs.indices(subset)
        key = (idx, max_depth)
        g = self._graphs.get(key)
        if g is None:
            self.tick()
            full = self._graphs.get((idx, None))
            if full is not None:
                return full
            g = build_graph(
                [self.rs[i].automaton for i in idx],
                self.rs.ap_of(idx),
                max_nodes=self.max_nodes,
                max_depth=max_depth,
                locals_=[self.local(i) for i in idx],
            )
            self._graphs[key] = g
            self.stats["graphs"] += 1
            self.stats["nodes"] += g.n
            self.stats["max_graph"] = max(self.stats["max_graph"], g.n)
        return g

    # -- trace relations -------------------------------------------------

    def final_locals(self, trace: Sequence, subset) -> list[tuple[int, int]]:
        """(requirement index, final local configuration) for each requirement of ``subset``."""
        return [(i, self.local(i).run(trace)[-1]) for i in self.rs.indices(subset)]

    def error_mask(self, i: int) -> np.ndarray:
        """Error set of requirement ``i`` on its local graph."""
        if i not in self._local_err:
            self._local_err[i] = C.local_error(self.local(i))
        return self._local_err[i]

    def success_mask(self, i: int) -> np.ndarray:
        if i not in self._local_succ:
            self._local_succ[i] = C.local_success(self.local(i))
        return self._local_succ[i]

    def fails(self, trace, subset=None) -> bool:
        trace = [as_letter(x) for x in trace]
        return any(self.error_mask(i)[u] for i, u in self.final_locals(trace, subset))

    def succ(self, trace, subset=None) -> bool:
        trace = [as_letter(x) for x in trace]
        return all(self.success_mask(i)[u] for i, u in self.final_locals(trace, subset))

    def _final_node(self, trace, subset) -> tuple[SemanticGraph, int]:
        g = self.graph(subset)
        return g, g.run([as_letter(x) for x in trace])[-1]

    def ifails(self, trace, subset=None) -> bool:
        g, u = self._final_node(trace, subset)
        return bool(C.af(g, C.error_product(g))[u])

    def isucc(self, trace, subset=None) -> bool:
        g, u = self._final_node(trace, subset)
        return bool(C.af(g, C.success_product(g))[u])

    def first_failing(self, traces: Iterable, exclude: Iterable[int]) -> int | None:
        """Lowest-index requirement outside ``exclude`` failed by the first trace that fails one."""
        exclude = set(exclude)
        for trace in traces:
            for i in range(len(self.rs)):
                if i not in exclude and self.fails(trace, [i]):
                    return i
        return None

    def confirm_witness(self, trace) -> bool:
        return not self.fails(trace)

    def _verdict(self, kind, method, bounds, started, witness=None, involved=(), graph_subset=None):
        stats = dict(self.stats, seconds=round(time.monotonic() - started, 6))
        confirmed = False
        if witness is not None:
            confirmed = self.confirm_witness(witness.trace)
            g = self.graph(graph_subset[0], graph_subset[1])
            u = int(witness.nodes[-1])
            # inevitable failure on the producing subset implies it on the full set
            assert C.af(g, C.error_product(g))[u], "witness does not inevitably fail"
            assert confirmed, "witness fails the full requirement set"
        return Verdict(
            kind, method, bounds, witness, tuple(self.rs.names[i] for i in involved), confirmed, stats
        )


def _session(rs, session, max_nodes, timeout) -> Session:
    if session is not None:
        return session
    return Session(rs, max_nodes=max_nodes, timeout=timeout)


def fails(trace, rs: RequirementSet, subset=None) -> bool:
    return Session(rs).fails(trace, subset)


def ifails(trace, rs: RequirementSet, subset=None) -> bool:
    return Session(rs).ifails(trace, subset)


def succ(trace, rs: RequirementSet, subset=None) -> bool:
    return Session(rs).succ(trace, subset)


def isucc(trace, rs: RequirementSet, subset=None) -> bool:
    return Session(rs).isucc(trace, subset)


def confirm_witness(trace, rs: RequirementSet) -> bool:
    return Session(rs).confirm_witness(trace)


# ---------------------------------------------------------------------------
# rt-consistency
# ---------------------------------------------------------------------------


def rt_witness(s: Session, subset, depth_bound: int | None = None) -> WitnessTrace | None:
    """Shortest trace to ``!err & AX err`` through ``!err`` on the product of ``subset``."""
    g = s.graph(subset, None if depth_bound is None else depth_bound + 1)
    safe, target = C.rt_target(g)
    return C.eu_witness(g, safe, target, depth_bound, kind="!err & AX err")


def check_rt(
    rs: RequirementSet,
    n: int = 2,
    depth_bound: int | None = None,
    *,
    seeds: Sequence[Iterable] | None = None,
    session: Session | None = None,
    max_nodes: int = DEFAULT_MAX_NODES,
    timeout: float | None = None,
) -> Verdict:
    """Incremental rt-consistency check over subsets of size at most ``n``.

    Searches start from every pair in index order, or from ``seeds``.
    """
    if n < 2:
        raise ValueError("n must be at least 2")
    s = _session(rs, session, max_nodes, timeout)
    started = time.monotonic()
    bounds = {"n": n} if depth_bound is None else {"n": n, "depth": depth_bound}
    everything = tuple(range(len(rs)))
    gkey = lambda sub: (sub, None if depth_bound is None else depth_bound + 1)  # noqa: E731
    seen: dict[tuple, bool] = {}

    def explore(start: tuple[int, ...]):
        sub = set(start)
        while len(sub) <= n:
            key = tuple(sorted(sub))
            if key in seen:
                return None
            s.tick()
            s.stats["subsets"] += 1
            w = rt_witness(s, key, depth_bound)
            seen[key] = w is not None
            if w is None:
                return None
            r = s.first_failing([w.trace], sub)
            if r is None:
                return w, key
            sub.add(r)
        return None

    if seeds is not None:
        starts = [rs.indices(x) for x in seeds]
    else:
        starts = list(itertools.combinations(everything, 2)) if len(rs) >= 2 else [everything]
    for start in starts:
        found = explore(start)
        if found is not None:
            w, key = found
            return s._verdict(WITNESS, "rt", bounds, started, w, key, gkey(key))
    if n >= len(rs) and everything not in seen:
        # pairs alone can miss conflicts that need every requirement
        found = explore(everything)
        if found is not None:
            w, key = found
            return s._verdict(WITNESS, "rt", bounds, started, w, key, gkey(key))
    if n >= len(rs) and depth_bound is None:
        return s._verdict(CONSISTENT, "rt", bounds, started)
    return s._verdict(NONE_FOUND, "rt", bounds, started)


# ---------------------------------------------------------------------------
# Bounded partial consistency
# ---------------------------------------------------------------------------


def _extend(g: SemanticGraph, start: int, avoid: np.ndarray, depth: np.ndarray, steps: int):
    """Path of exactly ``steps`` edges from ``start`` never entering ``avoid``.

    ``depth`` is the inevitability depth of ``avoid``; a successor is
    eligible with ``r`` steps left when it lies outside ``avoid`` and
    outside ``af_bounded(avoid, r - 1)``.  Among eligible edges the one with
    the smallest letter is taken.
    """
    nodes, edges = [start], []
    u = start
    for left in range(steps, 0, -1):
        best = None
        for e, letters, v in g.edges(u):
            if avoid[v] or depth[v] <= left - 1:
                continue
            low = g.smallest(letters)
            if best is None or low < best[0]:
                best = (low, e, v)
        if best is None:
            raise AssertionError("extension vanished although the start avoids the bounded inevitability")
        _, e, u = best
        nodes.append(u)
        edges.append(e)
    return nodes, edges


def check_eq2(
    rs: RequirementSet,
    r1,
    r2,
    context: Iterable = (),
    alpha: int = 40,
    beta: int = 10,
    *,
    session: Session | None = None,
    max_nodes: int = DEFAULT_MAX_NODES,
) -> Eq2Holds | Eq2Counterexample:
    """Bounded partial consistency of ``r1`` and ``r2`` relative to ``context``.

    For ``k`` from ``alpha`` down to 0: if for both ``i`` some configuration
    reachable within ``k`` steps can step into the error of each of the two
    requirements (from outside it) yet avoids ``err(context + r_i)`` for ``alpha - k`` more
    steps, while no such configuration avoids ``err(context + r1 + r2)``
    for ``alpha + beta - k`` steps, the pair is inconsistent at ``k``.
    """
    if alpha <= 0 or beta <= 0:
        raise ValueError("alpha and beta must be positive")
    s = _session(rs, session, max_nodes, None)
    i1, i2 = (rs.index(x) if isinstance(x, str) else int(x) for x in (r1, r2))
    ctx = set(rs.indices(context)) - {i1, i2}
    sub = tuple(sorted(ctx | {i1, i2}))
    g = s.graph(sub, alpha + beta)
    pos = {r: f for f, r in enumerate(sub)}
    err1 = C.error_set(g, pos[i1])
    err2 = C.error_set(g, pos[i2])
    err_ctx = C.error_product(g, [pos[r] for r in ctx])
    # action configurations can enter a requirement's error set, so they lie outside it
    action = (err1 == 0) & (err2 == 0) & (C.ex(g, err1) != 0) & (C.ex(g, err2) != 0)
    avoid = [err_ctx | err1, err_ctx | err2]
    both = err_ctx | err1 | err2
    d_avoid = [C.inevitability_depth(g, a) for a in avoid]
    d_both = C.inevitability_depth(g, both)
    for k in range(alpha, -1, -1):
        s.tick()
        within = (g.depth <= k) & action
        if not within.any():
            continue
        premise = [within & (a == 0) & (d > alpha - k) for a, d in zip(avoid, d_avoid)]
        if not (premise[0].any() and premise[1].any()):
            continue
        conclusion = within & (both == 0) & (d_both > alpha + beta - k)
        if conclusion.any():
            continue
        sigmas = []
        for i in range(2):
            path = C.shortest_path(g, np.ones(g.n, dtype=np.uint8), premise[i])
            nodes, edges = path
            more_nodes, more_edges = _extend(g, nodes[-1], avoid[i], d_avoid[i], alpha - k)
            sigmas.append(
                C.path_to_witness(g, nodes + more_nodes[1:], edges + more_edges, f"premise {i + 1} at k={k}")
            )
        return Eq2Counterexample(k, sigmas[0], sigmas[1])
    return Eq2Holds()


def check_partial(
    rs: RequirementSet,
    alpha: int = 40,
    beta: int = 10,
    *,
    seeds: Sequence[Iterable] | None = None,
    session: Session | None = None,
    max_nodes: int = DEFAULT_MAX_NODES,
    timeout: float | None = None,
) -> Verdict:
    """Pairwise bounded partial consistency, lifted to rt-inconsistency witnesses.

    Pairs are taken in index order, or from ``seeds`` (each of size two).
    """
    if alpha <= 0 or beta <= 0:
        raise ValueError("alpha and beta must be positive")
    s = _session(rs, session, max_nodes, timeout)
    started = time.monotonic()
    bounds = {"alpha": alpha, "beta": beta}
    everything = set(range(len(rs)))
    pairs = itertools.combinations(range(len(rs)), 2)
    if seeds is not None:
        pairs = [rs.indices(x) for x in seeds]
        if any(len(p) != 2 for p in pairs):
            raise ValueError("seed subsets for the partial check must be pairs")
    for i1, i2 in pairs:
        ctx: set[int] = set()
        while True:
            s.stats["subsets"] += 1
            res = check_eq2(rs, i1, i2, ctx, alpha, beta, session=s)
            if res.holds:
                break
            sub = tuple(sorted(ctx | {i1, i2}))
            for w in (res.sigma1, res.sigma2):
                if not s.fails(w.trace):
                    return s._verdict(WITNESS, "partial", bounds, started, w, sub, (sub, alpha + beta))
            if set(sub) == everything:
                break
            r = s.first_failing([res.sigma1.trace, res.sigma2.trace], sub)
            if r is None:
                break
            ctx.add(r)
    return s._verdict(NONE_FOUND, "partial", bounds, started)


# ---------------------------------------------------------------------------
# Partial rt-consistency
# ---------------------------------------------------------------------------


def subsets_by_size(count: int, n: int):
    for size in range(1, min(n, count) + 1):
        yield from itertools.combinations(range(count), size)


def check_partial_rt(
    rs: RequirementSet,
    alpha: int = 40,
    n: int = 2,
    *,
    seeds: Sequence[Iterable] | None = None,
    session: Session | None = None,
    max_nodes: int = DEFAULT_MAX_NODES,
    timeout: float | None = None,
) -> Verdict:
    """Bounded search for immediate conflicts of subsets of at most ``n`` requirements.

    ``seeds`` replaces the default subset enumeration (by size, then index).
    """
    if alpha <= 0:
        raise ValueError("alpha must be positive")
    if n < 1:
        raise ValueError("n must be at least 1")
    s = _session(rs, session, max_nodes, timeout)
    started = time.monotonic()
    bounds = {"alpha": alpha, "n": n}
    everything = set(range(len(rs)))
    order = subsets_by_size(len(rs), n) if seeds is None else (rs.indices(x) for x in seeds)
    for seed in order:
        ctx: set[int] = set()
        seed = tuple(seed)
        while True:
            s.tick()
            s.stats["subsets"] += 1
            sub = tuple(sorted(ctx | set(seed)))
            g = s.graph(sub, alpha + 1)
            pos = {r: f for f, r in enumerate(sub)}
            err_all = C.error_product(g)
            err_seed = C.error_product(g, [pos[r] for r in seed])
            safe = (err_all == 0).astype(np.uint8)
            w = C.eu_witness(g, safe, safe & C.ax(g, err_seed), alpha, kind="!err & AX err(S)")
            if w is None:
                break
            if not s.fails(w.trace):
                return s._verdict(WITNESS, "partial-rt", bounds, started, w, sub, (sub, alpha + 1))
            if set(sub) == everything:
                break
            r = s.first_failing([w.trace], sub)
            if r is None:
                break
            ctx.add(r)
    return s._verdict(NONE_FOUND, "partial-rt", bounds, started)
