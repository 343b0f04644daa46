"""Set-based evaluation of the CTL fragment used for consistency checking.

Node sets are ``uint8`` numpy arrays indexed by graph node.  Operators are
pure functions of a :class:`~rtcheck.semantics.SemanticGraph` and node sets.

On graphs explored only up to a depth bound, frontier nodes have unknown
successors; they never satisfy AX/EX and never satisfy an inevitability
they do not already satisfy at the current node.  Results are therefore
under-approximations that are exact for nodes whose relevant horizon lies
inside the explored region.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from . import kernels
from .semantics import Configuration, LocalGraph, SemanticGraph

INF = kernels.INF


def _u8(mask) -> np.ndarray:
    return np.ascontiguousarray(mask, dtype=np.uint8)


def local_error(lg: LocalGraph) -> np.ndarray:
    """Non-accepting local configurations that cannot reach an accepting one."""
    ones = np.ones(len(lg), dtype=np.uint8)
    reach_f = kernels.backward_reach(lg.rptr, lg.rsrc, lg.accepting, ones)
    return _u8((lg.accepting == 0) & (reach_f == 0))


def local_success(lg: LocalGraph) -> np.ndarray:
    """Accepting local configurations that cannot reach a non-accepting one."""
    ones = np.ones(len(lg), dtype=np.uint8)
    reach_nf = kernels.backward_reach(lg.rptr, lg.rsrc, _u8(lg.accepting == 0), ones)
    return _u8((lg.accepting != 0) & (reach_nf == 0))


def error_set(g: SemanticGraph, factor: int) -> np.ndarray:
    """Error configurations of one factor, lifted to the product.

    Every letter is enabled in every factor, so the factor component of a
    product path is an arbitrary path of the factor; reachability of
    accepting configurations can thus be decided on the factor alone.
    """
    lg = g.locals[factor]
    cache = lg.__dict__.setdefault("_error", None)
    if cache is None:
        cache = lg._error = local_error(lg)
    return g.lift(factor, cache)


def success_set(g: SemanticGraph, factor: int) -> np.ndarray:
    lg = g.locals[factor]
    cache = lg.__dict__.setdefault("_success", None)
    if cache is None:
        cache = lg._success = local_success(lg)
    return g.lift(factor, cache)


def error_product(g: SemanticGraph, factors: Iterable[int] | None = None) -> np.ndarray:
    """Union of the factors' error sets (empty for no factors)."""
    factors = range(len(g.factors)) if factors is None else factors
    out = np.zeros(g.n, dtype=np.uint8)
    for f in factors:
        out |= error_set(g, f)
    return out


def success_product(g: SemanticGraph, factors: Iterable[int] | None = None) -> np.ndarray:
    """Intersection of the factors' success sets (all nodes for no factors)."""
    factors = range(len(g.factors)) if factors is None else factors
    out = np.ones(g.n, dtype=np.uint8)
    for f in factors:
        out &= success_set(g, f)
    return out


def ax(g: SemanticGraph, target) -> np.ndarray:
    return kernels.ax(g.ptr, g.succ, _u8(target), g.expanded)


def ex(g: SemanticGraph, target) -> np.ndarray:
    return kernels.ex(g.ptr, g.succ, _u8(target), g.expanded)


def inevitability_depth(g: SemanticGraph, target) -> np.ndarray:
    """Smallest ``l >= 1`` with the node in ``af_bounded(target, l)``, else ``INF``."""
    return kernels.inevitability_depth(g.ptr, g.rptr, g.rsrc, _u8(target), g.expanded)


def af(g: SemanticGraph, target) -> np.ndarray:
    """Least fixpoint of ``X = target | AX X``."""
    target = _u8(target)
    return _u8((target != 0) | (inevitability_depth(g, target) < INF))


def af_bounded(g: SemanticGraph, target, l: int) -> np.ndarray:
    """Nodes all of whose paths hit ``target`` at one of the next ``l`` steps.

    The current node is not inspected: this is ``AX(t | AX(t | ... AX t))``
    with ``l`` nested AX, so ``l == 0`` gives the empty set.
    """
    if l <= 0:
        return np.zeros(g.n, dtype=np.uint8)
    return _u8(inevitability_depth(g, target) <= l)


def af_by_cycles(g: SemanticGraph, target) -> np.ndarray:
    """AF computed as the complement of "some path avoids ``target`` forever".

    A node avoids ``target`` forever iff it lies outside ``target`` and
    reaches, through non-target nodes, a non-trivial strongly connected
    component of the non-target subgraph (or an unexplored frontier node).
    """
    target = _u8(target)
    n = g.n
    avoid = target == 0
    ptr, succ = g.ptr, g.succ

    # Tarjan's algorithm, iterative, on the subgraph induced by ``avoid``
    index = np.full(n, -1, dtype=np.int64)
    low = np.zeros(n, dtype=np.int64)
    on_stack = np.zeros(n, dtype=bool)
    stack: list[int] = []
    cyclic = np.zeros(n, dtype=bool)
    counter = 0
    for root in range(n):
        if not avoid[root] or index[root] >= 0:
            continue
        work = [(root, int(ptr[root]))]
        index[root] = low[root] = counter
        counter += 1
        stack.append(root)
        on_stack[root] = True
        while work:
            u, e = work[-1]
            if e < ptr[u + 1]:
                work[-1] = (u, e + 1)
                v = int(succ[e])
                if not avoid[v]:
                    continue
                if index[v] < 0:
                    index[v] = low[v] = counter
                    counter += 1
                    stack.append(v)
                    on_stack[v] = True
                    work.append((v, int(ptr[v])))
                elif on_stack[v]:
                    low[u] = min(low[u], index[v])
                continue
            work.pop()
            if work:
                p = work[-1][0]
                low[p] = min(low[p], low[u])
            if low[u] == index[u]:
                comp = []
                while True:
                    w = stack.pop()
                    on_stack[w] = False
                    comp.append(w)
                    if w == u:
                        break
                if len(comp) > 1:
                    cyclic[comp] = True
                else:
                    w = comp[0]
                    if np.any(succ[ptr[w]:ptr[w + 1]] == w):
                        cyclic[w] = True
    seeds = cyclic | (avoid & (g.expanded == 0))
    escape = kernels.backward_reach(g.rptr, g.rsrc, _u8(seeds), _u8(avoid))
    return _u8(escape == 0)


@dataclass(frozen=True)
class WitnessTrace:
    """A finite trace with the configurations it visits in a graph."""

    trace: tuple[frozenset, ...]
    nodes: tuple[int, ...]
    configs: tuple[Configuration, ...]
    target_kind: str = ""

    def __len__(self):
        return len(self.trace)


def path_to_witness(g: SemanticGraph, nodes: Sequence[int], edges: Sequence[int], kind: str) -> WitnessTrace:
    letters = tuple(g.letter(g.smallest(g.letters[e])) for e in edges)
    return WitnessTrace(letters, tuple(nodes), tuple(g.configuration(u) for u in nodes), kind)


def shortest_path(g: SemanticGraph, allowed, targets, max_depth: int | None = None):
    """Shortest (nodes, edges) path from an initial node to ``targets`` through ``allowed``.

    Among shortest paths the target with the lowest node index wins; BFS
    visits edges in order, so the result is deterministic.
    """
    allowed = _u8(allowed)
    dist, parent = kernels.bfs(g.ptr, g.succ, g.initial, allowed, -1 if max_depth is None else max_depth)
    hit = np.flatnonzero((dist >= 0) & (_u8(targets) != 0))
    if hit.size == 0:
        return None
    best = hit[np.lexsort((hit, dist[hit]))[0]]
    nodes = [int(best)]
    edges = []
    while parent[nodes[-1]] >= 0:
        e = int(parent[nodes[-1]])
        edges.append(e)
        nodes.append(int(g.edge_src[e]))
    return nodes[::-1], edges[::-1]


def eu_witness(g: SemanticGraph, safe, target, depth_bound: int | None = None, kind: str = "") -> WitnessTrace | None:
    """Shortest trace reaching ``target & safe`` through ``safe`` nodes.

    With ``depth_bound`` the target must be reached within that many steps
    (bounded until).  Letters are the smallest of each edge's letter class.
    """
    safe = _u8(safe)
    path = shortest_path(g, safe, _u8(target) & safe, depth_bound)
    if path is None:
        return None
    return path_to_witness(g, *path, kind)


def rt_target(g: SemanticGraph, factors: Iterable[int] | None = None):
    """``(safe, target)`` for ``E[!err U (!err & AX err)]`` over the given factors."""
    err = error_product(g, factors)
    safe = _u8(err == 0)
    return safe, _u8(safe & ax(g, err))
