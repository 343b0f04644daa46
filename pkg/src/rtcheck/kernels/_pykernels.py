"""Reference implementation of the graph kernels (numpy + plain loops).

Graphs are in CSR form: successors of node ``u`` are
``succ[ptr[u]:ptr[u + 1]]``.  The reverse graph uses the same layout with
``rsrc`` holding, for each incoming edge, its source node.  Node sets are
``uint8`` arrays.  Nodes with ``expanded[u] == 0`` have unknown successors;
every kernel treats them conservatively (never in AX/EX, never inevitably
reaching a target).
"""
from collections import deque

import numpy as np

INF = np.iinfo(np.int32).max


def ax(ptr, succ, target, expanded):
    n = len(ptr) - 1
    out = np.zeros(n, dtype=np.uint8)
    if n == 0:
        return out
    deg = np.diff(ptr)
    bad = (target[succ] == 0).astype(np.int64)
    cnt = np.zeros(n, dtype=np.int64)
    nz = deg > 0
    if bad.size:
        cnt[nz] = np.add.reduceat(bad, ptr[:-1][nz])
    out[(cnt == 0) & nz & (expanded != 0)] = 1
    return out


def ex(ptr, succ, target, expanded):
    n = len(ptr) - 1
    out = np.zeros(n, dtype=np.uint8)
    if n == 0:
        return out
    deg = np.diff(ptr)
    good = (target[succ] != 0).astype(np.int64)
    cnt = np.zeros(n, dtype=np.int64)
    nz = deg > 0
    if good.size:
        cnt[nz] = np.add.reduceat(good, ptr[:-1][nz])
    out[(cnt > 0) & (expanded != 0)] = 1
    return out


def backward_reach(rptr, rsrc, seeds, allowed):
    """Nodes in ``allowed`` that reach ``seeds`` through ``allowed`` nodes (seeds included)."""
    n = len(rptr) - 1
    out = np.zeros(n, dtype=np.uint8)
    queue = deque()
    for u in np.flatnonzero(seeds):
        out[u] = 1
        queue.append(int(u))
    while queue:
        v = queue.popleft()
        for e in range(rptr[v], rptr[v + 1]):
            u = rsrc[e]
            if not out[u] and allowed[u]:
                out[u] = 1
                queue.append(int(u))
    return out


def inevitability_depth(ptr, rptr, rsrc, target, expanded):
    """Least ``l >= 1`` such that every path of ``l`` steps hits ``target``.

    The current node does not count.  ``INF`` where no bound exists.
    Retrograde counting: a node is settled once all of its out-edges lead to
    settled nodes; settling in FIFO order makes values nondecreasing, so the
    last settled successor carries the maximum.
    """
    n = len(ptr) - 1
    depth = np.full(n, INF, dtype=np.int32)
    # value seen by predecessors: 0 on target, depth elsewhere
    pending = np.diff(ptr).astype(np.int64)
    pending[expanded == 0] = -1
    queue = deque()
    value = np.full(n, INF, dtype=np.int64)
    for u in np.flatnonzero(target):
        value[u] = 0
        queue.append(int(u))
    while queue:
        v = queue.popleft()
        dv = value[v]
        for e in range(rptr[v], rptr[v + 1]):
            u = rsrc[e]
            if pending[u] <= 0:
                continue
            pending[u] -= 1
            if pending[u] == 0:
                depth[u] = dv + 1
                if not target[u]:
                    value[u] = dv + 1
                    queue.append(int(u))
    return depth


def bfs(ptr, succ, sources, allowed, max_depth):
    """Shortest distances from ``sources`` through ``allowed`` nodes.

    Returns ``(dist, parent_edge)``; ``dist == -1`` for unreached nodes.
    Exploration stops at ``max_depth`` (negative = unbounded).  Neighbours
    are visited in edge order, so parents are deterministic.
    """
    n = len(ptr) - 1
    dist = np.full(n, -1, dtype=np.int32)
    parent = np.full(n, -1, dtype=np.int64)
    queue = deque()
    for s in sources:
        s = int(s)
        if allowed[s] and dist[s] < 0:
            dist[s] = 0
            queue.append(s)
    while queue:
        u = queue.popleft()
        if 0 <= max_depth <= dist[u]:
            continue
        for e in range(ptr[u], ptr[u + 1]):
            v = succ[e]
            if dist[v] < 0 and allowed[v]:
                dist[v] = dist[u] + 1
                parent[v] = e
                queue.append(int(v))
    return dist, parent
