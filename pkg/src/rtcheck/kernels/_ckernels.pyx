# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled graph kernels; same contract as ``_pykernels``."""
import numpy as np
cimport numpy as cnp
from libc.stdint cimport int32_t, int64_t, uint8_t

cnp.import_array()

INF = np.iinfo(np.int32).max
cdef int32_t CINF = 2147483647


def ax(const int64_t[::1] ptr, const int32_t[::1] succ,
       const uint8_t[::1] target, const uint8_t[::1] expanded):
    cdef Py_ssize_t n = ptr.shape[0] - 1, u
    cdef int64_t e
    out_arr = np.zeros(n, dtype=np.uint8)
    cdef uint8_t[::1] out = out_arr
    cdef uint8_t ok
    for u in range(n):
        if not expanded[u] or ptr[u] == ptr[u + 1]:
            continue
        ok = 1
        for e in range(ptr[u], ptr[u + 1]):
            if not target[succ[e]]:
                ok = 0
                break
        out[u] = ok
    return out_arr


def ex(const int64_t[::1] ptr, const int32_t[::1] succ,
       const uint8_t[::1] target, const uint8_t[::1] expanded):
    cdef Py_ssize_t n = ptr.shape[0] - 1, u
    cdef int64_t e
    out_arr = np.zeros(n, dtype=np.uint8)
    cdef uint8_t[::1] out = out_arr
    for u in range(n):
        if not expanded[u]:
            continue
        for e in range(ptr[u], ptr[u + 1]):
            if target[succ[e]]:
                out[u] = 1
                break
    return out_arr


def backward_reach(const int64_t[::1] rptr, const int32_t[::1] rsrc,
                   const uint8_t[::1] seeds, const uint8_t[::1] allowed):
    cdef Py_ssize_t n = rptr.shape[0] - 1, u, v
    cdef int64_t e, head = 0, tail = 0
    out_arr = np.zeros(n, dtype=np.uint8)
    cdef uint8_t[::1] out = out_arr
    queue_arr = np.empty(max(n, 1), dtype=np.int32)
    cdef int32_t[::1] queue = queue_arr
    for u in range(n):
        if seeds[u]:
            out[u] = 1
            queue[tail] = <int32_t>u
            tail += 1
    while head < tail:
        v = queue[head]
        head += 1
        for e in range(rptr[v], rptr[v + 1]):
            u = rsrc[e]
            if not out[u] and allowed[u]:
                out[u] = 1
                queue[tail] = <int32_t>u
                tail += 1
    return out_arr


def inevitability_depth(const int64_t[::1] ptr, const int64_t[::1] rptr,
                        const int32_t[::1] rsrc, const uint8_t[::1] target,
                        const uint8_t[::1] expanded):
    cdef Py_ssize_t n = ptr.shape[0] - 1, u, v
    cdef int64_t e, head = 0, tail = 0
    depth_arr = np.full(n, INF, dtype=np.int32)
    cdef int32_t[::1] depth = depth_arr
    pending_arr = np.empty(n, dtype=np.int64)
    cdef int64_t[::1] pending = pending_arr
    value_arr = np.full(n, INF, dtype=np.int32)
    cdef int32_t[::1] value = value_arr
    queue_arr = np.empty(max(n, 1), dtype=np.int32)
    cdef int32_t[::1] queue = queue_arr
    cdef int32_t dv
    for u in range(n):
        pending[u] = ptr[u + 1] - ptr[u] if expanded[u] else -1
        if target[u]:
            value[u] = 0
            queue[tail] = <int32_t>u
            tail += 1
    while head < tail:
        v = queue[head]
        head += 1
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
                    queue[tail] = <int32_t>u
                    tail += 1
    return depth_arr


def bfs(const int64_t[::1] ptr, const int32_t[::1] succ, sources,
        const uint8_t[::1] allowed, long max_depth):
    cdef Py_ssize_t n = ptr.shape[0] - 1, u, v
    cdef int64_t e, head = 0, tail = 0
    dist_arr = np.full(n, -1, dtype=np.int32)
    cdef int32_t[::1] dist = dist_arr
    parent_arr = np.full(n, -1, dtype=np.int64)
    cdef int64_t[::1] parent = parent_arr
    queue_arr = np.empty(max(n, 1), dtype=np.int32)
    cdef int32_t[::1] queue = queue_arr
    for s in sources:
        u = s
        if allowed[u] and dist[u] < 0:
            dist[u] = 0
            queue[tail] = <int32_t>u
            tail += 1
    while head < tail:
        u = queue[head]
        head += 1
        if max_depth >= 0 and dist[u] >= max_depth:
            continue
        for e in range(ptr[u], ptr[u + 1]):
            v = succ[e]
            if dist[v] < 0 and allowed[v]:
                dist[v] = dist[u] + 1
                parent[v] = e
                queue[tail] = <int32_t>v
                tail += 1
    return dist_arr, parent_arr
