"""Compare the compiled and pure-Python graph kernels on one product graph.

    python benchmarks/bench_kernels.py [--requirements 6] [--props 4] [--seed 4] [--repeat 3]

Each kernel runs on the same arrays for every available backend; the best
of ``--repeat`` runs is reported along with the speed-up, and results are
checked for equality.
"""
from __future__ import annotations

import argparse
import random
import time

import numpy as np

from rtcheck import checker as C
from rtcheck import kernels
from rtcheck.randgen import random_requirement_set
from rtcheck.semantics import build_graph


def best_of(fn, repeat):
    best, out = float("inf"), None
    for _ in range(repeat):
        t0 = time.perf_counter()
        out = fn()
        best = min(best, time.perf_counter() - t0)
    return best, out


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--requirements", type=int, default=6)
    ap.add_argument("--props", type=int, default=4)
    ap.add_argument("--seed", type=int, default=4)
    ap.add_argument("--repeat", type=int, default=3)
    args = ap.parse_args(argv)

    rs = random_requirement_set(random.Random(args.seed), args.requirements, args.props)
    t0 = time.perf_counter()
    g = build_graph([r.automaton for r in rs], rs.props)
    print(f"graph: {g.n} nodes, {len(g.succ)} edges, built in {time.perf_counter() - t0:.2f}s")

    err = C.error_product(g)
    safe = (err == 0).astype(np.uint8)
    src = g.initial.astype(np.int32)
    cases = {
        "ax": lambda m: m.ax(g.ptr, g.succ, err, g.expanded),
        "ex": lambda m: m.ex(g.ptr, g.succ, err, g.expanded),
        "backward_reach": lambda m: m.backward_reach(g.rptr, g.rsrc, err, np.ones(g.n, dtype=np.uint8)),
        "inevitability_depth": lambda m: m.inevitability_depth(g.ptr, g.rptr, g.rsrc, err, g.expanded),
        "bfs": lambda m: m.bfs(g.ptr, g.succ, src, safe, -1),
    }
    impls = kernels.backends()
    print(f"backends: {', '.join(impls)} (default {kernels.BACKEND})")
    print(f"{'kernel':<22}" + "".join(f"{name:>12}" for name in impls) + ("   speed-up" if len(impls) > 1 else ""))
    for name, fn in cases.items():
        times, outs = {}, {}
        for bname, mod in impls.items():
            times[bname], outs[bname] = best_of(lambda: fn(mod), args.repeat)
        ref = outs["python"]
        for o in outs.values():
            for a, b in zip(ref if isinstance(ref, tuple) else (ref,), o if isinstance(o, tuple) else (o,)):
                assert np.array_equal(a, b), f"{name}: backends disagree"
        row = f"{name:<22}" + "".join(f"{times[b] * 1e3:>10.2f}ms" for b in impls)
        if "cython" in times:
            row += f"   {times['python'] / times['cython']:>7.1f}x"
        print(row)


if __name__ == "__main__":
    main()
