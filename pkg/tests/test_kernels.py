"""The compiled and pure-Python kernels must agree exactly."""
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from rtcheck import kernels
from rtcheck.semantics import _reverse

BACKENDS = kernels.backends()


def test_python_backend_always_available():
    assert "python" in BACKENDS
    assert kernels.BACKEND in BACKENDS


@st.composite
def graphs(draw):
    n = draw(st.integers(1, 40))
    degs = draw(st.lists(st.integers(1, 4), min_size=n, max_size=n))
    succ = [draw(st.integers(0, n - 1)) for d in degs for _ in range(d)]
    ptr = np.zeros(n + 1, dtype=np.int64)
    ptr[1:] = np.cumsum(degs)
    succ = np.array(succ, dtype=np.int32)
    target = np.array(draw(st.lists(st.booleans(), min_size=n, max_size=n)), dtype=np.uint8)
    expanded = np.array(draw(st.lists(st.booleans(), min_size=n, max_size=n)), dtype=np.uint8)
    if draw(st.booleans()):
        expanded[:] = 1
    return ptr, succ, target, expanded


def _all(fn_name, *args):
    return {name: getattr(mod, fn_name)(*args) for name, mod in BACKENDS.items()}


def _agree(results):
    values = list(results.values())
    for v in values[1:]:
        if isinstance(v, tuple):
            for a, b in zip(values[0], v):
                np.testing.assert_array_equal(a, b)
        else:
            np.testing.assert_array_equal(values[0], v)
    return values[0]


@settings(max_examples=150, deadline=None)
@given(graphs())
def test_backends_agree(graph):
    ptr, succ, target, expanded = graph
    rptr, rsrc, _ = _reverse(ptr, succ)
    n = len(ptr) - 1
    ax = _agree(_all("ax", ptr, succ, target, expanded))
    ex = _agree(_all("ex", ptr, succ, target, expanded))
    allowed = (1 - target).astype(np.uint8)
    _agree(_all("backward_reach", rptr, rsrc, target, allowed))
    depth = _agree(_all("inevitability_depth", ptr, rptr, rsrc, target, expanded))
    for limit in (-1, 0, 2):
        _agree(_all("bfs", ptr, succ, np.array([0], dtype=np.int32), allowed | (np.arange(n) == 0), limit))
    # meaning checks against direct definitions
    for u in range(n):
        row = succ[ptr[u]:ptr[u + 1]]
        assert ax[u] == (bool(expanded[u]) and all(target[v] for v in row))
        assert ex[u] == (bool(expanded[u]) and any(target[v] for v in row))
        assert (depth[u] == 1) == bool(ax[u])


def test_inevitability_depth_on_a_chain():
    # 0 -> 1 -> 2 -> 3(target) -> 3
    ptr = np.array([0, 1, 2, 3, 4], dtype=np.int64)
    succ = np.array([1, 2, 3, 3], dtype=np.int32)
    rptr, rsrc, _ = _reverse(ptr, succ)
    target = np.array([0, 0, 0, 1], dtype=np.uint8)
    for mod in BACKENDS.values():
        d = mod.inevitability_depth(ptr, rptr, rsrc, target, np.ones(4, dtype=np.uint8))
        assert d.tolist() == [3, 2, 1, 1]


def test_bfs_depth_limit():
    ptr = np.array([0, 1, 2, 3, 4], dtype=np.int64)
    succ = np.array([1, 2, 3, 3], dtype=np.int32)
    ones = np.ones(4, dtype=np.uint8)
    for mod in BACKENDS.values():
        dist, parent = mod.bfs(ptr, succ, np.array([0], dtype=np.int32), ones, 2)
        assert dist.tolist() == [0, 1, 2, -1]
        assert parent.tolist() == [-1, 0, 1, -1]


@pytest.mark.skipif("cython" not in BACKENDS, reason="compiled kernels not built")
def test_compiled_backend_selected_by_default():
    import os

    if not os.environ.get("RTCHECK_PURE_PYTHON"):
        assert kernels.BACKEND == "cython"


def test_pure_python_fallback_runs_the_pipeline():
    import json
    import os
    import subprocess
    import sys
    from pathlib import Path

    sample = Path(__file__).resolve().parent.parent / "samples" / "example.req"
    code = (
        "import sys, rtcheck.kernels as k; from rtcheck.cli import main; "
        "print(k.BACKEND, file=sys.stderr); sys.exit(main([sys.argv[1], '--format', 'json']))"
    )
    outs = {}
    for flag in ("1", ""):
        env = dict(os.environ, RTCHECK_PURE_PYTHON=flag)
        res = subprocess.run([sys.executable, "-c", code, str(sample)], capture_output=True, text=True, env=env)
        assert res.returncode == 1
        outs[res.stderr.strip()] = json.loads(res.stdout)
    assert "python" in outs
    assert len({json.dumps(v, sort_keys=True) for v in outs.values()}) == 1
