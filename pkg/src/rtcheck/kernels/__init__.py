"""Graph kernels behind the model checker.

The compiled extension ``_ckernels`` is used when it has been built;
otherwise the numpy/pure-Python ``_pykernels`` fallback is selected.  Set
``RTCHECK_PURE_PYTHON=1`` to force the fallback.
"""
import os

from . import _pykernels

INF = _pykernels.INF

if os.environ.get("RTCHECK_PURE_PYTHON"):
    _impl = _pykernels
else:
    try:
        from . import _ckernels as _impl
    except ImportError:  # extension not built
        _impl = _pykernels

BACKEND = "cython" if _impl is not _pykernels else "python"


def backends():
    """All importable implementations, keyed by name (used by tests and benchmarks)."""
    out = {"python": _pykernels}
    try:
        from . import _ckernels
    except ImportError:
        pass
    else:
        out["cython"] = _ckernels
    return out


ax = _impl.ax
ex = _impl.ex
backward_reach = _impl.backward_reach
inevitability_depth = _impl.inevitability_depth
bfs = _impl.bfs

__all__ = ["BACKEND", "INF", "ax", "ex", "backward_reach", "inevitability_depth", "bfs", "backends"]
