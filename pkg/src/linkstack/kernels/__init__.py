"""Hot numeric kernels with a compiled core and a pure-Python fallback.

The Cython extension (`_speedups`) and the reference module (`pyref`)
implement the same routines with the same operation order, so results agree
across backends: tree growing and forest prediction bit-for-bit, the rest to
float rounding. Selection happens at import; set LINKSTACK_KERNELS=python to
force the fallback (used by the kernel benchmark and equivalence tests).
"""

from __future__ import annotations

import os

from . import pyref

_FORCED = os.environ.get("LINKSTACK_KERNELS", "").strip().lower()

if _FORCED == "python":
    _impl = pyref
    BACKEND = "python"
else:
    try:
        from . import _speedups as _impl  # type: ignore[attr-defined]

        BACKEND = "compiled"
    except ImportError:
        _impl = pyref
        BACKEND = "python"

grow_tree = _impl.grow_tree
predict_forest = _impl.predict_forest
train_skipgram = _impl.train_skipgram
betweenness_and_load = _impl.betweenness_and_load
sbm_sweep = _impl.sbm_sweep


def available_backends() -> list[str]:
    names = ["python"]
    try:
        from . import _speedups  # noqa: F401

        names.insert(0, "compiled")
    except ImportError:
        pass
    return names


def backend_module(name: str):
    """Fetch a specific backend module by name ('compiled' or 'python')."""
    if name == "python":
        return pyref
    if name == "compiled":
        from . import _speedups

        return _speedups
    raise ValueError(f"unknown kernel backend: {name!r}")
