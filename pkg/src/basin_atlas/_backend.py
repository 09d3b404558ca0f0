"""Selects the compiled kernels when available, else the pure-Python ones.

Set ``BASIN_ATLAS_BACKEND=python`` to force the fallback.
"""
import os

from . import _pykernels

python = _pykernels

try:
    from . import _ckernels as compiled
except ImportError:  # extension not built
    compiled = None

if compiled is not None and os.environ.get("BASIN_ATLAS_BACKEND", "").lower() != "python":
    kernels = compiled
    NAME = "compiled"
else:
    kernels = _pykernels
    NAME = "python"

CAPTURED = _pykernels.CAPTURED
TMAX = _pykernels.TMAX
BLOWUP = _pykernels.BLOWUP
UNDERFLOW = _pykernels.UNDERFLOW
BUDGET = _pykernels.BUDGET


def get(name=None):
    """Return the kernel module for ``name`` ('compiled' or 'python'), or the active one."""
    if name is None:
        return kernels
    if name == "python":
        return _pykernels
    if name == "compiled":
        if compiled is None:
            raise ImportError("compiled kernels are not built; run `pip install -e .`")
        return compiled
    raise ValueError(f"unknown backend {name!r}")
