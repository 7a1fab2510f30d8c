"""Kernel backend selection.

The compiled extension is used when it imports; otherwise the numpy
fallback is used.  Setting ``LOOPGAS_PURE_PYTHON=1`` forces the fallback.
"""

from __future__ import annotations

import os
from types import ModuleType

from . import _kernels_py


def _load_compiled() -> ModuleType | None:
    try:
        from . import _kernels
    except ImportError:
        return None
    return _kernels


compiled = _load_compiled()

if compiled is not None and not os.environ.get("LOOPGAS_PURE_PYTHON"):
    kernels: ModuleType = compiled
    BACKEND = "cython"
else:
    kernels = _kernels_py
    BACKEND = "python"


def get_kernels(name: str) -> ModuleType:
    """Return the kernel module called ``name`` (``"cython"`` or ``"python"``)."""
    if name == "python":
        return _kernels_py
    if name == "cython":
        if compiled is None:
            raise ImportError("compiled kernels are not built; run `pip install -e .`")
        return compiled
    raise ValueError(f"unknown kernel backend {name!r}")
