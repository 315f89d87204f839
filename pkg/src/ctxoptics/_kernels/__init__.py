"""Enumeration kernels for the classical-bound search.

The compiled Cython kernel is used when it was built; otherwise the numpy
kernel is selected. Set ``CTXOPTICS_PURE_PYTHON=1`` to force the fallback.
"""
import os

from . import _enum_py

KERNELS = {"python": _enum_py.best_in_block}

try:
    from . import _enum_cy
except ImportError:  # extension not built
    _enum_cy = None
else:
    KERNELS["cython"] = _enum_cy.best_in_block

if _enum_cy is not None and os.environ.get("CTXOPTICS_PURE_PYTHON", "") in ("", "0"):
    BACKEND = "cython"
else:
    BACKEND = "python"

best_in_block = KERNELS[BACKEND]


def get_kernel(name=None):
    """Kernel by name (``"cython"`` or ``"python"``); ``None`` gives the default."""
    if name is None:
        return best_in_block
    try:
        return KERNELS[name]
    except KeyError:
        raise ValueError(f"kernel {name!r} unavailable; have {sorted(KERNELS)}") from None
