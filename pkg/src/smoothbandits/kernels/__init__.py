"""Kernel backend selection.

The numba kernels are used unless ``SBL_DISABLE_NUMBA`` is set to a true
value (``1``, ``true``, ``yes``) or numba cannot be imported, in which case
the pure-numpy kernels are used.  Both backends expose the same functions
and produce the same arm sequences.
"""

import os
from types import ModuleType

from . import _numpy as numpy_backend

try:
    from . import _numba as numba_backend
except ImportError:  # pragma: no cover - numba is a declared dependency
    numba_backend = None

_flag = os.environ.get("SBL_DISABLE_NUMBA", "").strip().lower()
DISABLED = _flag in ("1", "true", "yes", "on")

BACKENDS: dict[str, ModuleType] = {"numpy": numpy_backend}
if numba_backend is not None:
    BACKENDS["numba"] = numba_backend

BACKEND_NAME = "numpy" if DISABLED or numba_backend is None else "numba"


def get_backend(name: str | None = None) -> ModuleType:
    """Kernel module by name; ``None`` returns the active backend."""
    name = BACKEND_NAME if name is None else name
    try:
        return BACKENDS[name]
    except KeyError:
        raise ValueError(f"unknown or unavailable backend {name!r}; have {sorted(BACKENDS)}") from None
