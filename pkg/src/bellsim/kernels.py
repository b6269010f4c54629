"""Backend selection for the trial-resolution kernel.

The compiled extension is preferred when importable; the numpy implementation
is the fallback.  Both produce bit-identical outputs for identical inputs, so
the choice affects speed only.  Set ``BELLSIM_NO_EXTENSION=1`` to force the
numpy backend (used by the benchmark and the equivalence tests).
"""

from __future__ import annotations

import os

from . import _kernels_py
from ._kernels_py import (  # noqa: F401  (re-exported constants)
    MODEL_ID_DETERMINISTIC,
    MODEL_ID_GISIN_GISIN,
    MODEL_ID_QUANTUM,
    N_DRAW_COLS,
    VALID_DOUBLE_FIRE,
    VALID_OK,
)

try:
    from . import _ckernel
except ImportError:  # extension not built
    _ckernel = None

BACKEND_COMPILED = "compiled"
BACKEND_PYTHON = "python"


def available_backends() -> tuple[str, ...]:
    if _ckernel is not None:
        return (BACKEND_COMPILED, BACKEND_PYTHON)
    return (BACKEND_PYTHON,)


def default_backend() -> str:
    if _ckernel is None or os.environ.get("BELLSIM_NO_EXTENSION"):
        return BACKEND_PYTHON
    return BACKEND_COMPILED


def get_resolver(backend: str | None = None):
    """Return the ``resolve_chunk`` callable for a backend name."""
    if backend is None:
        backend = default_backend()
    if backend == BACKEND_PYTHON:
        return _kernels_py.resolve_chunk
    if backend == BACKEND_COMPILED:
        if _ckernel is None:
            raise RuntimeError("compiled kernel requested but the extension is not built")
        return _ckernel.resolve_chunk
    raise ValueError(f"unknown kernel backend {backend!r}")
