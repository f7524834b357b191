"""Backend selection for the hot loops.

The compiled ``_kernels`` extension is used when it imports; otherwise the
numpy fallback in ``_kernels_py``. Set ``ESISAV_PURE_PYTHON=1`` to force the
fallback (the test-suite compares both).
"""

import os

from . import _kernels_py as python_backend

compiled_backend = None
if os.environ.get("ESISAV_PURE_PYTHON", "") not in ("1", "true", "yes"):
    try:
        from . import _kernels as compiled_backend  # type: ignore[no-redef]
    except ImportError:
        compiled_backend = None

backend = compiled_backend if compiled_backend is not None else python_backend
BACKEND = backend.NAME

cubic_derivative = backend.cubic_derivative
quartic_sum = backend.quartic_sum
spectral_quadratic = backend.spectral_quadratic
implicit_update = backend.implicit_update

_NAMES = ("cubic_derivative", "quartic_sum", "spectral_quadratic", "implicit_update")


def set_backend(name: str) -> str:
    """Switch every kernel to ``"cython"`` or ``"python"``; returns the previous name."""
    global backend, BACKEND, cubic_derivative, quartic_sum, spectral_quadratic, implicit_update
    if name == python_backend.NAME:
        new = python_backend
    elif compiled_backend is not None and name == compiled_backend.NAME:
        new = compiled_backend
    else:
        raise ValueError(f"kernel backend {name!r} is not available")
    previous = BACKEND
    backend, BACKEND = new, new.NAME
    cubic_derivative = new.cubic_derivative
    quartic_sum = new.quartic_sum
    spectral_quadratic = new.spectral_quadratic
    implicit_update = new.implicit_update
    return previous


__all__ = [
    "BACKEND",
    "set_backend",
    "backend",
    "compiled_backend",
    "python_backend",
    "cubic_derivative",
    "quartic_sum",
    "spectral_quadratic",
    "implicit_update",
]
