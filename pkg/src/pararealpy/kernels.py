"""Fine-sweep backends.

The compiled ``_kernel`` extension is used whenever it imported and both
the integrator and the right-hand side carry a ``kernel_id``. Anything else
(user callables, wrapped integrators) runs through :func:`python_sweep`.
Both paths produce bitwise-identical states.

Set ``PARAREALPY_BACKEND=python`` to disable the extension at import time.
"""
from __future__ import annotations

import contextlib
import os

import numpy as np

from .core import NumericalBlowupError, ValidationError

try:
    from . import _kernel
except ImportError:  # pragma: no cover - depends on the build
    _kernel = None

BACKENDS = ("native", "python")

_backend = "python" if (_kernel is None or
                        os.environ.get("PARAREALPY_BACKEND") == "python") else "native"


def native_available() -> bool:
    return _kernel is not None


def get_backend() -> str:
    return _backend


def set_backend(name: str) -> None:
    global _backend
    if name not in BACKENDS:
        raise ValidationError("backend", f"unknown backend {name!r}")
    if name == "native" and _kernel is None:
        raise ValidationError("backend", "compiled kernel is not available")
    _backend = name


@contextlib.contextmanager
def use_backend(name: str):
    prev = _backend
    set_backend(name)
    try:
        yield
    finally:
        set_backend(prev)


def python_sweep(integrator, rhs, times, delta, y_start):
    """Apply ``integrator`` ``len(times) - 1`` times starting from ``y_start``."""
    n = len(times) - 1
    d = y_start.shape[0]
    out = np.empty((n + 1, d))
    out[0] = y_start
    y = out[0].copy()
    ts = np.asarray(times, dtype=np.float64).tolist()
    step = integrator.step
    # overflow is detected below and reported with its step index
    with np.errstate(over="ignore", invalid="ignore"):
        for m in range(n):
            y = np.asarray(step(delta, ts[m], y, rhs), dtype=np.float64)
            if y.shape != (d,):
                raise ValidationError(
                    "rhs", f"step returned shape {y.shape}, expected ({d},)")
            if not np.isfinite(y).all():
                raise NumericalBlowupError("non-finite state", step=m)
            out[m + 1] = y
    return out


def _native_sweep(integrator, rhs, times, delta, y_start):
    n = len(times) - 1
    out = np.empty((n + 1, y_start.shape[0]))
    out[0] = y_start
    bad = _kernel.sweep(integrator.kernel_id, rhs.kernel_id,
                        np.ascontiguousarray(times, dtype=np.float64),
                        float(delta), out)
    if bad >= 0:
        raise NumericalBlowupError("non-finite state", step=bad)
    return out


def sweep(integrator, rhs, times, delta, y_start):
    """Return the ``(len(times), d)`` array of states visited.

    ``times[m]`` is the start time of step ``m``; the last entry of
    ``times`` only fixes the step count. Raises
    :class:`NumericalBlowupError` with ``step`` set on NaN/Inf.
    """
    if (_backend == "native" and integrator.kernel_id is not None
            and rhs.kernel_id is not None):
        return _native_sweep(integrator, rhs, times, delta, y_start)
    return python_sweep(integrator, rhs, times, delta, y_start)
