"""Explicit one-step methods, the integrator registry and a sequential solver."""
from __future__ import annotations

import math
import time
from dataclasses import dataclass

import numpy as np

from . import kernels
from .core import (IvpProblem, NumericalBlowupError, OneStepIntegrator,
                   ValidationError, as_rhs, as_state, uniform_grid)

__all__ = [
    "Trajectory",
    "euler_step",
    "rk4_step",
    "sequential_solve",
    "EULER",
    "RK4",
    "register_integrator",
    "get_integrator",
    "integrator_registry",
    "with_delay",
]


@dataclass(frozen=True)
class Trajectory:
    times: np.ndarray
    values: np.ndarray  # shape (len(times), d)

    def __post_init__(self):
        if len(self.times) != len(self.values):
            raise ValueError("times and values differ in length")
        if len(self.times) > 1 and not np.all(np.diff(self.times) > 0):
            raise ValueError("times must be strictly increasing")

    def __len__(self):
        return len(self.times)


def _euler(delta, t, y, rhs):
    return y + delta * np.asarray(rhs(t, y), dtype=np.float64)


def _rk4(delta, t, y, rhs):
    # stage order and summation order are fixed; the native kernel mirrors them
    k1 = np.asarray(rhs(t, y), dtype=np.float64)
    k2 = np.asarray(rhs(t + delta / 2, y + (delta / 2) * k1), dtype=np.float64)
    k3 = np.asarray(rhs(t + delta / 2, y + (delta / 2) * k2), dtype=np.float64)
    k4 = np.asarray(rhs(t + delta, y + delta * k3), dtype=np.float64)
    return y + (delta / 6) * (k1 + 2 * k2 + 2 * k3 + k4)


def _check_step_args(delta, t, y):
    if not (math.isfinite(delta) and delta > 0):
        raise ValidationError("delta", f"step size must be finite and > 0, got {delta}")
    if not math.isfinite(t):
        raise ValidationError("t", f"time must be finite, got {t}")
    return as_state(y, "y")


def euler_step(delta, t, y, rhs):
    """Forward Euler: ``y + delta * f(t, y)``."""
    y = _check_step_args(delta, t, y)
    return _euler(float(delta), float(t), y, as_rhs(rhs))


def rk4_step(delta, t, y, rhs):
    """Classical fourth-order Runge-Kutta step (four evaluations of ``rhs``)."""
    y = _check_step_args(delta, t, y)
    return _rk4(float(delta), float(t), y, as_rhs(rhs))


EULER = OneStepIntegrator("euler", _euler, "forward Euler, order 1", kernel_id=0)
RK4 = OneStepIntegrator("rk4", _rk4, "classical Runge-Kutta, order 4", kernel_id=1)

_REGISTRY: dict[str, OneStepIntegrator] = {"euler": EULER, "rk4": RK4}


def register_integrator(integrator: OneStepIntegrator, replace: bool = False) -> None:
    """Make ``integrator`` selectable by name (CLI, configs, catalog listing)."""
    if not isinstance(integrator, OneStepIntegrator):
        raise TypeError("expected a OneStepIntegrator")
    if integrator.name in _REGISTRY and not replace:
        raise ValidationError("integrator", f"{integrator.name!r} is already registered")
    _REGISTRY[integrator.name] = integrator


def get_integrator(name) -> OneStepIntegrator:
    if isinstance(name, OneStepIntegrator):
        return name
    try:
        return _REGISTRY[name]
    except KeyError:
        raise ValidationError(
            "integrator", f"unknown integrator {name!r}; known: {sorted(_REGISTRY)}"
        ) from None


def integrator_registry() -> dict[str, OneStepIntegrator]:
    return dict(_REGISTRY)


def with_delay(integrator, seconds: float) -> OneStepIntegrator:
    """Wrap ``integrator`` so every step first sleeps ``seconds``.

    Models an expensive fine propagator. The sleep releases the GIL, so the
    threaded fine stage overlaps the delays. The wrapper has no kernel id and
    always runs on the Python path; its results equal the wrapped method's.
    """
    integrator = get_integrator(integrator)
    if not seconds > 0:
        return integrator
    inner = integrator.step

    def step(delta, t, y, rhs):
        time.sleep(seconds)
        return inner(delta, t, y, rhs)

    return OneStepIntegrator(f"{integrator.name}+delay", step,
                             f"{integrator.name} with {seconds * 1e3:g} ms per step")


def sequential_solve(n_steps, a, b, y0, rhs, integrator) -> Trajectory:
    """Integrate ``[a, b]`` in ``n_steps`` uniform steps, left to right.

    This is the plain serial fine solve that parareal converges to; with
    ``n_steps = N*M`` it visits the same times as the parareal fine mesh.
    """
    problem = IvpProblem(rhs, a, b, y0)
    if isinstance(n_steps, bool) or int(n_steps) != n_steps or n_steps < 1:
        raise ValidationError("n_steps", f"must be an integer >= 1, got {n_steps!r}")
    n_steps = int(n_steps)
    integrator = get_integrator(integrator)
    times = uniform_grid(problem.a, problem.b, n_steps)
    delta = (problem.b - problem.a) / n_steps
    try:
        values = kernels.sweep(integrator, problem.rhs, times, delta, problem.y0)
    except NumericalBlowupError as exc:
        raise exc.at(stage="sequential")
    return Trajectory(times, values)
