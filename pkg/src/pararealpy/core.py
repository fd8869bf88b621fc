"""Problem definition, time meshes and the one-step integrator abstraction.

States are 1-D ``float64`` numpy arrays of fixed length ``d``. Every grid in
the package is generated by :func:`grid_point`, so a coarse boundary, the
matching fine-mesh endpoint and the matching point of a sequential sweep over
``N*M`` steps are the same double, bit for bit.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

__all__ = [
    "ValidationError",
    "NumericalBlowupError",
    "RhsFunction",
    "IvpProblem",
    "OneStepIntegrator",
    "TimePartition",
    "FineMesh",
    "as_state",
    "as_rhs",
    "grid_point",
    "uniform_grid",
    "make_partition",
    "make_fine_mesh",
]


class ValidationError(ValueError):
    """Invalid user input. ``field`` names the offending parameter."""

    def __init__(self, field: str, message: str):
        super().__init__(f"{field}: {message}")
        self.field = field
        self.message = message


class NumericalBlowupError(ArithmeticError):
    """A state became NaN or infinite during integration.

    ``iteration`` is ``None`` outside the parareal engine (e.g. a plain
    sequential sweep); ``subdomain`` is ``None`` for coarse-sweep failures
    that are not tied to one fine subdomain.
    """

    def __init__(self, message: str, iteration: Optional[int] = None,
                 subdomain: Optional[int] = None, step: Optional[int] = None,
                 stage: str = "fine"):
        loc = ", ".join(f"{k}={v}" for k, v in
                        (("stage", stage), ("iteration", iteration),
                         ("subdomain", subdomain), ("step", step))
                        if v is not None)
        super().__init__(f"{message} ({loc})")
        self.iteration = iteration
        self.subdomain = subdomain
        self.step = step
        self.stage = stage

    def at(self, **where) -> "NumericalBlowupError":
        """Return a copy with extra location fields filled in."""
        kw = dict(iteration=self.iteration, subdomain=self.subdomain,
                  step=self.step, stage=self.stage)
        kw.update(where)
        base = str(self).split(" (")[0]
        return NumericalBlowupError(base, **kw)


def as_state(y, name: str = "y0") -> np.ndarray:
    """Coerce ``y`` to a finite, 1-D float64 array (a fresh copy)."""
    arr = np.array(y, dtype=np.float64).reshape(-1)
    if arr.size == 0:
        raise ValidationError(name, "state must have at least one component")
    if not np.all(np.isfinite(arr)):
        raise ValidationError(name, "state components must be finite")
    return arr


@dataclass(frozen=True)
class RhsFunction:
    """Right-hand side ``f(t, y)`` of ``y' = f(t, y)``.

    ``kernel_id`` marks the catalog functions that the compiled sweep kernel
    knows how to evaluate natively; user functions leave it as ``None`` and
    always run through the Python sweep.
    """

    func: Callable
    name: str = "user"
    kernel_id: Optional[int] = None
    description: str = ""

    def __call__(self, t, y):
        return self.func(t, y)


def as_rhs(f) -> RhsFunction:
    if isinstance(f, RhsFunction):
        return f
    if not callable(f):
        raise ValidationError("rhs", "right-hand side must be callable")
    return RhsFunction(f, name=getattr(f, "__name__", "user"))


@dataclass(frozen=True)
class IvpProblem:
    """Initial-value problem ``y' = f(t, y)``, ``y(a) = y0`` on ``[a, b]``."""

    rhs: RhsFunction
    a: float
    b: float
    y0: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "rhs", as_rhs(self.rhs))
        a, b = float(self.a), float(self.b)
        _check_interval(a, b)
        object.__setattr__(self, "a", a)
        object.__setattr__(self, "b", b)
        y0 = as_state(self.y0)
        y0.flags.writeable = False
        object.__setattr__(self, "y0", y0)

    @property
    def dimension(self) -> int:
        return self.y0.shape[0]


@dataclass(frozen=True)
class OneStepIntegrator:
    """A one-step map ``(delta, t, y, rhs) -> y_next``.

    ``kernel_id`` identifies the built-in methods the compiled kernel
    implements; anything else is driven step by step from Python.
    """

    name: str
    step: Callable
    description: str = ""
    kernel_id: Optional[int] = None

    def __call__(self, delta, t, y, rhs):
        return self.step(delta, t, y, rhs)


def _check_interval(a: float, b: float) -> None:
    if not (math.isfinite(a) and math.isfinite(b)):
        raise ValidationError("interval", f"endpoints must be finite, got [{a}, {b}]")
    if not a < b:
        raise ValidationError("interval", f"need a < b, got [{a}, {b}]")


def _check_count(value, name: str) -> int:
    if isinstance(value, bool) or int(value) != value:
        raise ValidationError(name, f"must be an integer, got {value!r}")
    value = int(value)
    if value < 1:
        raise ValidationError(name, f"must be >= 1, got {value}")
    return value


def grid_point(a: float, b: float, i: int, n: int) -> float:
    """Point ``i`` of the uniform ``n``-interval grid on ``[a, b]``.

    Computed as ``a + (i/n)*(b - a)`` with both endpoints exact. Because
    ``i/n`` is a correctly rounded quotient, ``grid_point(a, b, i*M, n*M)``
    equals ``grid_point(a, b, i, n)`` bitwise.
    """
    if i == 0:
        return a
    if i == n:
        return b
    return a + (i / n) * (b - a)


def uniform_grid(a: float, b: float, n: int) -> np.ndarray:
    """All ``n + 1`` points of :func:`grid_point` as an array."""
    pts = a + (np.arange(n + 1, dtype=np.float64) / n) * (b - a)
    pts[0] = a
    pts[-1] = b
    return pts


@dataclass(frozen=True)
class TimePartition:
    a: float
    b: float
    n_sub: int
    boundaries: np.ndarray
    delta_coarse: float

    def subdomain(self, n: int) -> tuple[float, float]:
        return float(self.boundaries[n]), float(self.boundaries[n + 1])


@dataclass(frozen=True)
class FineMesh:
    """Per-subdomain fine points; ``points[n, m]`` is ``t_n^m``."""

    partition: TimePartition
    n_steps: int
    delta_fine: float
    points: np.ndarray = field(repr=False)

    def flat(self) -> np.ndarray:
        """The global fine grid, shared boundaries listed once."""
        n, m = self.points.shape
        out = np.empty(self.partition.n_sub * self.n_steps + 1)
        out[:-1] = self.points[:, :-1].reshape(-1)
        out[-1] = self.points[-1, -1]
        return out


def make_partition(a: float, b: float, n_sub: int) -> TimePartition:
    a, b = float(a), float(b)
    _check_interval(a, b)
    n_sub = _check_count(n_sub, "n_coarse")
    bounds = uniform_grid(a, b, n_sub)
    bounds.flags.writeable = False
    return TimePartition(a, b, n_sub, bounds, (b - a) / n_sub)


def make_fine_mesh(partition: TimePartition, n_steps: int) -> FineMesh:
    """Split every coarse subinterval into ``n_steps`` uniform fine steps.

    The fine step is ``(b - a)/(N*M)`` rounded once, the same value a
    sequential sweep over ``N*M`` steps uses.
    """
    m = _check_count(n_steps, "n_fine")
    n = partition.n_sub
    glob = uniform_grid(partition.a, partition.b, n * m)
    idx = np.arange(n)[:, None] * m + np.arange(m + 1)[None, :]
    points = glob[idx]
    points.flags.writeable = False
    return FineMesh(partition, m, (partition.b - partition.a) / (n * m), points)
