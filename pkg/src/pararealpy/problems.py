"""Built-in problem catalog.

Right-hand sides here are written with :mod:`math` (libm) rather than numpy
ufuncs so that the Python fallback and the compiled kernel evaluate them
identically. Each catalog entry carries a ``kernel_id`` understood by
``_kernel``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from .core import IvpProblem, RhsFunction, ValidationError

__all__ = ["ProblemSpec", "register_problem", "get_problem", "problem_registry"]


@dataclass(frozen=True)
class ProblemSpec:
    name: str
    rhs: RhsFunction
    a: float
    b: float
    y0: tuple
    closed_form: Optional[Callable] = None
    description: str = ""
    defaults: dict = field(default_factory=dict)

    def problem(self, y0=None) -> IvpProblem:
        return IvpProblem(self.rhs, self.a, self.b, self.y0 if y0 is None else y0)


def _zero(t, y):
    return np.zeros_like(y)


def _linear(t, y):
    return np.array(y, dtype=np.float64)


def _sin_ty(t, y):
    return np.array([math.sin(t * v) for v in y.tolist()])


def _sin_t_exp_t(t, y):
    return np.full(y.shape[0], math.sin(t) * math.exp(t))


def _linear_exact(t):
    return np.array([math.exp(t)])


def _sin_t_exp_t_exact(t, a=-20.0, y0=10.0):
    # antiderivative of sin(t) e^t is e^t (sin t - cos t) / 2
    def prim(s):
        return math.exp(s) * (math.sin(s) - math.cos(s)) / 2
    return np.array([y0 + prim(t) - prim(a)])


_REGISTRY: dict[str, ProblemSpec] = {}


def register_problem(spec: ProblemSpec, replace: bool = False) -> None:
    if spec.name in _REGISTRY and not replace:
        raise ValidationError("problem", f"{spec.name!r} is already registered")
    _REGISTRY[spec.name] = spec


def get_problem(name) -> ProblemSpec:
    if isinstance(name, ProblemSpec):
        return name
    try:
        return _REGISTRY[name]
    except KeyError:
        raise ValidationError(
            "problem", f"unknown problem {name!r}; known: {sorted(_REGISTRY)}"
        ) from None


def problem_registry() -> dict[str, ProblemSpec]:
    return dict(_REGISTRY)


_SHOWCASE = {"coarse": "euler", "fine": "euler", "n_coarse": 10, "n_fine": 500,
             "iterations": 10}

register_problem(ProblemSpec(
    "sin_ty", RhsFunction(_sin_ty, "sin_ty", 2, "f = sin(t*y)"), -20.0, 20.0, (10.0,),
    description="y' = sin(t y), y(-20) = 10; slow parareal convergence",
    defaults=_SHOWCASE,
))
register_problem(ProblemSpec(
    "sin_t_exp_t",
    RhsFunction(_sin_t_exp_t, "sin_t_exp_t", 3, "f = sin(t)*exp(t)"),
    -20.0, 20.0, (10.0,), closed_form=_sin_t_exp_t_exact,
    description="y' = sin(t) e^t, y(-20) = 10; f independent of y",
    defaults=_SHOWCASE,
))
register_problem(ProblemSpec(
    "linear", RhsFunction(_linear, "linear", 1, "f = y"), 0.0, 1.0, (1.0,),
    closed_form=_linear_exact, description="y' = y, y(0) = 1; exact solution e^t",
    defaults={"n_coarse": 4, "n_fine": 25, "iterations": 4},
))
register_problem(ProblemSpec(
    "zero", RhsFunction(_zero, "zero", 0, "f = 0"), 0.0, 1.0, (1.0,),
    closed_form=lambda t: np.array([1.0]),
    description="y' = 0, y(0) = 1; constant solution",
    defaults={"n_coarse": 4, "n_fine": 3, "iterations": 2},
))
