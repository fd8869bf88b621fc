"""Error metrics against reference solutions and empirical convergence order."""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from ..core import IvpProblem, ValidationError
from ..integrators import Trajectory, get_integrator, sequential_solve

__all__ = [
    "ReferenceSolution",
    "ErrorReport",
    "OrderIndeterminateError",
    "boundary_errors",
    "estimate_order",
]


class OrderIndeterminateError(ValueError):
    """The integrator is exact (to rounding) on the test problem."""


@dataclass(frozen=True)
class ReferenceSolution:
    """Either a closed form ``t -> state`` or a stored trajectory.

    A ``sequential-fine`` reference is looked up by exact time match, so it
    must visit the coarse boundaries; :meth:`sequential_fine` guarantees that.
    """

    kind: str
    evaluator: object

    @classmethod
    def closed_form(cls, func: Callable) -> "ReferenceSolution":
        return cls("closed-form", func)

    @classmethod
    def from_trajectory(cls, trajectory: Trajectory) -> "ReferenceSolution":
        return cls("sequential-fine", trajectory)

    @classmethod
    def sequential_fine(cls, problem: IvpProblem, fine, n_coarse: int,
                        n_fine: int) -> "ReferenceSolution":
        traj = sequential_solve(n_coarse * n_fine, problem.a, problem.b,
                                problem.y0, problem.rhs, get_integrator(fine))
        return cls.from_trajectory(traj)

    def at(self, times) -> np.ndarray:
        times = np.asarray(times, dtype=np.float64)
        if self.kind == "closed-form":
            return np.array([np.asarray(self.evaluator(float(t)), dtype=np.float64)
                             .reshape(-1) for t in times])
        traj = self.evaluator
        idx = np.searchsorted(traj.times, times)
        ok = (idx < len(traj.times))
        ok[ok] = traj.times[idx[ok]] == times[ok]
        if not ok.all():
            missing = times[~ok][0]
            raise ValidationError("reference",
                                  f"reference trajectory does not visit t = {missing!r}")
        return traj.values[idx]


@dataclass(frozen=True)
class ErrorReport:
    """Entry ``k`` belongs to iteration ``k``; entry 0 is the initial coarse sweep."""

    per_iteration_boundary_sup: list
    right_endpoint_error: list

    def to_dict(self) -> dict:
        return {"per_iteration_boundary_sup": list(self.per_iteration_boundary_sup),
                "right_endpoint_error": list(self.right_endpoint_error)}


def boundary_errors(result, reference: ReferenceSolution) -> ErrorReport:
    if result.history is None:
        raise ValidationError("history",
                              "boundary_errors needs a result solved with keep_history=True")
    ref = reference.at(result.boundary_times)  # (N+1, d)
    diff = np.abs(result.history.y_corr - ref[:, None, :])  # (N+1, K+1, d)
    sup = diff.max(axis=(0, 2))
    right = diff[-1].max(axis=1)
    return ErrorReport([float(v) for v in sup], [float(v) for v in right])


def estimate_order(integrator, problem: IvpProblem, exact: Callable,
                   step_sizes, rounding_factor: float = 64.0) -> float:
    """Least-squares slope of log(global error at ``b``) against log(h).

    Each ``h`` must divide ``b - a`` into a whole number of steps. Errors at
    or below ``rounding_factor`` ulps of the exact endpoint value count as
    zero and make the order indeterminate.
    """
    hs = [float(h) for h in step_sizes]
    if len(hs) < 3:
        raise ValidationError("step_sizes", "need at least 3 step sizes")
    integrator = get_integrator(integrator)
    span = problem.b - problem.a
    target = np.asarray(exact(problem.b), dtype=np.float64).reshape(-1)
    floor = rounding_factor * np.finfo(np.float64).eps * max(1.0, float(np.max(np.abs(target))))
    errs = []
    for h in hs:
        n = round(span / h)
        if n < 1 or not math.isclose(n * h, span, rel_tol=1e-12):
            raise ValidationError("step_sizes", f"h = {h} does not divide [a, b]")
        traj = sequential_solve(n, problem.a, problem.b, problem.y0, problem.rhs, integrator)
        err = float(np.max(np.abs(traj.values[-1] - target)))
        if err <= floor:
            raise OrderIndeterminateError(
                f"order indeterminate: {integrator.name} is exact to rounding at h = {h}")
        errs.append(err)
    slope, _ = np.polyfit(np.log(hs), np.log(errs), 1)
    return float(slope)
