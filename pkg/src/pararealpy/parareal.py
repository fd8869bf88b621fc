"""The parareal engine.

Iteration indexing: ``k = 0`` is the initial coarse sweep and corrections run
``k = 1..K``. Correction ``k`` propagates the fine integrator from
``y_corr[n, k-1]`` on every subdomain (in parallel when asked), then sweeps
left to right::

    w[n+1, k]      = C(Delta, t_n, y_corr[n, k])
    y_corr[n+1, k] = w[n+1, k] - w[n+1, k-1] + z[n, M, k]

The predictor uses the corrected value of the *current* iteration.
"""
from __future__ import annotations

import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from . import kernels
from .core import (FineMesh, IvpProblem, NumericalBlowupError,
                   OneStepIntegrator, TimePartition, ValidationError, _check_count,
                   as_rhs, make_fine_mesh, make_partition)
from .integrators import Trajectory, get_integrator

__all__ = [
    "PararealConfig",
    "IterationHistory",
    "PararealResult",
    "initial_coarse_sweep",
    "fine_propagate_subdomain",
    "correction_sweep",
    "solve_parareal",
]


@dataclass(frozen=True)
class PararealConfig:
    n_coarse: int
    n_fine: int
    max_iterations: int
    stop_tolerance: Optional[float] = None
    parallel: bool = True
    keep_history: bool = True
    workers: Optional[int] = None

    def __post_init__(self):
        for name in ("n_coarse", "n_fine", "max_iterations"):
            object.__setattr__(self, name, _check_count(getattr(self, name), name))
        tol = self.stop_tolerance
        if tol is not None and not (float(tol) >= 0):
            raise ValidationError("stop_tolerance", f"must be >= 0, got {tol}")
        if self.workers is not None:
            object.__setattr__(self, "workers", _check_count(self.workers, "workers"))


@dataclass
class IterationHistory:
    """Per-iteration arrays; the trailing axis is the state dimension.

    ``w`` and ``y_corr`` have shape ``(N+1, K+1, d)``. ``z`` has shape
    ``(N, M+1, K+1, d)`` and its ``k = 0`` slice is unused (NaN).
    """

    w: np.ndarray
    y_corr: np.ndarray
    z: Optional[np.ndarray] = None

    @classmethod
    def allocate(cls, n_coarse, n_fine, iterations, d, keep_fine=True):
        w = np.full((n_coarse + 1, iterations + 1, d), np.nan)
        z = (np.full((n_coarse, n_fine + 1, iterations + 1, d), np.nan)
             if keep_fine else None)
        return cls(w, w.copy(), z)

    def truncate(self, iterations_run: int) -> "IterationHistory":
        k = iterations_run + 1
        z = None if self.z is None else self.z[:, :, :k].copy()
        return IterationHistory(self.w[:, :k].copy(), self.y_corr[:, :k].copy(), z)


@dataclass
class PararealResult:
    trajectory: Trajectory
    history: Optional[IterationHistory]
    iterations_run: int
    increments: list
    wall_times: list
    boundary_times: np.ndarray = field(repr=False)
    final_boundaries: np.ndarray = field(repr=False)


def initial_coarse_sweep(problem: IvpProblem, partition: TimePartition,
                         coarse: OneStepIntegrator) -> np.ndarray:
    """Serial coarse pass; returns the ``(N+1, d)`` boundary predictions."""
    try:
        return kernels.sweep(coarse, problem.rhs, partition.boundaries,
                             partition.delta_coarse, problem.y0)
    except NumericalBlowupError as exc:
        raise exc.at(stage="coarse", iteration=0, subdomain=exc.step, step=None)


def fine_propagate_subdomain(subdomain_index: int, y_start, mesh: FineMesh,
                             fine: OneStepIntegrator, rhs) -> np.ndarray:
    """Run ``M`` fine steps across one subdomain; returns ``(M+1, d)`` states."""
    y_start = np.asarray(y_start, dtype=np.float64)
    if not np.isfinite(y_start).all():
        raise NumericalBlowupError("non-finite start value",
                                   subdomain=subdomain_index, step=0)
    try:
        return kernels.sweep(get_integrator(fine), as_rhs(rhs), mesh.points[subdomain_index],
                             mesh.delta_fine, y_start)
    except NumericalBlowupError as exc:
        raise exc.at(subdomain=subdomain_index)


def correction_sweep(k: int, partition: TimePartition, coarse: OneStepIntegrator,
                     rhs, history: IterationHistory, fine_endpoints: np.ndarray) -> None:
    """Fill columns ``w[:, k]`` and ``y_corr[:, k]`` in place.

    ``fine_endpoints[n]`` is ``z[n, M, k]``.
    """
    w, yc = history.w, history.y_corr
    w[0, k] = yc[0, 0]
    yc[0, k] = yc[0, 0]
    bounds = partition.boundaries.tolist()
    delta = partition.delta_coarse
    step = coarse.step
    with np.errstate(over="ignore", invalid="ignore"):
        for n in range(partition.n_sub):
            pred = np.asarray(step(delta, bounds[n], yc[n, k], rhs), dtype=np.float64)
            w[n + 1, k] = pred
            yc[n + 1, k] = pred - w[n + 1, k - 1] + fine_endpoints[n]
            if not (np.isfinite(pred).all() and np.isfinite(yc[n + 1, k]).all()):
                raise NumericalBlowupError("non-finite corrected value", iteration=k,
                                           subdomain=n, stage="correction")


def _fine_stage(k, starts, mesh, fine, rhs, pool):
    n_sub = mesh.partition.n_sub

    def run(n):
        try:
            return fine_propagate_subdomain(n, starts[n], mesh, fine, rhs)
        except NumericalBlowupError as exc:
            raise exc.at(iteration=k)

    if pool is None:
        return [run(n) for n in range(n_sub)]
    # map() yields in submission order, so results land by subdomain index
    return list(pool.map(run, range(n_sub)))


def solve_parareal(problem: IvpProblem, config: PararealConfig,
                   coarse="euler", fine="euler") -> PararealResult:
    """Run up to ``config.max_iterations`` parareal corrections.

    With ``stop_tolerance`` set, stops after the first iteration whose
    sup-norm change of the corrected boundary values is ``<= stop_tolerance``.
    The numeric output does not depend on ``config.parallel``.
    """
    coarse = get_integrator(coarse)
    fine = get_integrator(fine)
    partition = make_partition(problem.a, problem.b, config.n_coarse)
    mesh = make_fine_mesh(partition, config.n_fine)
    n, m, kmax, d = config.n_coarse, config.n_fine, config.max_iterations, problem.dimension
    rhs = problem.rhs

    hist = IterationHistory.allocate(n, m, kmax, d, keep_fine=config.keep_history)
    coarse0 = initial_coarse_sweep(problem, partition, coarse)
    hist.w[:, 0] = coarse0
    hist.y_corr[:, 0] = coarse0

    pool = None
    if config.parallel and n > 1:
        pool = ThreadPoolExecutor(max_workers=config.workers or min(n, 64))

    increments, wall_times = [], []
    latest = None
    k = 0
    try:
        for k in range(1, kmax + 1):
            starts = hist.y_corr[:n, k - 1].copy()
            t0 = time.perf_counter()
            chunks = _fine_stage(k, starts, mesh, fine, rhs, pool)
            wall_times.append(time.perf_counter() - t0)
            latest = np.stack(chunks)
            if hist.z is not None:
                hist.z[:, :, k] = latest
            correction_sweep(k, partition, coarse, rhs, hist, latest[:, m])
            inc = float(np.max(np.abs(hist.y_corr[:, k] - hist.y_corr[:, k - 1])))
            increments.append(inc)
            if config.stop_tolerance is not None and inc <= config.stop_tolerance:
                break
    finally:
        if pool is not None:
            pool.shutdown()

    times = mesh.flat()
    values = np.empty((n * m + 1, d))
    values[:-1] = latest[:, :m].reshape(n * m, d)
    values[-1] = latest[-1, m]
    return PararealResult(
        trajectory=Trajectory(times, values),
        history=hist.truncate(k) if config.keep_history else None,
        iterations_run=k,
        increments=increments,
        wall_times=wall_times,
        boundary_times=partition.boundaries,
        final_boundaries=hist.y_corr[:, k].copy(),
    )
