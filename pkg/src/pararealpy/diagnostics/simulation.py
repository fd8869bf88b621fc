"""Replay a parareal solve as a seeded, pseudo-parallel event trace.

For every correction ``k`` the trace holds the coarse guesses the fine stage
starts from (green), optionally the guesses of the iteration before (red),
then fine progress in random-sized chunks on randomly chosen unfinished
subdomains (black), and finally the connected fine iterate (orange).

Chunk ranges are inclusive fine-point indices ``[m_first, m_last]``; per
subdomain and iteration they tile ``0..M``.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Union

import numpy as np

from ..core import ValidationError, _check_count
from ..integrators import Trajectory, get_integrator, sequential_solve
from ..parareal import PararealConfig, solve_parareal
from .rng import XorShift64Star

__all__ = ["CoarseGuess", "FineChunk", "IterationConnected", "SimulationTrace",
           "record_simulation", "event_batches"]


@dataclass(frozen=True)
class CoarseGuess:
    k: int
    n: int
    t: float
    value: np.ndarray
    color: str  # "green" (current) or "red" (previous iteration)


@dataclass(frozen=True)
class FineChunk:
    k: int
    n: int
    m_first: int
    m_last: int
    times: np.ndarray
    values: np.ndarray
    color: str = "black"


@dataclass(frozen=True)
class IterationConnected:
    k: int
    times: np.ndarray
    values: np.ndarray
    color: str = "orange"


Event = Union[CoarseGuess, FineChunk, IterationConnected]


@dataclass
class SimulationTrace:
    seed: int
    n_coarse: int
    n_fine: int
    iterations: int
    ideal: Trajectory = field(repr=False)
    events: list = field(default_factory=list, repr=False)


def event_batches(trace: SimulationTrace) -> list:
    """Group events into display updates.

    The coarse guesses of one iteration form a single batch; every fine chunk
    and every connection event is a batch of its own.
    """
    batches = []
    for ev in trace.events:
        if (isinstance(ev, CoarseGuess) and batches
                and isinstance(batches[-1][-1], CoarseGuess) and batches[-1][-1].k == ev.k):
            batches[-1].append(ev)
        else:
            batches.append([ev])
    return batches


def record_simulation(problem, config: PararealConfig, coarse, fine, seed: int,
                      max_chunk: int, show_prev: bool = True) -> SimulationTrace:
    max_chunk = _check_count(max_chunk, "max_chunk")
    if isinstance(seed, bool) or int(seed) != seed or not 0 <= seed < 2 ** 64:
        raise ValidationError("seed", f"must be an unsigned 64-bit integer, got {seed!r}")
    fine = get_integrator(fine)
    cfg = PararealConfig(config.n_coarse, config.n_fine, config.max_iterations,
                         stop_tolerance=config.stop_tolerance, parallel=config.parallel,
                         keep_history=True, workers=config.workers)
    result = solve_parareal(problem, cfg, coarse, fine)
    n, m = cfg.n_coarse, cfg.n_fine
    ideal = sequential_solve(n * m, problem.a, problem.b, problem.y0, problem.rhs, fine)
    fine_t = ideal.times[np.arange(n)[:, None] * m + np.arange(m + 1)[None, :]]
    yc, z = result.history.y_corr, result.history.z
    bounds = result.boundary_times

    rng = XorShift64Star(int(seed))
    events: list = []
    for k in range(1, result.iterations_run + 1):
        for i in range(n + 1):
            events.append(CoarseGuess(k, i, float(bounds[i]), yc[i, k - 1].copy(), "green"))
        if show_prev and k >= 2:
            for i in range(n + 1):
                events.append(CoarseGuess(k, i, float(bounds[i]), yc[i, k - 2].copy(), "red"))
        done = [0] * n
        pending = list(range(n))
        while pending:
            sub = pending[rng.below(len(pending))]
            first = done[sub]
            last = min(first + 1 + rng.below(max_chunk), m + 1) - 1
            events.append(FineChunk(k, sub, first, last, fine_t[sub, first:last + 1].copy(),
                                    z[sub, first:last + 1, k].copy()))
            done[sub] = last + 1
            if done[sub] == m + 1:
                pending.remove(sub)
        events.append(IterationConnected(k, fine_t.reshape(-1).copy(),
                                         z[:, :, k].reshape(n * (m + 1), -1).copy()))
    return SimulationTrace(int(seed), n, m, result.iterations_run, ideal, events)
