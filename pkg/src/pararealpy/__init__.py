"""Parareal parallel-in-time integration for first-order ODE initial-value problems."""
from .core import (FineMesh, IvpProblem, NumericalBlowupError, OneStepIntegrator,
                   RhsFunction, TimePartition, ValidationError, make_fine_mesh,
                   make_partition)
from .integrators import (EULER, RK4, Trajectory, euler_step, get_integrator,
                          integrator_registry, register_integrator, rk4_step,
                          sequential_solve)
from .kernels import get_backend, native_available, set_backend, use_backend
from .parareal import (IterationHistory, PararealConfig, PararealResult,
                       correction_sweep, fine_propagate_subdomain,
                       initial_coarse_sweep, solve_parareal)
from .problems import ProblemSpec, get_problem, problem_registry, register_problem

__version__ = "0.1.0"
