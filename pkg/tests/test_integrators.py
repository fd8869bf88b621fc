import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from pararealpy import (EULER, RK4, OneStepIntegrator, ValidationError,
                        euler_step, fine_propagate_subdomain, get_integrator,
                        integrator_registry, make_fine_mesh, make_partition,
                        register_integrator, rk4_step, sequential_solve)
from pararealpy.integrators import _REGISTRY, with_delay
from pararealpy.problems import get_problem

from conftest import assert_bitwise


def ident(t, y):
    return y


def zero(t, y):
    return np.zeros_like(y)


def test_euler_examples():
    assert euler_step(0.5, 0, [1.0], ident).tolist() == [1.5]
    y = np.array([3.25, -7.0])
    assert_bitwise(euler_step(0.37, 1.9, y, zero), y)


def test_euler_sin_ty_matches_scalar_formula():
    rhs = get_problem("sin_ty").rhs
    got = euler_step(0.008, -20.0, [10.0], rhs)
    assert got.tolist() == [10 + 0.008 * math.sin(-200.0)]


def test_rk4_examples():
    y = np.array([2.5])
    assert_bitwise(rk4_step(0.3, -4.0, y, zero), y)
    assert rk4_step(1.0, 0.0, [0.0], lambda t, y: np.array([t])).tolist() == [0.5]


def test_rk4_linear_matches_taylor_factor():
    h = 0.1
    taylor = 1 + h + h ** 2 / 2 + h ** 3 / 6 + h ** 4 / 24
    got = rk4_step(h, 0.0, [1.0], ident)[0]
    assert got == pytest.approx(taylor, rel=0, abs=4e-16)
    assert got == pytest.approx(1.1051708333333334, abs=1e-15)


def test_rk4_stage_order():
    calls = []

    def spy(t, y):
        calls.append((t, float(y[0])))
        return np.array([t + y[0]])

    rk4_step(0.2, 1.0, [3.0], spy)
    assert [c[0] for c in calls] == [1.0, 1.1, 1.1, 1.2]
    k1 = 4.0
    assert calls[1][1] == 3.0 + 0.1 * k1


def test_euler_single_evaluation():
    calls = []
    euler_step(0.1, 0.0, [1.0], lambda t, y: calls.append(t) or y)
    assert calls == [0.0]


@pytest.mark.parametrize("step", [euler_step, rk4_step])
@pytest.mark.parametrize("delta, t, y", [
    (0.0, 0.0, [1.0]), (-1.0, 0.0, [1.0]), (math.inf, 0.0, [1.0]),
    (0.1, math.nan, [1.0]), (0.1, 0.0, [math.inf]),
])
def test_steps_reject_bad_input(step, delta, t, y):
    with pytest.raises(ValidationError):
        step(delta, t, y, ident)


@settings(max_examples=100, deadline=None)
@given(st.floats(-5, 5), st.floats(-5, 5), st.floats(1e-3, 2.0), st.floats(-10, 10))
def test_euler_exact_for_constant_field(c, y0, h, t):
    got = euler_step(h, t, [y0], lambda t, y: np.array([c]))[0]
    assert got == y0 + h * c


@settings(max_examples=100, deadline=None)
@given(st.lists(st.floats(-3, 3), min_size=4, max_size=4), st.floats(-2, 2),
       st.floats(1e-2, 1.0))
def test_rk4_exact_on_cubics(coef, t0, h):
    c0, c1, c2, c3 = coef

    def f(t, y):
        return np.array([c0 + c1 * t + c2 * t ** 2 + c3 * t ** 3])

    def prim(t):
        return c0 * t + c1 * t ** 2 / 2 + c2 * t ** 3 / 3 + c3 * t ** 4 / 4

    got = rk4_step(h, t0, [0.0], f)[0]
    exact = prim(t0 + h) - prim(t0)
    scale = max(1.0, abs(c0) + abs(c1) + abs(c2) + abs(c3)) * 16
    assert abs(got - exact) <= 64 * np.finfo(float).eps * scale


def test_steps_are_pure(backend):
    rhs = get_problem("sin_ty").rhs
    for integ in (EULER, RK4):
        a = integ.step(0.01, 3.0, np.array([1.2]), rhs)
        b = integ.step(0.01, 3.0, np.array([1.2]), rhs)
        assert_bitwise(a, b)


def test_sequential_solve_examples(backend):
    tr = sequential_solve(2, 0, 1, [1.0], ident, "euler")
    assert tr.times.tolist() == [0, 0.5, 1]
    assert tr.values[:, 0].tolist() == [1, 1.5, 2.25]

    for integ in ("euler", "rk4"):
        tr = sequential_solve(5, 0, 1, [4.5], zero, integ)
        assert np.all(tr.values == 4.5)

    # each RK4 step on y' = y multiplies by the quartic Taylor factor of e^h
    tr = sequential_solve(10, 0, 1, [1.0], get_problem("linear").rhs, "rk4")
    factor = 1 + 0.1 + 0.1 ** 2 / 2 + 0.1 ** 3 / 6 + 0.1 ** 4 / 24
    assert tr.values[-1, 0] == pytest.approx(factor ** 10, rel=1e-14)
    assert abs(tr.values[-1, 0] - math.e) < 2.1e-6


def test_sequential_solve_rejects_zero_steps():
    with pytest.raises(ValidationError, match="n_steps"):
        sequential_solve(0, 0, 1, [1.0], ident, "euler")


def _global_error(integ, h):
    n = round(1 / h)
    return abs(sequential_solve(n, 0, 1, [1.0], ident, integ).values[-1, 0] - math.e)


@pytest.mark.parametrize("integ, order, tol", [("euler", 1, 0.15), ("rk4", 4, 0.3)])
def test_empirical_order(integ, order, tol):
    hs = [1 / 8, 1 / 16, 1 / 32, 1 / 64]
    errs = [_global_error(integ, h) for h in hs]
    slope = np.polyfit(np.log(hs), np.log(errs), 1)[0]
    assert abs(slope - order) <= tol


@pytest.mark.parametrize("problem", ["sin_ty", "sin_t_exp_t", "linear"])
@pytest.mark.parametrize("integ", ["euler", "rk4"])
def test_sequential_equals_chained_subdomain_sweeps(backend, problem, integ):
    spec = get_problem(problem)
    n, m = 5, 40
    seq = sequential_solve(n * m, spec.a, spec.b, spec.y0, spec.rhs, integ)
    mesh = make_fine_mesh(make_partition(spec.a, spec.b, n), m)
    y = np.array(spec.y0)
    pieces = []
    for i in range(n):
        z = fine_propagate_subdomain(i, y, mesh, get_integrator(integ), spec.rhs)
        pieces.append(z[:-1])
        y = z[-1]
    pieces.append(y[None, :])
    assert_bitwise(np.concatenate(pieces), seq.values)
    assert_bitwise(mesh.flat(), seq.times)


def test_vector_state():
    rot = lambda t, y: np.array([-y[1], y[0]])
    tr = sequential_solve(400, 0, math.pi, [1.0, 0.0], rot, "rk4")
    assert tr.values.shape == (401, 2)
    assert np.allclose(tr.values[-1], [-1.0, 0.0], atol=1e-9)
    assert tr.values[0].tolist() == [1.0, 0.0]


def test_registry():
    assert {"euler", "rk4"} <= set(integrator_registry())
    with pytest.raises(ValidationError, match="integrator"):
        get_integrator("heun")
    heun = OneStepIntegrator("heun", lambda d, t, y, f: y + d / 2 * (
        f(t, y) + f(t + d, y + d * f(t, y))), "Heun's method")
    register_integrator(heun)
    try:
        assert get_integrator("heun") is heun
        with pytest.raises(ValidationError):
            register_integrator(heun)
        tr = sequential_solve(4, 0, 1, [1.0], ident, "heun")
        assert tr.values[1, 0] == 1 + 0.125 * (1 + 1.25)
    finally:
        _REGISTRY.pop("heun")


def test_with_delay_preserves_results():
    slow = with_delay("rk4", 1e-4)
    assert slow.kernel_id is None
    rhs = get_problem("sin_ty").rhs
    a = sequential_solve(20, -20, -16, [10.0], rhs, slow)
    b = sequential_solve(20, -20, -16, [10.0], rhs, "rk4")
    assert_bitwise(a.values, b.values)
    assert with_delay("rk4", 0) is RK4
