# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Native fine-sweep kernel.

Evaluates catalog right-hand sides with libm and the built-in one-step
methods in the same operation order as the Python fallback, without the GIL.
Built with -ffp-contract=off so no multiply-add is fused.
"""
from libc.math cimport sin, exp, isfinite
from libc.stdlib cimport malloc, free

cdef enum:
    EULER = 0
    RK4 = 1

cdef enum:
    RHS_ZERO = 0
    RHS_LINEAR = 1
    RHS_SIN_TY = 2
    RHS_SIN_T_EXP_T = 3

METHODS = {"euler": EULER, "rk4": RK4}
RHS = {"zero": RHS_ZERO, "linear": RHS_LINEAR, "sin_ty": RHS_SIN_TY,
       "sin_t_exp_t": RHS_SIN_T_EXP_T}


cdef inline void _rhs(int rhs_id, double t, const double* y, double* out,
                      Py_ssize_t d) noexcept nogil:
    cdef Py_ssize_t i
    cdef double v
    if rhs_id == RHS_ZERO:
        for i in range(d):
            out[i] = 0.0
    elif rhs_id == RHS_LINEAR:
        for i in range(d):
            out[i] = y[i]
    elif rhs_id == RHS_SIN_TY:
        for i in range(d):
            out[i] = sin(t * y[i])
    else:
        v = sin(t) * exp(t)
        for i in range(d):
            out[i] = v


cdef Py_ssize_t _sweep(int method, int rhs_id, const double* times,
                       Py_ssize_t n_steps, double delta, double* out,
                       Py_ssize_t d, double* work) noexcept nogil:
    cdef double* k1 = work
    cdef double* k2 = work + d
    cdef double* k3 = work + 2 * d
    cdef double* k4 = work + 3 * d
    cdef double* tmp = work + 4 * d
    cdef double* y
    cdef double* ynew
    cdef double t, half = delta / 2, sixth = delta / 6
    cdef Py_ssize_t m, i

    for m in range(n_steps):
        y = out + m * d
        ynew = out + (m + 1) * d
        t = times[m]
        if method == EULER:
            _rhs(rhs_id, t, y, k1, d)
            for i in range(d):
                ynew[i] = y[i] + delta * k1[i]
        else:
            _rhs(rhs_id, t, y, k1, d)
            for i in range(d):
                tmp[i] = y[i] + half * k1[i]
            _rhs(rhs_id, t + half, tmp, k2, d)
            for i in range(d):
                tmp[i] = y[i] + half * k2[i]
            _rhs(rhs_id, t + half, tmp, k3, d)
            for i in range(d):
                tmp[i] = y[i] + delta * k3[i]
            _rhs(rhs_id, t + delta, tmp, k4, d)
            for i in range(d):
                ynew[i] = y[i] + sixth * (((k1[i] + 2 * k2[i]) + 2 * k3[i]) + k4[i])
        for i in range(d):
            if not isfinite(ynew[i]):
                return m
    return -1


def sweep(int method, int rhs_id, const double[::1] times, double delta,
          double[:, ::1] out):
    """Advance ``out[0]`` through ``out.shape[0] - 1`` steps in place.

    Step ``m`` starts at ``times[m]``. Returns -1 on success, otherwise the
    index of the first step whose result is not finite.
    """
    cdef Py_ssize_t n_steps = out.shape[0] - 1
    cdef Py_ssize_t d = out.shape[1]
    cdef Py_ssize_t bad
    if times.shape[0] < n_steps:
        raise ValueError("times shorter than the number of steps")
    if method != EULER and method != RK4:
        raise ValueError(f"unknown method id {method}")
    if rhs_id < RHS_ZERO or rhs_id > RHS_SIN_T_EXP_T:
        raise ValueError(f"unknown rhs id {rhs_id}")
    if n_steps == 0:
        return -1
    cdef double* work = <double*> malloc(5 * d * sizeof(double))
    if work == NULL:
        raise MemoryError()
    try:
        with nogil:
            bad = _sweep(method, rhs_id, &times[0], n_steps, delta,
                         &out[0, 0], d, work)
    finally:
        free(work)
    return bad
