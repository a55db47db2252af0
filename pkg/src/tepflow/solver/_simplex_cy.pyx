# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled pivot kernel for the bounded-variable revised simplex.

Twin of ``_simplex_py``: identical pivot rules, tolerances and status
codes, with the per-iteration matrix-vector products, pricing, ratio test
and basis-inverse update written as C loops. Refactorisation stays in
numpy (cold path).
"""

from libc.math cimport fabs

import numpy as np

from . import _simplex_py as _py

NAME = "cython"

cdef double PIV_TOL = 1e-9
cdef double TIE_TOL = 1e-9
cdef double ZERO_STEP = 1e-11
cdef int STALL_LIMIT = 40
cdef double INF = float("inf")


cdef Py_ssize_t _price(double[::1] d, signed char[::1] vstat,
                       double[::1] lower, double[::1] upper,
                       Py_ssize_t n, double opt_tol, bint bland):
    """Entering column, or -1 when dual-feasible; mirrors _simplex_py._price."""
    cdef Py_ssize_t j = -1
    cdef Py_ssize_t j0
    cdef double best = opt_tol
    cdef double v
    cdef signed char st
    for j0 in range(n):
        st = vstat[j0]
        if st == 2:
            continue
        if st != 3 and upper[j0] - lower[j0] <= 0.0:
            continue
        if st == 0:
            v = -d[j0]
        elif st == 1:
            v = d[j0]
        else:
            v = fabs(d[j0])
        if bland:
            if v > opt_tol:
                return j0
        elif v > best:
            best = v
            j = j0
    return j


cdef void _duals(double[:, ::1] Binv, double[::1, :] Av, double[::1] cv,
                 long long[::1] basisv, double[::1] y, double[::1] d,
                 Py_ssize_t m, Py_ssize_t n):
    """y = c_B Binv and d = c - y A."""
    cdef Py_ssize_t i, k, j0
    cdef double cb, s
    for k in range(m):
        y[k] = 0.0
    for i in range(m):
        cb = cv[basisv[i]]
        if cb != 0.0:
            for k in range(m):
                y[k] += cb * Binv[i, k]
    for j0 in range(n):
        s = 0.0
        for i in range(m):
            s += y[i] * Av[i, j0]
        d[j0] = cv[j0] - s


def run(A, b, c, lower, upper, basis, vstat,
        double opt_tol=1e-7, int max_iter=20000, int refactor_every=64):
    """Same contract as ``_simplex_py.run``."""
    cdef Py_ssize_t m = A.shape[0]
    cdef Py_ssize_t n = A.shape[1]
    if m == 0:
        return _py.run(A, b, c, lower, upper, basis, vstat,
                       opt_tol, max_iter, refactor_every)

    A = np.asfortranarray(A, dtype=np.float64)
    cdef double[::1, :] Av = A
    cdef double[::1] cv = c
    cdef double[::1] lov = lower
    cdef double[::1] upv = upper
    cdef long long[::1] basisv = basis
    cdef signed char[::1] vstatv = vstat

    Binv_np, xB_np = _py._refactor(A, b, lower, upper, basis, vstat)
    if Binv_np is None:
        return 3, 0, None, None
    Binv_np = np.ascontiguousarray(Binv_np)
    cdef double[:, ::1] Binv = Binv_np
    cdef double[::1] xB = xB_np

    y_np = np.empty(m)
    d_np = np.empty(n)
    w_np = np.empty(m)
    cdef double[::1] y = y_np
    cdef double[::1] d = d_np
    cdef double[::1] w = w_np

    cdef bint bland = False
    cdef int stall = 0
    cdef int since_refactor = 0
    cdef int it = 0
    cdef int status = 2
    cdef Py_ssize_t i, k, j, leave
    cdef long long lv, best_b
    cdef signed char st
    cdef double sigma, t_row, t_bound, piv, step
    cdef double delta, lb, ub, r, start, wa, best_wa, inv_piv, s

    while it < max_iter:
        it += 1
        since_refactor += 1
        if since_refactor >= refactor_every:
            Binv_np, xB_np = _py._refactor(A, b, lower, upper, basis, vstat)
            since_refactor = 0
            if Binv_np is None:
                return 3, it, None, None
            Binv_np = np.ascontiguousarray(Binv_np)
            Binv = Binv_np
            xB = xB_np

        _duals(Binv, Av, cv, basisv, y, d, m, n)
        j = _price(d, vstatv, lov, upv, n, opt_tol, bland)
        if j < 0:
            if since_refactor > 0:
                # confirm optimality on a fresh factorisation
                Binv_np, xB_np = _py._refactor(A, b, lower, upper, basis, vstat)
                since_refactor = 0
                if Binv_np is None:
                    return 3, it, None, None
                Binv_np = np.ascontiguousarray(Binv_np)
                Binv = Binv_np
                xB = xB_np
                _duals(Binv, Av, cv, basisv, y, d, m, n)
                j = _price(d, vstatv, lov, upv, n, opt_tol, bland)
            if j < 0:
                status = 0
                break

        st = vstatv[j]
        sigma = 1.0
        if st == 1 or (st == 3 and d[j] > 0.0):
            sigma = -1.0

        for i in range(m):
            s = 0.0
            for k in range(m):
                s += Binv[i, k] * Av[k, j]
            w[i] = s

        # pass 1: smallest blocking ratio among basic variables
        t_row = INF
        for i in range(m):
            delta = sigma * w[i]
            if delta > PIV_TOL:
                lb = lov[basisv[i]]
                if lb == -INF:
                    continue
                r = (xB[i] - lb) / delta
            elif delta < -PIV_TOL:
                ub = upv[basisv[i]]
                if ub == INF:
                    continue
                r = (ub - xB[i]) / (-delta)
            else:
                continue
            if r < 0.0:
                r = 0.0
            if r < t_row:
                t_row = r

        t_bound = upv[j] - lov[j]
        if t_row == INF and t_bound == INF:
            return 1, it, None, None

        if t_bound <= t_row + TIE_TOL:
            # entering variable runs to its other bound, basis unchanged
            for i in range(m):
                xB[i] -= t_bound * sigma * w[i]
            vstatv[j] = 1 - vstatv[j]
            step = t_bound
        else:
            # pass 2: tie-break among rows within TIE_TOL of t_row
            leave = -1
            best_wa = -1.0
            best_b = 0
            for i in range(m):
                delta = sigma * w[i]
                if delta > PIV_TOL:
                    lb = lov[basisv[i]]
                    if lb == -INF:
                        continue
                    r = (xB[i] - lb) / delta
                elif delta < -PIV_TOL:
                    ub = upv[basisv[i]]
                    if ub == INF:
                        continue
                    r = (ub - xB[i]) / (-delta)
                else:
                    continue
                if r < 0.0:
                    r = 0.0
                if r > t_row + TIE_TOL:
                    continue
                if bland:
                    if leave < 0 or basisv[i] < best_b:
                        leave = i
                        best_b = basisv[i]
                else:
                    wa = fabs(w[i])
                    if leave < 0 or wa > best_wa or (wa == best_wa and basisv[i] < best_b):
                        leave = i
                        best_wa = wa
                        best_b = basisv[i]

            piv = w[leave]
            if fabs(piv) < PIV_TOL:
                Binv_np, xB_np = _py._refactor(A, b, lower, upper, basis, vstat)
                since_refactor = 0
                if Binv_np is None:
                    return 3, it, None, None
                Binv_np = np.ascontiguousarray(Binv_np)
                Binv = Binv_np
                xB = xB_np
                continue

            lv = basisv[leave]
            if st == 0:
                start = lov[j]
            elif st == 1:
                start = upv[j]
            else:
                start = 0.0
            for i in range(m):
                xB[i] -= t_row * sigma * w[i]
            xB[leave] = start + sigma * t_row
            vstatv[lv] = 0 if sigma * w[leave] > 0.0 else 1
            basisv[leave] = j
            vstatv[j] = 2

            # product-form update of the basis inverse
            inv_piv = 1.0 / piv
            for k in range(m):
                Binv[leave, k] *= inv_piv
            for i in range(m):
                if i != leave:
                    wa = w[i]
                    if wa != 0.0:
                        for k in range(m):
                            Binv[i, k] -= wa * Binv[leave, k]
            step = t_row

        if step <= ZERO_STEP:
            stall += 1
            if stall >= STALL_LIMIT:
                bland = True
        else:
            stall = 0
            bland = False

    if status != 0:
        return status, it, None, None

    x = _py._nonbasic_values(lower, upper, vstat)
    x[basis] = np.asarray(xB)
    y_out = np.asarray(Binv_np).T @ np.asarray(c)[basis]
    return 0, it, x, y_out
