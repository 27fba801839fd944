# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled bounded-variable primal simplex.

Mirrors ``_simplex_py`` pivot for pivot (Dantzig pricing, Harris two-pass
ratio test, Bland's rule after a streak of degenerate steps, explicit basis
inverse with product-form updates and periodic refactorization).
"""
import numpy as np

from libc.math cimport fabs, INFINITY, isfinite
from libc.stdlib cimport free, malloc
from libc.string cimport memset

cdef enum:
    OPTIMAL = 0
    INFEASIBLE = 1
    UNBOUNDED = 2
    FAILED = 3

cdef int REFACTOR_EVERY = 50
cdef int DEGENERATE_STREAK = 20


cdef struct Work:
    int m
    int n
    int nt
    double *M
    double *lo
    double *hi
    double *x
    double *cost
    int *basis
    char *is_basic
    double *Binv
    double *B
    double *y
    double *alpha
    double *xB
    double *tmp


cdef int _invert(Work *w) nogil:
    """Gauss-Jordan inverse of the basis matrix into ``Binv``; -1 if singular."""
    cdef int m = w.m, nt = w.nt
    cdef int i, j, k, p
    cdef double best, v, f
    cdef double *B = w.B
    cdef double *Bi = w.Binv
    for i in range(m):
        for k in range(m):
            B[i * m + k] = w.M[i * nt + w.basis[k]]
            Bi[i * m + k] = 1.0 if i == k else 0.0
    for k in range(m):
        p = k
        best = fabs(B[k * m + k])
        for i in range(k + 1, m):
            v = fabs(B[i * m + k])
            if v > best:
                best = v
                p = i
        if best < 1e-300:
            return -1
        if p != k:
            for j in range(m):
                v = B[k * m + j]; B[k * m + j] = B[p * m + j]; B[p * m + j] = v
                v = Bi[k * m + j]; Bi[k * m + j] = Bi[p * m + j]; Bi[p * m + j] = v
        f = 1.0 / B[k * m + k]
        for j in range(m):
            B[k * m + j] *= f
            Bi[k * m + j] *= f
        for i in range(m):
            if i != k:
                f = B[i * m + k]
                if f != 0.0:
                    for j in range(m):
                        B[i * m + j] -= f * B[k * m + j]
                        Bi[i * m + j] -= f * Bi[k * m + j]
    return 0


cdef int _iterate(Work *w, double feas_tol, double opt_tol, double pivot_tol,
                  int max_iter, int *iters) nogil:
    cdef int m = w.m, nt = w.nt
    cdef int it, i, j, k, q, leave, r
    cdef bint bland = False
    cdef int streak = 0
    cdef double s, dj, score, best, dirn, theta, theta_max, span, lb, ub, rel, ex, piv, a
    cdef double *M = w.M
    cdef double *Bi = w.Binv
    cdef double *x = w.x
    cdef double *lo = w.lo
    cdef double *hi = w.hi
    cdef double *cost = w.cost
    cdef double *y = w.y
    cdef double *alpha = w.alpha
    cdef double *xB = w.xB
    cdef double *tmp = w.tmp
    cdef int inc_q

    for it in range(max_iter):
        if it % REFACTOR_EVERY == 0:
            if _invert(w) != 0:
                iters[0] = it
                return FAILED
        # basic values from the nonbasic ones (right-hand side is zero)
        for i in range(m):
            tmp[i] = 0.0
        for j in range(nt):
            if not w.is_basic[j] and x[j] != 0.0:
                for i in range(m):
                    tmp[i] += M[i * nt + j] * x[j]
        for k in range(m):
            s = 0.0
            for i in range(m):
                s += Bi[k * m + i] * tmp[i]
            xB[k] = -s
            x[w.basis[k]] = -s
        for i in range(m):
            s = 0.0
            for k in range(m):
                s += cost[w.basis[k]] * Bi[k * m + i]
            y[i] = s

        # pricing
        q = -1
        best = 0.0
        inc_q = 0
        for j in range(nt):
            if w.is_basic[j]:
                continue
            dj = cost[j]
            for i in range(m):
                dj -= y[i] * M[i * nt + j]
            score = 0.0
            if x[j] < hi[j] and dj < -opt_tol:
                score = -dj
            elif x[j] > lo[j] and dj > opt_tol:
                score = dj
            if score > 0.0:
                if bland:
                    q = j
                    inc_q = dj < 0.0
                    break
                if score > best:
                    best = score
                    q = j
                    inc_q = dj < 0.0
        if q < 0:
            iters[0] = it
            return OPTIMAL
        dirn = 1.0 if inc_q else -1.0

        for k in range(m):
            s = 0.0
            for i in range(m):
                s += Bi[k * m + i] * M[i * nt + q]
            alpha[k] = s

        # Harris pass 1
        theta_max = INFINITY
        for k in range(m):
            a = -dirn * alpha[k]
            r = w.basis[k]
            if a < -pivot_tol and isfinite(lo[r]):
                rel = (xB[k] - lo[r] + feas_tol) / -a
            elif a > pivot_tol and isfinite(hi[r]):
                rel = (hi[r] - xB[k] + feas_tol) / a
            else:
                continue
            if rel < theta_max:
                theta_max = rel
        span = hi[q] - lo[q]
        if not isfinite(theta_max) and not isfinite(span):
            iters[0] = it
            return UNBOUNDED

        leave = -1
        if span <= theta_max:
            theta = span
        else:
            best = -1.0
            theta = 0.0
            for k in range(m):
                a = -dirn * alpha[k]
                r = w.basis[k]
                if a < -pivot_tol and isfinite(lo[r]):
                    ex = (xB[k] - lo[r]) / -a
                elif a > pivot_tol and isfinite(hi[r]):
                    ex = (hi[r] - xB[k]) / a
                else:
                    continue
                if ex < 0.0:
                    ex = 0.0
                if ex <= theta_max:
                    if bland:
                        if leave < 0 or r < w.basis[leave]:
                            leave = k
                            theta = ex
                    elif fabs(a) > best:
                        best = fabs(a)
                        leave = k
                        theta = ex

        x[q] += dirn * theta
        for k in range(m):
            x[w.basis[k]] = xB[k] - dirn * alpha[k] * theta
        if leave < 0:
            x[q] = hi[q] if dirn > 0 else lo[q]
        else:
            r = w.basis[leave]
            x[r] = lo[r] if -dirn * alpha[leave] < 0 else hi[r]
            w.is_basic[r] = 0
            w.is_basic[q] = 1
            w.basis[leave] = q
            piv = alpha[leave]
            for i in range(m):
                Bi[leave * m + i] /= piv
            for k in range(m):
                if k != leave and alpha[k] != 0.0:
                    a = alpha[k]
                    for i in range(m):
                        Bi[k * m + i] -= a * Bi[leave * m + i]

        if theta <= 1e-12:
            streak += 1
            if streak > DEGENERATE_STREAK:
                bland = True
        else:
            streak = 0
            bland = False
    iters[0] = max_iter
    return FAILED


def solve_bounded(c, A, rl, ru, xl, xu, bint phase1_only=False,
                  double feas_tol=1e-9, double opt_tol=1e-9,
                  double pivot_tol=1e-11, int max_iter=5000):
    """Same contract as ``_simplex_py.solve_bounded``."""
    cdef double[::1] cv = np.ascontiguousarray(c, dtype=np.float64)
    cdef int n = cv.shape[0]
    cdef double[:, ::1] Av = np.ascontiguousarray(np.asarray(A, dtype=np.float64).reshape(-1, n))
    cdef int m = Av.shape[0]
    cdef double[::1] rlv = np.ascontiguousarray(rl, dtype=np.float64)
    cdef double[::1] ruv = np.ascontiguousarray(ru, dtype=np.float64)
    cdef double[::1] xlv = np.ascontiguousarray(xl, dtype=np.float64)
    cdef double[::1] xuv = np.ascontiguousarray(xu, dtype=np.float64)
    cdef int nt = n + 2 * m
    cdef int i, j, k, status, iters = 0, it2 = 0
    cdef double a, bound, sgn, art

    cdef Work w
    w.m = m
    w.n = n
    w.nt = nt
    w.M = <double *> malloc(max(1, m * nt) * sizeof(double))
    w.lo = <double *> malloc(nt * sizeof(double))
    w.hi = <double *> malloc(nt * sizeof(double))
    w.x = <double *> malloc(nt * sizeof(double))
    w.cost = <double *> malloc(nt * sizeof(double))
    w.basis = <int *> malloc(max(1, m) * sizeof(int))
    w.is_basic = <char *> malloc(nt * sizeof(char))
    w.Binv = <double *> malloc(max(1, m * m) * sizeof(double))
    w.B = <double *> malloc(max(1, m * m) * sizeof(double))
    w.y = <double *> malloc(max(1, m) * sizeof(double))
    w.alpha = <double *> malloc(max(1, m) * sizeof(double))
    w.xB = <double *> malloc(max(1, m) * sizeof(double))
    w.tmp = <double *> malloc(max(1, m) * sizeof(double))

    x_out = np.zeros(n)
    y_out = np.zeros(m)
    d_out = np.zeros(n)
    cdef double[::1] xo = x_out
    cdef double[::1] yo = y_out
    cdef double[::1] do = d_out
    try:
        memset(w.M, 0, max(1, m * nt) * sizeof(double))
        memset(w.is_basic, 0, nt * sizeof(char))
        for j in range(n):
            w.lo[j] = xlv[j]
            w.hi[j] = xuv[j]
            if isfinite(xlv[j]):
                w.x[j] = xlv[j]
            elif isfinite(xuv[j]):
                w.x[j] = xuv[j]
            else:
                w.x[j] = 0.0
            for i in range(m):
                w.M[i * nt + j] = Av[i, j]
        for i in range(m):
            w.lo[n + i] = rlv[i]
            w.hi[n + i] = ruv[i]
            w.M[i * nt + n + i] = -1.0
            w.lo[n + m + i] = 0.0
            w.hi[n + m + i] = 0.0
            w.x[n + m + i] = 0.0
            a = 0.0
            for j in range(n):
                a += Av[i, j] * w.x[j]
            if rlv[i] - feas_tol <= a <= ruv[i] + feas_tol:
                w.basis[i] = n + i
                w.x[n + i] = a
            else:
                bound = rlv[i] if a < rlv[i] else ruv[i]
                w.x[n + i] = bound
                sgn = 1.0 if bound > a else -1.0
                w.M[i * nt + n + m + i] = sgn
                w.hi[n + m + i] = INFINITY
                w.basis[i] = n + m + i
                w.x[n + m + i] = fabs(bound - a)
            w.is_basic[w.basis[i]] = 1

        for j in range(nt):
            w.cost[j] = 1.0 if j >= n + m else 0.0
        status = _iterate(&w, feas_tol, opt_tol, pivot_tol, max_iter, &iters)
        if status != OPTIMAL:
            for j in range(n):
                xo[j] = w.x[j]
            return FAILED, x_out, y_out, d_out, iters
        art = 0.0
        for i in range(m):
            art += w.x[n + m + i]
        if art > feas_tol:
            for j in range(n):
                xo[j] = w.x[j]
            return INFEASIBLE, x_out, y_out, d_out, iters
        for i in range(m):
            w.hi[n + m + i] = 0.0
            if not w.is_basic[n + m + i]:
                w.x[n + m + i] = 0.0

        if not phase1_only:
            for j in range(nt):
                w.cost[j] = cv[j] if j < n else 0.0
            status = _iterate(&w, feas_tol, opt_tol, pivot_tol, max_iter - iters, &it2)
            iters += it2
            if status == OPTIMAL:
                for i in range(m):
                    yo[i] = w.y[i]
                for j in range(n):
                    if not w.is_basic[j]:
                        a = cv[j]
                        for i in range(m):
                            a -= w.y[i] * Av[i, j]
                        do[j] = a
        for j in range(n):
            a = w.x[j]
            if a < w.lo[j]:
                a = w.lo[j]
            if a > w.hi[j]:
                a = w.hi[j]
            xo[j] = a
    finally:
        free(w.M); free(w.lo); free(w.hi); free(w.x); free(w.cost)
        free(w.basis); free(w.is_basic); free(w.Binv); free(w.B)
        free(w.y); free(w.alpha); free(w.xB); free(w.tmp)

    if status == OPTIMAL:
        act = np.asarray(Av) @ x_out if n else np.zeros(m)
        slack = feas_tol * 10 * np.maximum(1.0, np.abs(act))
        if np.any(act < np.asarray(rlv) - slack) or np.any(act > np.asarray(ruv) + slack):
            status = FAILED
    return status, x_out, y_out, d_out, iters
