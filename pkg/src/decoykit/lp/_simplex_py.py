"""Pure-Python (numpy) bounded-variable primal simplex.

Solves ``min c.x`` subject to ``rl <= A x <= ru`` and ``xl <= x <= xu``.
Each row gets a logical variable ``r = A x`` carrying the row bounds, so the
working system is ``A x - r = 0`` with every variable boxed.  Rows violated
by the starting point get an artificial column; phase 1 drives those to zero.

This module is the reference implementation; ``_simplex.pyx`` mirrors it
step for step and is used when the compiled extension is available.
"""
from __future__ import annotations

import numpy as np

OPTIMAL, INFEASIBLE, UNBOUNDED, FAILED = 0, 1, 2, 3

REFACTOR_EVERY = 50
DEGENERATE_STREAK = 20


def solve_bounded(c, A, rl, ru, xl, xu, phase1_only=False,
                  feas_tol=1e-9, opt_tol=1e-9, pivot_tol=1e-11, max_iter=5000):
    """Run the two-phase simplex.

    Returns ``(status, x, row_duals, reduced_costs, iterations)``.  For
    ``phase1_only`` the status is OPTIMAL when a feasible point was found.
    """
    c = np.asarray(c, dtype=float)
    A = np.asarray(A, dtype=float).reshape(-1, c.size)
    m, n = A.shape
    nt = n + 2 * m

    lo = np.empty(nt)
    hi = np.empty(nt)
    lo[:n], hi[:n] = xl, xu
    lo[n:n + m], hi[n:n + m] = rl, ru
    lo[n + m:], hi[n + m:] = 0.0, 0.0

    x = np.where(np.isfinite(lo), lo, np.where(np.isfinite(hi), hi, 0.0))
    x[n + m:] = 0.0

    M = np.zeros((m, nt))
    M[:, :n] = A
    M[:, n:n + m] = -np.eye(m)

    basis = np.empty(m, dtype=np.intp)
    activity = A @ x[:n] if n else np.zeros(m)
    for i in range(m):
        a = activity[i]
        if lo[n + i] - feas_tol <= a <= hi[n + i] + feas_tol:
            basis[i] = n + i
            x[n + i] = a
        else:
            bound = lo[n + i] if a < lo[n + i] else hi[n + i]
            x[n + i] = bound
            sign = 1.0 if bound > a else -1.0
            M[i, n + m + i] = sign
            hi[n + m + i] = np.inf
            basis[i] = n + m + i
            x[n + m + i] = abs(bound - a)

    is_basic = np.zeros(nt, dtype=bool)
    is_basic[basis] = True

    cost1 = np.zeros(nt)
    cost1[n + m:] = 1.0
    status, iters = _iterate(M, cost1, lo, hi, x, basis, is_basic,
                             feas_tol, opt_tol, pivot_tol, max_iter)
    total_iters = iters
    if status != OPTIMAL:
        return FAILED, x[:n].copy(), np.zeros(m), np.zeros(n), total_iters
    if x[n + m:].sum() > feas_tol:
        return INFEASIBLE, x[:n].copy(), np.zeros(m), np.zeros(n), total_iters
    hi[n + m:] = 0.0
    x[n + m:] = np.where(is_basic[n + m:], x[n + m:], 0.0)

    cost2 = np.zeros(nt)
    cost2[:n] = c
    if phase1_only:
        y = np.zeros(m)
        d = np.zeros(n)
        status = OPTIMAL
    else:
        status, iters = _iterate(M, cost2, lo, hi, x, basis, is_basic,
                                 feas_tol, opt_tol, pivot_tol, max_iter - total_iters)
        total_iters += iters
        Binv = np.linalg.inv(M[:, basis])
        y = cost2[basis] @ Binv
        d = c - y @ A
        d[is_basic[:n]] = 0.0
    xs = np.clip(x[:n], lo[:n], hi[:n])
    if status == OPTIMAL:
        act = A @ xs if n else np.zeros(m)
        slack = feas_tol * 10 * np.maximum(1.0, np.abs(act))
        if np.any(act < lo[n:n + m] - slack) or np.any(act > hi[n:n + m] + slack):
            status = FAILED
    return status, xs, y, d, total_iters


def _iterate(M, cost, lo, hi, x, basis, is_basic, feas_tol, opt_tol, pivot_tol, max_iter):
    m, nt = M.shape
    Binv = None
    bland = False
    streak = 0
    for it in range(max_iter):
        if it % REFACTOR_EVERY == 0 or Binv is None:
            Binv = np.linalg.inv(M[:, basis])
        nonbasic = ~is_basic
        xB = -Binv @ (M[:, nonbasic] @ x[nonbasic])
        x[basis] = xB

        y = cost[basis] @ Binv
        d = cost - y @ M
        can_inc = nonbasic & (x < hi) & (d < -opt_tol)
        can_dec = nonbasic & (x > lo) & (d > opt_tol)
        score = np.where(can_inc, -d, 0.0) + np.where(can_dec, d, 0.0)
        if bland:
            cand = np.flatnonzero(score > 0.0)
            if cand.size == 0:
                return OPTIMAL, it
            q = int(cand[0])
        else:
            q = int(np.argmax(score))
            if score[q] <= 0.0:
                return OPTIMAL, it
        dirn = 1.0 if can_inc[q] else -1.0

        alpha = Binv @ M[:, q]
        delta = -dirn * alpha
        lob, hib = lo[basis], hi[basis]

        # Harris pass 1: largest step with bounds relaxed by the tolerance
        relaxed = np.full(m, np.inf)
        exact = np.full(m, np.inf)
        dec = (delta < -pivot_tol) & np.isfinite(lob)
        inc = (delta > pivot_tol) & np.isfinite(hib)
        relaxed[dec] = (xB[dec] - lob[dec] + feas_tol) / -delta[dec]
        exact[dec] = (xB[dec] - lob[dec]) / -delta[dec]
        relaxed[inc] = (hib[inc] - xB[inc] + feas_tol) / delta[inc]
        exact[inc] = (hib[inc] - xB[inc]) / delta[inc]
        np.maximum(exact, 0.0, out=exact)

        span = hi[q] - lo[q]
        theta_max = relaxed.min() if m else np.inf
        if not np.isfinite(theta_max) and not np.isfinite(span):
            return UNBOUNDED, it

        if span <= theta_max:
            theta = span
            leave = -1
        else:
            # pass 2: among rows blocking within theta_max, largest pivot
            ok = exact <= theta_max
            if bland:
                idx = np.flatnonzero(ok)
                leave = int(idx[np.argmin(basis[idx])])
            else:
                leave = int(np.argmax(np.where(ok, np.abs(delta), -1.0)))
            theta = exact[leave]

        x[q] += dirn * theta
        x[basis] = xB + delta * theta
        if leave < 0:
            x[q] = hi[q] if dirn > 0 else lo[q]
        else:
            r = basis[leave]
            x[r] = lob[leave] if delta[leave] < 0 else hib[leave]
            is_basic[r] = False
            is_basic[q] = True
            basis[leave] = q
            piv = alpha[leave]
            row = Binv[leave] / piv
            Binv -= np.outer(alpha, row)
            Binv[leave] = row

        if theta <= 1e-12:
            streak += 1
            if streak > DEGENERATE_STREAK:
                bland = True
        else:
            streak = 0
            bland = False
    return FAILED, max_iter
