"""Reference solutions of the single-photon error-rate program.

Built from scratch (own Poisson rows, scipy's HiGHS solver) so that they
share no code with the package.
"""
from __future__ import annotations

import numpy as np
from scipy import optimize, stats


def _rows(mus, lo, hi, k_max):
    W = np.array([stats.poisson.pmf(np.arange(k_max), mu) for mu in mus])
    tail = np.array([stats.poisson.sf(k_max - 1, mu) for mu in mus])
    return W, np.asarray(lo) - tail, np.asarray(hi, dtype=float)


def polytope(mus, obs, k_max):
    """``(A_ub, b_ub)`` over ``x = (y_0..y_{K-1}, c_0..c_{K-1})``; boxes are [0, 1]."""
    Wy, ly, uy = _rows(mus, obs.y_lo, obs.y_hi, k_max)
    Wc, lc, uc = _rows(mus, obs.b_lo, obs.b_hi, k_max)
    Z = np.zeros_like(Wy)
    I = np.eye(k_max)
    A = np.vstack([
        np.hstack([Wy, Z]), np.hstack([-Wy, Z]),
        np.hstack([Z, Wc]), np.hstack([Z, -Wc]),
        np.hstack([-I, I]),
    ])
    b = np.concatenate([uy, -ly, uc, -lc, np.zeros(k_max)])
    # HiGHS tolerances are absolute; bring every row to O(1)
    scale = np.concatenate([uy, uy, uc, uc, np.ones(k_max)])
    scale[scale <= 0] = 1.0
    return A / scale[:, None], b / scale


def _lp(c, A, b, bounds, A_eq=None, b_eq=None):
    res = optimize.linprog(c, A_ub=A, b_ub=b, A_eq=A_eq, b_eq=b_eq, bounds=bounds, method="highs")
    return res


def min_y1(mus, obs, k_max):
    A, b = polytope(mus, obs, k_max)
    c = np.zeros(2 * k_max)
    c[1] = 1.0
    res = _lp(c, A, b, [(0, 1)] * (2 * k_max))
    return res.fun if res.status == 0 else None


def b1_charnes_cooper(mus, obs, k_max, degenerate=1e-12):
    """``sup c_1 / y_1`` via the Charnes-Cooper linear program.

    Substituting ``z = s x`` with ``s = 1 / y_1`` turns the ratio into a
    linear objective.  Follows the package convention of returning 1 when
    ``y_1 = 0`` is admissible.
    """
    y1 = min_y1(mus, obs, k_max)
    if y1 is None:
        return None
    if y1 <= degenerate:
        return 1.0
    A, b = polytope(mus, obs, k_max)
    n = 2 * k_max
    # variables (z, s): A z - b s <= 0, z - s <= 0, z_y1 = 1
    A_cc = np.vstack([np.hstack([A, -b[:, None]]), np.hstack([np.eye(n), -np.ones((n, 1))])])
    b_cc = np.zeros(A_cc.shape[0])
    A_eq = np.zeros((1, n + 1))
    A_eq[0, 1] = 1.0
    c = np.zeros(n + 1)
    c[k_max + 1] = -1.0
    res = _lp(c, A_cc, b_cc, [(0, None)] * (n + 1), A_eq, [1.0])
    if res.status != 0:
        return None
    return -res.fun


def b1_grid(mus, obs, k_max, points=400):
    """Grid over ``y_1``: for each value, the largest ``c_1`` gives a ratio.

    Every grid value is an achieved ratio, so the maximum is a lower bound
    on the supremum that tightens as the grid is refined.
    """
    A, b = polytope(mus, obs, k_max)
    n = 2 * k_max
    c = np.zeros(n)
    c[1] = 1.0
    lo = _lp(c, A, b, [(0, 1)] * n)
    hi = _lp(-c, A, b, [(0, 1)] * n)
    if lo.status != 0 or hi.status != 0:
        return None
    y_lo, y_hi = max(lo.fun, 1e-300), -hi.fun
    grid = np.unique(np.concatenate([
        np.geomspace(y_lo, max(y_hi, y_lo), points // 2),
        np.linspace(y_lo, y_hi, points // 2),
    ]))
    best = 0.0
    obj = np.zeros(n)
    obj[k_max + 1] = -1.0
    for y1 in grid:
        bounds = [(0, 1)] * n
        bounds[1] = (y1, y1)
        res = _lp(obj, A, b, bounds)
        if res.status == 0 and y1 > 0:
            best = max(best, -res.fun / y1)
    return best
