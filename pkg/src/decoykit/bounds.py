"""Decoy-state programs bounding single-photon yield, dark yield and b1.

Program variables are the per-photon-number yields ``ybar_k`` (and, for the
error program, the joint error-click probabilities ``cbar_k = b_k y_k``) for
``k < k_max``.  Photon numbers at or above ``k_max`` are handled
conservatively: their yield is taken as 1 on the lower side of every
observation interval and as 0 on the upper side, which widens each row by
the Poisson tail mass.

Every row is divided by the upper end of its observation interval so that
the LP solver works with O(1) row bounds.
"""
from __future__ import annotations

import math
from typing import Optional, Sequence

import numpy as np
from scipy import special

from .lp import LpProblem, feasible, solve
from .model import ObservationBounds, ProtocolSpec, SpsBounds

B1_TOL = 1e-6
_ZERO_YIELD = 1e-14


class InconsistentObservations(ValueError):
    """The observed statistics admit no channel (corrupted tally or wrong intensities)."""


def poisson_row(mu: float, k_max: int) -> tuple[np.ndarray, float]:
    """Poisson weights ``exp(-mu) mu^k / k!`` for ``k < k_max`` and the tail mass.

    >>> w, tail = poisson_row(0.0, 3)
    >>> w.tolist(), tail
    ([1.0, 0.0, 0.0], 0.0)
    """
    mu = float(mu)
    if mu < 0:
        raise ValueError(f"mu must be >= 0, got {mu!r}")
    if k_max < 1:
        raise ValueError(f"k_max must be >= 1, got {k_max!r}")
    if mu == 0.0:
        w = np.zeros(k_max)
        w[0] = 1.0
        return w, 0.0
    k = np.arange(k_max)
    w = np.exp(-mu + k * math.log(mu) - special.gammaln(k + 1))
    # P(Poisson(mu) >= k_max) without cancellation
    tail = float(special.gammainc(k_max, mu))
    return w, tail


def _scale(hi: float) -> float:
    return hi if hi > 0.0 else 1.0


def yield_rows(mus: Sequence[float], y_lo: Sequence[float], y_hi: Sequence[float],
               k_max: int, n_vars: Optional[int] = None, offset: int = 0):
    """Normalized observation rows over ``k_max`` yield variables.

    Returns ``(A, row_lo, row_hi)``.  ``n_vars``/``offset`` place the
    variables inside a larger variable vector.
    """
    n_vars = k_max if n_vars is None else n_vars
    m = len(mus)
    A = np.zeros((m, n_vars))
    rl = np.empty(m)
    ru = np.empty(m)
    for j, mu in enumerate(mus):
        w, tail = poisson_row(mu, k_max)
        s = _scale(y_hi[j])
        A[j, offset:offset + k_max] = w / s
        rl[j] = (y_lo[j] - tail) / s
        ru[j] = y_hi[j] / s
    return A, rl, ru


def _yield_program(mus, obs: ObservationBounds, k_max: int, k: int) -> LpProblem:
    A, rl, ru = yield_rows(mus, obs.y_lo, obs.y_hi, k_max)
    c = np.zeros(k_max)
    c[k] = 1.0
    return LpProblem.build(c, A, rl, ru, np.zeros(k_max), np.ones(k_max))


def min_yield(mus: Sequence[float], obs: ObservationBounds, k_max: int, k: int) -> float:
    """Smallest ``ybar_k`` compatible with the observed click intervals."""
    sol = solve(_yield_program(mus, obs, k_max, k))
    if sol.status == "infeasible":
        raise InconsistentObservations("observations inconsistent: no yields fit the click intervals")
    if not sol.optimal:
        raise FloatingPointError(f"yield program ended with status {sol.status}")
    return max(0.0, float(sol.x[k]))


def min_single_photon(protocol: ProtocolSpec, obs: ObservationBounds, k_max: int) -> tuple[float, ...]:
    """Per-level lower bound ``P_j^S`` on clicks caused by single photons.

    All levels constrain the common yields, so a single program gives the
    minimum single-photon yield shared by every level.
    """
    mus = protocol.mus
    y1 = min_yield(mus, obs, k_max, 1)
    return tuple(math.exp(-mu) * mu * y1 for mu in mus)


def min_dark(protocol: ProtocolSpec, obs: ObservationBounds, k_max: int) -> tuple[float, ...]:
    """Per-level lower bound ``P_j^D`` on clicks with no photon sent."""
    mus = protocol.mus
    y0 = min_yield(mus, obs, k_max, 0)
    return tuple(math.exp(-mu) * y0 for mu in mus)


def _error_system(mus, obs: ObservationBounds, k_max: int):
    """Rows over ``(ybar_0..ybar_{K-1}, cbar_0..cbar_{K-1})``."""
    nv = 2 * k_max
    Ay, rly, ruy = yield_rows(mus, obs.y_lo, obs.y_hi, k_max, nv, 0)
    Ab, rlb, rub = yield_rows(mus, obs.b_lo, obs.b_hi, k_max, nv, k_max)
    Ac = np.zeros((k_max, nv))
    idx = np.arange(k_max)
    Ac[idx, idx] = -1.0
    Ac[idx, k_max + idx] = 1.0
    A = np.vstack([Ay, Ab, Ac])
    rl = np.concatenate([rly, rlb, np.full(k_max, -np.inf)])
    ru = np.concatenate([ruy, rub, np.zeros(k_max)])
    return A, rl, ru


def _b1_problem(A, rl, ru, k_max, t, y1_scale):
    row = np.zeros(2 * k_max)
    row[k_max + 1] = 1.0 / y1_scale
    row[1] = -t / y1_scale
    return LpProblem.build(
        np.zeros(2 * k_max),
        np.vstack([A, row]),
        np.append(rl, 0.0),
        np.append(ru, np.inf),
        np.zeros(2 * k_max),
        np.ones(2 * k_max),
    )


class B1Search:
    """Feasibility oracle for ``cbar_1 >= t * ybar_1`` over the error program.

    Exposed separately so the monotonicity of the oracle can be checked.
    """

    def __init__(self, protocol: ProtocolSpec, obs: ObservationBounds, k_max: int):
        if not any(mu > 0 for mu in protocol.mus):
            raise ValueError("at least one level must have mu > 0")
        self.k_max = k_max
        self.A, self.rl, self.ru = _error_system(protocol.mus, obs, k_max)
        nv = 2 * k_max
        box = (np.zeros(nv), np.ones(nv))
        c = np.zeros(nv)
        c[1] = 1.0
        low = solve(LpProblem.build(c, self.A, self.rl, self.ru, *box))
        if low.status == "infeasible":
            raise InconsistentObservations("observations inconsistent: no yields/errors fit the intervals")
        if not low.optimal:
            raise FloatingPointError(f"error program ended with status {low.status}")
        self.y1_min = max(0.0, float(low.x[1]))
        c = np.zeros(nv)
        c[k_max + 1] = 1.0
        high = solve(LpProblem.build(c, self.A, self.rl, self.ru, *box, sense="max"))
        if not high.optimal:
            raise FloatingPointError(f"error program ended with status {high.status}")
        self.c1_max = max(0.0, float(high.x[k_max + 1]))
        self.witness = float(high.x[k_max + 1]) / float(high.x[1]) if high.x[1] > 0 else 0.0
        self.n_lp = 2

    def feasible(self, t: float) -> bool:
        self.n_lp += 1
        scale = self.y1_min if self.y1_min > _ZERO_YIELD else 1.0
        return feasible(_b1_problem(self.A, self.rl, self.ru, self.k_max, t, scale))

    def run(self, tol: float = B1_TOL) -> float:
        if self.c1_max <= 0.0:
            return 0.0
        if self.y1_min <= _ZERO_YIELD:
            return 1.0
        lo = min(1.0, max(0.0, self.witness))
        hi = min(1.0, self.c1_max / self.y1_min)
        if hi - lo <= tol:
            return hi
        if self.feasible(hi):
            return hi
        while hi - lo > tol:
            mid = 0.5 * (lo + hi)
            if self.feasible(mid):
                lo = mid
            else:
                hi = mid
        return hi


def max_b1(protocol: ProtocolSpec, obs: ObservationBounds, k_max: int, tol: float = B1_TOL) -> float:
    """Upper bound on the single-photon bit error rate.

    The bilinear program ``max b_1`` is rewritten with ``cbar_k = b_k y_k`` as
    ``sup cbar_1 / ybar_1`` over a polytope and solved by bisection on the
    ratio, each step being an LP feasibility check.  If ``ybar_1 = 0`` is
    admissible the worst case 1 is returned.
    """
    return B1Search(protocol, obs, k_max).run(tol)


def sps_bounds(protocol: ProtocolSpec, obs: ObservationBounds, k_max: int) -> SpsBounds:
    """All three decoy bounds for a protocol and its observation intervals."""
    p_s = min_single_photon(protocol, obs, k_max)
    p_d = min_dark(protocol, obs, k_max)
    search = B1Search(protocol, obs, k_max)
    b1 = search.run()
    return SpsBounds(p_s, p_d, b1, {"lp_solves": 2 + search.n_lp, "y1_min": search.y1_min})
