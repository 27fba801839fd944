"""Binomial confidence bounds and entropy helpers.

The one-sided bounds are exact Clopper-Pearson limits obtained by inverting
the regularized incomplete beta function.  Because the beta-function form is
defined for real arguments, non-integer "success" counts (expectation-mode
tallies) are accepted and handled by the same expressions.
"""
from __future__ import annotations

import math

from scipy import optimize, special

from .model import ObservationBounds, SessionTally

__all__ = [
    "h2",
    "bound_lower",
    "bound_upper",
    "count_lower",
    "observation_bounds",
    "BOUNDS_PER_LEVEL",
]

# Y-, Y+, B-, B+ for every level
BOUNDS_PER_LEVEL = 4


def h2(x: float) -> float:
    """Binary Shannon entropy in bits, with ``0 log 0 = 0``."""
    x = float(x)
    if not 0.0 <= x <= 1.0:
        raise ValueError(f"h2 argument must lie in [0, 1], got {x!r}")
    if x == 0.0 or x == 1.0:
        return 0.0
    return -x * math.log2(x) - (1.0 - x) * math.log1p(-x) / math.log(2.0)


def _check(s: float, t: float, eps: float) -> tuple[float, float, float]:
    s, t, eps = float(s), float(t), float(eps)
    if not (math.isfinite(t) and t > 0):
        raise ValueError(f"number of trials must be positive, got {t!r}")
    if not (math.isfinite(s) and 0.0 <= s <= t):
        raise ValueError(f"successes must lie in [0, t], got s={s!r}, t={t!r}")
    if not 0.0 < eps < 1.0:
        raise ValueError(f"eps must lie in (0, 1), got {eps!r}")
    return s, t, eps


def bound_lower(s: float, t: float, eps: float) -> float:
    """Lower confidence limit on a binomial success probability.

    Returns the ``p`` solving ``Pr[Binomial(t, p) >= s] = eps``, i.e. the
    one-sided Clopper-Pearson bound at confidence ``1 - eps``.

    Examples
    --------
    >>> round(bound_lower(5, 10, 0.05), 4)
    0.2224
    """
    s, t, eps = _check(s, t, eps)
    if s == 0.0:
        return 0.0
    p = float(special.betaincinv(s, t - s + 1.0, eps))
    return min(max(p, 0.0), s / t)


def bound_upper(s: float, t: float, eps: float) -> float:
    """Upper confidence limit: the ``p`` solving ``Pr[Binomial(t, p) <= s] = eps``.

    >>> round(bound_upper(0, 10, 0.05), 4)
    0.2589
    """
    s, t, eps = _check(s, t, eps)
    if s == t:
        return 1.0
    p = float(special.betainccinv(s + 1.0, t - s, eps))
    return max(min(p, 1.0), s / t)


def count_lower(n: float, p: float, eps: float) -> float:
    """Lower confidence bound on the count of a ``Binomial(n, p)`` variable.

    Returns the largest (real) ``L`` with ``Pr[X >= L] >= 1 - eps``.  The
    continuous extension ``Pr[X >= L] = I_p(L, n - L + 1)`` is used, so ``n``
    may be non-integer.
    """
    n, p, eps = float(n), float(p), float(eps)
    if not (math.isfinite(n) and n >= 0):
        raise ValueError(f"n must be >= 0, got {n!r}")
    if not 0.0 <= p <= 1.0:
        raise ValueError(f"p must lie in [0, 1], got {p!r}")
    if not 0.0 < eps < 1.0:
        raise ValueError(f"eps must lie in (0, 1), got {eps!r}")
    if n == 0.0 or p == 0.0:
        return 0.0
    if p == 1.0:
        return n
    target = 1.0 - eps

    def excess(s: float) -> float:
        return float(special.betainc(s, n - s + 1.0, p)) - target

    lo = min(1e-12, n)
    if excess(lo) < 0.0:
        return 0.0
    if excess(n) >= 0.0:
        return n
    return optimize.brentq(excess, lo, n, xtol=1e-9 * max(1.0, n), rtol=1e-14)


def observation_bounds(tally: SessionTally, eps: float) -> ObservationBounds:
    """Confidence intervals on click and error probability per signal sent.

    Levels with no signals sent get the vacuous interval ``[0, 1]``.
    """
    y_lo, y_hi, b_lo, b_hi = [], [], [], []
    for n, c, e in zip(tally.n_sent, tally.n_received, tally.n_errors):
        if n <= 0:
            y_lo.append(0.0)
            y_hi.append(1.0)
            b_lo.append(0.0)
            b_hi.append(1.0)
            continue
        y_lo.append(bound_lower(c, n, eps))
        y_hi.append(bound_upper(c, n, eps))
        b_lo.append(bound_lower(e, n, eps))
        b_hi.append(bound_upper(e, n, eps))
    return ObservationBounds(tuple(y_lo), tuple(y_hi), tuple(b_lo), tuple(b_hi))
