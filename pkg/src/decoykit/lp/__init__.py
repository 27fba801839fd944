"""Small dense linear programs with range rows and boxed variables.

The simplex kernel comes from the compiled extension ``_simplex`` when it has
been built, otherwise from the numpy implementation in ``_simplex_py``.  Set
``DECOYKIT_PURE_PYTHON=1`` to force the fallback.
"""
from __future__ import annotations

import os
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from . import _simplex_py

if os.environ.get("DECOYKIT_PURE_PYTHON"):
    _kernel = _simplex_py
    BACKEND = "python"
else:
    try:
        from . import _simplex as _kernel  # type: ignore[attr-defined]

        BACKEND = "cython"
    except ImportError:  # extension not built
        _kernel = _simplex_py
        BACKEND = "python"

FEAS_TOL = 1e-9
PIVOT_TOL = 1e-11

_STATUS = {0: "optimal", 1: "infeasible", 2: "unbounded", 3: "failed"}


@dataclass(frozen=True)
class LpProblem:
    """``min`` or ``max`` of ``c.x`` s.t. ``row_lo <= A x <= row_hi``, ``lo <= x <= hi``.

    Use ``-inf``/``inf`` for absent bounds.
    """

    c: np.ndarray
    A: np.ndarray
    row_lo: np.ndarray
    row_hi: np.ndarray
    lo: np.ndarray
    hi: np.ndarray
    sense: str = "min"

    @classmethod
    def build(
        cls,
        c: Sequence[float],
        A: Optional[Sequence[Sequence[float]]] = None,
        row_lo: Optional[Sequence[float]] = None,
        row_hi: Optional[Sequence[float]] = None,
        lo: Optional[Sequence[float]] = None,
        hi: Optional[Sequence[float]] = None,
        sense: str = "min",
    ) -> "LpProblem":
        c = np.asarray(c, dtype=float).ravel()
        n = c.size
        A = np.zeros((0, n)) if A is None else np.asarray(A, dtype=float)
        if A.ndim != 2 or A.shape[1] != n:
            raise ValueError(f"constraint matrix shape {A.shape} does not match {n} variables")
        m = A.shape[0]
        row_lo = np.full(m, -np.inf) if row_lo is None else np.asarray(row_lo, dtype=float)
        row_hi = np.full(m, np.inf) if row_hi is None else np.asarray(row_hi, dtype=float)
        lo = np.zeros(n) if lo is None else np.asarray(lo, dtype=float)
        hi = np.full(n, np.inf) if hi is None else np.asarray(hi, dtype=float)
        if row_lo.shape != (m,) or row_hi.shape != (m,):
            raise ValueError("row bounds must have one entry per row")
        if lo.shape != (n,) or hi.shape != (n,):
            raise ValueError("variable bounds must have one entry per variable")
        if sense not in ("min", "max"):
            raise ValueError(f"sense must be 'min' or 'max', got {sense!r}")
        return cls(c, A, row_lo, row_hi, lo, hi, sense)


@dataclass(frozen=True)
class LpSolution:
    status: str
    value: float
    x: np.ndarray
    row_duals: np.ndarray = field(repr=False)
    reduced_costs: np.ndarray = field(repr=False)
    iterations: int = 0

    @property
    def optimal(self) -> bool:
        return self.status == "optimal"


def _trivially_infeasible(p: LpProblem) -> bool:
    return bool(np.any(p.lo > p.hi) or np.any(p.row_lo > p.row_hi))


def solve(problem: LpProblem, feas_tol: float = FEAS_TOL, max_iter: int = 5000) -> LpSolution:
    """Solve the problem; the status is never ``optimal`` unless verified."""
    p = problem
    n = p.c.size
    m = p.A.shape[0]
    if _trivially_infeasible(p):
        return LpSolution("infeasible", np.nan, np.full(n, np.nan), np.zeros(m), np.zeros(n))
    sign = -1.0 if p.sense == "max" else 1.0
    code, x, y, d, iters = _kernel.solve_bounded(
        np.ascontiguousarray(sign * p.c), np.ascontiguousarray(p.A),
        np.ascontiguousarray(p.row_lo), np.ascontiguousarray(p.row_hi),
        np.ascontiguousarray(p.lo), np.ascontiguousarray(p.hi),
        False, feas_tol, 1e-9, PIVOT_TOL, max_iter,
    )
    x = np.asarray(x)
    status = _STATUS[code]
    value = float(p.c @ x) if status == "optimal" else np.nan
    return LpSolution(status, value, x, sign * np.asarray(y), sign * np.asarray(d), iters)


def feasible(problem: LpProblem, feas_tol: float = FEAS_TOL, max_iter: int = 5000) -> bool:
    """True iff some point satisfies every row and box within ``feas_tol``."""
    p = problem
    if _trivially_infeasible(p):
        return False
    code, *_ = _kernel.solve_bounded(
        np.ascontiguousarray(np.zeros_like(p.c)), np.ascontiguousarray(p.A),
        np.ascontiguousarray(p.row_lo), np.ascontiguousarray(p.row_hi),
        np.ascontiguousarray(p.lo), np.ascontiguousarray(p.hi),
        True, feas_tol, 1e-9, PIVOT_TOL, max_iter,
    )
    if code == 3:
        raise FloatingPointError("simplex phase 1 did not converge")
    return code == 0


__all__ = ["LpProblem", "LpSolution", "solve", "feasible", "BACKEND"]
