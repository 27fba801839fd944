"""Decoy analysis when levels are partially distinguishable.

If an adversary can tell level ``j`` apart from the others for ``k``-photon
pulses, the yield of that level becomes its own variable ``ybar_{j,k}``.  It
stays tied to the common yield ``y_k`` through the probability ``Q_{j,k}``
that the pulse is indistinguishable:

    y_k >= Q_{j,k} ybar_{j,k}        1 - y_k >= Q_{j,k} (1 - ybar_{j,k})

``Q_{j,k} = 1`` identifies the two variables and ``Q_{j,k} = 0`` frees them.
"""
from __future__ import annotations

import math
from typing import Optional, Sequence

import numpy as np

from .bounds import InconsistentObservations, poisson_row
from .lp import LpProblem, solve
from .model import ObservationBounds, ProtocolSpec, SessionTally, SpsBounds, SystemParams
from .optimize import Analysis
from .rate import key_length
from .stats import bound_upper, count_lower, observation_bounds


def q_four_laser(k: int) -> float:
    """Indistinguishability of the extra low-intensity laser for ``k`` photons.

    The literal form ``2^(k-2)`` for ``k >= 3`` is not a probability;
    ``2^-(k-2)`` is used instead.
    """
    if k < 0:
        raise ValueError("photon number must be >= 0")
    if k <= 1:
        return 1.0
    if k == 2:
        return 0.75
    return min(1.0, 2.0 ** -(k - 2))


def four_laser_matrix(protocol: ProtocolSpec, k_max: int) -> np.ndarray:
    """Q matrix with the four-laser row on the weakest non-vacuum level."""
    Q = np.ones((len(protocol), k_max))
    nonzero = [j for j, mu in enumerate(protocol.mus) if mu > 0 and j not in protocol.key_indices]
    if nonzero:
        low = min(nonzero, key=lambda j: protocol.mus[j])
        Q[low] = [q_four_laser(k) for k in range(k_max)]
    return Q


def q_matrix(protocol: ProtocolSpec, k_max: int, Q: Optional[Sequence[Sequence[float]]] = None) -> np.ndarray:
    """Resolve ``Q`` from an explicit matrix or the levels' ``q_row`` fields."""
    if Q is None:
        Q = np.ones((len(protocol), k_max))
        for j, lv in enumerate(protocol.levels):
            if lv.q_row is not None:
                row = list(lv.q_row)[:k_max]
                row += [row[-1] if row else 1.0] * (k_max - len(row))
                Q[j] = row
    Q = np.asarray(Q, dtype=float)
    if Q.shape != (len(protocol), k_max):
        raise ValueError(f"Q must have shape {(len(protocol), k_max)}, got {Q.shape}")
    if np.any((Q < 0) | (Q > 1)):
        raise ValueError("Q entries must lie in [0, 1]")
    return Q


class _Program:
    def __init__(self, mus, obs: ObservationBounds, Q: np.ndarray, k_max: int):
        n_levels = len(mus)
        index = np.empty((n_levels, k_max), dtype=int)
        nv = k_max
        for j in range(n_levels):
            for k in range(k_max):
                if Q[j, k] == 1.0:
                    index[j, k] = k
                else:
                    index[j, k] = nv
                    nv += 1
        rows, rl, ru = [], [], []
        for j, mu in enumerate(mus):
            w, tail = poisson_row(mu, k_max)
            s = obs.y_hi[j] if obs.y_hi[j] > 0 else 1.0
            row = np.zeros(nv)
            np.add.at(row, index[j], w / s)
            rows.append(row)
            rl.append((obs.y_lo[j] - tail) / s)
            ru.append(obs.y_hi[j] / s)
        for j in range(n_levels):
            for k in range(k_max):
                q = Q[j, k]
                if q == 1.0 or q == 0.0:
                    continue
                v = index[j, k]
                row = np.zeros(nv)
                row[k], row[v] = 1.0, -q
                rows.append(row)
                rl.append(0.0)
                ru.append(np.inf)
                row = np.zeros(nv)
                row[k], row[v] = -1.0, q
                rows.append(row)
                rl.append(q - 1.0)
                ru.append(np.inf)
        self.index = index
        self.nv = nv
        self.A = np.array(rows).reshape(-1, nv)
        self.rl = np.array(rl)
        self.ru = np.array(ru)
        self._cache: dict[int, float] = {}

    def minimum(self, var: int) -> float:
        if var not in self._cache:
            c = np.zeros(self.nv)
            c[var] = 1.0
            sol = solve(LpProblem.build(c, self.A, self.rl, self.ru, np.zeros(self.nv), np.ones(self.nv)))
            if sol.status == "infeasible":
                raise InconsistentObservations("observations inconsistent with the distinguishability model")
            if not sol.optimal:
                raise FloatingPointError(f"program ended with status {sol.status}")
            self._cache[var] = max(0.0, float(sol.x[var]))
        return self._cache[var]


def min_single_photon_distinguishable(protocol: ProtocolSpec, obs: ObservationBounds,
                                      Q, k_max: int) -> tuple[tuple[float, ...], tuple[float, ...]]:
    """Per-level ``(P^S, P^D)`` lower bounds with level-specific yields."""
    Q = q_matrix(protocol, k_max, Q)
    prog = _Program(protocol.mus, obs, Q, k_max)
    p_s, p_d = [], []
    for j, mu in enumerate(protocol.mus):
        p_s.append(math.exp(-mu) * mu * prog.minimum(int(prog.index[j, 1])))
        p_d.append(math.exp(-mu) * prog.minimum(int(prog.index[j, 0])))
    return tuple(p_s), tuple(p_d)


def b1_via_dark_subtraction(tally: SessionTally, sps: SpsBounds, params: SystemParams,
                            protocol: ProtocolSpec) -> float:
    """Upper bound on b1 crediting the errors that dark counts must have caused.

    The worst case charges every observed error (upper confidence bound) to
    single photons.  Dark counts err half the time, so a lower confidence
    bound on the dark-count errors among at least ``N_j P_j^D`` dark clicks
    is subtracted first.  The largest value over key levels is returned.
    """
    out = 0.0
    for j in protocol.key_indices:
        n_j = tally.n_sent[j]
        s_lo = n_j * sps.p_s[j]
        if s_lo <= 0.0:
            return 1.0
        e_hi = n_j * bound_upper(tally.n_errors[j], n_j, params.epsilon)
        dark_errors = count_lower(n_j * sps.p_d[j], 0.5, params.epsilon)
        out = max(out, min(1.0, max(0.0, (e_hi - dark_errors) / s_lo)))
    return out


def analyze_distinguishable(protocol: ProtocolSpec, params: SystemParams, tally: SessionTally,
                            Q=None) -> Analysis:
    """Key length when decoy levels are partially distinguishable."""
    obs = observation_bounds(tally, params.epsilon)
    p_s, p_d = min_single_photon_distinguishable(protocol, obs, Q, params.k_max)
    partial = SpsBounds(p_s, p_d, 1.0)
    b1 = b1_via_dark_subtraction(tally, partial, params, protocol)
    sps = SpsBounds(p_s, p_d, b1, {"b1_method": "dark-subtraction"})
    return Analysis(tally, sps, key_length(tally, sps, params, protocol))
