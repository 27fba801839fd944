"""Protocol search: intensities and level probabilities maximizing the rate.

The search runs derivative-free simplex (Nelder-Mead) from several starting
points in a transformed space (log intensities, softmax logits for the level
probabilities), followed by a coordinate pattern search.  The objective is
the un-clamped key length per signal, so the search still sees a slope in
regions where no key can be certified.
"""
from __future__ import annotations

import math
import warnings
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Optional

import numpy as np
from scipy import optimize as sopt

from .bounds import InconsistentObservations, sps_bounds
from .channel import ChannelModel, expected_tally, from_params
from .model import ProtocolSpec, RateReport, SessionTally, SpsBounds, SystemParams, validate
from .rate import key_length
from .stats import observation_bounds

MU_MAX = 2.0
_PENALTY = 1.0  # raw rates are per signal, far below this


@dataclass(frozen=True)
class Analysis:
    tally: SessionTally
    sps: SpsBounds
    report: RateReport


def analyze(protocol: ProtocolSpec, params: SystemParams, tally: SessionTally) -> Analysis:
    """Bounds and key length for an observed (or simulated) tally."""
    obs = observation_bounds(tally, params.epsilon)
    sps = sps_bounds(protocol, obs, params.k_max)
    return Analysis(tally, sps, key_length(tally, sps, params, protocol))


def evaluate(protocol: ProtocolSpec, params: SystemParams,
             channel: Optional[ChannelModel] = None) -> Analysis:
    """Simulate the expected tally through ``channel`` and analyze it."""
    channel = from_params(params) if channel is None else channel
    return analyze(protocol, params, expected_tally(protocol, params, channel))


def rate_of(protocol: ProtocolSpec, params: SystemParams,
            channel: Optional[ChannelModel] = None) -> float:
    """Key rate per signal sent for ``protocol`` on an expected-value tally."""
    return evaluate(protocol, params, channel).report.rate


@dataclass(frozen=True)
class SearchOptions:
    starts: int = 8
    max_evals: int = 400
    xatol: float = 1e-4
    refine_evals: int = 120
    seed: int = 0
    jobs: int = 1


@dataclass(frozen=True)
class OptimizeResult:
    protocol: ProtocolSpec
    rate: float
    evaluations: int
    converged: bool
    start_rates: tuple[float, ...] = field(default=(), compare=False)


class _Space:
    """Map between unconstrained search vectors and protocols."""

    def __init__(self, n_levels: int):
        if n_levels not in (1, 2, 3, 4):
            raise ValueError(f"n_levels must be 1, 2, 3 or 4, got {n_levels!r}")
        self.n_levels = n_levels
        self.vacuum = n_levels >= 3
        self.n_mu = n_levels - 1 if self.vacuum else n_levels
        self.dim = self.n_mu + n_levels - 1

    def protocol(self, z: np.ndarray) -> ProtocolSpec:
        mus = [min(math.exp(v), MU_MAX) for v in z[: self.n_mu]]
        if self.vacuum:
            mus = [0.0] + mus
        logits = np.append(z[self.n_mu:], 0.0)
        logits -= logits.max()
        w = np.exp(logits)
        probs = w / w.sum()
        order = sorted(range(self.n_levels), key=lambda j: mus[j])
        mus = [mus[j] for j in order]
        probs = [float(probs[j]) for j in order]
        probs[-1] = 1.0 - math.fsum(probs[:-1])
        keys = [self.n_levels - 1] if self.vacuum else list(range(self.n_levels))
        return ProtocolSpec.from_lists(mus, probs, keys)

    def encode(self, mus, probs) -> np.ndarray:
        mus = list(mus)
        if self.vacuum:
            mus = mus[1:]
        p = np.asarray(probs, float)
        return np.concatenate([np.log(mus), np.log(p[:-1] / p[-1])])

    def default_start(self) -> np.ndarray:
        table = {
            1: ([0.3], [1.0]),
            2: ([0.1, 0.5], [0.1, 0.9]),
            3: ([0.0, 0.1, 0.6], [0.03, 0.07, 0.90]),
            4: ([0.0, 0.1, 0.45, 0.7], [0.03, 0.07, 0.3, 0.6]),
        }
        return self.encode(*table[self.n_levels])

    def random_start(self, rng: np.random.Generator) -> np.ndarray:
        lows = np.sort(rng.uniform(math.log(0.01), math.log(1.2), size=self.n_mu))
        p = rng.dirichlet(np.ones(self.n_levels))
        # the highest level usually dominates
        p = np.sort(p)
        p = 0.5 * p + 0.5 * np.eye(self.n_levels)[-1]
        return np.concatenate([lows, np.log(p[:-1] / p[-1])])


class _Objective:
    def __init__(self, space: _Space, params: SystemParams, channel: ChannelModel):
        self.space = space
        self.params = params
        self.channel = channel
        self.calls = 0

    def __call__(self, z: np.ndarray) -> float:
        self.calls += 1
        proto = self.space.protocol(np.asarray(z, float))
        if validate(proto, self.params):
            return _PENALTY
        try:
            with warnings.catch_warnings():
                warnings.simplefilter("ignore", RuntimeWarning)
                rep = evaluate(proto, self.params, self.channel).report
        except (InconsistentObservations, FloatingPointError):
            return _PENALTY
        return -rep.raw_key_length / self.params.n_total


def _refine(f, z, fz, budget, step=0.05, min_step=1e-4):
    """Coordinate pattern search around ``z``."""
    used = 0
    while step >= min_step and used < budget:
        improved = False
        for i in range(z.size):
            for s in (step, -step):
                if used >= budget:
                    break
                trial = z.copy()
                trial[i] += s
                ft = f(trial)
                used += 1
                if ft < fz:
                    z, fz, improved = trial, ft, True
                    break
        if not improved:
            step *= 0.5
    return z, fz, used


def _run_start(args):
    z0, n_levels, params, channel, opts = args
    space = _Space(n_levels)
    f = _Objective(space, params, channel)
    simplex = np.vstack([z0] + [z0 + 0.3 * e for e in np.eye(space.dim)])
    res = sopt.minimize(
        f, z0, method="Nelder-Mead",
        options={"initial_simplex": simplex, "xatol": opts.xatol, "fatol": math.inf,
                 "maxfev": opts.max_evals},
    )
    z, fz, _ = _refine(f, np.asarray(res.x, float), float(res.fun), opts.refine_evals)
    return z, fz, f.calls, bool(res.success)


def optimize_protocol(params: SystemParams, channel: Optional[ChannelModel] = None,
                      n_levels: int = 3, options: Optional[SearchOptions] = None) -> OptimizeResult:
    """Best protocol with ``n_levels`` levels for the given system.

    With three or more levels the lowest is the vacuum and only the highest
    level encodes key; with one or two levels every level encodes key.
    """
    opts = options or SearchOptions()
    channel = from_params(params) if channel is None else channel
    space = _Space(n_levels)
    rng = np.random.default_rng(opts.seed)
    starts = [space.default_start()] + [space.random_start(rng) for _ in range(max(0, opts.starts - 1))]
    jobs = [(z, n_levels, params, channel, opts) for z in starts]
    if opts.jobs > 1:
        with ProcessPoolExecutor(max_workers=opts.jobs) as pool:
            results = list(pool.map(_run_start, jobs))
    else:
        results = [_run_start(j) for j in jobs]

    def rank(item):
        z, fz, _, _ = item
        return (fz, space.protocol(z).mus)

    best_z, best_f, _, converged = min(results, key=rank)
    proto = space.protocol(best_z)
    rate = max(0.0, -best_f) if best_f < _PENALTY else 0.0
    return OptimizeResult(
        protocol=proto,
        rate=rate,
        evaluations=sum(r[2] for r in results),
        converged=converged,
        start_rates=tuple(max(0.0, -r[1]) for r in results),
    )
