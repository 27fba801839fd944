"""Parameter studies: sweeps over one system setting and detector comparisons."""
from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import replace
from typing import Optional, Sequence

import numpy as np

from . import channel as ch
from .distinguish import analyze_distinguishable, four_laser_matrix
from .io import RunConfig
from .model import ProtocolSpec
from .optimize import Analysis, SearchOptions, analyze, optimize_protocol
from .robust import analyze_uncertain

CSV_COLUMNS = ("rate", "K", "mu_low", "mu_high", "p_vacuum", "p_low", "p_high",
               "b1_max", "P_S_high", "P_D_high")

Q_PRESETS = ("four-laser",)


def analyze_config(cfg: RunConfig, protocol: ProtocolSpec, tally=None) -> Analysis:
    """Analyze ``protocol`` under the config's uncertainty and distinguishability settings."""
    params = cfg.params()
    if tally is None:
        tally = ch.expected_tally(protocol, params)
    if cfg.q_preset:
        if cfg.q_preset != "four-laser":
            raise ValueError(f"unknown Q preset {cfg.q_preset!r}; choose from {Q_PRESETS}")
        return analyze_distinguishable(protocol, params, tally, four_laser_matrix(protocol, params.k_max))
    if any(lv.q_row is not None for lv in protocol.levels):
        return analyze_distinguishable(protocol, params, tally)
    if cfg.intensity_uncertainty > 0:
        return analyze_uncertain(protocol, params, cfg.intensity_uncertainty, tally=tally)
    return analyze(protocol, params, tally)


def solve_point(cfg: RunConfig, optimize: bool, levels: Optional[int] = None,
                options: Optional[SearchOptions] = None) -> tuple[ProtocolSpec, Analysis]:
    """Protocol (given or optimized) and its analysis at one configuration."""
    if optimize:
        n = levels or cfg.levels or (len(cfg.protocol) if cfg.protocol else 3)
        res = optimize_protocol(cfg.params(), n_levels=n, options=options)
        protocol = res.protocol
    else:
        if cfg.protocol is None:
            raise ValueError("config has no levels; pass --optimize or add level.* keys")
        protocol = cfg.protocol
    return protocol, analyze_config(cfg, protocol)


def summary_row(protocol: ProtocolSpec, analysis: Analysis) -> tuple[float, ...]:
    """Values for :data:`CSV_COLUMNS`."""
    mus = protocol.mus
    probs = protocol.probabilities
    high = max(range(len(mus)), key=lambda j: mus[j])
    lows = [j for j in range(len(mus)) if mus[j] > 0 and j != high]
    low = min(lows, key=lambda j: mus[j]) if lows else None
    vac = [j for j in range(len(mus)) if mus[j] == 0]
    rep = analysis.report
    sps = analysis.sps
    return (
        rep.rate,
        rep.key_length,
        mus[low] if low is not None else math.nan,
        mus[high],
        probs[vac[0]] if vac else 0.0,
        probs[low] if low is not None else 0.0,
        probs[high],
        sps.b1_max,
        sps.p_s[high],
        sps.p_d[high],
    )


def grid(start: float, stop: float, points: int, log: bool = False) -> list[float]:
    if points < 1:
        raise ValueError("points must be >= 1")
    if points == 1:
        return [float(start)]
    if log:
        if start <= 0 or stop <= 0:
            raise ValueError("log grids need positive end points")
        return [float(v) for v in np.geomspace(start, stop, points)]
    return [float(v) for v in np.linspace(start, stop, points)]


def _sweep_one(args):
    cfg, optimize, levels, options = args
    protocol, analysis = solve_point(cfg, optimize, levels, options)
    return summary_row(protocol, analysis)


def sweep(cfg: RunConfig, key: str, values: Sequence[float], optimize: bool = False,
          levels: Optional[int] = None, options: Optional[SearchOptions] = None,
          jobs: int = 1) -> list[tuple[float, ...]]:
    """One summary row per value of ``key``, in input order."""
    tasks = [(cfg.with_value(key, v), optimize, levels, options) for v in values]
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            rows = list(pool.map(_sweep_one, tasks))
    else:
        rows = [_sweep_one(t) for t in tasks]
    return [(v,) + row for v, row in zip(values, rows)]


def detector_config(cfg: RunConfig, name: str, fiber_km: float) -> RunConfig:
    """Config for detector ``name`` behind ``fiber_km`` of fiber (base loss ignored)."""
    return replace(cfg, detector=name, y0=None, eta=None, loss_db=None, fiber_km=float(fiber_km))


def detector_rate(cfg: RunConfig, name: str, fiber_km: float,
                  options: Optional[SearchOptions] = None, levels: int = 3) -> float:
    c = detector_config(cfg, name, fiber_km)
    return optimize_protocol(c.params(), n_levels=levels, options=options).rate


def detector_curves(cfg: RunConfig, distances: Sequence[float],
                    names: Sequence[str] = ("snspd", "tes", "apd"),
                    options: Optional[SearchOptions] = None, jobs: int = 1) -> list[tuple[float, ...]]:
    """Optimized rate per detector preset at each fiber length."""
    tasks = [(detector_config(cfg, name, d), True, 3, options) for d in distances for name in names]
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            rows = list(pool.map(_sweep_one, tasks))
    else:
        rows = [_sweep_one(t) for t in tasks]
    k = len(names)
    return [(float(d),) + tuple(r[0] for r in rows[i * k:(i + 1) * k]) for i, d in enumerate(distances)]


def max_reach(cfg: RunConfig, name: str, options: Optional[SearchOptions] = None,
              lo: float = 0.0, hi: float = 400.0, tol_km: float = 1.0) -> float:
    """Longest fiber length (km) with a positive optimized rate, by bisection."""
    if detector_rate(cfg, name, lo, options) <= 0.0:
        return 0.0
    if detector_rate(cfg, name, hi, options) > 0.0:
        return hi
    while hi - lo > tol_km:
        mid = 0.5 * (lo + hi)
        if detector_rate(cfg, name, mid, options) > 0.0:
            lo = mid
        else:
            hi = mid
    return lo
