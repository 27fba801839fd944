"""Decoy bounds when the prepared intensities are only known to a tolerance.

Each nonzero intensity may lie anywhere in ``[(1-U) mu, (1+U) mu]``; the
vacuum is taken as exact.  The observations are fixed and only the program
coefficients move, so the worst case is taken over the corners of the box
of intensities: smallest ``P^S`` and ``P^D``, largest ``b1``.
"""
from __future__ import annotations

import itertools
from typing import Optional, Sequence, Union

from .bounds import InconsistentObservations, sps_bounds
from .channel import ChannelModel, expected_tally, from_params
from .model import IntensityLevel, ObservationBounds, ProtocolSpec, SpsBounds, SystemParams
from .optimize import Analysis
from .rate import key_length
from .stats import observation_bounds


def _uncertainties(protocol: ProtocolSpec, U) -> list[float]:
    if isinstance(U, (int, float)):
        us = [float(U)] * len(protocol)
    else:
        us = [float(u) for u in U]
        if len(us) != len(protocol):
            raise ValueError("one uncertainty per level is required")
    for u in us:
        if not 0.0 <= u < 1.0:
            raise ValueError(f"uncertainty must lie in [0, 1), got {u!r}")
    return us


def perturbed(protocol: ProtocolSpec, factors: Sequence[float]) -> ProtocolSpec:
    """Protocol with each intensity multiplied by its factor."""
    return ProtocolSpec(tuple(
        IntensityLevel(lv.mu * f, lv.probability, lv.encodes_key, lv.q_row)
        for lv, f in zip(protocol.levels, factors)
    ))


def corners(protocol: ProtocolSpec, U: Union[float, Sequence[float]]) -> list[tuple[float, ...]]:
    """Intensity scale factors at every corner; the vacuum keeps factor 1."""
    us = _uncertainties(protocol, U)
    free = [j for j, lv in enumerate(protocol.levels) if lv.mu > 0 and us[j] > 0]
    out = []
    for signs in itertools.product((-1.0, 1.0), repeat=len(free)):
        f = [1.0] * len(protocol)
        for j, s in zip(free, signs):
            f[j] = 1.0 + s * us[j]
        out.append(tuple(f))
    return out


def bounds_under_uncertainty(protocol: ProtocolSpec, obs: ObservationBounds,
                             params: SystemParams, U: Union[float, Sequence[float]]) -> SpsBounds:
    """Worst-case decoy bounds over the corner intensity assignments."""
    results = []
    for f in corners(protocol, U):
        try:
            results.append(sps_bounds(perturbed(protocol, f), obs, params.k_max))
        except InconsistentObservations as exc:
            raise InconsistentObservations(f"{exc} (intensity factors {f})") from exc
    p_s = tuple(min(r.p_s[j] for r in results) for j in range(len(protocol)))
    p_d = tuple(min(r.p_d[j] for r in results) for j in range(len(protocol)))
    b1 = max(r.b1_max for r in results)
    return SpsBounds(p_s, p_d, b1, {"corners": len(results)})


def analyze_uncertain(protocol: ProtocolSpec, params: SystemParams, U,
                      channel: Optional[ChannelModel] = None, tally=None) -> Analysis:
    """Simulate at the true intensities, then analyze with uncertain ones."""
    channel = from_params(params) if channel is None else channel
    tally = expected_tally(protocol, params, channel) if tally is None else tally
    obs = observation_bounds(tally, params.epsilon)
    sps = bounds_under_uncertainty(protocol, obs, params, U)
    return Analysis(tally, sps, key_length(tally, sps, params, protocol))
