"""Session simulation for beamsplitter channels and their mixtures.

A stationary channel lets each photon through independently with
probability ``eta``; dark/background clicks occur independently with
probability ``y0`` per slot.  Dark clicks err half the time, signal clicks
err with probability ``(1 - V) / 2``.  A mixture channel picks one stationary
component per signal with fixed frequencies, which is how an adversary
running a time-varying channel looks from the tally's point of view.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Sequence, Union

import numpy as np
from scipy import stats

from .model import ProtocolSpec, SessionTally, SystemParams

FIBER_DB_PER_KM = 0.2


@dataclass(frozen=True)
class Stationary:
    eta: float
    y0: float
    visibility: float = 1.0


@dataclass(frozen=True)
class Mixture:
    components: tuple[Stationary, ...]
    frequencies: tuple[float, ...]

    def __post_init__(self):
        if len(self.components) != len(self.frequencies):
            raise ValueError("one frequency per component is required")
        if abs(math.fsum(self.frequencies) - 1.0) > 1e-12:
            raise ValueError("mixture frequencies must sum to 1")


ChannelModel = Union[Stationary, Mixture]


def from_params(params: SystemParams) -> Stationary:
    return Stationary(params.eta, params.y0, params.visibility)


def _parts(channel: ChannelModel):
    if isinstance(channel, Mixture):
        return list(zip(channel.frequencies, channel.components))
    return [(1.0, channel)]


def yield_k(channel: ChannelModel, k: int) -> float:
    """Click probability for a ``k``-photon pulse.

    >>> yield_k(Stationary(0.5, 0.1), 3)
    0.8875
    """
    if k < 0:
        raise ValueError("photon number must be >= 0")
    return math.fsum(
        f * (1.0 - (1.0 - ch.y0) * (1.0 - ch.eta) ** k) for f, ch in _parts(channel)
    )


def error_k(channel: ChannelModel, k: int) -> float:
    """Probability that a ``k``-photon pulse yields an erroneous click."""
    if k < 0:
        raise ValueError("photon number must be >= 0")
    return math.fsum(
        f * (0.5 * ch.y0 + 0.5 * (1.0 - ch.visibility) * (1.0 - (1.0 - ch.eta) ** k))
        for f, ch in _parts(channel)
    )


def _level_click_error(channel: ChannelModel, mu: float) -> tuple[float, float]:
    # Poisson average of yield_k / error_k in closed form
    click = err = 0.0
    for f, ch in _parts(channel):
        transmitted = -math.expm1(-mu * ch.eta)
        click += f * (1.0 - (1.0 - ch.y0) * (1.0 - transmitted))
        err += f * (0.5 * ch.y0 + 0.5 * (1.0 - ch.visibility) * transmitted)
    return click, err


def expected_tally(protocol: ProtocolSpec, params: SystemParams,
                   channel: Optional[ChannelModel] = None) -> SessionTally:
    """Deterministic tally equal to the expectation of every count."""
    channel = from_params(params) if channel is None else channel
    n, c, e = [], [], []
    for lv in protocol.levels:
        nj = params.n_total * lv.probability
        click, err = _level_click_error(channel, lv.mu)
        n.append(nj)
        c.append(params.sift * nj * click)
        e.append(params.sift * nj * err)
    return SessionTally(tuple(n), tuple(c), tuple(e))


def sample_tally(protocol: ProtocolSpec, params: SystemParams,
                 channel: Optional[ChannelModel] = None, seed: int = 0,
                 k_cap: int = 40) -> SessionTally:
    """Draw integer counts for one session.

    Signals are assigned to levels multinomially, photon numbers are Poisson,
    and each pulse independently clicks, errs and survives sifting.  The
    counts are drawn in aggregate per (level, photon number), which is exact
    for independent signals.  Each level uses its own Philox stream spawned
    from ``seed``.
    """
    channel = from_params(params) if channel is None else channel
    ss = np.random.SeedSequence(seed)
    top, *level_seeds = ss.spawn(len(protocol) + 1)
    rng = np.random.Generator(np.random.Philox(top))
    n_total = int(round(params.n_total))
    probs = np.array(protocol.probabilities, dtype=float)
    probs = probs / probs.sum()
    n_sent = rng.multinomial(n_total, probs) if n_total > 0 else np.zeros(len(protocol), dtype=np.int64)

    ks = np.arange(k_cap)
    y = np.array([yield_k(channel, int(k)) for k in ks])
    cerr = np.array([error_k(channel, int(k)) for k in ks])
    sift = params.sift
    kept_ok = y * sift - cerr * sift
    kept_err = cerr * sift
    dropped = y * (1.0 - sift)
    cats = np.stack([kept_ok, kept_err, dropped, 1.0 - y], axis=1)
    cats = np.clip(cats, 0.0, None)
    cats /= cats.sum(axis=1, keepdims=True)

    c_out, e_out = [], []
    for lv, nj, sj in zip(protocol.levels, n_sent, level_seeds):
        g = np.random.Generator(np.random.Philox(sj))
        if nj == 0:
            c_out.append(0.0)
            e_out.append(0.0)
            continue
        if lv.mu == 0.0:
            pk = np.zeros(k_cap)
            pk[0] = 1.0
        else:
            pk = stats.poisson.pmf(ks, lv.mu)
            pk[-1] += stats.poisson.sf(k_cap - 1, lv.mu)
        counts = g.multinomial(int(nj), pk / pk.sum())
        ok = err = 0
        for k in np.flatnonzero(counts):
            draw = g.multinomial(int(counts[k]), cats[k])
            ok += int(draw[0])
            err += int(draw[1])
        c_out.append(float(ok + err))
        e_out.append(float(err))
    return SessionTally(tuple(float(v) for v in n_sent), tuple(c_out), tuple(e_out))


@dataclass(frozen=True)
class DetectorPreset:
    name: str
    efficiency: float
    dark: float
    optics_loss_db: float = 7.0


PRESETS = {
    "snspd": DetectorPreset("snspd", 0.02, 1.44e-8),
    "tes": DetectorPreset("tes", 0.50, 4e-6),
    "apd": DetectorPreset("apd", 0.10, 1.5e-5),
}


def preset(name: str) -> DetectorPreset:
    try:
        return PRESETS[name.lower()]
    except KeyError:
        raise KeyError(f"unknown detector preset {name!r}; choose from {sorted(PRESETS)}") from None


def db_to_eta(loss_db: float) -> float:
    return 10.0 ** (-float(loss_db) / 10.0)


def eta_to_db(eta: float) -> float:
    return -10.0 * math.log10(eta)


def detector_link(det: DetectorPreset, fiber_km: float,
                  db_per_km: float = FIBER_DB_PER_KM) -> tuple[float, float]:
    """End-to-end ``(eta, y0)`` for a detector behind ``fiber_km`` of fiber."""
    loss = det.optics_loss_db + db_per_km * fiber_km
    return det.efficiency * db_to_eta(loss), det.dark


def random_mixture(rng: np.random.Generator, n_components: int,
                   eta_range: Sequence[float] = (1e-4, 1e-1),
                   y0_range: Sequence[float] = (1e-7, 1e-5),
                   v_range: Sequence[float] = (0.9, 1.0)) -> Mixture:
    """A mixture of ``n_components`` random stationary channels (log-uniform eta, y0)."""
    comps = tuple(
        Stationary(
            float(10 ** rng.uniform(*np.log10(eta_range))),
            float(10 ** rng.uniform(*np.log10(y0_range))),
            float(rng.uniform(*v_range)),
        )
        for _ in range(n_components)
    )
    f = rng.dirichlet(np.ones(n_components))
    f = tuple(float(v) for v in f[:-1]) + (float(1.0 - math.fsum(f[:-1])),)
    return Mixture(comps, f)
