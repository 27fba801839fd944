"""Secret key length from a session tally and the decoy bounds."""
from __future__ import annotations

import math
import warnings

from .model import ProtocolSpec, RateReport, SessionTally, SpsBounds, SystemParams
from .stats import h2

PA_FIT = (1.53, -0.54, -0.44)


def f_pa(b1_max: float, s_total: float) -> float:
    """Privacy-amplification inefficiency ``1 + 1.53 b^-0.54 S^-0.44``.

    Diverges as ``b1_max -> 0``; use :func:`pa_cost` for the full term, whose
    limit there is 0.
    """
    if not 0.0 <= b1_max <= 1.0:
        raise ValueError(f"b1_max must lie in [0, 1], got {b1_max!r}")
    if s_total <= 0.0:
        raise ValueError(f"single-photon total must be positive, got {s_total!r}")
    if b1_max == 0.0:
        return math.inf
    a, pb, ps = PA_FIT
    return 1.0 + a * b1_max ** pb * s_total ** ps


def pa_cost(s_j: float, b1_max: float, s_total: float) -> float:
    """Privacy-amplification cost ``f_PA * S_j * H2(b1_max)`` (0 when b1 or S vanish)."""
    if b1_max == 0.0 or s_j == 0.0:
        return 0.0
    return f_pa(b1_max, s_total) * s_j * h2(b1_max)


def key_length(tally: SessionTally, sps: SpsBounds, params: SystemParams,
               protocol: ProtocolSpec) -> RateReport:
    """Key length ``K`` and rate ``R = K / N`` summed over key-encoding levels.

    Each key level contributes its single-photon and dark-count bounds minus
    the error-correction cost (at the observed error rate) and the
    privacy-amplification cost.  A key level with no detections contributes
    nothing.
    """
    keys = protocol.key_indices
    notes = []
    s_vals = tuple(tally.n_sent[j] * sps.p_s[j] for j in keys)
    d_vals = tuple(tally.n_sent[j] * sps.p_d[j] for j in keys)
    s_total = math.fsum(s_vals)
    b1 = float(sps.b1_max)
    fpa = f_pa(b1, s_total) if (s_total > 0 and b1 > 0) else 1.0

    ec, pa, ber, terms = [], [], [], []
    for idx, j in enumerate(keys):
        c_j, e_j = tally.n_received[j], tally.n_errors[j]
        if c_j <= 0:
            msg = f"level {j} has no detections; skipped"
            notes.append(msg)
            warnings.warn(msg, RuntimeWarning, stacklevel=2)
            ec.append(0.0)
            pa.append(0.0)
            ber.append(math.nan)
            continue
        q = min(1.0, e_j / c_j)
        ec_j = params.f_ec * c_j * h2(q)
        pa_j = pa_cost(s_vals[idx], b1, s_total)
        ec.append(ec_j)
        pa.append(pa_j)
        ber.append(q)
        terms.append(s_vals[idx] + d_vals[idx] - ec_j - pa_j)

    raw = math.fsum(terms)
    k = max(0.0, raw)
    n = params.n_total
    return RateReport(
        key_length=k,
        rate=k / n,
        key_levels=keys,
        s=s_vals,
        d=d_vals,
        ec_cost=tuple(ec),
        pa_cost=tuple(pa),
        ber=tuple(ber),
        f_pa=fpa,
        b1_max=b1,
        raw_key_length=raw,
        clamped=raw < 0,
        warnings=tuple(notes),
    )
