"""Shared domain types for decoy-state key-rate analysis.

All types are frozen dataclasses holding plain floats and tuples, so they can
be shared freely between threads and processes.  Construction never raises on
numeric content; use :func:`validate` (or :func:`validate_tally`) to obtain a
list of invariant violations.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional, Sequence

PROB_SUM_TOL = 1e-12


@dataclass(frozen=True)
class IntensityLevel:
    """One intensity level of a decoy protocol.

    Attributes
    ----------
    mu : float
        Mean photon number of the weak coherent pulse.
    probability : float
        Probability that Alice prepares this level.
    encodes_key : bool
        Whether detections at this level feed the secret key.
    q_row : tuple of float, optional
        Indistinguishability probability per photon number ``k``.  ``None``
        means the level is fully indistinguishable from the key level.
    """

    mu: float
    probability: float
    encodes_key: bool = False
    q_row: Optional[tuple[float, ...]] = None


@dataclass(frozen=True)
class ProtocolSpec:
    levels: tuple[IntensityLevel, ...]

    @classmethod
    def from_lists(
        cls,
        mus: Sequence[float],
        probabilities: Sequence[float],
        key_levels: Optional[Sequence[int]] = None,
    ) -> "ProtocolSpec":
        """Build a protocol from parallel lists.

        By default only the highest-intensity level encodes key.
        """
        if key_levels is None:
            key_levels = [max(range(len(mus)), key=lambda j: mus[j])] if len(mus) else []
        keys = set(key_levels)
        return cls(
            tuple(
                IntensityLevel(float(m), float(p), j in keys)
                for j, (m, p) in enumerate(zip(mus, probabilities))
            )
        )

    @property
    def mus(self) -> tuple[float, ...]:
        return tuple(lv.mu for lv in self.levels)

    @property
    def probabilities(self) -> tuple[float, ...]:
        return tuple(lv.probability for lv in self.levels)

    @property
    def key_indices(self) -> tuple[int, ...]:
        return tuple(j for j, lv in enumerate(self.levels) if lv.encodes_key)

    def __len__(self) -> int:
        return len(self.levels)


@dataclass(frozen=True)
class SystemParams:
    """Physical and security parameters of a QKD session.

    ``eta`` is the end-to-end transmission (channel times detector
    efficiency) and ``y0`` the per-slot dark/background click probability.
    """

    epsilon: float
    n_total: float
    y0: float
    visibility: float
    eta: float
    f_ec: float = 1.2
    k_max: int = 9
    sift: float = 0.5


@dataclass(frozen=True)
class SessionTally:
    """Per-level counts: signals sent, detections kept, and errors.

    Counts are real-valued so that expectation-mode tallies flow through the
    same analysis as sampled ones.
    """

    n_sent: tuple[float, ...]
    n_received: tuple[float, ...]
    n_errors: tuple[float, ...]

    def __len__(self) -> int:
        return len(self.n_sent)

    @property
    def n_total(self) -> float:
        return math.fsum(self.n_sent)


@dataclass(frozen=True)
class ObservationBounds:
    """Confidence intervals on the per-signal click and error probabilities."""

    y_lo: tuple[float, ...]
    y_hi: tuple[float, ...]
    b_lo: tuple[float, ...]
    b_hi: tuple[float, ...]

    def __len__(self) -> int:
        return len(self.y_lo)


@dataclass(frozen=True)
class SpsBounds:
    """Lower bounds on single-photon and dark click probabilities per level,
    plus the upper bound on the single-photon bit error rate."""

    p_s: tuple[float, ...]
    p_d: tuple[float, ...]
    b1_max: float
    diagnostics: dict = field(default_factory=dict, compare=False, hash=False)


@dataclass(frozen=True)
class RateReport:
    key_length: float
    rate: float
    key_levels: tuple[int, ...]
    s: tuple[float, ...]
    d: tuple[float, ...]
    ec_cost: tuple[float, ...]
    pa_cost: tuple[float, ...]
    ber: tuple[float, ...]
    f_pa: float
    b1_max: float
    raw_key_length: float
    clamped: bool
    warnings: tuple[str, ...] = ()


def _finite(x) -> bool:
    try:
        return math.isfinite(float(x))
    except (TypeError, ValueError):
        return False


def validate(protocol: ProtocolSpec, params: Optional[SystemParams] = None) -> list[str]:
    """Return a list of human-readable invariant violations (empty if valid)."""
    problems: list[str] = []
    levels = tuple(getattr(protocol, "levels", ()) or ())
    if not levels:
        problems.append("protocol has no levels")
    for j, lv in enumerate(levels):
        if not _finite(lv.mu) or lv.mu < 0:
            problems.append(f"level {j}: mu must be finite and >= 0 (got {lv.mu!r})")
        if not _finite(lv.probability) or not 0.0 <= lv.probability <= 1.0:
            problems.append(f"level {j}: probability outside [0,1] (got {lv.probability!r})")
        if lv.q_row is not None:
            bad = [q for q in lv.q_row if not _finite(q) or not 0.0 <= q <= 1.0]
            if bad:
                problems.append(f"level {j}: q_row entries outside [0,1]: {bad!r}")
    if levels:
        total = math.fsum(float(lv.probability) for lv in levels if _finite(lv.probability))
        if not abs(total - 1.0) <= PROB_SUM_TOL:
            problems.append(f"probabilities sum ≠ 1 (sum = {total!r})")
        mus = [lv.mu for lv in levels]
        if len(set(mus)) != len(mus):
            problems.append("intensities not distinct")
        if not any(lv.encodes_key for lv in levels):
            problems.append("no level encodes key")

    if params is not None:
        p = params
        if not (_finite(p.epsilon) and 0.0 < p.epsilon < 1.0):
            problems.append(f"epsilon must lie in (0,1) (got {p.epsilon!r})")
        if not (_finite(p.n_total) and p.n_total >= 1):
            problems.append(f"n_total must be >= 1 (got {p.n_total!r})")
        if not (_finite(p.y0) and 0.0 <= p.y0 <= 1.0):
            problems.append(f"y0 outside [0,1] (got {p.y0!r})")
        if not (_finite(p.visibility) and 0.0 < p.visibility <= 1.0):
            problems.append(f"visibility outside (0,1] (got {p.visibility!r})")
        if not (_finite(p.eta) and 0.0 <= p.eta <= 1.0):
            problems.append(f"eta outside [0,1] (got {p.eta!r})")
        if not (_finite(p.f_ec) and p.f_ec >= 0):
            problems.append(f"f_ec must be >= 0 (got {p.f_ec!r})")
        if not (_finite(p.k_max) and p.k_max >= 2 and float(p.k_max).is_integer()):
            problems.append(f"k_max must be an integer >= 2 (got {p.k_max!r})")
        if not (_finite(p.sift) and 0.0 < p.sift <= 1.0):
            problems.append(f"sift outside (0,1] (got {p.sift!r})")
    return problems


def validate_tally(tally: SessionTally, n_total: Optional[float] = None) -> list[str]:
    """Check ``0 <= E_j <= C_j <= N_j`` per level, and optionally the total."""
    problems: list[str] = []
    if not (len(tally.n_sent) == len(tally.n_received) == len(tally.n_errors)):
        return ["tally columns have different lengths"]
    for j, (n, c, e) in enumerate(zip(tally.n_sent, tally.n_received, tally.n_errors)):
        if not all(_finite(v) for v in (n, c, e)):
            problems.append(f"level {j}: non-finite count")
        elif not 0 <= e <= c <= n:
            problems.append(f"level {j}: need 0 <= E <= C <= N (got N={n!r}, C={c!r}, E={e!r})")
    if n_total is not None and _finite(n_total):
        total = math.fsum(v for v in tally.n_sent if _finite(v))
        if abs(total - n_total) > 1e-9 * max(1.0, abs(n_total)):
            problems.append(f"sum of N_j ({total!r}) differs from N ({n_total!r})")
    return problems


def check(protocol: ProtocolSpec, params: Optional[SystemParams] = None) -> None:
    """Raise ``ValueError`` listing every violation, if any."""
    problems = validate(protocol, params)
    if problems:
        raise ValueError("; ".join(problems))
