"""Config and tally file formats.

Config files hold one ``key = value`` per line; ``#`` starts a comment.
Levels are given as ``level.<j>.mu``, ``level.<j>.prob``,
``level.<j>.encodes_key`` and optionally ``level.<j>.q`` (comma-separated
indistinguishability probabilities by photon number).

Tally files start with ``# decoykit-tally v1`` followed by one
``j N_j C_j E_j`` line per level.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Optional

from . import channel as ch
from .model import IntensityLevel, ProtocolSpec, SessionTally, SystemParams, validate_tally

TALLY_HEADER = "# decoykit-tally v1"

_FLOAT_KEYS = ("epsilon", "n_total", "y0", "visibility", "eta", "loss_db", "f_ec", "sift",
               "fiber_km", "intensity_uncertainty")
_INT_KEYS = ("k_max", "levels")
_STR_KEYS = ("detector", "q_preset")


class FormatError(ValueError):
    """A config or tally file could not be parsed; the message carries the line."""


@dataclass(frozen=True)
class RunConfig:
    """Everything a config file can specify.

    The transmission seen by the analysis is ``eta`` (or ``10^(-loss_db/10)``)
    times the detector efficiency and optics loss, times the fiber loss.
    """

    epsilon: float = 1e-7
    n_total: float = 1e10
    y0: Optional[float] = None
    visibility: float = 0.98
    eta: Optional[float] = None
    loss_db: Optional[float] = None
    f_ec: float = 1.2
    k_max: int = 9
    sift: float = 0.5
    detector: Optional[str] = None
    fiber_km: float = 0.0
    intensity_uncertainty: float = 0.0
    q_preset: Optional[str] = None
    levels: Optional[int] = None
    protocol: Optional[ProtocolSpec] = field(default=None)

    def channel_eta(self) -> float:
        if self.eta is not None:
            eta = self.eta
        elif self.loss_db is not None:
            eta = ch.db_to_eta(self.loss_db)
        else:
            eta = 1.0
        if self.detector:
            det = ch.preset(self.detector)
            eta *= det.efficiency * ch.db_to_eta(det.optics_loss_db)
        return eta * ch.db_to_eta(ch.FIBER_DB_PER_KM * self.fiber_km)

    def dark(self) -> float:
        if self.y0 is not None:
            return self.y0
        if self.detector:
            return ch.preset(self.detector).dark
        raise ValueError("config must give y0 or a detector preset")

    def params(self) -> SystemParams:
        return SystemParams(
            epsilon=self.epsilon, n_total=self.n_total, y0=self.dark(),
            visibility=self.visibility, eta=self.channel_eta(), f_ec=self.f_ec,
            k_max=self.k_max, sift=self.sift,
        )

    def with_value(self, key: str, value: float) -> "RunConfig":
        """Copy with one scalar setting replaced (``eta`` overrides ``loss_db``)."""
        if key == "eta":
            return replace(self, eta=value, loss_db=None)
        if key == "loss_db":
            return replace(self, loss_db=value, eta=None)
        if key in _INT_KEYS:
            return replace(self, **{key: int(round(value))})
        if key in _FLOAT_KEYS:
            return replace(self, **{key: float(value)})
        raise KeyError(f"cannot vary {key!r}")


SWEEPABLE = ("loss_db", "eta", "n_total", "epsilon", "y0", "visibility", "fiber_km",
             "intensity_uncertainty", "sift", "f_ec", "k_max")


def _parse_bool(text: str) -> bool:
    t = text.strip().lower()
    if t in ("1", "true", "yes", "on"):
        return True
    if t in ("0", "false", "no", "off"):
        return False
    raise ValueError(f"not a boolean: {text!r}")


def parse_config(text: str, source: str = "<config>") -> RunConfig:
    values: dict = {}
    levels: dict[int, dict] = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        where = f"{source}:{lineno}"
        if "=" not in line:
            raise FormatError(f"{where}: expected 'key = value', got {raw.strip()!r}")
        key, value = (s.strip() for s in line.split("=", 1))
        try:
            if key.startswith("level."):
                parts = key.split(".")
                if len(parts) != 3 or not parts[1].isdigit():
                    raise ValueError(f"bad level key {key!r}")
                j, attr = int(parts[1]), parts[2]
                lv = levels.setdefault(j, {})
                if attr == "mu":
                    lv["mu"] = float(value)
                elif attr == "prob":
                    lv["probability"] = float(value)
                elif attr == "encodes_key":
                    lv["encodes_key"] = _parse_bool(value)
                elif attr == "q":
                    lv["q_row"] = tuple(float(v) for v in value.split(",") if v.strip())
                else:
                    raise ValueError(f"unknown level attribute {attr!r}")
            elif key in _FLOAT_KEYS:
                values[key] = float(value)
            elif key in _INT_KEYS:
                values[key] = int(value)
            elif key in _STR_KEYS:
                values[key] = value
            else:
                raise ValueError(f"unknown key {key!r}")
        except ValueError as exc:
            raise FormatError(f"{where}: {exc}") from None
    if levels:
        if sorted(levels) != list(range(len(levels))):
            raise FormatError(f"{source}: level indices must be 0..{len(levels) - 1}")
        lvs = []
        for j in range(len(levels)):
            d = levels[j]
            if "mu" not in d or "probability" not in d:
                raise FormatError(f"{source}: level {j} needs both mu and prob")
            lvs.append(IntensityLevel(d["mu"], d["probability"], d.get("encodes_key", False), d.get("q_row")))
        if not any(lv.encodes_key for lv in lvs):
            top = max(range(len(lvs)), key=lambda j: lvs[j].mu)
            lvs[top] = replace(lvs[top], encodes_key=True)
        values["protocol"] = ProtocolSpec(tuple(lvs))
    return RunConfig(**values)


def read_config(path: str) -> RunConfig:
    with open(path, encoding="utf-8") as fh:
        return parse_config(fh.read(), path)


def format_config(cfg: RunConfig) -> str:
    lines = []
    for key in _FLOAT_KEYS + _INT_KEYS + _STR_KEYS:
        v = getattr(cfg, key)
        if v is None:
            continue
        lines.append(f"{key} = {v!r}" if not isinstance(v, str) else f"{key} = {v}")
    if cfg.protocol is not None:
        lines.extend(format_protocol(cfg.protocol).splitlines())
    return "\n".join(lines) + "\n"


def format_protocol(protocol: ProtocolSpec) -> str:
    lines = []
    for j, lv in enumerate(protocol.levels):
        lines.append(f"level.{j}.mu = {lv.mu!r}")
        lines.append(f"level.{j}.prob = {lv.probability!r}")
        lines.append(f"level.{j}.encodes_key = {'true' if lv.encodes_key else 'false'}")
        if lv.q_row is not None:
            lines.append(f"level.{j}.q = " + ",".join(repr(float(q)) for q in lv.q_row))
    return "\n".join(lines) + "\n"


def format_tally(tally: SessionTally) -> str:
    lines = [TALLY_HEADER]
    for j, (n, c, e) in enumerate(zip(tally.n_sent, tally.n_received, tally.n_errors)):
        lines.append(f"{j} {float(n)!r} {float(c)!r} {float(e)!r}")
    return "\n".join(lines) + "\n"


def parse_tally(text: str, source: str = "<tally>") -> SessionTally:
    rows: dict[int, tuple[float, float, float]] = {}
    seen_header = False
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.strip()
        if not line:
            continue
        if line.startswith("#"):
            if line == TALLY_HEADER:
                seen_header = True
            continue
        where = f"{source}:{lineno}"
        if not seen_header:
            raise FormatError(f"{where}: missing '{TALLY_HEADER}' header")
        fields = line.split()
        if len(fields) != 4:
            raise FormatError(f"{where}: expected 'j N_j C_j E_j', got {line!r}")
        try:
            j = int(fields[0])
            n, c, e = (float(v) for v in fields[1:])
        except ValueError as exc:
            raise FormatError(f"{where}: {exc}") from None
        if j in rows:
            raise FormatError(f"{where}: level {j} listed twice")
        if not all(math.isfinite(v) for v in (n, c, e)) or not 0 <= e <= c <= n:
            raise FormatError(f"{where}: need 0 <= E_j <= C_j <= N_j (got {n!r} {c!r} {e!r})")
        rows[j] = (n, c, e)
    if not seen_header:
        raise FormatError(f"{source}: missing '{TALLY_HEADER}' header")
    if sorted(rows) != list(range(len(rows))):
        raise FormatError(f"{source}: level indices must be 0..{len(rows) - 1}")
    tally = SessionTally(
        tuple(rows[j][0] for j in range(len(rows))),
        tuple(rows[j][1] for j in range(len(rows))),
        tuple(rows[j][2] for j in range(len(rows))),
    )
    problems = validate_tally(tally)
    if problems:
        raise FormatError(f"{source}: " + "; ".join(problems))
    return tally


def read_tally(path: str) -> SessionTally:
    with open(path, encoding="utf-8") as fh:
        return parse_tally(fh.read(), path)
