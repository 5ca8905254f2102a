"""Scenario configuration: defaults, key=value config files, overrides."""

from __future__ import annotations

import hashlib
from dataclasses import dataclass, fields, replace
from typing import Dict, List, Optional, Tuple


class ConfigError(ValueError):
    """Malformed configuration input; carries the offending line when known."""

    def __init__(self, message: str, line_no: Optional[int] = None):
        if line_no is not None:
            message = f"line {line_no}: {message}"
        super().__init__(message)
        self.line_no = line_no


@dataclass(frozen=True)
class ScenarioConfig:
    """Full parameter set of a simulated deployment.

    Field names double as config-file keys. Values mirror the standard
    simulation table: 73 GHz carrier, 5 GHz bandwidth, exponents 2/3.5,
    1 m reference distance, 18/-2 dB sector gains, 3 beams of 10 degrees,
    -174 dBm/Hz noise, 1 s minimum time-of-stay, 1k segments/s play rate,
    1 Mbit segments, 1-16 m/s speeds, 3 mJ per scan.
    """

    area_radius: float = 500.0
    n_sbs: int = 50
    min_intercell: float = 30.0
    sbs_powers_dbm: Tuple[float, ...] = (20.0, 27.0, 30.0)
    n_mues: int = 1
    speed_min: float = 1.0
    speed_max: float = 16.0
    frame: float = 60.0
    seed: int = 1

    # mmW channel / link
    carrier_frequency: float = 73e9
    pathloss_los: float = 2.0
    pathloss_nlos: float = 3.5
    reference_distance: float = 1.0
    bandwidth: float = 5e9
    noise_psd_dbm_hz: float = -174.0
    main_lobe_gain_db: float = 18.0
    side_lobe_gain_db: float = -2.0
    n_beams: int = 3
    beamwidth_deg: float = 10.0

    # microwave side, used only for cell-radius derivation and RSS simulation
    uw_carrier_frequency: float = 2e9
    uw_pathloss_exponent: float = 3.0
    uw_shadowing_std_db: float = 8.0
    rss_threshold_dbm: float = -80.0

    # caching / handover
    segment_size_bits: float = 1e6
    play_rate: float = 1e3
    cache_capacity: float = 1e4
    t_mts: float = 1.0
    scan_interval: float = 1.0
    ttt: float = 0.5
    energy_per_scan: float = 3e-3

    # matching
    quota: int = 10
    p_th_min: float = 0.1
    p_th_max: float = 0.2
    epsilon: float = 0.05
    mbs_payoff: float = -0.5
    covered_payoff: float = 0.0
    future_covered_payoff: float = 0.0
    shortfall_penalty: float = -1.0

    replications: int = 200

    def canonical_text(self) -> str:
        lines = []
        for f in sorted(fields(self), key=lambda f: f.name):
            lines.append(f"{f.name} = {getattr(self, f.name)!r}")
        return "\n".join(lines) + "\n"

    def digest(self) -> str:
        return hashlib.sha256(self.canonical_text().encode()).hexdigest()[:16]


_FIELD_TYPES = {f.name: f.type for f in fields(ScenarioConfig)}


def _parse_value(name: str, raw: str, line_no: Optional[int]):
    if name not in _FIELD_TYPES:
        raise ConfigError(f"unknown config key {name!r}", line_no)
    current = getattr(ScenarioConfig(), name)
    raw = raw.strip()
    try:
        if isinstance(current, bool):
            return raw.lower() in ("1", "true", "yes")
        if isinstance(current, int):
            return int(raw)
        if isinstance(current, float):
            return float(raw)
        if isinstance(current, tuple):
            parts = [p for p in raw.replace(",", " ").split() if p]
            return tuple(float(p) for p in parts)
        return raw
    except ValueError as exc:
        raise ConfigError(f"cannot parse value for {name!r}: {exc}", line_no)


def load_config(path: str) -> ScenarioConfig:
    """Parse a `key = value` config file (# comments, blank lines allowed)."""
    values: Dict[str, object] = {}
    with open(path, "r", encoding="utf-8") as handle:
        for line_no, line in enumerate(handle, start=1):
            stripped = line.split("#", 1)[0].strip()
            if not stripped:
                continue
            if "=" not in stripped:
                raise ConfigError(f"expected 'key = value', got {stripped!r}",
                                  line_no)
            name, raw = stripped.split("=", 1)
            name = name.strip()
            values[name] = _parse_value(name, raw, line_no)
    return replace(ScenarioConfig(), **values)


def apply_overrides(config: ScenarioConfig,
                    overrides: List[str]) -> ScenarioConfig:
    """Apply repeatable `--set key=value` overrides after file parsing."""
    values: Dict[str, object] = {}
    for item in overrides:
        if "=" not in item:
            raise ConfigError(f"override {item!r} is not of the form key=value")
        name, raw = item.split("=", 1)
        name = name.strip()
        values[name] = _parse_value(name, raw, None)
    return replace(config, **values)
