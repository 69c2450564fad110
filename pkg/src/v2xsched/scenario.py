"""Experiment parameters, config file I/O and seeded random streams.

Units follow the config file: dBm for powers, GHz for carriers, ms for
durations, bytes for packet sizes. Conversions to SI live in the helper
properties so downstream modules never touch dB arithmetic directly.
"""

from __future__ import annotations

import dataclasses
import math
import zlib
from dataclasses import dataclass, fields
from pathlib import Path
from typing import Any, Mapping

import numpy as np
import yaml

ALGORITHMS = ("gsrags", "hrahs", "gsrahs")
OUTAGE_CSI_MODES = ("statistical", "estimated")
VUE_POWER_MODES = ("adaptive", "max")


class ConfigError(ValueError):
    """Raised for unparsable config documents or invalid parameter values."""


def numerology_params(mu: int) -> tuple[float, float, float]:
    """Return ``(scs_khz, rb_bandwidth_khz, tti_ms)`` for NR numerology ``mu``."""
    if isinstance(mu, bool) or not isinstance(mu, (int, np.integer)) or not 0 <= mu <= 4:
        raise ConfigError(f"numerology out of range: {mu!r} (expected 0..4)")
    scs = 15.0 * 2**mu
    return scs, 12.0 * scs, 1.0 / 2**mu


def dbm_to_watt(dbm):
    return 10.0 ** ((np.asarray(dbm, dtype=float) - 30.0) / 10.0)


def db_to_linear(db):
    return 10.0 ** (np.asarray(db, dtype=float) / 10.0)


@dataclass(frozen=True)
class ScenarioConfig:
    # geometry
    area_side_m: float = 1000.0
    lane_count: int = 4
    lane_width_m: float = 4.0
    vue_pair_separation_m: float = 10.0
    min_distance_m: float = 1.0
    # population
    num_cues: int = 172
    num_vue_pairs: int = 10
    num_bues: int = 10
    vehicle_speed_kmph: float = 50.0
    # spectrum
    system_bandwidth_mhz: float = 50.0
    carrier_freq_bwp1_ghz: float = 28.0
    carrier_freq_bwp2_ghz: float = 2.0
    numerology_bwp1: int = 3
    numerology_bwp2: int = 0
    rbs_per_rc: int = 4
    num_rcs: int = 8
    bwp2_rbs: int | None = None  # None: fill the bandwidth left over by BWP-1
    max_sched_per_tti: int = 8
    # link budget
    noise_power_dbm: float = -114.0
    p_cue_max_dbm: float = 23.0
    p_vue_max_dbm: float = 23.0
    p_bue_dbm: float = 23.0
    gnb_antenna_gain_dbi: float = 8.0
    vehicle_antenna_gain_dbi: float = 3.0
    gnb_noise_figure_db: float = 5.0
    vehicle_noise_figure_db: float = 9.0
    shadow_std_v2v_db: float = 4.0
    shadow_std_v2i_db: float = 7.8
    feedback_period_ms: float = 0.125
    bler_backoff_db: float = 1.0
    # QoS
    r0: float = 0.5
    gamma0_db: float = 5.0
    p0: float = 1e-3
    ttl_cue_ms: float = 50.0
    ttl_vue_ms: float = 10.0
    packet_bytes_cue: int = 50
    packet_bytes_vue: int = 10
    cue_period_divisor: float = 20.0
    vue_period_slots: int = 100
    # run control
    num_slots: int = 5000
    num_runs: int = 10
    algorithm: str = "gsrags"
    outage_csi: str = "statistical"
    vue_power: str = "adaptive"  # "max" pins p_v at P_v_max
    base_seed: int = 2025

    def __post_init__(self):
        _validate(self)

    # derived quantities -------------------------------------------------

    @property
    def lambda_cue(self) -> float:
        """Mean number of CUE packet arrivals per slot."""
        return self.num_cues / self.cue_period_divisor

    @property
    def bwp1(self) -> tuple[float, float, float]:
        return numerology_params(self.numerology_bwp1)

    @property
    def bwp2(self) -> tuple[float, float, float]:
        return numerology_params(self.numerology_bwp2)

    @property
    def tti_ms(self) -> float:
        return self.bwp1[2]

    @property
    def bwp1_rbs(self) -> int:
        return self.num_rcs * self.rbs_per_rc

    @property
    def bwp2_rb_count(self) -> int:
        if self.bwp2_rbs is not None:
            return self.bwp2_rbs
        used_khz = self.bwp1_rbs * self.bwp1[1]
        left_khz = self.system_bandwidth_mhz * 1e3 - used_khz
        return int(math.floor(left_khz / self.bwp2[1] + 1e-9))

    @property
    def noise_w(self) -> float:
        return float(dbm_to_watt(self.noise_power_dbm))

    @property
    def p_cue_max_w(self) -> float:
        return float(dbm_to_watt(self.p_cue_max_dbm))

    @property
    def p_vue_max_w(self) -> float:
        return float(dbm_to_watt(self.p_vue_max_dbm))

    @property
    def p_bue_w(self) -> float:
        return float(dbm_to_watt(self.p_bue_dbm))

    @property
    def gamma0(self) -> float:
        return float(db_to_linear(self.gamma0_db))

    @property
    def bler_backoff(self) -> float:
        """Multiplicative SINR factor (< 1) standing in for MCS link adaptation."""
        return float(db_to_linear(-self.bler_backoff_db))

    def replace(self, **changes) -> "ScenarioConfig":
        return dataclasses.replace(self, **changes)

    def to_dict(self) -> dict[str, Any]:
        return dataclasses.asdict(self)


_FIELDS = {f.name: f for f in fields(ScenarioConfig)}
_INT_FIELDS = {
    "lane_count", "num_cues", "num_vue_pairs", "num_bues", "numerology_bwp1",
    "numerology_bwp2", "rbs_per_rc", "num_rcs", "max_sched_per_tti",
    "packet_bytes_cue", "packet_bytes_vue", "vue_period_slots", "num_slots",
    "num_runs", "base_seed",
}
_STR_FIELDS = {"algorithm", "outage_csi", "vue_power"}


def _check(cond: bool, key: str, value, why: str):
    if not cond:
        raise ConfigError(f"{key}={value!r}: {why}")


def _validate(cfg: ScenarioConfig) -> None:
    for name in _INT_FIELDS:
        v = getattr(cfg, name)
        _check(isinstance(v, (int, np.integer)) and not isinstance(v, bool), name, v, "must be an integer")
    if cfg.bwp2_rbs is not None:
        _check(isinstance(cfg.bwp2_rbs, int) and cfg.bwp2_rbs >= 0, "bwp2_rbs", cfg.bwp2_rbs,
               "must be a nonnegative integer")
    for name, f in _FIELDS.items():
        if name in _INT_FIELDS or name in _STR_FIELDS or name == "bwp2_rbs":
            continue
        v = getattr(cfg, name)
        _check(isinstance(v, (int, float)) and not isinstance(v, bool) and math.isfinite(v),
               name, v, "must be a finite number")

    _check(0.0 < cfg.p0 < 1.0, "p0", cfg.p0, "probability out of range")
    _check(cfg.rbs_per_rc >= 1, "rbs_per_rc", cfg.rbs_per_rc, "must be >= 1")
    _check(cfg.num_rcs >= 1, "num_rcs", cfg.num_rcs, "must be >= 1")
    _check(cfg.max_sched_per_tti >= 1, "max_sched_per_tti", cfg.max_sched_per_tti, "must be >= 1")
    for name in ("num_cues", "num_vue_pairs", "num_bues", "num_slots"):
        _check(getattr(cfg, name) >= 0, name, getattr(cfg, name), "must be >= 0")
    _check(cfg.num_runs >= 1, "num_runs", cfg.num_runs, "must be >= 1")
    for name in ("numerology_bwp1", "numerology_bwp2"):
        mu = getattr(cfg, name)
        _check(0 <= mu <= 4, name, mu, "numerology must be in 0..4")
    _check(cfg.numerology_bwp1 >= cfg.numerology_bwp2, "numerology_bwp1", cfg.numerology_bwp1,
           "BWP-1 TTI must not be longer than BWP-2 TTI")
    _check(cfg.area_side_m > 0, "area_side_m", cfg.area_side_m, "must be > 0")
    _check(cfg.lane_count >= 0, "lane_count", cfg.lane_count, "must be >= 0")
    _check(cfg.lane_width_m > 0, "lane_width_m", cfg.lane_width_m, "must be > 0")
    _check(cfg.lane_count * cfg.lane_width_m <= cfg.area_side_m / 2, "lane_count", cfg.lane_count,
           "lanes do not fit south of the gNB")
    _check(0 < cfg.vue_pair_separation_m < cfg.area_side_m, "vue_pair_separation_m",
           cfg.vue_pair_separation_m, "must be inside (0, area_side_m)")
    _check(cfg.min_distance_m > 0, "min_distance_m", cfg.min_distance_m, "must be > 0")
    _check(cfg.vehicle_speed_kmph >= 0, "vehicle_speed_kmph", cfg.vehicle_speed_kmph, "must be >= 0")
    for name in ("carrier_freq_bwp1_ghz", "carrier_freq_bwp2_ghz", "system_bandwidth_mhz",
                 "feedback_period_ms", "ttl_cue_ms", "ttl_vue_ms", "cue_period_divisor"):
        _check(getattr(cfg, name) > 0, name, getattr(cfg, name), "must be > 0")
    for name in ("shadow_std_v2v_db", "shadow_std_v2i_db", "bler_backoff_db", "r0"):
        _check(getattr(cfg, name) >= 0, name, getattr(cfg, name), "must be >= 0")
    for name in ("packet_bytes_cue", "packet_bytes_vue", "vue_period_slots"):
        _check(getattr(cfg, name) >= 1, name, getattr(cfg, name), "must be >= 1")
    bwp1_khz = cfg.num_rcs * cfg.rbs_per_rc * numerology_params(cfg.numerology_bwp1)[1]
    _check(bwp1_khz <= cfg.system_bandwidth_mhz * 1e3, "num_rcs", cfg.num_rcs,
           f"{cfg.num_rcs * cfg.rbs_per_rc} BWP-1 RBs need {bwp1_khz:g} kHz, "
           f"more than the {cfg.system_bandwidth_mhz:g} MHz system bandwidth")
    if cfg.bwp2_rbs is not None:
        total = bwp1_khz + cfg.bwp2_rbs * numerology_params(cfg.numerology_bwp2)[1]
        _check(total <= cfg.system_bandwidth_mhz * 1e3, "bwp2_rbs", cfg.bwp2_rbs,
               "BWP-1 and BWP-2 together exceed the system bandwidth")
    _check(cfg.algorithm in ALGORITHMS, "algorithm", cfg.algorithm, f"must be one of {ALGORITHMS}")
    _check(cfg.outage_csi in OUTAGE_CSI_MODES, "outage_csi", cfg.outage_csi,
           f"must be one of {OUTAGE_CSI_MODES}")
    _check(cfg.vue_power in VUE_POWER_MODES, "vue_power", cfg.vue_power, f"must be one of {VUE_POWER_MODES}")


def _coerce(key: str, value):
    if key not in _FIELDS:
        raise ConfigError(f"unknown config key: {key!r}")
    if key in _STR_FIELDS:
        if not isinstance(value, str):
            raise ConfigError(f"{key}={value!r}: must be a string")
        return value.lower()
    if key == "bwp2_rbs" and value is None:
        return None
    if isinstance(value, str):
        # PyYAML reads exponent literals without a dot (1e-3) as strings
        try:
            value = float(value) if key not in _INT_FIELDS else int(value)
        except ValueError:
            raise ConfigError(f"{key}={value!r}: must be a number") from None
    if key in _INT_FIELDS or key == "bwp2_rbs":
        if isinstance(value, float) and value.is_integer():
            value = int(value)
        if isinstance(value, bool) or not isinstance(value, int):
            raise ConfigError(f"{key}={value!r}: must be an integer")
        return value
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ConfigError(f"{key}={value!r}: must be a number")
    return float(value)


def config_from_mapping(data: Mapping[str, Any] | None) -> ScenarioConfig:
    data = data or {}
    kwargs = {k: _coerce(k, v) for k, v in data.items()}
    return ScenarioConfig(**kwargs)


def load_config(source: str | Path | None = None, overrides: Mapping[str, Any] | None = None) -> ScenarioConfig:
    """Parse a YAML document (text or path) into a validated config.

    Absent keys take their defaults; unknown keys and bad values raise
    :class:`ConfigError`. ``overrides`` is applied on top of the document.
    """
    text = ""
    if isinstance(source, Path):
        text = source.read_text()
    elif isinstance(source, str):
        text = source
    try:
        data = yaml.safe_load(text) if text.strip() else {}
    except yaml.YAMLError as exc:
        raise ConfigError(f"config does not parse: {exc}") from exc
    if data is None:
        data = {}
    if not isinstance(data, dict):
        raise ConfigError("config document must be a mapping of key: value pairs")
    merged = dict(data)
    merged.update(overrides or {})
    return config_from_mapping(merged)


def dump_config(cfg: ScenarioConfig) -> str:
    return yaml.safe_dump(cfg.to_dict(), sort_keys=False)


def parse_override(item: str) -> tuple[str, Any]:
    """Split a ``key=value`` CLI override; the value is parsed as YAML."""
    if "=" not in item:
        raise ConfigError(f"override must look like key=value, got {item!r}")
    key, raw = item.split("=", 1)
    key = key.strip()
    try:
        value = yaml.safe_load(raw)
    except yaml.YAMLError as exc:
        raise ConfigError(f"cannot parse value for {key}: {raw!r}") from exc
    return key, value


def derived_rng(base_seed: int, run_index: int, stream: str) -> np.random.Generator:
    """Independent, reproducible generator for one (run, stream label) pair."""
    label = zlib.crc32(stream.encode("utf-8"))
    seq = np.random.SeedSequence(entropy=int(base_seed), spawn_key=(int(run_index), label))
    return np.random.default_rng(seq)
