"""Scenario description, the named scenarios, and YAML scenario files.

A scenario file is a YAML mapping whose keys are ``ScenarioConfig`` field
names.  ``bands`` is a list of mappings with ``Band`` field names;
``balancer``, ``channel`` and ``rule_based`` are nested mappings.  Omitted
keys take their defaults.  Unknown keys are rejected.
"""

from __future__ import annotations

import dataclasses
import math
import re
from dataclasses import dataclass, field

import yaml

from ..balancer import BalancerConfig, RuleBasedParams
from ..model import Band
from .channel import ChannelParams

ALGORITHMS = ("pmlb", "no_mlb", "a2_mlb", "rule_based")

DEFAULT_BANDS = (
    Band(0, 20e6, 100, carrier_ghz=3.5),
    Band(1, 10e6, 50, carrier_ghz=2.1),
    Band(2, 5e6, 25, carrier_ghz=0.8),
    Band(3, 10e6, 50, carrier_ghz=1.8),
)

# name -> (UEs per cell, packet inter-arrival in ms)
NAMED = {"A": (400, 20.0), "B": (400, 50.0), "C": (200, 50.0)}


class ConfigError(ValueError):
    """Invalid scenario; ``key`` is the dotted path of the offending entry."""

    def __init__(self, key: str, message: str):
        self.key = key
        super().__init__(f"{key}: {message}")


@dataclass(frozen=True)
class ScenarioConfig:
    name: str = "custom"
    n_cells: int = 3
    bands: tuple = DEFAULT_BANDS
    n_ues_per_cell: int = 400
    inter_arrival_ms: float = 20.0
    packet_size_bytes: int = 1500
    sim_duration: float = 7200.0       # seconds
    step: float = 0.1                  # seconds
    seed: int = 0
    balancer: BalancerConfig = field(default_factory=BalancerConfig)
    algorithm: str = "pmlb"
    ho_interruption_ms: float = 50.0
    channel: ChannelParams = field(default_factory=ChannelParams)
    a2_threshold_db: float = -15.0
    rule_based: RuleBasedParams = field(default_factory=RuleBasedParams)
    churn_dwell_s: float | None = None  # mean UE dwell time; None disables churn

    @property
    def n_bands(self) -> int:
        return len(self.bands)

    @property
    def arrival_rate(self) -> float:
        """Packets per second per UE."""
        return 1000.0 / self.inter_arrival_ms

    @property
    def packet_bits(self) -> float:
        return 8.0 * self.packet_size_bytes

    @property
    def n_steps(self) -> int:
        return int(round(self.sim_duration / self.step))

    @property
    def window_steps(self) -> int:
        return int(round(self.balancer.delta_t / self.step))

    def validate(self) -> "ScenarioConfig":
        if not self.step > 0:
            raise ConfigError("step", "must be > 0")
        if self.sim_duration < 0:
            raise ConfigError("sim_duration", "must be >= 0")
        if 0 < self.sim_duration < self.step:
            raise ConfigError("sim_duration", "must be 0 or at least one step")
        if not math.isclose(self.sim_duration / self.step, self.n_steps, abs_tol=1e-6):
            raise ConfigError("sim_duration", "must be a whole number of steps")
        w = self.balancer.delta_t / self.step
        if self.window_steps < 1 or not math.isclose(w, self.window_steps, abs_tol=1e-6):
            raise ConfigError("balancer.delta_t", "must be a whole number of steps")
        if self.n_cells < 1:
            raise ConfigError("n_cells", "must be >= 1")
        if not self.bands:
            raise ConfigError("bands", "must not be empty")
        if sorted(b.id for b in self.bands) != list(range(len(self.bands))):
            raise ConfigError("bands", "ids must be 0..B-1")
        if self.n_ues_per_cell < 1:
            raise ConfigError("n_ues_per_cell", "must be >= 1")
        if not self.inter_arrival_ms > 0:
            raise ConfigError("inter_arrival_ms", "must be > 0")
        if self.packet_size_bytes < 1:
            raise ConfigError("packet_size_bytes", "must be >= 1")
        if self.algorithm not in ALGORITHMS:
            raise ConfigError("algorithm", f"unknown algorithm {self.algorithm!r}; choose from {ALGORITHMS}")
        if self.ho_interruption_ms < 0:
            raise ConfigError("ho_interruption_ms", "must be >= 0")
        if self.churn_dwell_s is not None and not self.churn_dwell_s > 0:
            raise ConfigError("churn_dwell_s", "must be > 0 or null")
        return self

    def replace(self, **changes) -> "ScenarioConfig":
        return dataclasses.replace(self, **changes).validate()


def named_scenario(name: str, **overrides) -> ScenarioConfig:
    """Scenario A, B or C with the default parameters, plus overrides."""
    key = str(name).upper()
    if key not in NAMED:
        raise ConfigError("scenario", f"unknown scenario {name!r}; choose from {sorted(NAMED)}")
    n_ues, gap_ms = NAMED[key]
    base = dict(name=key, n_ues_per_cell=n_ues, inter_arrival_ms=gap_ms)
    base.update(overrides)
    return ScenarioConfig(**base).validate()


def desk_scenario(name: str, **overrides) -> ScenarioConfig:
    """The named scenario at a quarter of its UEs and half an hour."""
    n_ues, _ = NAMED[str(name).upper()]
    base = dict(n_ues_per_cell=n_ues // 4, sim_duration=1800.0)
    base.update(overrides)
    return named_scenario(name, **base)


# --- parsing ----------------------------------------------------------------

_INT, _FLOAT, _STR = "int", "float", "str"


def _coerce(value, kind, key, optional=False):
    if value is None and optional:
        return None
    if kind == _INT:
        if isinstance(value, bool) or not isinstance(value, int):
            raise ConfigError(key, f"expected an integer, got {value!r}")
        return value
    if kind == _FLOAT:
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            raise ConfigError(key, f"expected a number, got {value!r}")
        return float(value)
    if not isinstance(value, str):
        raise ConfigError(key, f"expected a string, got {value!r}")
    return value


def _kinds(cls) -> dict:
    out = {}
    for f in dataclasses.fields(cls):
        t = str(f.type)
        if "int" in t and "float" not in t:
            out[f.name] = _INT
        elif "float" in t:
            out[f.name] = _FLOAT
        elif "str" in t:
            out[f.name] = _STR
    return out


def _build(cls, data, prefix, special=None):
    if not isinstance(data, dict):
        raise ConfigError(prefix.rstrip(".") or "<root>", "expected a mapping")
    kinds = _kinds(cls)
    special = special or {}
    names = {f.name for f in dataclasses.fields(cls)}
    kwargs = {}
    for k, v in data.items():
        key = f"{prefix}{k}"
        if k not in names:
            raise ConfigError(key, "unknown key")
        if k in special:
            kwargs[k] = special[k](v, key)
        elif k in kinds:
            optional = "None" in str(next(f.type for f in dataclasses.fields(cls) if f.name == k))
            kwargs[k] = _coerce(v, kinds[k], key, optional)
        else:
            kwargs[k] = v
    try:
        return cls(**kwargs)
    except ConfigError:
        raise
    except (TypeError, ValueError) as exc:
        msg = str(exc)
        hit = [n for n in sorted(names) if re.search(rf"\b{n}\b", msg)]
        key = f"{prefix}{hit[0]}" if hit else prefix.rstrip(".") or "<root>"
        raise ConfigError(key, msg) from exc


def _bands(value, key):
    if not isinstance(value, list) or not value:
        raise ConfigError(key, "expected a non-empty list of bands")
    return tuple(_build(Band, b, f"{key}[{i}].") for i, b in enumerate(value))


def config_from_dict(data: dict) -> ScenarioConfig:
    special = {
        "bands": _bands,
        "balancer": lambda v, k: _build(BalancerConfig, v, f"{k}."),
        "channel": lambda v, k: _build(ChannelParams, v, f"{k}."),
        "rule_based": lambda v, k: _build(RuleBasedParams, v, f"{k}."),
    }
    return _build(ScenarioConfig, data, "", special).validate()


def config_to_dict(cfg: ScenarioConfig) -> dict:
    d = dataclasses.asdict(cfg)
    d["bands"] = [dataclasses.asdict(b) for b in cfg.bands]
    return d


def load_config(path) -> ScenarioConfig:
    try:
        with open(path) as fh:
            data = yaml.safe_load(fh)
    except yaml.YAMLError as exc:
        raise ConfigError("<file>", f"{path}: not valid YAML ({exc})") from exc
    if data is None:
        data = {}
    return config_from_dict(data)


def dump_config(cfg: ScenarioConfig, path) -> None:
    with open(path, "w") as fh:
        yaml.safe_dump(config_to_dict(cfg), fh, sort_keys=False)
