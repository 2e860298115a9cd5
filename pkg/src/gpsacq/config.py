"""Flat key=value configuration files for simulations and sweeps."""

from __future__ import annotations

import math
from dataclasses import dataclass, field, fields, replace

from .channel import GridSpec, T_CHIP


@dataclass
class SimConfig:
    """Parameters for a single trial; also the base of a sweep."""

    m0: int = 1023
    n_periods: int = 1
    i_total: int = 24
    i_active: int = 4
    paths_r: int = 2
    tau_max_chips: float = 20.0
    doppler_max_hz: float = 5000.0
    delta_tau_chips: float = 0.5
    doppler_step_hz: float = 1000.0
    oversample: int = 2
    pulse: str = "ideal"
    tg_chips: float = 8.0
    n_sym: int = 1
    snr_db: float = math.inf
    seed: int = 0
    on_grid: bool = True
    receiver: str = "mf"
    p_channels: int = 64
    solver: str = "omp"
    boosts: int = 20
    matrix_kind: str = "random_binary"

    def __post_init__(self):
        if self.pulse not in ("ideal", "sinc"):
            raise ValueError(f"pulse must be 'ideal' or 'sinc', got {self.pulse!r}")
        if self.receiver not in ("mf", "cs"):
            raise ValueError(f"receiver must be 'mf' or 'cs', got {self.receiver!r}")
        if self.solver not in ("omp", "rembo"):
            raise ValueError(f"solver must be 'omp' or 'rembo', got {self.solver!r}")
        if self.matrix_kind not in ("random_binary", "random_gaussian"):
            raise ValueError(f"unknown matrix_kind {self.matrix_kind!r}")
        if self.i_active > self.i_total:
            raise ValueError("i_active cannot exceed i_total")
        if self.n_sym < 1 or self.paths_r < 1 or self.i_active < 1:
            raise ValueError("n_sym, paths_r and i_active must be >= 1")

    @property
    def sparsity(self) -> int:
        return self.i_active * self.paths_r

    def grid(self) -> GridSpec:
        return GridSpec.from_ranges(
            m0=self.m0, n_periods=self.n_periods, oversample=self.oversample,
            delta_tau_chips=self.delta_tau_chips,
            tau_max_chips=self.tau_max_chips,
            doppler_step_hz=self.doppler_step_hz,
            doppler_max_hz=self.doppler_max_hz, t_chip=T_CHIP)


@dataclass
class SweepConfig:
    """Grid of sweep points: SNR x P x receiver x n_sym mode."""

    base: SimConfig = field(default_factory=SimConfig)
    snr_grid_db: list[float] = field(default_factory=lambda: [-30.0, -25.0, -20.0, -15.0, -10.0, -5.0, 0.0])
    p_list: list[int] = field(default_factory=lambda: [80, 120, 240, 360])
    n_sym_list: list[int] = field(default_factory=lambda: [1, 50])
    receivers: list[str] = field(default_factory=lambda: ["mf", "cs"])
    trials: int = 200

    def __post_init__(self):
        if self.trials < 1:
            raise ValueError("trials must be >= 1")
        if "cs" in self.receivers and not self.p_list:
            raise ValueError("p_list must be nonempty when sweeping the CS receiver")


_BOOL_KEYS = {"on_grid"}
_LIST_FLOAT_KEYS = {"snr_grid_db"}
_LIST_INT_KEYS = {"p_list", "n_sym_list"}
_LIST_STR_KEYS = {"receivers"}
_SWEEP_ONLY = {"snr_grid_db", "p_list", "n_sym_list", "receivers", "trials"}


def _parse_scalar(key: str, raw: str):
    if key in _BOOL_KEYS:
        if raw.lower() in ("true", "1", "yes"):
            return True
        if raw.lower() in ("false", "0", "no"):
            return False
        raise ValueError(f"bad boolean for {key}: {raw!r}")
    if key in _LIST_FLOAT_KEYS:
        return [float(v) for v in raw.split(",") if v.strip()]
    if key in _LIST_INT_KEYS:
        return [int(v) for v in raw.split(",") if v.strip()]
    if key in _LIST_STR_KEYS:
        return [v.strip() for v in raw.split(",") if v.strip()]
    for f in fields(SimConfig):
        if f.name == key:
            if f.type in ("int", int):
                return int(raw)
            if f.type in ("float", float):
                if raw.lower() in ("inf", "+inf", "infinity"):
                    return math.inf
                return float(raw)
            return raw
    if key == "trials":
        return int(raw)
    raise KeyError(key)


def parse_items(text: str) -> dict:
    """Parse 'key=value' lines; '#' starts a comment; unknown keys error."""
    items = {}
    for lineno, line in enumerate(text.splitlines(), start=1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ValueError(f"line {lineno}: expected key=value, got {line!r}")
        key, raw = (part.strip() for part in line.split("=", 1))
        try:
            items[key] = _parse_scalar(key, raw)
        except KeyError:
            raise ValueError(f"line {lineno}: unknown config key {key!r}") from None
    return items


def parse_sim_config(text: str) -> SimConfig:
    items = parse_items(text)
    for key in items:
        if key in _SWEEP_ONLY:
            raise ValueError(f"{key!r} is a sweep key, not a simulation key")
    return SimConfig(**items)


def parse_sweep_config(text: str) -> SweepConfig:
    items = parse_items(text)
    sweep_items = {k: items.pop(k) for k in list(items) if k in _SWEEP_ONLY}
    return SweepConfig(base=SimConfig(**items), **sweep_items)


def load_sim_config(path) -> SimConfig:
    with open(path) as fh:
        return parse_sim_config(fh.read())


def load_sweep_config(path) -> SweepConfig:
    with open(path) as fh:
        return parse_sweep_config(fh.read())


def config_lines(cfg: SimConfig) -> list[str]:
    """Serialize a SimConfig back to key=value lines (for CSV headers)."""
    out = []
    for f in fields(SimConfig):
        value = getattr(cfg, f.name)
        if isinstance(value, bool):
            value = "true" if value else "false"
        out.append(f"{f.name}={value}")
    return out


def with_overrides(cfg: SimConfig, **kwargs) -> SimConfig:
    return replace(cfg, **kwargs)
