"""Simulator configuration: device, voltage set, clock, reference resistors."""

from __future__ import annotations

import copy
import math
from dataclasses import dataclass, field
from functools import lru_cache
from importlib import resources
from pathlib import Path

import yaml

from .device import DeviceParams

VARIANTS = ("SHA3-256", "SHA3-512")
BACKENDS = ("logical", "logical+analog")


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class VoltageSet:
    v_plus: float
    v_minus: float
    v_set: float
    v_clear: float

    def check(self, tol: float = 1e-9) -> None:
        problems = []
        if abs((self.v_minus - self.v_plus) - self.v_clear) > tol:
            problems.append(f"v_minus - v_plus = {self.v_minus - self.v_plus:g} != v_clear = {self.v_clear:g}")
        if abs(self.v_set - 2 * self.v_plus) > tol:
            problems.append(f"v_set = {self.v_set:g} != 2*v_plus = {2 * self.v_plus:g}")
        if abs(self.v_clear - 2 * self.v_minus) > tol:
            problems.append(f"v_clear = {self.v_clear:g} != 2*v_minus = {2 * self.v_minus:g}")
        if self.v_plus <= 0:
            problems.append("v_plus must be positive")
        if problems:
            raise ConfigError("voltage set violates the level relations: " + "; ".join(problems))


@dataclass(frozen=True)
class SolverSettings:
    tolerance_v: float = 1e-6
    damping: float = 0.5
    max_iterations: int = 100


@dataclass(frozen=True)
class SimConfig:
    device: DeviceParams
    voltages: VoltageSet
    levels: dict = field(hash=False)
    r_g_read: float = 0.0
    r_g_gate: float = 0.0
    frequency_hz: float = 1e9
    variant: str = "SHA3-256"
    backend: str = "logical"
    control_bits: dict = field(default_factory=dict, hash=False)
    solver: SolverSettings = SolverSettings()
    presets: dict = field(default_factory=dict, hash=False, compare=False)

    @property
    def dt(self) -> float:
        return 1.0 / self.frequency_hz

    @property
    def control_bits_per_cycle(self) -> int:
        return int(sum(self.control_bits.values()))

    def permitted_levels(self, array: str) -> tuple[float, ...]:
        return tuple(k * self.voltages.v_plus for k in self.levels[array])

    def validate(self) -> "SimConfig":
        self.voltages.check()
        for name, r in (("read", self.r_g_read), ("gate", self.r_g_gate)):
            check_reference_resistor(self.device, r, name)
        # v_plus >= v_closed (read disturb) is allowed on purpose: see read_is_safe
        if self.variant not in VARIANTS:
            raise ConfigError(f"unknown variant {self.variant!r}; expected one of {VARIANTS}")
        if self.backend not in BACKENDS:
            raise ConfigError(f"unknown backend {self.backend!r}; expected one of {BACKENDS}")
        if self.frequency_hz <= 0:
            raise ConfigError("clock frequency must be positive")
        return self

    def with_device_preset(self, name: str) -> "SimConfig":
        if name not in self.presets:
            raise ConfigError(f"unknown device preset {name!r}")
        return _replace(self, device=self.device.with_preset(self.presets[name]))

    def replace(self, **changes) -> "SimConfig":
        return _replace(self, **changes)

    def to_dict(self) -> dict:
        d = self.device
        return {
            "device": {"r_on": d.r_on, "r_off": d.r_off, "v_closed": d.v_closed, "v_open": d.v_open, "alpha": d.alpha},
            "voltages": {
                "v_plus": self.voltages.v_plus,
                "v_minus": self.voltages.v_minus,
                "v_set": self.voltages.v_set,
                "v_clear": self.voltages.v_clear,
            },
            "reference_resistors": {"read": self.r_g_read, "gate": self.r_g_gate},
            "clock": {"frequency_hz": self.frequency_hz},
            "hash": {"variant": self.variant, "backend": self.backend},
        }

    @property
    def read_is_safe(self) -> bool:
        return self.device.v_open < -self.voltages.v_plus and self.voltages.v_plus < self.device.v_closed


def _replace(cfg: SimConfig, **changes) -> SimConfig:
    from dataclasses import replace

    return replace(cfg, **changes)


def check_reference_resistor(params: DeviceParams, r_g: float, name: str = "r_g") -> None:
    if not (10 * params.r_on <= r_g * (1 + 1e-12) and r_g <= params.r_off / 10 * (1 + 1e-12)):
        raise ConfigError(
            f"reference resistor {name} = {r_g:g} ohm violates R_ON << r_g << R_OFF "
            f"(need {10 * params.r_on:g} <= r_g <= {params.r_off / 10:g})"
        )


def geometric_thirds(params: DeviceParams) -> tuple[float, float]:
    lo, hi = math.log(params.r_on), math.log(params.r_off)
    return math.exp(lo + (hi - lo) / 3), math.exp(lo + 2 * (hi - lo) / 3)


@lru_cache(maxsize=1)
def _default_text() -> str:
    return resources.files("memsha3").joinpath("data/default_config.yaml").read_text()


def default_config_text() -> str:
    return _default_text()


def _merge(base: dict, over: dict) -> dict:
    out = copy.deepcopy(base)
    for k, v in over.items():
        if isinstance(v, dict) and isinstance(out.get(k), dict):
            out[k] = _merge(out[k], v)
        else:
            out[k] = v
    return out


def from_dict(raw: dict, validate: bool = True) -> SimConfig:
    raw = _merge(yaml.safe_load(_default_text()), raw or {})
    try:
        device = DeviceParams.from_dict(raw["device"])
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc
    v = raw["voltages"]
    voltages = VoltageSet(float(v["v_plus"]), float(v["v_minus"]), float(v["v_set"]), float(v["v_clear"]))
    read_default, gate_default = geometric_thirds(device)
    rr = raw.get("reference_resistors") or {}
    s = raw.get("solver") or {}
    cfg = SimConfig(
        device=device,
        voltages=voltages,
        levels={k: tuple(float(x) for x in val) for k, val in raw["levels"].items()},
        r_g_read=float(rr["read"]) if rr.get("read") is not None else read_default,
        r_g_gate=float(rr["gate"]) if rr.get("gate") is not None else gate_default,
        frequency_hz=float(raw["clock"]["frequency_hz"]),
        variant=raw["hash"]["variant"],
        backend=raw["hash"]["backend"],
        control_bits={k: int(n) for k, n in raw["control_bits"].items()},
        solver=SolverSettings(float(s["tolerance_v"]), float(s["damping"]), int(s["max_iterations"])),
        presets=raw.get("device_presets", {}),
    )
    return cfg.validate() if validate else cfg


def load_config(path: str | Path | None = None, validate: bool = True) -> SimConfig:
    if path is None:
        return default_config()
    with open(path) as fh:
        raw = yaml.safe_load(fh) or {}
    return from_dict(raw, validate=validate)


@lru_cache(maxsize=1)
def default_config() -> SimConfig:
    return from_dict({})


def default_device() -> DeviceParams:
    return default_config().device
