"""Rectifying memristor model.

Resistance depends on the state variable ``w`` only under forward bias; a
reverse-biased device always shows ``r_off``. The state moves linearly with
the overdrive beyond a threshold and is frozen inside the dead zone
``v_open < v < v_closed``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

MIN_RATIO = 1e3


@dataclass(frozen=True)
class DeviceParams:
    r_on: float
    r_off: float
    v_closed: float
    v_open: float
    alpha: float

    def __post_init__(self):
        if self.r_on <= 0 or self.r_off <= 0:
            raise ValueError("resistances must be positive")
        if self.r_off / self.r_on < MIN_RATIO:
            raise ValueError(
                f"r_off/r_on = {self.r_off / self.r_on:g} is below the rectifying band (>= {MIN_RATIO:g})"
            )
        if not self.v_open < 0 < self.v_closed:
            raise ValueError("thresholds must satisfy v_open < 0 < v_closed")
        if self.alpha <= 0:
            raise ValueError("alpha must be positive")

    @classmethod
    def from_dict(cls, d: dict) -> "DeviceParams":
        return cls(**{k: float(d[k]) for k in ("r_on", "r_off", "v_closed", "v_open", "alpha")})

    def with_preset(self, preset: dict) -> "DeviceParams":
        return replace(self, **{k: float(v) for k, v in preset.items()})

    @property
    def g_on(self) -> float:
        return 1.0 / self.r_on

    @property
    def g_off(self) -> float:
        return 1.0 / self.r_off

    def rate(self, v: float) -> float:
        """dw/dt at constant applied voltage ``v``."""
        if v >= self.v_closed:
            return self.alpha * (v - self.v_closed)
        if v <= self.v_open:
            return self.alpha * (v - self.v_open)
        return 0.0

    def switching_time(self, v: float) -> float:
        """Time for a full 0->1 (or 1->0) transition at constant ``v``; inf in the dead zone."""
        r = abs(self.rate(v))
        return math.inf if r == 0 else 1.0 / r


@dataclass(frozen=True)
class MemristorState:
    w: float

    def __post_init__(self):
        if not 0.0 <= self.w <= 1.0:
            raise ValueError(f"state w={self.w} outside [0, 1]")

    def bit(self) -> int:
        # midpoint threshold: LRS side reads as logic 1
        return 1 if self.w >= 0.5 else 0


LRS = MemristorState(1.0)
HRS = MemristorState(0.0)


def resistance(params: DeviceParams, state: MemristorState | float, v: float) -> float:
    w = state.w if isinstance(state, MemristorState) else state
    if v < 0:
        return params.r_off
    return params.r_off * (params.r_on / params.r_off) ** w


def conductance(params: DeviceParams, w: float, v: float) -> float:
    return 1.0 / resistance(params, w, v)


def advance_w(params: DeviceParams, w: float, v: float, dt: float) -> float:
    """Exact state update for a voltage held constant over ``dt``."""
    return min(1.0, max(0.0, w + params.rate(v) * dt))


def step_state(params: DeviceParams, state: MemristorState, v: float, dt: float) -> MemristorState:
    if dt <= 0:
        raise ValueError("dt must be positive")
    return MemristorState(advance_w(params, state.w, v, dt))


def step_energy(params: DeviceParams, w: float, v: float, dt: float) -> float:
    """Joules dissipated in one device held at ``v`` for ``dt``, integrating
    v^2 * G(w(t)) exactly along the linear (then clamped) state trajectory."""
    if v == 0.0 or dt <= 0.0:
        return 0.0
    if v < 0:
        return v * v * params.g_off * dt
    k = math.log(params.r_off / params.r_on)  # G(w) = g_off * exp(k*w)
    rate = params.rate(v)
    if rate == 0.0:
        return v * v * params.g_off * math.exp(k * w) * dt
    w_end = w + rate * dt
    w_lim = 1.0 if rate > 0 else 0.0
    if (rate > 0 and w_end <= 1.0) or (rate < 0 and w_end >= 0.0):
        t_move, w_stop = dt, w_end
    else:
        t_move, w_stop = (w_lim - w) / rate, w_lim
    moving = params.g_off * (math.exp(k * w_stop) - math.exp(k * w)) / (k * rate)
    resting = params.g_off * math.exp(k * w_stop) * (dt - t_move)
    return v * v * (moving + resting)


def iv_sweep(params: DeviceParams, waveform, dt: float, w0: float = 0.0) -> np.ndarray:
    """Drive one device with a sampled voltage series.

    Returns an ``(n, 3)`` array of ``(v, i, w)``: the current is evaluated at
    the state present when the sample is applied, then the state advances by
    ``dt`` at that voltage.
    """
    v = np.asarray(waveform, dtype=float)
    if v.ndim != 1 or v.size == 0:
        raise ValueError("waveform must be a non-empty 1-D series")
    if dt <= 0:
        raise ValueError("dt must be positive")
    out = np.empty((v.size, 3))
    w = float(w0)
    for n, vn in enumerate(v):
        out[n, 0] = vn
        out[n, 1] = vn / resistance(params, w, vn)
        out[n, 2] = w
        w = advance_w(params, w, vn, dt)
    return out


def sine_wave(amplitude: float, frequency: float, periods: float = 2.0, samples_per_period: int = 400):
    """Sampled sinusoid plus its sample spacing, as used for hysteresis plots."""
    n = int(round(periods * samples_per_period))
    dt = 1.0 / (frequency * samples_per_period)
    t = np.arange(n) * dt
    return amplitude * np.sin(2 * np.pi * frequency * t), dt


def square_wave(amplitude: float, pulse_width: float, pulses: int, samples_per_pulse: int = 20):
    """Alternating +amplitude / -amplitude pulses."""
    dt = pulse_width / samples_per_pulse
    levels = np.repeat([amplitude if p % 2 == 0 else -amplitude for p in range(pulses)], samples_per_pulse)
    return levels.astype(float), dt


def rate_array(params: DeviceParams, v: np.ndarray) -> np.ndarray:
    v = np.asarray(v, dtype=float)
    return np.where(
        v >= params.v_closed,
        params.alpha * (v - params.v_closed),
        np.where(v <= params.v_open, params.alpha * (v - params.v_open), 0.0),
    )


def advance_w_array(params: DeviceParams, w: np.ndarray, v: np.ndarray, dt: float) -> np.ndarray:
    return np.clip(w + rate_array(params, v) * dt, 0.0, 1.0)


def step_energy_array(params: DeviceParams, w: np.ndarray, v: np.ndarray, dt: float) -> np.ndarray:
    """Vectorized :func:`step_energy`."""
    w, v = np.broadcast_arrays(np.asarray(w, dtype=float), np.asarray(v, dtype=float))
    k = math.log(params.r_off / params.r_on)
    rate = rate_array(params, v)
    w_end = np.clip(w + rate * dt, 0.0, 1.0)
    with np.errstate(divide="ignore", invalid="ignore"):
        t_move = np.where(rate != 0, (w_end - w) / rate, 0.0)
        moving = np.where(rate != 0, params.g_off * (np.exp(k * w_end) - np.exp(k * w)) / (k * rate), 0.0)
    resting = params.g_off * np.exp(k * w_end) * (dt - t_move)
    fwd = v * v * (moving + resting)
    rev = v * v * params.g_off * dt
    return np.where(v < 0, rev, np.where(v == 0, 0.0, fwd))
