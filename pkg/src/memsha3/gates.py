"""Programmable diode gates and volistor gates on crossbar networks.

Every gate has a boolean path (used by the logical backend) and an analog
path that builds the small crossbar network, drives it per phase, solves it
and classifies the output wire. Analog results are memoized on the
configuration and digital inputs, since a gate starting from canonical
states is a deterministic function of them.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache, reduce
from operator import xor
from typing import Sequence

import numpy as np

from .config import SimConfig, default_config
from .crossbar import (
    Crossbar,
    Network,
    WireDrive,
    apply_cycle,
    cycle_energy,
    gate_link,
    solve_cycle,
)

AND, NAND, XNOR2, XOR_MULTI = "diode-AND", "diode-NAND", "volistor-XNOR-2", "volistor-XOR-multi"
KINDS = (AND, NAND, XNOR2, XOR_MULTI)

DRIFT_LIMIT = 0.01


class StateCorruption(RuntimeError):
    pass


class ReuseWithoutInit(RuntimeError):
    pass


class EmptyInput(ValueError):
    pass


@dataclass(frozen=True)
class GateConfig:
    kind: str
    inputs: tuple
    outputs: tuple
    phases: tuple  # one drive map per cycle, as (name, {wire: WireDrive})

    @property
    def phase_count(self) -> int:
        return len(self.phases)


@dataclass
class GateEval:
    kind: str
    bit: int
    v_out: float
    cycles: int
    energy: float
    max_drift: float
    max_reverse_current: float = 0.0
    phase_energy: dict = field(default_factory=dict)
    toggled: int = 0


def _bit(v) -> int:
    if v not in (0, 1, True, False):
        raise ValueError(f"not a bit: {v!r}")
    return int(v)


# ---------------------------------------------------------------- boolean


def diode_and(a: int, b: int) -> int:
    return _bit(a) & _bit(b)


def diode_nand(a: int, b: int) -> int:
    return 1 - (_bit(a) & _bit(b))


def volistor_xnor2(a: int, b: int) -> int:
    return 1 - (_bit(a) ^ _bit(b))


def volistor_xor_multi(bits: Sequence[int]) -> int:
    bits = [_bit(b) for b in bits]
    if len(bits) < 2:
        raise EmptyInput("multi-input XOR needs at least two inputs")
    return reduce(xor, bits)


def xor_multi_cycles(k: int) -> int:
    """One shared initialization cycle, then a write and a read per absorbed bit."""
    if k < 2:
        raise EmptyInput("multi-input XOR needs at least two inputs")
    return 1 + 2 * (k - 1)


# ---------------------------------------------------------------- analog


def _sense(v: float, cfg: SimConfig) -> int:
    return 1 if v >= cfg.voltages.v_plus / 2 else 0


def and_layout(cfg: SimConfig, a: int, b: int, name: str = "and") -> Crossbar:
    """Two stored inputs on supply row X, two LRS output cells on row Y."""
    bar = Crossbar(name, ["X", "Y"], ["cA", "cB"], cfg.device)
    bar.place("X", "cA", float(a)).place("X", "cB", float(b))
    bar.place("Y", "cA", 1.0).place("Y", "cB", 1.0)
    return bar


def and_read_drives(cfg: SimConfig) -> dict:
    vp = cfg.voltages.v_plus
    return {
        "X": WireDrive.fixed(vp),
        "cA": WireDrive.pulled(cfg.r_g_read, 0.0),
        "cB": WireDrive.pulled(cfg.r_g_read, 0.0),
        "Y": WireDrive.pulled(cfg.r_g_gate, vp),
    }


def _reverse_current(net, sol) -> float:
    worst = 0.0
    bars = net.bars.values() if isinstance(net, Network) else [net]
    for bar in bars:
        d = sol.drops[bar.name]
        c = sol.currents[bar.name]
        mask = bar.present & (d < 0)
        if mask.any():
            worst = max(worst, float(np.max(np.abs(c[mask]))))
    return worst


def _drift(before, after) -> float:
    bars_b = before.bars.values() if isinstance(before, Network) else [before]
    bars_a = after.bars if isinstance(after, Network) else {after.name: after}
    worst = 0.0
    for b in bars_b:
        a = bars_a[b.name]
        if b.present.any():
            worst = max(worst, float(np.max(np.abs(a.w - b.w)[b.present])))
    return worst


def _run_phase(net, drives, cfg: SimConfig):
    sol = solve_cycle(net, drives, cfg.solver)
    energy = cycle_energy(net, sol, cfg.dt)
    return sol, apply_cycle(net, sol, cfg.dt), energy


def _strict(ev: GateEval, strict: bool) -> GateEval:
    if strict and ev.max_drift >= DRIFT_LIMIT:
        raise StateCorruption(f"{ev.kind}: a stored state drifted by {ev.max_drift:.3g} during evaluation")
    return ev


@lru_cache(maxsize=None)
def _and_analog(cfg: SimConfig, a: int, b: int) -> GateEval:
    bar = and_layout(cfg, a, b)
    sol, after, energy = _run_phase(bar, and_read_drives(cfg), cfg)
    v = sol.v("Y")
    return GateEval(AND, _sense(v, cfg), v, 1, energy, _drift(bar, after), _reverse_current(bar, sol), {"read": energy})


def diode_and_analog(a: int, b: int, cfg: SimConfig | None = None, strict: bool = True) -> GateEval:
    return _strict(_and_analog(cfg or default_config(), _bit(a), _bit(b)), strict)


def nand_layout(
    cfg: SimConfig, a: int, b: int, idle_columns: int = 2, enabled: bool = True, idle_w: float = 1.0
) -> Network:
    """Memory array read inverted through pull-ups, linked to a wired-OR row.

    ``idle_w`` is the state of the row's non-participating cells; LRS is the
    worst case for leakage, HRS is how the Chi array leaves them.
    """
    mem = Crossbar("mem", ["G"], ["mA", "mB"], cfg.device)
    mem.place("G", "mA", float(a), anode="col").place("G", "mB", float(b), anode="col")
    idle = [f"u{k}" for k in range(idle_columns)]
    calc = Crossbar("calc", ["Y"], ["uA", "uB"] + idle, cfg.device)
    calc.place("Y", "uA", 1.0, anode="col").place("Y", "uB", 1.0, anode="col")
    for col in idle:
        calc.place("Y", col, idle_w, anode="col")
    return gate_link(mem, calc, [("mA", "uA"), ("mB", "uB")], enabled=enabled)


def nand_drives(cfg: SimConfig, idle_columns: int = 2) -> dict:
    vp = cfg.voltages.v_plus
    d = {
        ("mem", "G"): WireDrive.fixed(0.0),
        ("mem", "mA"): WireDrive.pulled(cfg.r_g_read, vp),
        ("mem", "mB"): WireDrive.pulled(cfg.r_g_read, vp),
        ("calc", "uA"): WireDrive.floating(),
        ("calc", "uB"): WireDrive.floating(),
        ("calc", "Y"): WireDrive.pulled(cfg.r_g_gate, 0.0),
    }
    for k in range(idle_columns):
        d[("calc", f"u{k}")] = WireDrive.fixed(0.0)
    return d


@lru_cache(maxsize=None)
def _nand_analog(cfg: SimConfig, a: int, b: int, idle_columns: int = 2, idle_w: float = 1.0) -> GateEval:
    net = nand_layout(cfg, a, b, idle_columns, idle_w=idle_w)
    sol, after, energy = _run_phase(net, nand_drives(cfg, idle_columns), cfg)
    v = sol.v(("calc", "Y"))
    return GateEval(NAND, _sense(v, cfg), v, 1, energy, _drift(net, after), _reverse_current(net, sol), {"read": energy})


def diode_nand_analog(
    a: int, b: int, cfg: SimConfig | None = None, strict: bool = True, idle_columns: int = 2, idle_w: float = 1.0
) -> GateEval:
    return _strict(_nand_analog(cfg or default_config(), _bit(a), _bit(b), idle_columns, float(idle_w)), strict)


def xnor_input_level(cfg: SimConfig, bit: int) -> float:
    return abs(cfg.voltages.v_clear) if bit else 0.0


class VolistorXnor:
    """A 2-input volistor XNOR with explicit init / write / read cycles.

    Cells A and B sit between the floating wire X and the input columns;
    Y1 and Y2 join the same columns to the output row Y and compute the AND
    of A and B in the read cycle.
    """

    def __init__(self, cfg: SimConfig | None = None, name: str = "xnor"):
        self.cfg = cfg or default_config()
        self.bar = and_layout(self.cfg, 1, 1, name=name)
        self.bar.w[:] = 0.0
        self.bar.w[1, :] = 1.0  # Y1, Y2 programmed once, kept in LRS
        self.ready = False
        self.energy = 0.0
        self.cycles = 0
        self.phase_energy: dict[str, float] = {}

    def _cycle(self, name: str, drives: dict):
        sol, after, e = _run_phase(self.bar, drives, self.cfg)
        self.bar = after
        self.energy += e
        self.cycles += 1
        self.phase_energy[name] = self.phase_energy.get(name, 0.0) + e
        return sol

    def clear(self) -> None:
        """Reset A and B to HRS; Y sits at v+ so Y1/Y2 see only a reverse v-."""
        v = self.cfg.voltages
        self._cycle(
            "clear",
            {
                "X": WireDrive.fixed(0.0),
                "cA": WireDrive.fixed(abs(v.v_clear)),
                "cB": WireDrive.fixed(abs(v.v_clear)),
                "Y": WireDrive.fixed(v.v_plus),
            },
        )

    def init(self, two_step: bool = True) -> None:
        """Program A and B to LRS. The default clears them first, so the SET
        pulse never drives current through a cell that is already LRS."""
        v = self.cfg.voltages
        if two_step:
            self.clear()
        self._cycle(
            "init",
            {
                "X": WireDrive.fixed(v.v_set),
                "cA": WireDrive.fixed(0.0),
                "cB": WireDrive.fixed(0.0),
                "Y": WireDrive.fixed(v.v_plus),
            },
        )
        self.ready = True

    def write(self, a: int, b: int):
        if not self.ready:
            raise ReuseWithoutInit("XNOR cells A and B must be re-programmed to LRS before reuse")
        self.ready = False
        return self._cycle(
            "write",
            {
                "X": WireDrive.floating(),
                "Y": WireDrive.fixed(self.cfg.voltages.v_plus),
                "cA": WireDrive.fixed(xnor_input_level(self.cfg, a)),
                "cB": WireDrive.fixed(xnor_input_level(self.cfg, b)),
            },
        )

    def read(self):
        sol = self._cycle("read", and_read_drives(self.cfg))
        return sol.v("Y")

    def stored(self) -> tuple[float, float]:
        return float(self.bar.w[0, 0]), float(self.bar.w[0, 1])


@lru_cache(maxsize=None)
def _xnor_analog(cfg: SimConfig, a: int, b: int, include_init: bool) -> GateEval:
    g = VolistorXnor(cfg)
    g.init()
    if not include_init:
        g.energy, g.cycles, g.phase_energy = 0.0, 0, {}
    y_before = g.bar.w[1].copy()
    g.write(a, b)
    toggled = sum(1 for w in g.stored() if w < 0.5)
    v = g.read()
    drift = float(np.max(np.abs(g.bar.w[1] - y_before)))
    return GateEval(XNOR2, _sense(v, cfg), v, g.cycles, g.energy, drift, 0.0, dict(g.phase_energy), toggled)


def volistor_xnor2_analog(a: int, b: int, cfg: SimConfig | None = None, include_init: bool = False) -> GateEval:
    """Write + read cycles (plus the init cycle when ``include_init``).

    ``max_drift`` covers the output cells Y1/Y2; the input cells are meant
    to toggle.
    """
    return _xnor_analog(cfg or default_config(), _bit(a), _bit(b), include_init)


def volistor_xor_multi_analog(bits: Sequence[int], cfg: SimConfig | None = None) -> GateEval:
    """Cascade of XNOR blocks joined by ideal inverting level shifters.

    All blocks are initialized in one shared cycle; each further input then
    costs a write and a read cycle.
    """
    cfg = cfg or default_config()
    bits = [_bit(b) for b in bits]
    if len(bits) < 2:
        raise EmptyInput("multi-input XOR needs at least two inputs")
    energy = 0.0
    drift = 0.0
    phases: dict[str, float] = {}
    init = _xnor_analog(cfg, 1, 1, True).phase_energy["init"]
    energy += init * (len(bits) - 1)
    phases["init"] = energy
    acc = bits[0]
    v = 0.0
    for nxt in bits[1:]:
        ev = _xnor_analog(cfg, acc, nxt, False)
        energy += ev.energy
        for k, e in ev.phase_energy.items():
            phases[k] = phases.get(k, 0.0) + e
        drift = max(drift, ev.max_drift)
        acc = 1 - ev.bit  # inverting level shifter between blocks
        v = ev.v_out
    return GateEval(XOR_MULTI, acc, v, xor_multi_cycles(len(bits)), energy, drift, 0.0, phases)


# ---------------------------------------------------------------- reports


def gate_configs(cfg: SimConfig | None = None) -> dict[str, GateConfig]:
    cfg = cfg or default_config()
    v = cfg.voltages
    xnor_write = {
        "X": WireDrive.floating(),
        "Y": WireDrive.fixed(v.v_plus),
        "cA": WireDrive.fixed(abs(v.v_clear)),
        "cB": WireDrive.fixed(0.0),
    }
    return {
        AND: GateConfig(AND, (("X", "cA"), ("X", "cB")), ("Y",), (("read", and_read_drives(cfg)),)),
        NAND: GateConfig(NAND, (("G", "mA"), ("G", "mB")), ("Y",), (("read", nand_drives(cfg)),)),
        XNOR2: GateConfig(XNOR2, (("X", "cA"), ("X", "cB")), ("Y",), (("write", xnor_write), ("read", and_read_drives(cfg)))),
    }


def verify_gate(kind: str, cfg: SimConfig | None = None, samples: int = 256, seed: int = 0) -> dict:
    """Truth-table check of the analog realization against the boolean one."""
    cfg = cfg or default_config()
    rows = []
    if kind in (AND, NAND, XNOR2):
        ref = {AND: diode_and, NAND: diode_nand, XNOR2: volistor_xnor2}[kind]
        ana = {AND: diode_and_analog, NAND: diode_nand_analog, XNOR2: volistor_xnor2_analog}[kind]
        for a in (0, 1):
            for b in (0, 1):
                ev = ana(a, b, cfg, strict=False) if kind != XNOR2 else ana(a, b, cfg)
                rows.append(((a, b), ref(a, b), ev))
    elif kind == XOR_MULTI:
        rng = np.random.default_rng(seed)
        for _ in range(samples):
            bits = tuple(int(x) for x in rng.integers(0, 2, size=10))
            rows.append((bits, volistor_xor_multi(bits), volistor_xor_multi_analog(bits, cfg)))
    else:
        raise ValueError(f"unknown gate kind {kind!r}")
    mismatches = [r[0] for r in rows if r[1] != r[2].bit]
    drift = max(r[2].max_drift for r in rows)
    sneak = max(r[2].max_reverse_current for r in rows)
    sneak_bound = cfg.voltages.v_plus / cfg.device.r_off
    return {
        "kind": kind,
        "domain": len(rows),
        "mismatches": [list(m) for m in mismatches],
        "max_w_drift": drift,
        "max_reverse_current": sneak,
        "reverse_current_bound": sneak_bound,
        "disturb_violation": drift >= DRIFT_LIMIT,
        "passed": not mismatches and drift < DRIFT_LIMIT and sneak <= sneak_bound * (1 + 1e-9),
    }
