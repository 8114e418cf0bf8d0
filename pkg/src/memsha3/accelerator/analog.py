"""Analog replay of the accelerator schedule.

An :class:`AnalogProbe` attached to a :class:`Banks` instance observes every
array write, cell read and gate evaluation the logical engine performs.
Memory writes are replayed on per-cell state variables: selected lines
carry the Table-2 levels, unselected columns sit at v+ and unselected rows
float, settling where the row's rectified cell currents balance. Drives
cover whole slices (state arrays) or planes (Rho array); gates are evaluated through the memoized gate-lib
networks. The probe checks that the analog digital result equals the
logical one and attributes the dissipated energy to the trace record that
is emitted next.
"""

from __future__ import annotations

import copy
from collections import defaultdict
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

from ..config import SimConfig, default_config
from ..crossbar import Crossbar, WireDrive, cycle_energy, solve_cycle
from ..device import advance_w_array, step_energy_array
from ..gates import DRIFT_LIMIT, VolistorXnor, and_read_drives, diode_nand_analog, volistor_xnor2_analog
from . import engine
from .banks import PLANES, SHEETS, SLICES, Banks
from .schedule import CHI, COMPLEMENT, IOTA, MAP, PI, RHO, STATE_INIT, THETA, CycleTrace

XOR_BLOCKS = 2 * PLANES - 1  # XNOR blocks chained in one 10-input slice XOR
CHI_IDLE_COLUMNS = 2 * SHEETS - 2


# ------------------------------------------------------------- unit tables


@lru_cache(maxsize=None)
def _xnor_tables(cfg: SimConfig):
    """(bit, energy, drift) of write+read for every input pair, indexed [a, b]."""
    bit = np.zeros((2, 2), dtype=np.uint8)
    energy = np.zeros((2, 2))
    drift = np.zeros((2, 2))
    for a in (0, 1):
        for b in (0, 1):
            ev = volistor_xnor2_analog(a, b, cfg)
            bit[a, b], energy[a, b], drift[a, b] = ev.bit, ev.energy, ev.max_drift
    return bit, energy, drift


@lru_cache(maxsize=None)
def _xnor_init_table(cfg: SimConfig) -> np.ndarray:
    """Init-cycle energy indexed by the stored bits [A, B] left by the last use."""
    out = np.zeros((2, 2))
    for sa in (0, 1):
        for sb in (0, 1):
            g = VolistorXnor(cfg)
            g.bar.w[0, :] = (sa, sb)
            g.init(two_step=True)  # the clear pulse overlaps the gate's read cycle
            out[sa, sb] = g.energy
    return out


@lru_cache(maxsize=None)
def _wired_or_tables(cfg: SimConfig):
    """Chi wired-OR row read inverted from two stored cells, indexed [NA cell, A cell]."""
    bit = np.zeros((2, 2), dtype=np.uint8)
    energy = np.zeros((2, 2))
    drift = np.zeros((2, 2))
    for s1 in (0, 1):
        for s2 in (0, 1):
            ev = diode_nand_analog(s1, s2, cfg, strict=False, idle_columns=CHI_IDLE_COLUMNS, idle_w=0.0)
            bit[s1, s2], energy[s1, s2], drift[s1, s2] = ev.bit, ev.energy, ev.max_drift
    return bit, energy, drift


@lru_cache(maxsize=None)
def _read_table(cfg: SimConfig) -> np.ndarray:
    """Energy of sensing one stored cell through a read divider, indexed by its bit."""
    out = np.zeros(2)
    for b in (0, 1):
        bar = Crossbar("read", ["X"], ["c"], cfg.device).place("X", "c", float(b))
        drives = {"X": WireDrive.fixed(cfg.voltages.v_plus), "c": and_read_drives(cfg)["cA"]}
        out[b] = cycle_energy(bar, solve_cycle(bar, drives, cfg.solver), cfg.dt)
    return out


def idle_energy(cfg: SimConfig | None = None, rows: int = 5, cols: int = 5, w: float = 1.0) -> float:
    """Energy of a power-gated array (every wire held at 0 V) over one cycle."""
    cfg = cfg or default_config()
    bar = Crossbar("idle", [f"r{i}" for i in range(rows)], [f"c{j}" for j in range(cols)], cfg.device)
    for i in range(rows):
        for j in range(cols):
            bar.place(f"r{i}", f"c{j}", w)
    drives = {wire: WireDrive.fixed(0.0) for wire in bar.wires}
    sol = solve_cycle(bar, drives, cfg.solver)
    return cycle_energy(bar, sol, cfg.dt)


def float_rows(params, w: np.ndarray, col: np.ndarray, iterations: int = 60) -> np.ndarray:
    """Voltage of floating rows whose cells (last axis) join driven columns.

    Forward-biased cells conduct with G(w), reverse-biased ones with 1/r_off;
    the net current into a row falls monotonically with its voltage, so
    bisection between the extreme column levels finds the balance point.
    """
    w, col = np.broadcast_arrays(w, col)
    g_fwd = params.g_off * np.exp(np.log(params.r_off / params.r_on) * w)
    lo, hi = col.min(axis=-1), col.max(axis=-1)
    for _ in range(iterations):
        mid = 0.5 * (lo + hi)
        d = col - mid[..., None]
        net = np.sum(np.where(d >= 0, d * g_fwd, d * params.g_off), axis=-1)
        lo = np.where(net > 0, mid, lo)
        hi = np.where(net > 0, hi, mid)
    return 0.5 * (lo + hi)


def _mask(index) -> np.ndarray:
    m = np.zeros(5, dtype=bool)
    m[index] = True
    return m


# ------------------------------------------------------------------ probe


@dataclass
class Mismatch:
    where: str
    count: int


class AnalogProbe:
    """Replays observed operations and accumulates energy until flushed."""

    INIT_KINDS = ("hrs", "lrs")

    def __init__(self, cfg: SimConfig, banks: Banks, clear_before_set: bool = True):
        self.cfg = cfg
        self.clear_before_set = clear_before_set
        self.w = {
            "A": banks.state.A.astype(float),
            "NA": banks.state.NA.astype(float),
            "R": banks.rho.R.astype(float),
        }
        # stored bits of the XNOR input cells, LRS after their last init
        self.gate_cells = {
            "chi": np.ones((SHEETS, SLICES, 2), dtype=np.uint8),
            "stage": np.ones((SLICES, 2), dtype=np.uint8),
            "xor": np.ones((SLICES, XOR_BLOCKS, 2), dtype=np.uint8),
        }
        self._pending: dict[str, float] = defaultdict(float)
        self._pending_init = 0.0
        self.mismatches: list[Mismatch] = []
        self.max_drift = 0.0
        self.array_energy: dict[str, float] = defaultdict(float)

    # bookkeeping
    def _charge(self, array: str, joules: float, init: bool = False) -> None:
        self._pending[array] += joules
        self.array_energy[array] += joules
        if init:
            self._pending_init += joules

    def _check(self, where: str, analog, logical) -> None:
        bad = int(np.count_nonzero(np.asarray(analog) != np.asarray(logical)))
        if bad:
            self.mismatches.append(Mismatch(where, bad))

    def flush(self):
        out = tuple(sorted((k, v) for k, v in self._pending.items() if v))
        init = self._pending_init
        self._pending.clear()
        self._pending_init = 0.0
        return out, init

    # memory arrays
    def _state_drops(self, array, kind, sx, sy, data) -> np.ndarray:
        """Per-cell drops (anode on the column) of all 64 slices, shape (x, y, z)."""
        vp = self.cfg.voltages.v_plus
        row = np.full((PLANES, SLICES), np.nan)  # nan marks a floating row
        col = np.full((SHEETS, SLICES), vp)
        if kind == "hrs":
            row[sy], col[sx] = 2 * vp, 0.0
        elif kind == "lrs":
            row[sy], col[sx] = 0.0, 2 * vp
        elif sx.sum() == 1:  # sheet or lane store: data on the rows, clear the 0 bits
            x = int(np.argmax(sx))
            col[sx] = 0.0
            row[sy] = np.where(data[x][sy] == 0, 2 * vp, vp)
        elif sy.sum() == 1:  # plane store: data on the columns
            y = int(np.argmax(sy))
            row[sy] = 2 * vp
            col[sx] = np.where(data[:, y][sx] == 0, 0.0, vp)
        else:
            raise NotImplementedError("stores cover a lane, a sheet or a plane")
        free = ~sy
        if free.any():
            # rows (y, z) with their five cells along x
            w = np.transpose(self.w[array], (1, 2, 0))[free]
            row[free] = float_rows(self.cfg.device, w, col.T[None, :, :])
        return col[:, None, :] - row[None, :, :]

    def _rho_drops(self, kind, sx, sy, data) -> np.ndarray:
        """Per-cell drops of the five 5x64 planes (rows x, columns z); unselected planes idle."""
        vp = self.cfg.voltages.v_plus
        row = np.zeros((SHEETS, PLANES))
        col = np.zeros((PLANES, SLICES))
        for y in np.nonzero(sy)[0]:
            if kind == "hrs":
                row[sx, y] = 2 * vp
                col[y] = 0.0
            elif kind == "store":  # SET the 1 bits of fresh HRS cells
                if sx.sum() != 1:
                    raise NotImplementedError("Rho stores cover one sheet")
                x = int(np.argmax(sx))
                row[x, y] = 0.0
                col[y] = np.where(data[x, y] == 1, 2 * vp, vp)
            else:
                raise NotImplementedError("the Rho array is only cleared and stored")
            free = ~sx
            row[free, y] = float_rows(self.cfg.device, self.w["R"][free, y], col[y][None, :])
        return col[None, :, :] - row[:, :, None]

    def _pulse(self, array: str, kind: str, sx, sy, logical, region) -> float:
        if array == "R":
            drops = self._rho_drops(kind, sx, sy, logical)
        else:
            drops = self._state_drops(array, kind, sx, sy, logical)
        w = self.w[array]
        p, dt = self.cfg.device, self.cfg.dt
        energy = float(step_energy_array(p, w, drops, dt).sum())
        w_new = advance_w_array(p, w, drops, dt)
        if (~region).any():
            self.max_drift = max(self.max_drift, float(np.max(np.abs(w_new - w)[~region])))
        self.w[array] = w_new
        return energy

    def program(self, array: str, kind: str, x, y, logical: np.ndarray) -> None:
        sx, sy = _mask(x), _mask(y)
        region = sx[:, None, None] & sy[None, :, None] & np.ones(SLICES, dtype=bool)
        energy = 0.0
        if kind == "lrs" and self.clear_before_set and np.any(self.w[array][region] > 0):
            # two-step programming; the clear pulse overlaps the preceding cycle
            energy += self._pulse(array, "hrs", sx, sy, logical, region)
        energy += self._pulse(array, kind, sx, sy, logical, region)
        self._check(f"{array}-{kind}", (self.w[array][region] >= 0.5), logical[region] == 1)
        self._charge(array, energy, init=kind in self.INIT_KINDS)

    def read(self, array: str, bits) -> None:
        bits = np.asarray(bits)
        table = _read_table(self.cfg)
        ones = int(np.count_nonzero(bits))
        self._charge(array, ones * table[1] + (bits.size - ones) * table[0])

    # gates
    def gate_init(self, group: str, index=slice(None)) -> None:
        cells = self.gate_cells[group][index]
        table = _xnor_init_table(self.cfg)
        self._charge(f"gates-{group}", float(table[cells[..., 0], cells[..., 1]].sum()), init=True)
        cells[...] = 1
        self.gate_cells[group][index] = cells

    def _xnor_eval(self, a, b):
        bit, energy, drift = _xnor_tables(self.cfg)
        self.max_drift = max(self.max_drift, float(drift[a, b].max()))
        return bit[a, b], float(energy[a, b].sum())

    def xnor(self, group: str, index, a, b, logical) -> None:
        a = np.asarray(a, dtype=np.intp)
        b = np.asarray(b, dtype=np.intp)
        out, energy = self._xnor_eval(a, b)
        self._check(f"xnor-{group}", out, logical)
        self._charge(f"gates-{group}", energy)
        self.gate_cells[group][index] = np.stack([1 - a, 1 - b], axis=-1)

    def column_xor(self, cols, logical) -> None:
        """Ten-input XOR per slice: a shared init cycle, then one XNOR block per extra input."""
        cols = np.asarray(cols, dtype=np.intp)
        cells = self.gate_cells["xor"]
        init = _xnor_init_table(self.cfg)
        self._charge("gates-xor", float(init[cells[..., 0], cells[..., 1]].sum()), init=True)
        acc = cols[0]
        energy = 0.0
        for j in range(1, cols.shape[0]):
            out, e = self._xnor_eval(acc, cols[j])
            energy += e
            cells[:, j - 1] = np.stack([1 - acc, 1 - cols[j]], axis=-1)
            acc = 1 - out.astype(np.intp)  # inverting level shifter
        self._charge("gates-xor", energy)
        self._check("column-xor", acc, logical)

    def wired_or(self, na_cells, a_cells, logical) -> None:
        bit, energy, drift = _wired_or_tables(self.cfg)
        s1 = np.asarray(na_cells, dtype=np.intp)
        s2 = np.asarray(a_cells, dtype=np.intp)
        self.max_drift = max(self.max_drift, float(drift[s1, s2].max()))
        self._check("wired-or", bit[s1, s2], logical)
        self._charge("Chi", float(energy[s1, s2].sum()))

    # verdicts
    def digital(self, array: str) -> np.ndarray:
        return (self.w[array] >= 0.5).astype(np.uint8)

    def agrees_with(self, banks: Banks) -> bool:
        return (
            not self.mismatches
            and np.array_equal(self.digital("A"), banks.state.A)
            and np.array_equal(self.digital("NA"), banks.state.NA)
            and np.array_equal(self.digital("R"), banks.rho.R)
        )


def attach_probe(banks: Banks, trace: CycleTrace, cfg: SimConfig | None = None) -> AnalogProbe:
    probe = AnalogProbe(cfg or default_config(), banks)
    banks.attach(probe)
    trace.probe = probe
    trace.analog_recorded = True
    return probe


# ----------------------------------------------------------------- windows


WINDOW_OPS = {
    THETA: lambda b, t, i: engine.exec_theta(b, t, i),
    RHO: lambda b, t, i: engine.exec_rho(b, t, i),
    STATE_INIT: lambda b, t, i: engine.init_state(b, t, i),
    COMPLEMENT: lambda b, t, i: engine.exec_complement(b, t, i),
    CHI: lambda b, t, i: engine.exec_chi(b, t, i),
    IOTA: lambda b, t, i: engine.exec_iota(b, i, t),
}


@dataclass
class AnalogWindow:
    op: str
    selector: str | None
    records: list
    equivalent: bool
    mismatches: list
    max_drift: float
    array_energy: dict = field(default_factory=dict)

    @property
    def energy_j(self) -> float:
        return sum(r.energy_j for r in self.records)

    @property
    def cycles(self) -> int:
        return sum(r.cycles for r in self.records)

    @property
    def drift_ok(self) -> bool:
        return self.max_drift < DRIFT_LIMIT


def analog_window(
    banks: Banks, op: str, selector: str | None = None, cfg: SimConfig | None = None, round: int = 1
) -> AnalogWindow:
    """Replay one operation analogically on a copy of ``banks``.

    ``selector`` (e.g. ``"plane2"`` or ``"sheet0"``) limits the reported
    records to the micro-ops of that plane or sheet; equivalence always
    covers the whole replay. Pi needs the state arrays initialized and is
    replayed together with that initialization; the complement starts from
    an armed A, as it does after Pi.
    """
    cfg = cfg or default_config()
    logical = copy.deepcopy(banks)
    analog = copy.deepcopy(banks)
    if op == COMPLEMENT:
        # after Pi, A is armed (LRS) and waits for the complemented lanes
        for b in (logical, analog):
            b.state.init("A", level=1)
    trace = CycleTrace(cfg.control_bits_per_cycle)
    probe = attach_probe(analog, trace, cfg)
    if op == PI:
        for b, t in ((logical, None), (analog, trace)):
            engine.init_state(b, t, round)
            engine.exec_pi(b, t, round)
    elif op in WINDOW_OPS:
        WINDOW_OPS[op](logical, None, round)
        WINDOW_OPS[op](analog, trace, round)
    else:
        raise ValueError(f"no analog window for operation {op!r}")
    records = [r for r in trace.records if selector is None or r.unit.startswith(selector)]
    same = probe.agrees_with(logical) and np.array_equal(analog.state.A, logical.state.A)
    return AnalogWindow(op, selector, records, same, list(probe.mismatches), probe.max_drift, dict(probe.array_energy))


def analog_first_round(
    message: bytes = b"", variant: str = "SHA3-256", cfg: SimConfig | None = None
) -> tuple[CycleTrace, AnalogProbe]:
    """Message initialization, mapping of the first block and round 1 with the probe attached."""
    from .. import keccak

    cfg = cfg or default_config()
    rate, _ = keccak.variant_params(variant)
    block = keccak.pad(message, rate)[0]
    banks = Banks()
    trace = CycleTrace(cfg.control_bits_per_cycle)
    probe = attach_probe(banks, trace, cfg)
    engine.init_message(banks, trace)
    engine.map_block(banks, block, rate, trace)
    engine.exec_round(banks, 1, trace)
    return trace, probe


__all__ = [
    "AnalogProbe",
    "AnalogWindow",
    "MAP",
    "analog_first_round",
    "analog_window",
    "attach_probe",
    "idle_energy",
]
