"""Micro-op schedule of the accelerator on the logical backend.

Each ``exec_*`` function mutates ``banks`` in place, appends its micro-ops
to ``trace`` and returns ``banks``. Cycle counts are never stated as
totals: every micro-op contributes the cycles of its own phases.

Array roles per round:

* theta reads A, writes the complement of its result into NA;
* rho rotates NA into R through the MUX network;
* A and NA are re-initialized, pi copies R lanes into NA, and the
  complement step writes A = not NA;
* chi and iota update A (and NA alongside), leaving NA = not A.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .. import keccak
from ..config import SimConfig, default_config
from ..gates import xor_multi_cycles
from ..keccak import KeccakState, RoundOutOfRange
from .banks import PLANES, SHEETS, SLICES, Banks, ComplementStale, ScheduleViolation
from .schedule import (
    CHI,
    COMPLEMENT,
    IOTA,
    MAP,
    MSG_INIT,
    PI,
    RHO,
    STATE_INIT,
    THETA,
    CycleTrace,
)

CHUNK_BITS = PLANES * SLICES  # one state plane per mapping pass through the Chi XNOR gates


class BlockSizeMismatch(ValueError):
    pass


def _trace(trace: CycleTrace | None) -> CycleTrace:
    return trace if trace is not None else CycleTrace()


def _probe(banks: Banks):
    return banks.probe


def init_message(banks: Banks, trace: CycleTrace | None = None) -> Banks:
    """Two cycles: all state and Rho cells to HRS, then NA to LRS, so the
    state reads as zero with a consistent complement."""
    t = _trace(trace)
    s = banks.state
    s.init("A,NA", level=0)
    banks.rho.init()
    t.emit(MSG_INIT, "state+rho-hrs", 1)
    s.init("NA", level=1)
    s.fresh_NA[:] = False  # holds data (the complement of zero), not an armed target
    t.emit(MSG_INIT, "na-lrs", 1)
    return banks


def map_block(banks: Banks, block: bytes, rate_bits: int, trace: CycleTrace | None = None) -> Banks:
    """XOR a message block into the rate lanes, one state plane per pass."""
    if len(block) * 8 != rate_bits:
        raise BlockSizeMismatch(f"block has {len(block) * 8} bits, rate is {rate_bits}")
    t = _trace(trace)
    s, chi = banks.state, banks.chi
    X = keccak.block_state(block).bits()
    chunks = -(-rate_bits // CHUNK_BITS)
    for y in range(chunks):
        # gate re-initialization overlaps the previous pass
        chi.init_gates()
        if p := _probe(banks):
            p.gate_init("chi")
        t.emit(MAP, "xnor-init", 0, unit=f"plane{y}")
        for x in range(SHEETS):
            chi.use_gates(x)
            chi.gate_out[x] = 1 - (X[x, y] ^ s.A[x, y])
        if p:
            p.read("A", s.A[:, y])
            p.xnor("chi", slice(None), X[:, y], s.A[:, y], chi.gate_out)
        t.emit(MAP, "xnor", 1, unit=f"plane{y}")
        s.init("A,NA", y=y)
        t.emit(MAP, "plane-init", 1, unit=f"plane{y}")
        s.store("A", slice(None), y, 1 - chi.gate_out)
        s.store("NA", slice(None), y, chi.gate_out)
        t.emit(MAP, "store", 1, unit=f"plane{y}")
    return banks


def exec_theta(banks: Banks, trace: CycleTrace | None = None, round: int = 0) -> Banks:
    t = _trace(trace)
    s, R = banks.state, banks.rho
    if not s.complement_ok():
        raise ComplementStale("theta entered with NA != not A")
    k = 2 * PLANES  # column of A plus rotated column from R
    for x in range(SHEETS):
        xp, xm = (x + 1) % 5, (x - 1) % 5
        R.init(xp)
        t.emit(THETA, "rho-reinit", 0, round, f"sheet{x}")
        # step 1: offset-1 rotation of sheet x+1 into the Rho array
        if p := _probe(banks):
            p.read("A", s.A[xp])
        R.store(xp, slice(None), banks.mux.route(s.A[xp], banks.mux.THETA_SELECT))
        t.emit(THETA, "rot1", 1, round, f"sheet{x}", select=banks.mux.THETA_SELECT)
        # step 2: 64 parallel k-input XORs, column x-1 of A with column x+1 of R
        cols = np.concatenate([s.A[xm], R.R[xp]], axis=0)
        if cols.shape[0] != k:
            raise ScheduleViolation("slice XOR gate fed with the wrong column height")
        s.xor_acc[:] = np.bitwise_xor.reduce(cols, axis=0)
        if p:
            p.read("A", s.A[xm])
            p.read("R", R.R[xp])
            p.column_xor(cols, s.xor_acc)
        t.emit(THETA, "column-xor", xor_multi_cycles(k), round, f"sheet{x}")
        # step 3: XNOR with each lane of sheet x, stored as the complement in NA
        for y in range(PLANES):
            s.xnor_ready = True
            if p:
                p.gate_init("stage")
            s.init("NA", x, y)
            t.emit(THETA, "lane-init", 1, round, f"lane{x}{y}")
            if not s.xnor_ready:
                raise ScheduleViolation("theta XNOR stage not initialized")
            s.xnor_out[:] = 1 - (s.xor_acc ^ s.A[x, y])
            s.xnor_ready = False
            if p:
                p.read("A", s.A[x, y])
                p.xnor("stage", slice(None), s.xor_acc, s.A[x, y], s.xnor_out)
            t.emit(THETA, "lane-xnor", 1, round, f"lane{x}{y}")
            s.store("NA", x, y, s.xnor_out)
            t.emit(THETA, "lane-store", 1, round, f"lane{x}{y}")
    return banks


def exec_rho(banks: Banks, trace: CycleTrace | None = None, round: int = 0, source: str = "NA") -> Banks:
    """R[x, y] = rot(source[x, y], offset[x][y]), one sheet per cycle."""
    t = _trace(trace)
    src = getattr(banks.state, source)
    banks.rho.init()
    t.emit(RHO, "rho-init", 1, round)
    for x in range(SHEETS):
        if p := _probe(banks):
            p.read(source, src[x])
        banks.rho.store(x, slice(None), banks.mux.route(src[x], x))
        t.emit(RHO, "rotate", 1, round, f"sheet{x}", select=x)
    return banks


def init_state(banks: Banks, trace: CycleTrace | None = None, round: int = 0) -> Banks:
    t = _trace(trace)
    banks.state.init("A,NA", level=0)
    t.emit(STATE_INIT, "hrs", 1, round)
    banks.state.init("A,NA", level=1)
    t.emit(STATE_INIT, "lrs", 1, round)
    return banks


def exec_pi(banks: Banks, trace: CycleTrace | None = None, round: int = 0) -> Banks:
    """Route each Rho lane to NA[y, 2x+3y], one lane per cycle."""
    t = _trace(trace)
    for x in range(SHEETS):
        for y in range(PLANES):
            X, Y = keccak.pi_destination(x, y)
            if p := _probe(banks):
                p.read("R", banks.rho.R[x, y])
            banks.state.store("NA", X, Y, banks.rho.R[x, y])
            t.emit(PI, "lane", 1, round, f"{x}{y}->{X}{Y}")
    return banks


def exec_complement(banks: Banks, trace: CycleTrace | None = None, round: int = 0) -> Banks:
    t = _trace(trace)
    s = banks.state
    for x in range(SHEETS):
        if p := _probe(banks):
            p.read("NA", s.NA[x])
        s.store("A", x, slice(None), 1 - s.NA[x])
        t.emit(COMPLEMENT, "sheet", 1, round, f"sheet{x}")
    return banks


def exec_chi(banks: Banks, trace: CycleTrace | None = None, round: int = 0) -> Banks:
    t = _trace(trace)
    s, chi = banks.state, banks.chi
    if not s.complement_ok():
        raise ComplementStale("chi entered with NA != not A")
    for y in range(PLANES):
        chi.init_gates()
        if p := _probe(banks):
            p.gate_init("chi")
        t.emit(CHI, "xnor-init", 1, round, f"plane{y}")
        for x in range(SHEETS):
            a_col, na_col = chi.inputs_of(x)
            # inverted reads into a wired-OR: NA[x+1] gives a1, A[x+2] gives not a2
            wired_or = (1 - s.NA[na_col, y]) | (1 - s.A[a_col, y])
            chi.use_gates(x)
            chi.gate_out[x] = 1 - (s.A[x, y] ^ wired_or)
            if p:
                p.wired_or(s.NA[na_col, y], s.A[a_col, y], wired_or)
                p.read("A", s.A[x, y])
                p.xnor("chi", x, s.A[x, y], wired_or, chi.gate_out[x])
            t.emit(CHI, "and-xor", 1, round, f"plane{y}x{x}")
        s.init("A,NA", y=y, level=0)
        t.emit(CHI, "plane-hrs", 1, round, f"plane{y}")
        s.init("A,NA", y=y, level=1)
        t.emit(CHI, "plane-lrs", 1, round, f"plane{y}")
        s.store("A", slice(None), y, chi.gate_out)
        s.store("NA", slice(None), y, 1 - chi.gate_out)
        t.emit(CHI, "store", 1, round, f"plane{y}")
    return banks


def exec_iota(banks: Banks, i: int, trace: CycleTrace | None = None, round: int | None = None) -> Banks:
    if not 1 <= i <= keccak.ROUNDS:
        raise RoundOutOfRange(f"round index {i} outside 1..{keccak.ROUNDS}")
    t = _trace(trace)
    rnd = i if round is None else round
    s, chi = banks.state, banks.chi
    chi.init_gates(0)
    if p := _probe(banks):
        p.gate_init("chi", 0)
    t.emit(IOTA, "xnor-init", 1, rnd)
    chi.use_gates(0)
    chi.gate_out[0] = 1 - (banks.iota.constant(i) ^ s.A[0, 0])
    if p:
        p.read("Iota", banks.iota.constant(i))
        p.read("A", s.A[0, 0])
        p.xnor("chi", 0, banks.iota.constant(i), s.A[0, 0], chi.gate_out[0])
    t.emit(IOTA, "xnor", 1, rnd)
    s.init("A,NA", 0, 0, level=0)
    t.emit(IOTA, "lane-hrs", 1, rnd)
    s.init("A,NA", 0, 0, level=1)
    t.emit(IOTA, "lane-lrs", 1, rnd)
    s.store("A", 0, 0, 1 - chi.gate_out[0])
    s.store("NA", 0, 0, chi.gate_out[0])
    t.emit(IOTA, "store", 1, rnd)
    return banks


def exec_round(banks: Banks, i: int, trace: CycleTrace | None = None) -> Banks:
    exec_theta(banks, trace, i)
    exec_rho(banks, trace, i)
    init_state(banks, trace, i)
    exec_pi(banks, trace, i)
    exec_complement(banks, trace, i)
    exec_chi(banks, trace, i)
    exec_iota(banks, i, trace)
    return banks


def run_block(banks: Banks, block: bytes, rate_bits: int, trace: CycleTrace | None = None, on_round=None):
    """Map one block and apply the 24 rounds. Returns ``(banks, trace)``.

    ``on_round`` is an optional debug hook called with (round, A bits) at
    every round boundary.
    """
    t = _trace(trace)
    map_block(banks, block, rate_bits, t)
    for i in range(1, keccak.ROUNDS + 1):
        exec_round(banks, i, t)
        if on_round is not None:
            on_round(i, banks.state.A.copy())
    return banks, t


def read_state(banks: Banks) -> KeccakState:
    return KeccakState.from_bits(banks.state.A)


@dataclass
class RunReport:
    variant: str
    digest: bytes
    blocks: int
    trace: CycleTrace
    frequency_hz: float
    round_snapshots: list = field(default_factory=list)
    energy: object = None
    analog_equivalent: bool | None = None
    analog_max_drift: float | None = None

    @property
    def hexdigest(self) -> str:
        return self.digest.hex()

    @property
    def total_cycles(self) -> int:
        return self.trace.total_cycles

    def summary(self) -> dict:
        from .. import metrics

        rate, _ = keccak.variant_params(self.variant)
        out = {
            "variant": self.variant,
            "digest": self.hexdigest,
            "blocks": self.blocks,
            "total_cycles": self.total_cycles,
            "cycles_by_op": dict(sorted(self.trace.by_op().items())),
            "cycles_per_round": sorted({self.trace.round_cycles(r, b) for r in self.trace.rounds() for b in range(self.blocks)}),
            "control_storage_kb": metrics.control_storage(self.trace),
            "throughput_bps": metrics.throughput(rate * self.blocks, self.total_cycles, self.frequency_hz),
        }
        if self.energy is not None:
            out["energy_pj"] = self.energy.as_dict()
            out["analog_equivalent"] = self.analog_equivalent
            out["analog_max_drift"] = self.analog_max_drift
        return out


class Accelerator:
    """One accelerator instance hashing messages on the logical backend.

    Only inputs and final states cross this interface; round-boundary
    snapshots are kept solely when ``debug_rounds`` is set.
    """

    def __init__(self, cfg: SimConfig | None = None, debug_rounds: bool = False):
        self._cfg = cfg or default_config()
        self._debug = debug_rounds

    @property
    def config(self) -> SimConfig:
        return self._cfg

    def hash_message(self, message: bytes, variant: str | None = None) -> tuple[bytes, RunReport]:
        variant = variant or self._cfg.variant
        rate, out_bits = keccak.variant_params(variant)
        banks = Banks()
        trace = CycleTrace(self._cfg.control_bits_per_cycle)
        snapshots = []
        probe = None
        if self._cfg.backend != "logical":
            # analog window: message init, first mapping and round 1
            from .analog import attach_probe

            probe = attach_probe(banks, trace, self._cfg)
        init_message(banks, trace)
        blocks = keccak.pad(message, rate)
        analog_ok = None
        for n, block in enumerate(blocks):
            trace.block = n

            def hook(i, bits, n=n):
                nonlocal analog_ok
                if self._debug:
                    snapshots.append((n, i, KeccakState.from_bits(bits)))
                if probe is not None and banks.probe is not None:
                    analog_ok = probe.agrees_with(banks)
                    banks.attach(None)
                    trace.probe = None

            run_block(banks, block, rate, trace, hook)
        digest = keccak.squeeze(read_state(banks), out_bits)
        report = RunReport(variant, digest, len(blocks), trace, self._cfg.frequency_hz, snapshots)
        if probe is not None:
            from .. import metrics

            report.energy = metrics.energy_account(trace)
            report.analog_equivalent = analog_ok
            report.analog_max_drift = probe.max_drift
        return digest, report

    def hexdigest(self, message: bytes, variant: str | None = None) -> str:
        return self.hash_message(message, variant)[0].hex()


def hash_message(message: bytes, variant: str = "SHA3-256", cfg: SimConfig | None = None):
    return Accelerator(cfg).hash_message(message, variant)
