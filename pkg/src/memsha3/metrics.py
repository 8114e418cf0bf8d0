"""Cycle, control-storage, area, energy and throughput accounting."""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass, field
from functools import lru_cache
from importlib import resources

import yaml

from .accelerator.schedule import (
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

KB = 1000  # bytes
ANALOG = "analog-measured"
REFERENCE = "table-reference"
OPERATIONS = ("initialization", "mapping", "theta", "rho", "pi", "chi", "iota")


class ZeroLatency(ValueError):
    pass


class MissingTrace(ValueError):
    pass


@lru_cache(maxsize=1)
def published() -> dict:
    return yaml.safe_load(resources.files("memsha3").joinpath("data/published.yaml").read_text())


# ---------------------------------------------------------------- control / throughput


def control_bits(trace: CycleTrace) -> int:
    return trace.total_control_bits


def control_storage(trace: CycleTrace) -> float:
    """Control-bit storage of a trace in KB (1 KB = 1000 bytes)."""
    return control_bits(trace) / 8 / KB


def throughput(block_bits: float, latency_cycles: float, frequency_hz: float) -> float:
    """Bits per second: block size over latency, times the clock frequency."""
    if latency_cycles <= 0:
        raise ZeroLatency("latency must be a positive number of cycles")
    return block_bits / latency_cycles * frequency_hz


def implied_latency(block_bits: float, throughput_bps: float, frequency_hz: float) -> float:
    """Latency a published throughput figure corresponds to."""
    return block_bits * frequency_hz / throughput_bps


# ---------------------------------------------------------------- area


@dataclass(frozen=True)
class AreaModel:
    cells: dict  # array name -> bit count
    gates_routing_bits: int
    control_bits: dict

    @property
    def crossbar_bits(self) -> int:
        return sum(self.cells.values())

    @property
    def crossbar_kb(self) -> float:
        return self.crossbar_bits / 8 / KB

    @property
    def gates_routing_kb(self) -> float:
        return self.gates_routing_bits / 8 / KB

    @property
    def total_kb(self) -> float:
        return (self.crossbar_bits + self.gates_routing_bits) / 8 / KB

    def bytes_of(self, array: str) -> float:
        return self.cells[array] / 8

    @property
    def control_bits_per_cycle(self) -> int:
        return sum(self.control_bits.values())

    def as_dict(self) -> dict:
        return {
            "cells": dict(self.cells),
            "crossbar_kb": self.crossbar_kb,
            "gates_routing_kb": self.gates_routing_kb,
            "total_kb": self.total_kb,
            "control_bits_per_cycle": self.control_bits_per_cycle,
        }


def memristor_area(banks=None, cfg=None) -> AreaModel:
    """Array sizes from the cell counts of a constructed accelerator."""
    from .accelerator.banks import Banks
    from .config import default_config

    banks = banks or Banks()
    cfg = cfg or default_config()
    return AreaModel(banks.cell_counts(), int(published()["area"]["gates_routing_bits"]), dict(cfg.control_bits))


# ---------------------------------------------------------------- energy


def _row_of(op: str, step: str, array: str) -> str:
    """Energy-table row receiving the energy a micro-op spent in ``array``."""
    if op == MSG_INIT:
        return "init-rho" if array == "R" else "init-state"
    if op == MAP:
        return "map"
    if op == THETA:
        return "theta-rot" if step in ("rho-reinit", "rot1") else "theta-xor"
    if op == RHO:
        return "rho-init" if step == "rho-init" else "rho-perform"
    if op in (STATE_INIT, PI):
        return "pi"
    if op == COMPLEMENT:
        return "chi-neg"
    if op == CHI:
        return "chi-main"
    if op == IOTA:
        return "iota"
    raise ValueError(f"no energy row for operation {op!r}")


@dataclass
class EnergyLedger:
    """Energy entries in pJ keyed by the rows of the first-round table."""

    entries: dict
    backend: str
    init_pj: float | None = None
    rows: list = field(default_factory=lambda: list(published()["energy_first_round"]))

    def __post_init__(self):
        bad = {k: v for k, v in self.entries.items() if v < 0}
        if bad:
            raise ValueError(f"negative energy entries: {bad}")

    @property
    def total(self) -> float:
        return sum(self.entries.values())

    def operation_of(self, row_id: str) -> str:
        return next(r["operation"] for r in self.rows if r["id"] == row_id)

    def by_operation(self) -> dict:
        out = {op: 0.0 for op in OPERATIONS}
        for k, v in self.entries.items():
            out[self.operation_of(k)] += v
        return out

    def largest(self) -> tuple[str, float]:
        return max(self.entries.items(), key=lambda kv: kv[1])

    def ordering_ok(self) -> bool:
        """Theta >= Chi >= mapping >= every remaining operation."""
        ops = self.by_operation()
        rest = [ops[o] for o in ("initialization", "rho", "pi", "iota")]
        return ops["theta"] >= ops["chi"] >= ops["mapping"] >= max(rest)

    @property
    def init_fraction(self) -> float | None:
        if self.init_pj is None:
            return float(published()["init_energy_fraction"]) if self.backend == REFERENCE else None
        return self.init_pj / self.total if self.total else 0.0

    def as_dict(self) -> dict:
        return {
            "backend": self.backend,
            "entries": {r["id"]: self.entries.get(r["id"], 0.0) for r in self.rows},
            "by_operation": self.by_operation(),
            "total": self.total,
            "init_fraction": self.init_fraction,
        }

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["row", "operation", "energy_pj"])
        for r in self.rows:
            w.writerow([r["id"], r["operation"], f"{self.entries.get(r['id'], 0.0):.6f}"])
        return buf.getvalue()


def reference_ledger() -> EnergyLedger:
    return EnergyLedger({r["id"]: float(r["pj"]) for r in published()["energy_first_round"]}, REFERENCE)


def energy_account(source=None, round: int = 1, block: int = 0) -> EnergyLedger:
    """Build a ledger from an analog-probed trace, or the reference table.

    ``source`` is ``None``/``"reference"`` for the published values, or a
    :class:`CycleTrace` recorded with an analog probe. The analog ledger
    covers message initialization, the mapping of ``block`` and round
    ``round`` of that block.
    """
    if source is None or source == "reference":
        return reference_ledger()
    if not isinstance(source, CycleTrace):
        raise MissingTrace(f"expected a CycleTrace, got {type(source).__name__}")
    if not source.analog:
        raise MissingTrace("trace was recorded without an analog probe")
    picked = [
        r
        for r in source.records
        if r.block == block and (r.op == MSG_INIT or r.op == MAP or r.round == round)
    ]
    if not any(r.round == round for r in picked):
        raise MissingTrace(f"trace holds no records of round {round}")
    entries = {r["id"]: 0.0 for r in published()["energy_first_round"]}
    init = 0.0
    for r in picked:
        for array, joules in r.energy:
            entries[_row_of(r.op, r.step, array)] += joules * 1e12
        init += r.init_energy_j * 1e12
    return EnergyLedger(entries, ANALOG, init)


def stage_table(ledger: EnergyLedger) -> str:
    """Delimited stage totals: initialization, mapping and round computations."""
    ops = ledger.by_operation()
    stages = {
        "initialization": ops["initialization"],
        "mapping": ops["mapping"],
        "computations": sum(ops[o] for o in ("theta", "rho", "pi", "chi", "iota")),
    }
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["stage", "energy_pj"])
    for k, v in stages.items():
        w.writerow([k, f"{v:.6f}"])
    return buf.getvalue()


def breakdown_table(trace: CycleTrace, ledger: EnergyLedger | None = None, round: int = 1) -> str:
    """Per-operation cycles of one round (plus init/mapping) with energies when known."""
    cycles = trace.by_op(round=round, block=0)
    extra = trace.by_op(round=0, block=0)
    rows = [("initialization", extra.get(MSG_INIT, 0)), ("mapping", extra.get(MAP, 0))]
    rows += [
        ("theta", cycles.get(THETA, 0)),
        ("rho", cycles.get(RHO, 0)),
        ("pi", cycles.get(STATE_INIT, 0) + cycles.get(PI, 0)),
        ("chi", cycles.get(COMPLEMENT, 0) + cycles.get(CHI, 0)),
        ("iota", cycles.get(IOTA, 0)),
    ]
    ops = ledger.by_operation() if ledger is not None else {}
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["operation", "cycles", "energy_pj"])
    for name, c in rows:
        w.writerow([name, c, f"{ops[name]:.6f}" if name in ops else ""])
    return buf.getvalue()


# ---------------------------------------------------------------- comparison


COLUMNS = (
    ("name", "Implementation"),
    ("freq_mhz", "Freq (MHz)"),
    ("instruction_kb", "Instr. (KB)"),
    ("computing_kb", "Comp. (KB)"),
    ("cmos_kge", "CMOS (KGE)"),
    ("latency_cycles", "Latency (cyc)"),
    ("throughput_gbps", "Throughput (Gbps)"),
    ("energy_uj", "Energy (uJ)"),
)


def simulated_row(report, area: AreaModel | None = None) -> dict:
    """This simulator's row for the comparison table, from a completed report."""
    from . import keccak

    area = area or memristor_area()
    rate, _ = keccak.variant_params(report.variant)
    latency = report.total_cycles / report.blocks
    row = {
        "name": f"Simulated ({report.variant})",
        "freq_mhz": report.frequency_hz / 1e6,
        "instruction_kb": control_storage(report.trace) / report.blocks,
        "computing_kb": area.total_kb,
        "cmos_kge": float(published()["area"]["mux_kge"]),
        "latency_cycles": latency,
        "throughput_gbps": throughput(rate, latency, report.frequency_hz) / 1e9,
        "energy_uj": None,
    }
    return row


def comparison_rows(report=None) -> list[dict]:
    rows = [dict(r) for r in published()["comparison"]]
    if report is not None:
        rows.append(simulated_row(report))
    return rows


def _fmt(v) -> str:
    if v is None:
        return "-"
    if isinstance(v, str):
        return v
    return f"{v:.6g}"


def comparison_table(report=None) -> str:
    """Plain-text table of the published rows, plus the simulated row if given."""
    rows = comparison_rows(report)
    cells = [[h for _, h in COLUMNS]] + [[_fmt(r[k]) for k, _ in COLUMNS] for r in rows]
    widths = [max(len(row[i]) for row in cells) for i in range(len(COLUMNS))]
    lines = ["  ".join(c.ljust(w) for c, w in zip(row, widths)).rstrip() for row in cells]
    lines.insert(1, "  ".join("-" * w for w in widths))
    return "\n".join(lines) + "\n"
