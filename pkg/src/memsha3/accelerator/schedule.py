"""Micro-op records and the per-cycle trace of an accelerator run."""

from __future__ import annotations

import csv
import io
from collections import Counter
from dataclasses import asdict, dataclass

# operation categories, in round order
MSG_INIT = "msg-init"
MAP = "map"
THETA = "theta"
RHO = "rho"
STATE_INIT = "state-init"
PI = "pi"
COMPLEMENT = "complement"
CHI = "chi"
IOTA = "iota"

ROUND_OPS = (THETA, RHO, STATE_INIT, PI, COMPLEMENT, CHI, IOTA)


@dataclass(frozen=True)
class MicroOp:
    op: str  # category
    step: str  # micro-op name within the category
    round: int  # 0 outside the round loop
    cycles: int
    control_bits: int
    unit: str = ""  # sheet / plane / lane selector
    select: int | None = None  # MUX select shared by all multiplexers
    block: int = 0
    energy: tuple = ()  # ((array, joules), ...) when an analog probe is attached
    init_energy_j: float = 0.0  # part of the energy spent on initialization pulses

    @property
    def energy_j(self) -> float:
        return sum(e for _, e in self.energy)


class CycleTrace:
    """Ordered micro-op records. Totals are always summed from the records."""

    def __init__(self, control_bits_per_cycle: int = 0):
        self.bits_per_cycle = control_bits_per_cycle
        self.records: list[MicroOp] = []
        self.block = 0
        self.probe = None
        self.analog_recorded = False  # set once a probe has been attached

    @property
    def analog(self) -> bool:
        return self.probe is not None or self.analog_recorded

    def emit(self, op: str, step: str, cycles: int, round: int = 0, unit: str = "", select: int | None = None) -> MicroOp:
        if cycles < 0:
            raise ValueError("negative cycle count")
        energy, init_e = self.probe.flush() if self.probe is not None else ((), 0.0)
        rec = MicroOp(op, step, round, cycles, cycles * self.bits_per_cycle, unit, select, self.block, energy, init_e)
        self.records.append(rec)
        return rec

    def extend(self, other: "CycleTrace") -> None:
        self.records.extend(other.records)

    @property
    def total_cycles(self) -> int:
        return sum(r.cycles for r in self.records)

    @property
    def total_control_bits(self) -> int:
        return sum(r.control_bits for r in self.records)

    def by_op(self, round: int | None = None, block: int | None = None) -> dict[str, int]:
        c: Counter = Counter()
        for r in self.records:
            if (round is None or r.round == round) and (block is None or r.block == block):
                c[r.op] += r.cycles
        return dict(c)

    def by_step(self, op: str, round: int | None = None) -> dict[str, int]:
        c: Counter = Counter()
        for r in self.records:
            if r.op == op and (round is None or r.round == round):
                c[r.step] += r.cycles
        return dict(c)

    def round_cycles(self, round: int, block: int | None = None) -> int:
        return sum(r.cycles for r in self.records if r.round == round and (block is None or r.block == block))

    def rounds(self) -> list[int]:
        return sorted({r.round for r in self.records if r.round > 0})

    def selects(self) -> list[int]:
        return [r.select for r in self.records if r.select is not None]

    def rows(self) -> list[dict]:
        out = []
        for r in self.records:
            row = asdict(r)
            row["energy"] = ";".join(f"{k}={v:.6e}" for k, v in r.energy)
            out.append(row)
        return out

    def to_csv(self) -> str:
        buf = io.StringIO()
        fields = list(MicroOp.__dataclass_fields__)
        w = csv.DictWriter(buf, fieldnames=fields, lineterminator="\n")
        w.writeheader()
        for row in self.rows():
            w.writerow(row)
        return buf.getvalue()

    def __len__(self):
        return len(self.records)
