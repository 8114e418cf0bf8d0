"""Logical model of the memristor arrays and the CMOS rotation network.

Every array stores one bit per cell in ``[x, y, z]`` order. Destination
lanes must be initialized before a store; stores consume the
initialization.
"""

from __future__ import annotations

import numpy as np

from ..keccak import RHO_OFFSETS, RC, W

SHEETS = 5  # x
PLANES = 5  # y
SLICES = W  # z


class ScheduleViolation(RuntimeError):
    pass


class ComplementStale(RuntimeError):
    pass


def _bits():
    return np.zeros((SHEETS, PLANES, SLICES), dtype=np.uint8)


class StateArrayBank:
    """Arrays A and NA: 64 parallel 5x5 slices each, plus one 10-input XOR
    gate per slice and a 2-input XNOR stage behind it."""

    def __init__(self):
        self.A = _bits()
        self.NA = _bits()
        self.fresh_A = np.zeros((SHEETS, PLANES), dtype=bool)
        self.fresh_NA = np.zeros((SHEETS, PLANES), dtype=bool)
        self.xor_acc = np.zeros(SLICES, dtype=np.uint8)  # outputs of the slice XOR gates
        self.xnor_out = np.zeros(SLICES, dtype=np.uint8)
        self.xnor_ready = False
        self.probe = None  # optional analog observer

    def init(self, which: str, x=slice(None), y=slice(None), level: int = 1) -> None:
        """Program cells to LRS (level 1) or HRS (level 0)."""
        for name in which.split(","):
            getattr(self, name)[x, y, :] = level
            getattr(self, f"fresh_{name}")[x, y] = level == 1
            if self.probe is not None:
                self.probe.program(name, "lrs" if level == 1 else "hrs", x, y, getattr(self, name))

    def store(self, which: str, x, y, bits) -> None:
        fresh = getattr(self, f"fresh_{which}")
        if not np.all(fresh[x, y]):
            raise ScheduleViolation(f"store into {which}[{x},{y}] without prior initialization")
        getattr(self, which)[x, y, :] = bits
        fresh[x, y] = False
        if self.probe is not None:
            self.probe.program(which, "store", x, y, getattr(self, which))

    def complement_ok(self) -> bool:
        return bool(np.array_equal(self.NA, 1 - self.A))


class RhoArrayBank:
    """Five stacked 5x64 planes used purely as memory."""

    def __init__(self):
        self.R = _bits()
        self.fresh = np.ones((SHEETS, PLANES), dtype=bool)
        self.probe = None

    def init(self, x=slice(None), y=slice(None)) -> None:
        self.R[x, y, :] = 0  # HRS
        self.fresh[x, y] = True
        if self.probe is not None:
            self.probe.program("R", "hrs", x, y, self.R)

    def store(self, x, y, bits) -> None:
        if not np.all(self.fresh[x, y]):
            raise ScheduleViolation(f"store into R[{x},{y}] without prior initialization")
        self.R[x, y, :] = bits
        self.fresh[x, y] = False
        if self.probe is not None:
            self.probe.program("R", "store", x, y, self.R)


class MuxNetwork:
    """5 lanes x 64 multiplexers between the state array and the Rho array.

    Input ``s`` of every multiplexer in lane ``y`` carries the rotation
    offset of column ``x = s`` of that lane's offset row; lanes 1..4 have a
    sixth input (select 5) wired for offset 1. Lane 0 already owns offset 1
    on its input 1, so its select decoder maps 5 onto that input.
    """

    THETA_SELECT = 5
    SELECT_BITS = 3

    def __init__(self):
        self.inputs = []
        for y in range(PLANES):
            offs = [RHO_OFFSETS[x][y] for x in range(SHEETS)]
            if y > 0:
                offs.append(1)
            self.inputs.append(offs)
        self.lanes = PLANES
        self.per_lane = SLICES
        self.history: list[int] = []

    def offset(self, y: int, select: int) -> int:
        offs = self.inputs[y]
        if select == self.THETA_SELECT and len(offs) == SHEETS:
            select = offs.index(1)
        if not 0 <= select < len(offs):
            raise ScheduleViolation(f"select {select} has no input on lane {y}")
        return offs[select]

    def route(self, sheet_bits: np.ndarray, select: int) -> np.ndarray:
        """Rotate all five lanes of one sheet with a single shared select value."""
        if not 0 <= select < 2**self.SELECT_BITS:
            raise ScheduleViolation(f"select {select} exceeds {self.SELECT_BITS} control bits")
        self.history.append(select)
        out = np.empty_like(sheet_bits)
        for y in range(PLANES):
            out[y] = np.roll(sheet_bits[y], self.offset(y, select))
        return out


class ChiArrayBank:
    """Wired-OR rows feeding 2-input XNOR gates.

    Plane ``x`` holds the 64 rows (one per slice) that produce output lane
    ``x`` of the state plane being processed. Each row has ten input cells:
    columns 0..4 read A[0..4], columns 5..9 read NA[0..4]. The cells on
    NA[x+1] and A[x+2] are programmed to LRS once; the rest stay HRS.
    """

    def __init__(self):
        self.cells = np.zeros((SHEETS, SLICES, 2 * SHEETS), dtype=np.uint8)
        for x in range(SHEETS):
            self.cells[x, :, SHEETS + (x + 1) % 5] = 1
            self.cells[x, :, (x + 2) % 5] = 1
        self.gate_out = np.zeros((SHEETS, SLICES), dtype=np.uint8)
        self.gate_ready = np.zeros(SHEETS, dtype=bool)

    def inputs_of(self, x: int) -> tuple[int, int]:
        """(column into A, column into NA) participating in output plane ``x``."""
        cols = np.nonzero(self.cells[x, 0])[0]
        a_col = int(next(c for c in cols if c < SHEETS))
        na_col = int(next(c for c in cols if c >= SHEETS)) - SHEETS
        return a_col, na_col

    def init_gates(self, x=slice(None)) -> None:
        self.gate_out[x] = 1
        self.gate_ready[x] = True

    def use_gates(self, x: int) -> None:
        if not self.gate_ready[x]:
            raise ScheduleViolation(f"Chi XNOR gates of plane {x} reused without initialization")
        self.gate_ready[x] = False


class IotaArrayBank:
    """24 x 64 read-only cells holding the round constants."""

    def __init__(self):
        self.bits = np.array([[(rc >> z) & 1 for z in range(SLICES)] for rc in RC], dtype=np.uint8)
        self.bits.setflags(write=False)

    def constant(self, i: int) -> np.ndarray:
        return self.bits[i - 1]


class Banks:
    """All arrays of one accelerator instance."""

    def __init__(self):
        self.state = StateArrayBank()
        self.rho = RhoArrayBank()
        self.mux = MuxNetwork()
        self.chi = ChiArrayBank()
        self.iota = IotaArrayBank()
        self.probe = None

    def attach(self, probe) -> None:
        """Route every array write and gate evaluation through ``probe``."""
        self.probe = probe
        self.state.probe = probe
        self.rho.probe = probe

    @classmethod
    def holding(cls, bits: np.ndarray) -> "Banks":
        """Banks in the quiescent state: A = bits, NA = complement."""
        b = cls()
        b.state.A[:] = bits
        b.state.NA[:] = 1 - b.state.A
        return b

    def cell_counts(self) -> dict[str, int]:
        return {
            "A": self.state.A.size,
            "NA": self.state.NA.size,
            "Rho": self.rho.R.size,
            "Chi": self.chi.cells.size,
            "Iota": self.iota.bits.size,
        }
