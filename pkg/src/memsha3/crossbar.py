"""Crossbar arrays of rectifying memristors and a quasi-static nodal solver.

A wire is either driven to a fixed level, left floating, or pulled to a
level through a reference resistor. Each cycle the network is solved with
the device resistance picked per cell from the sign of its own drop; the
sign pattern is iterated to a fixed point.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Iterable, Mapping

import numpy as np

from .config import SolverSettings, check_reference_resistor
from .device import DeviceParams, advance_w, step_energy

GMIN = 1e-15  # S, leak from every undriven node to ground; keeps isolated wires defined


class NonConvergence(RuntimeError):
    pass


class DanglingWire(KeyError):
    pass


FIXED, FLOAT, PULLED = "fixed", "high-z", "pulled"


@dataclass(frozen=True)
class WireDrive:
    mode: str
    level: float = 0.0
    r_g: float | None = None

    @classmethod
    def fixed(cls, level: float) -> "WireDrive":
        return cls(FIXED, float(level))

    @classmethod
    def floating(cls) -> "WireDrive":
        return cls(FLOAT)

    @classmethod
    def pulled(cls, r_g: float, level: float = 0.0) -> "WireDrive":
        return cls(PULLED, float(level), float(r_g))


HIGH_Z = WireDrive.floating()


class Crossbar:
    """Grid of optional cells between named row and column wires.

    ``anode_on_row[i, j]`` fixes the device orientation: forward bias means
    the anode wire is above the cathode wire.
    """

    def __init__(self, name: str, rows, cols, params: DeviceParams):
        self.name = name
        self.row_names = list(rows) if not isinstance(rows, int) else [f"r{i}" for i in range(rows)]
        self.col_names = list(cols) if not isinstance(cols, int) else [f"c{j}" for j in range(cols)]
        if len(set(self.row_names + self.col_names)) != len(self.row_names) + len(self.col_names):
            raise ValueError("wire names must be unique within a crossbar")
        self.params = params
        shape = (len(self.row_names), len(self.col_names))
        self.present = np.zeros(shape, dtype=bool)
        self.anode_on_row = np.ones(shape, dtype=bool)
        self.w = np.zeros(shape)

    @property
    def rows(self) -> int:
        return len(self.row_names)

    @property
    def cols(self) -> int:
        return len(self.col_names)

    @property
    def wires(self) -> list[str]:
        return self.row_names + self.col_names

    def _index(self, row, col) -> tuple[int, int]:
        i = self.row_names.index(row) if isinstance(row, str) else row
        j = self.col_names.index(col) if isinstance(col, str) else col
        return i, j

    def place(self, row, col, w: float = 0.0, anode: str = "row") -> "Crossbar":
        if anode not in ("row", "col"):
            raise ValueError("anode must be 'row' or 'col'")
        if not 0.0 <= w <= 1.0:
            raise ValueError("w outside [0, 1]")
        i, j = self._index(row, col)
        self.present[i, j] = True
        self.anode_on_row[i, j] = anode == "row"
        self.w[i, j] = w
        return self

    def state(self, row, col) -> float:
        i, j = self._index(row, col)
        if not self.present[i, j]:
            raise KeyError(f"no cell at ({row}, {col}) in {self.name}")
        return float(self.w[i, j])

    def set_state(self, row, col, w: float) -> None:
        i, j = self._index(row, col)
        self.w[i, j] = w

    def copy(self) -> "Crossbar":
        out = Crossbar(self.name, self.row_names, self.col_names, self.params)
        out.present = self.present.copy()
        out.anode_on_row = self.anode_on_row.copy()
        out.w = self.w.copy()
        return out

    def snapshot(self) -> dict:
        return {
            "array": self.name,
            "rows": self.rows,
            "cols": self.cols,
            "row_wires": self.row_names,
            "col_wires": self.col_names,
            "w": [[(float(self.w[i, j]) if self.present[i, j] else None) for j in range(self.cols)] for i in range(self.rows)],
        }

    def dumps(self) -> str:
        return json.dumps(self.snapshot(), sort_keys=True)

    def __repr__(self):
        return f"Crossbar({self.name!r}, {self.rows}x{self.cols}, cells={int(self.present.sum())})"


@dataclass(frozen=True)
class Link:
    src: str
    dst: str
    mapping: tuple[tuple[str, str], ...]
    enabled: bool


class Network:
    """One or more crossbars joined by transmission-gate links."""

    def __init__(self, bars: Iterable[Crossbar], links: Iterable[Link] = ()):
        self.bars = {b.name: b for b in bars}
        self.links = list(links)
        for link in self.links:
            for a, b in link.mapping:
                for bar, wire in ((link.src, a), (link.dst, b)):
                    if bar not in self.bars or wire not in self.bars[bar].wires:
                        raise DanglingWire(f"link names absent wire {bar}.{wire}")

    def key(self, wire) -> tuple[str, str]:
        if isinstance(wire, tuple):
            return wire
        if len(self.bars) != 1:
            raise KeyError(f"wire {wire!r} is ambiguous in a multi-array network; use (array, wire)")
        return (next(iter(self.bars)), wire)

    def wire_keys(self) -> list[tuple[str, str]]:
        return [(n, w) for n, b in self.bars.items() for w in b.wires]

    def copy(self) -> "Network":
        return Network([b.copy() for b in self.bars.values()], self.links)


def gate_link(src: Crossbar | Network, dst: Crossbar, mapping, enabled: bool = True) -> Network:
    """Join ``dst`` onto ``src`` through ideal switches on the given wire pairs."""
    base = src if isinstance(src, Network) else Network([src])
    if dst.name in base.bars:
        raise ValueError(f"array {dst.name!r} already in network")
    src_name = next(iter(base.bars)) if isinstance(src, Network) else src.name
    pairs = []
    for a, b in mapping:
        if isinstance(a, tuple):
            src_name, a = a
        pairs.append((a, b))
    link = Link(src_name, dst.name, tuple(pairs), bool(enabled))
    return Network(list(base.bars.values()) + [dst], base.links + [link])


@dataclass
class CycleSolution:
    voltages: dict
    drops: dict = field(default_factory=dict)
    currents: dict = field(default_factory=dict)
    link_currents: dict = field(default_factory=dict)
    iterations: int = 0
    residual: float = 0.0

    def v(self, wire, bar: str | None = None) -> float:
        if isinstance(wire, tuple):
            return self.voltages[wire]
        if bar is None:
            (bar,) = {k[0] for k in self.voltages}
        return self.voltages[(bar, wire)]

    def cell_current(self, bar: str, row, col) -> float:
        return float(self.currents[bar][row, col])

    def cell_drop(self, bar: str, row, col) -> float:
        return float(self.drops[bar][row, col])


class _Nodes:
    def __init__(self, net: Network):
        self.parent = {k: k for k in net.wire_keys()}
        for link in net.links:
            if link.enabled:
                for a, b in link.mapping:
                    self.union((link.src, a), (link.dst, b))
        roots = sorted({self.find(k) for k in self.parent})
        self.index = {r: n for n, r in enumerate(roots)}

    def find(self, k):
        while self.parent[k] != k:
            self.parent[k] = self.parent[self.parent[k]]
            k = self.parent[k]
        return k

    def union(self, a, b):
        ra, rb = self.find(a), self.find(b)
        if ra != rb:
            self.parent[max(ra, rb)] = min(ra, rb)

    def of(self, k) -> int:
        return self.index[self.find(k)]


def solve_cycle(target: Crossbar | Network, drives: Mapping, settings: SolverSettings | None = None) -> CycleSolution:
    settings = settings or SolverSettings()
    net = target if isinstance(target, Network) else Network([target])
    nodes = _Nodes(net)
    n = len(nodes.index)

    drive_of: dict[tuple, WireDrive] = {}
    for wire, d in drives.items():
        k = net.key(wire)
        if k not in nodes.parent:
            raise DanglingWire(f"drive names absent wire {k[0]}.{k[1]}")
        drive_of[k] = d
    missing = [k for k in nodes.parent if k not in drive_of]
    if missing:
        raise ValueError(f"wires without a drive mode: {missing[:4]}{'...' if len(missing) > 4 else ''}")

    fixed = np.full(n, np.nan)
    g_pull = np.zeros(n)
    i_pull = np.zeros(n)
    for k, d in drive_of.items():
        node = nodes.of(k)
        if d.mode == FIXED:
            if not np.isnan(fixed[node]) and fixed[node] != d.level:
                raise ValueError(f"conflicting fixed levels on merged node containing {k}")
            fixed[node] = d.level
        elif d.mode == PULLED:
            bar = net.bars[k[0]]
            check_reference_resistor(bar.params, d.r_g)
            g_pull[node] += 1.0 / d.r_g
            i_pull[node] += d.level / d.r_g
        elif d.mode != FLOAT:
            raise ValueError(f"unknown drive mode {d.mode!r}")
    if np.all(np.isnan(fixed)):
        raise ValueError("at least one wire must be driven to a fixed level")

    # flatten cells of every array into branch lists
    anode, cathode, g_fwd, g_rev, owners = [], [], [], [], []
    for name, bar in net.bars.items():
        ii, jj = np.nonzero(bar.present)
        rn = [nodes.of((name, bar.row_names[i])) for i in ii]
        cn = [nodes.of((name, bar.col_names[j])) for j in jj]
        on_row = bar.anode_on_row[ii, jj]
        anode.extend(np.where(on_row, rn, cn))
        cathode.extend(np.where(on_row, cn, rn))
        p = bar.params
        g_fwd.extend(p.g_off * (p.r_off / p.r_on) ** bar.w[ii, jj])
        g_rev.extend([p.g_off] * len(ii))
        owners.append((name, ii, jj))
    anode = np.asarray(anode, dtype=int)
    cathode = np.asarray(cathode, dtype=int)
    g_fwd = np.asarray(g_fwd, dtype=float)
    g_rev = np.asarray(g_rev, dtype=float)

    is_fixed = ~np.isnan(fixed)
    unknown = np.nonzero(~is_fixed)[0]
    pos = np.full(n, -1)
    pos[unknown] = np.arange(unknown.size)

    def linear_solve(g_branch):
        V = np.where(is_fixed, fixed, 0.0)
        if unknown.size == 0:
            return V
        m = unknown.size
        G = np.zeros((m, m))
        rhs = np.zeros(m)
        G[np.arange(m), np.arange(m)] += g_pull[unknown] + GMIN
        rhs += i_pull[unknown]
        for a, c, g in zip(anode, cathode, g_branch):
            pa, pc = pos[a], pos[c]
            if pa >= 0:
                G[pa, pa] += g
                if pc >= 0:
                    G[pa, pc] -= g
                else:
                    rhs[pa] += g * fixed[c]
            if pc >= 0:
                G[pc, pc] += g
                if pa >= 0:
                    G[pc, pa] -= g
                else:
                    rhs[pc] += g * fixed[a]
        V[unknown] = np.linalg.solve(G, rhs)
        return V

    # start all-forward; re-pick branches from a damped iterate until the
    # linear solution agrees with the branches it was built from
    forward = np.ones(anode.size, dtype=bool)
    V = linear_solve(g_fwd)
    V_damped = V
    iterations = 1
    while not np.array_equal((V[anode] - V[cathode]) >= 0, forward):
        if iterations >= settings.max_iterations:
            raise NonConvergence(
                f"branch iteration did not settle in {settings.max_iterations} iterations; check the drive configuration"
            )
        V_damped = V_damped + settings.damping * (V - V_damped)
        forward = (V_damped[anode] - V_damped[cathode]) >= 0
        V = linear_solve(np.where(forward, g_fwd, g_rev))
        iterations += 1
        if np.array_equal((V[anode] - V[cathode]) >= 0, forward):
            break
        if float(np.max(np.abs(V - V_damped))) < settings.tolerance_v:
            # damped iterate has settled next to a branch kink: jump to the picks of V
            V_damped = V

    drops = V[anode] - V[cathode]
    g_used = np.where(drops >= 0, g_fwd, g_rev)
    cur = g_used * drops

    # KCL residual at undriven nodes
    inj = np.zeros(n)
    np.add.at(inj, anode, -cur)
    np.add.at(inj, cathode, cur)
    inj += i_pull - g_pull * V - GMIN * V * (~is_fixed)
    residual = float(np.max(np.abs(inj[unknown]))) if unknown.size else 0.0

    sol = CycleSolution(voltages={k: float(V[nodes.of(k)]) for k in nodes.parent}, iterations=iterations, residual=residual)
    start = 0
    for name, ii, jj in owners:
        bar = net.bars[name]
        dmat = np.zeros(bar.w.shape)
        cmat = np.zeros(bar.w.shape)
        cnt = ii.size
        dmat[ii, jj] = drops[start : start + cnt]
        cmat[ii, jj] = cur[start : start + cnt]
        sol.drops[name] = dmat
        sol.currents[name] = cmat
        start += cnt

    for link in net.links:
        for a, b in link.mapping:
            key = (link.src, a, link.dst, b)
            if not link.enabled:
                sol.link_currents[key] = 0.0
                continue
            src_fixed = drive_of[(link.src, a)].mode == FIXED
            dst_fixed = drive_of[(link.dst, b)].mode == FIXED
            if src_fixed and dst_fixed:
                sol.link_currents[key] = 0.0
            elif dst_fixed:
                sol.link_currents[key] = -_side_outflow(net, sol, drive_of, link.src, a)
            else:
                sol.link_currents[key] = _side_outflow(net, sol, drive_of, link.dst, b)
    return sol


def _side_outflow(net: Network, sol: CycleSolution, drive_of, bar_name: str, wire: str) -> float:
    """Current leaving wire ``wire`` of one array through its own cells and pull resistor."""
    bar = net.bars[bar_name]
    cur = sol.currents[bar_name]
    total = 0.0
    if wire in bar.row_names:
        i = bar.row_names.index(wire)
        sign = np.where(bar.anode_on_row[i, :], 1.0, -1.0)
        total += float(np.sum(sign * cur[i, :] * bar.present[i, :]))
    else:
        j = bar.col_names.index(wire)
        sign = np.where(bar.anode_on_row[:, j], -1.0, 1.0)
        total += float(np.sum(sign * cur[:, j] * bar.present[:, j]))
    d = drive_of[(bar_name, wire)]
    if d.mode == PULLED:
        total += (sol.voltages[(bar_name, wire)] - d.level) / d.r_g
    return total


def apply_cycle(target: Crossbar | Network, solution: CycleSolution, dt: float):
    """Advance every cell over ``dt`` at its solved drop; returns an updated copy."""
    if isinstance(target, Network):
        out = target.copy()
        for name, bar in out.bars.items():
            _advance(bar, solution.drops[name], dt)
        return out
    out = target.copy()
    _advance(out, solution.drops[target.name], dt)
    return out


def _advance(bar: Crossbar, drops: np.ndarray, dt: float) -> None:
    p = bar.params
    for i, j in zip(*np.nonzero(bar.present)):
        bar.w[i, j] = advance_w(p, bar.w[i, j], drops[i, j], dt)


def cycle_energy(target: Crossbar | Network, solution: CycleSolution, dt: float) -> float:
    """Joules dissipated in the devices over one cycle (drop held, state moving)."""
    bars = target.bars.values() if isinstance(target, Network) else [target]
    total = 0.0
    for bar in bars:
        drops = solution.drops[bar.name]
        for i, j in zip(*np.nonzero(bar.present)):
            total += step_energy(bar.params, float(bar.w[i, j]), float(drops[i, j]), dt)
    return total


def check_levels(drives: Mapping, permitted: Iterable[float], tol: float = 1e-12) -> None:
    allowed = list(permitted)
    for wire, d in drives.items():
        if d.mode == FIXED and not any(abs(d.level - a) <= tol for a in allowed):
            raise ValueError(f"wire {wire} driven at {d.level:g} V, outside permitted levels {allowed}")
