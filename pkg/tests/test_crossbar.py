import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from memsha3.crossbar import (
    Crossbar,
    DanglingWire,
    WireDrive,
    apply_cycle,
    check_levels,
    cycle_energy,
    gate_link,
    solve_cycle,
)
from memsha3.device import resistance


def divider(cfg, w, v=0.6, r_g=None):
    r_g = r_g or cfg.r_g_read
    bar = Crossbar("d", ["X"], ["c"], cfg.device).place("X", "c", w)
    sol = solve_cycle(bar, {"X": WireDrive.fixed(v), "c": WireDrive.pulled(r_g, 0.0)}, cfg.solver)
    return bar, sol


@given(w=st.sampled_from([0.0, 0.25, 0.5, 1.0]))
def test_divider_matches_closed_form(w):
    from memsha3.config import default_config

    cfg = default_config()
    _, sol = divider(cfg, w)
    # forward-biased cell: the resistance is fixed by w, so the divider is linear
    r = resistance(cfg.device, w, 1.0)
    expected = 0.6 * cfg.r_g_read / (cfg.r_g_read + r)
    assert sol.v("c") == pytest.approx(expected, rel=1e-6, abs=1e-9)


def test_divider_current_and_energy(cfg):
    bar, sol = divider(cfg, 1.0)
    i = sol.cell_current("d", 0, 0)
    drop = sol.cell_drop("d", 0, 0)
    assert i == pytest.approx(drop / cfg.device.r_on, rel=1e-6)
    e = cycle_energy(bar, sol, cfg.dt)
    assert e == pytest.approx(drop * drop / cfg.device.r_on * cfg.dt, rel=1e-6)


def test_reverse_cell_blocks(cfg):
    bar = Crossbar("r", ["X"], ["c"], cfg.device).place("X", "c", 1.0)
    sol = solve_cycle(bar, {"X": WireDrive.fixed(0.0), "c": WireDrive.fixed(0.6)}, cfg.solver)
    assert abs(sol.cell_current("r", 0, 0)) <= 0.6 / cfg.device.r_off * (1 + 1e-9)


def test_kcl_on_a_loaded_row(cfg, rng):
    bar = Crossbar("k", ["X"], [f"c{j}" for j in range(4)], cfg.device)
    for j in range(4):
        bar.place("X", f"c{j}", float(rng.random()))
    drives = {"X": WireDrive.pulled(cfg.r_g_gate, 0.6)}
    drives.update({f"c{j}": WireDrive.fixed(0.0) for j in range(4)})
    sol = solve_cycle(bar, drives, cfg.solver)
    vx = sol.v("X")
    into = (0.6 - vx) / cfg.r_g_gate
    out = sum(sol.cell_current("k", 0, j) for j in range(4))
    assert into == pytest.approx(out, rel=1e-5)


def test_apply_cycle_sets_selected_cell_only(cfg):
    bar = Crossbar("s", ["r0", "r1"], ["c0"], cfg.device).place("r0", "c0", 0.0).place("r1", "c0", 0.0)
    drives = {"r0": WireDrive.fixed(1.2), "r1": WireDrive.fixed(0.6), "c0": WireDrive.fixed(0.0)}
    sol = solve_cycle(bar, drives, cfg.solver)
    after = apply_cycle(bar, sol, cfg.dt)
    assert after.state("r0", "c0") == pytest.approx(1.0)
    assert after.state("r1", "c0") == 0.0
    assert bar.state("r0", "c0") == 0.0  # input left untouched


def test_floating_wire_follows_its_neighbours(cfg):
    bar = Crossbar("f", ["X", "Y"], ["c"], cfg.device).place("X", "c", 1.0).place("Y", "c", 1.0)
    sol = solve_cycle(bar, {"X": WireDrive.fixed(0.6), "Y": WireDrive.fixed(0.0), "c": WireDrive.floating()}, cfg.solver)
    assert 0.0 < sol.v("c") < 0.6


def test_links_merge_wires(cfg):
    a = Crossbar("a", ["X"], ["c"], cfg.device).place("X", "c", 1.0)
    b = Crossbar("b", ["Y"], ["d"], cfg.device).place("Y", "d", 1.0)
    drives = {
        ("a", "X"): WireDrive.fixed(0.6),
        ("a", "c"): WireDrive.floating(),
        ("b", "Y"): WireDrive.floating(),
        ("b", "d"): WireDrive.pulled(cfg.r_g_read),
    }
    net = gate_link(a, b, [("c", "Y")])
    sol = solve_cycle(net, drives, cfg.solver)
    assert sol.v(("a", "c")) == pytest.approx(sol.v(("b", "Y")))
    off = gate_link(a, b, [("c", "Y")], enabled=False)
    sol = solve_cycle(off, drives, cfg.solver)
    assert sol.v(("b", "d")) == pytest.approx(0.0, abs=1e-9)


def test_unknown_wire_rejected(cfg):
    bar = Crossbar("u", ["X"], ["c"], cfg.device)
    with pytest.raises((DanglingWire, KeyError)):
        solve_cycle(bar, {"Z": WireDrive.fixed(0.0)}, cfg.solver)


def test_layout_validation(cfg):
    with pytest.raises(ValueError):
        Crossbar("dup", ["a"], ["a"], cfg.device)
    bar = Crossbar("v", 2, 2, cfg.device)
    with pytest.raises(ValueError):
        bar.place(0, 0, 1.5)
    with pytest.raises(ValueError):
        check_levels({"X": WireDrive.fixed(0.3)}, [0.0, 0.6, 1.2])
    check_levels({"X": WireDrive.fixed(1.2), "Y": WireDrive.floating()}, [0.0, 0.6, 1.2])


def test_all_zero_drive_dissipates_nothing(cfg):
    bar = Crossbar("z", 3, 3, cfg.device)
    for i in range(3):
        for j in range(3):
            bar.place(i, j, 1.0)
    sol = solve_cycle(bar, {w: WireDrive.fixed(0.0) for w in bar.wires}, cfg.solver)
    assert cycle_energy(bar, sol, cfg.dt) == 0.0
    assert np.allclose(apply_cycle(bar, sol, cfg.dt).w, bar.w)


@given(
    w=st.lists(st.floats(0, 1), min_size=9, max_size=9),
    modes=st.lists(st.sampled_from(["0", "v+", "2v+", "float", "pull"]), min_size=6, max_size=6),
    anode_row=st.lists(st.booleans(), min_size=9, max_size=9),
)
def test_solutions_satisfy_kcl(w, modes, anode_row):
    from memsha3.config import default_config

    cfg = default_config()
    if all(m in ("float", "pull") for m in modes):
        modes[0] = "0"
    bar = Crossbar("k", 3, 3, cfg.device)
    for n in range(9):
        bar.place(n // 3, n % 3, w[n], anode="row" if anode_row[n] else "col")
    lookup = {
        "0": WireDrive.fixed(0.0),
        "v+": WireDrive.fixed(0.6),
        "2v+": WireDrive.fixed(1.2),
        "float": WireDrive.floating(),
        "pull": WireDrive.pulled(cfg.r_g_read, 0.6),
    }
    sol = solve_cycle(bar, {wire: lookup[m] for wire, m in zip(bar.wires, modes)}, cfg.solver)
    assert sol.residual < 1e-13  # amperes; cell currents are in the nA..uA range
    # forward cells conduct with G(w), reverse ones with 1/r_off
    for n in range(9):
        i, j = n // 3, n % 3
        drop = sol.cell_drop("k", i, j)
        g = 1 / resistance(cfg.device, w[n], drop)
        assert sol.cell_current("k", i, j) == pytest.approx(g * drop, rel=1e-9, abs=1e-18)
