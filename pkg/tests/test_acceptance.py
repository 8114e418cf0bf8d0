"""Acceptance criteria 1-7, one verdict line each (see the terminal summary)."""

import hashlib
import time

import numpy as np
import pytest

from memsha3 import keccak, metrics
from memsha3.accelerator import (
    Accelerator,
    Banks,
    CycleTrace,
    analog_first_round,
    exec_chi,
    exec_iota,
    exec_pi,
    exec_rho,
    exec_theta,
    init_state,
)
from memsha3.accelerator.schedule import CHI, COMPLEMENT, IOTA, MAP, MSG_INIT, PI, RHO, STATE_INIT, THETA
from memsha3.config import default_config
from memsha3.device import advance_w, iv_sweep, resistance, sine_wave, step_state, MemristorState
from memsha3.gates import DRIFT_LIMIT, KINDS, verify_gate
from memsha3.keccak import KeccakState
from memsha3.vectors import load_rsp

# pinned tolerances
RUNTIME_LIMIT_S = 60.0
CONTROL_KB_TOL = 0.01
THROUGHPUT_REL_TOL = 0.01
ENERGY_BAND_PJ = (64.181 / 10, 64.181 * 10)
N_RANDOM_STATES = 1000


def test_criterion_1_digests(criterion, vectors_dir):
    acc = Accelerator()
    start = time.perf_counter()
    checked = failed = 0
    for name in ("SHA3_256ShortMsg.rsp", "SHA3_512ShortMsg.rsp"):
        records, issues = load_rsp(vectors_dir / name)
        failed += len(issues)
        for r in records:
            digest, _ = acc.hash_message(r.message, r.variant)
            ok = digest == r.digest == keccak.sha3_digest(r.message, r.variant)
            checked += 1
            failed += not ok
    elapsed = time.perf_counter() - start
    rng = np.random.default_rng(1)
    for _ in range(20):
        msg = rng.integers(0, 256, int(rng.integers(0, 700)), dtype=np.uint8).tobytes()
        failed += acc.hash_message(msg, "SHA3-256")[0] != hashlib.sha3_256(msg).digest()
        failed += acc.hash_message(msg, "SHA3-512")[0] != hashlib.sha3_512(msg).digest()
    ok = checked == 137 + 73 and failed == 0 and elapsed < RUNTIME_LIMIT_S
    criterion(1, ok, f"{checked} CAVP records + 40 random messages, {failed} failures, CAVP run {elapsed:.1f}s (< {RUNTIME_LIMIT_S:.0f}s)")


def test_criterion_2_cycles(criterion):
    _, report = Accelerator().hash_message(b"abc", "SHA3-256")
    t = report.trace
    expected_round = {THETA: 175, RHO: 6, STATE_INIT: 2, PI: 25, COMPLEMENT: 5, CHI: 45, IOTA: 5}
    rounds_ok = all(t.by_op(round=r) == expected_round and t.round_cycles(r) == 263 for r in range(1, 25))
    prologue = t.by_op(round=0)
    rho_split = t.by_step(RHO, 1)
    ok = (
        rounds_ok
        and prologue == {MSG_INIT: 2, MAP: 12}
        and rho_split == {"rho-init": 1, "rotate": 5}
        and report.total_cycles == 6326
    )
    criterion(
        2,
        ok,
        f"round {t.round_cycles(1)} cycles (theta 175, pi 25, chi 45+5, iota 5, rho 5+1), "
        f"mapping {prologue.get(MAP)}+{prologue.get(MSG_INIT)}, block {report.total_cycles}",
    )


def test_criterion_3_operation_oracles(criterion):
    rng = np.random.default_rng(3)
    bad = 0
    for n in range(N_RANDOM_STATES):
        s = KeccakState.random(rng)
        bits = s.bits()
        bad += KeccakState.from_bits(1 - exec_theta(Banks.holding(bits)).state.NA) != keccak.theta(s)
        bad += KeccakState.from_bits(exec_rho(Banks.holding(bits), source="A").rho.R) != keccak.rho(s)
        b = Banks.holding(bits)
        b.rho.R[:] = bits
        init_state(b)
        bad += KeccakState.from_bits(exec_pi(b).state.NA) != keccak.pi(s)
        bad += KeccakState.from_bits(exec_chi(Banks.holding(bits)).state.A) != keccak.chi(s)
        i = n % 24 + 1
        bad += KeccakState.from_bits(exec_iota(Banks.holding(bits), i).state.A) != keccak.iota(s, i)
    rows = np.zeros((5, 5, 64), dtype=np.uint8)
    for z in range(64):
        for x in range(5):
            rows[x, :, z] = ((z % 32) >> x) & 1
    out = exec_chi(Banks.holding(rows)).state.A
    row_bad = 0
    for p in range(32):
        a = [(p >> x) & 1 for x in range(5)]
        expect = [a[x] ^ ((1 - a[(x + 1) % 5]) & a[(x + 2) % 5]) for x in range(5)]
        row_bad += any(list(out[:, y, p]) != expect for y in range(5))
    ok = bad == 0 and row_bad == 0
    criterion(3, ok, f"{N_RANDOM_STATES} random states x 5 operations: {bad} mismatches; 32 chi rows: {row_bad} mismatches")


def test_criterion_4_gates(criterion):
    cfg = default_config()
    results = [verify_gate(kind, cfg, samples=256, seed=4) for kind in KINDS]
    drift = max(r["max_w_drift"] for r in results)
    sneak = max(r["max_reverse_current"] for r in results)
    bound = cfg.voltages.v_plus / cfg.device.r_off
    mism = sum(len(r["mismatches"]) for r in results)
    ok = all(r["passed"] for r in results) and drift < DRIFT_LIMIT and sneak <= bound * (1 + 1e-9)
    criterion(
        4,
        ok,
        f"{len(KINDS)} gate kinds, {sum(r['domain'] for r in results)} cases, {mism} mismatches, "
        f"max drift {drift:.2g} (< {DRIFT_LIMIT}), max reverse current {sneak:.3g} A (<= {bound:.3g} A)",
    )


def test_criterion_5_accounting(criterion):
    _, report = Accelerator().hash_message(b"abc")
    kb = metrics.control_storage(report.trace)
    mapping = CycleTrace(default_config().control_bits_per_cycle)
    mapping.emit(MAP, "map", 13)
    area = metrics.memristor_area()
    mbps = metrics.throughput(1088, report.total_cycles, 1e9) / 1e6
    ok = (
        abs(kb - 140.754) <= CONTROL_KB_TOL
        and metrics.control_bits(mapping) == 2314
        and (round(area.crossbar_kb, 9), round(area.gates_routing_kb, 9), round(area.total_kb, 9)) == (1.192, 0.304, 1.496)
        and round(mbps, 2) == 171.99
        and abs(mbps / 172.7 - 1) <= THROUGHPUT_REL_TOL
    )
    criterion(
        5,
        ok,
        f"control {kb:.4f} KB vs 140.754, 13-cycle mapping {metrics.control_bits(mapping)} bits, "
        f"area {area.crossbar_kb:.3f}/{area.gates_routing_kb:.3f}/{area.total_kb:.3f} KB, "
        f"throughput {mbps:.2f} Mbps vs 172.7 ({(mbps / 172.7 - 1) * 100:+.2f}%)",
    )


def test_criterion_6_energy(criterion):
    trace, probe = analog_first_round(b"abc", "SHA3-256", default_config())
    led = metrics.energy_account(trace)
    ops = led.by_operation()
    lo, hi = ENERGY_BAND_PJ
    ok = (
        all(v > 0 for v in ops.values())
        and led.ordering_ok()
        and lo <= led.total <= hi
        and not probe.mismatches
    )
    criterion(
        6,
        ok,
        f"first round {led.total:.2f} pJ (band {lo:.2f}..{hi:.1f}, reference 64.181), "
        f"theta {ops['theta']:.2f} >= chi {ops['chi']:.2f} >= mapping {ops['mapping']:.2f} >= rest "
        f"{max(ops['initialization'], ops['rho'], ops['pi'], ops['iota']):.2f}; "
        f"init fraction {led.init_fraction:.1%} (reported against 62%, not gated)",
    )


def test_criterion_7_device(criterion):
    p = default_config().device
    rng = np.random.default_rng(7)
    w = rng.random(500)
    v = rng.uniform(p.v_open, p.v_closed, 500)[1:-1]
    dead = all(advance_w(p, wi, vi, 1e-9) == wi for wi, vi in zip(w, v))
    clamp = all(0.0 <= advance_w(p, wi, vi, 1e-8) <= 1.0 for wi, vi in zip(w, rng.uniform(-3, 3, 500)))
    rect = all(resistance(p, wi, -vi) == p.r_off for wi, vi in zip(w, rng.uniform(1e-3, 3, 500)))
    full = step_state(p, MemristorState(0.0), 1.2, 1e-9).w == pytest.approx(1.0)
    wave, dt = sine_wave(1.2, 100e6, 2, 400)
    table = iv_sweep(p, wave, dt)
    rev = table[table[:, 0] < 0]
    worst = float(np.max(np.abs(rev[:, 1]) / (np.abs(rev[:, 0]) / p.r_off)))
    ok = dead and clamp and rect and full and worst <= 1 + 1e-12
    criterion(
        7,
        ok,
        f"dead zone {dead}, clamping {clamp}, rectification {rect}, 1 ns full SET {full}, "
        f"reverse current / (v/R_OFF) max {worst:.6f}",
    )
