import pytest
from hypothesis import given
from hypothesis import strategies as st

from memsha3 import metrics
from memsha3.accelerator import Accelerator, Banks, CycleTrace, analog_first_round
from memsha3.accelerator.schedule import MAP, THETA
from memsha3.config import default_config


@pytest.fixture(scope="module")
def report():
    return Accelerator().hash_message(b"abc")[1]


# ---------------------------------------------------------------- control storage


def test_control_storage_of_one_block(report):
    # 178 bits per cycle over 6326 cycles
    assert metrics.control_bits(report.trace) == 178 * 6326
    assert metrics.control_storage(report.trace) == pytest.approx(140.754, abs=0.01)


def test_thirteen_cycle_trace():
    t = CycleTrace(178)
    t.emit(MAP, "map", 13)
    assert metrics.control_bits(t) == 2314


def test_empty_trace_has_no_control_bits():
    assert metrics.control_storage(CycleTrace(178)) == 0.0


@given(cycles=st.lists(st.integers(0, 500), max_size=20))
def test_control_bits_add_up(cycles):
    t = CycleTrace(178)
    for c in cycles:
        t.emit(THETA, "x", c)
    assert metrics.control_bits(t) == 178 * sum(cycles)


# ---------------------------------------------------------------- area


def test_array_sizes():
    area = metrics.memristor_area(Banks(), default_config())
    assert area.crossbar_bits == 9536
    assert area.crossbar_kb == pytest.approx(1.192, abs=1e-12)
    assert area.gates_routing_kb == pytest.approx(0.304, abs=1e-12)
    assert area.total_kb == pytest.approx(1.496, abs=1e-12)
    assert area.bytes_of("A") == 200
    assert area.control_bits_per_cycle == 178


# ---------------------------------------------------------------- throughput


def test_throughput_of_the_schedule(report):
    bps = metrics.throughput(1088, report.total_cycles, 1e9)
    assert bps / 1e6 == pytest.approx(171.99, abs=0.005)
    assert bps / 1e9 == pytest.approx(0.1727, rel=0.01)


def test_throughput_formula():
    assert metrics.throughput(1088, 1088, 1.0) == 1.0
    assert metrics.throughput(1088, 10.5, 455e6) / 1e9 == pytest.approx(47.146, abs=1e-3)
    with pytest.raises(metrics.ZeroLatency):
        metrics.throughput(1088, 0, 1e9)


@given(bits=st.floats(1, 1e4), lat=st.floats(1, 1e5), f=st.floats(1e3, 1e10))
def test_implied_latency_inverts_throughput(bits, lat, f):
    assert metrics.implied_latency(bits, metrics.throughput(bits, lat, f), f) == pytest.approx(lat)


def test_published_throughput_implies_about_6300_cycles():
    assert metrics.implied_latency(1088, 0.1727e9, 1e9) == pytest.approx(6300, abs=1)


# ---------------------------------------------------------------- energy


def test_reference_ledger():
    led = metrics.energy_account("reference")
    assert led.total == pytest.approx(64.181, abs=1e-9)
    assert led.largest() == ("theta-xor", pytest.approx(46.002))
    assert led.ordering_ok()
    assert led.init_fraction == pytest.approx(0.62)
    assert set(led.by_operation()) == set(metrics.OPERATIONS)


def test_ledger_rejects_negative_entries():
    with pytest.raises(ValueError):
        metrics.EnergyLedger({"map": -1.0}, metrics.ANALOG)


def test_logical_trace_has_no_energy(report):
    with pytest.raises(metrics.MissingTrace):
        metrics.energy_account(report.trace)
    with pytest.raises(metrics.MissingTrace):
        metrics.energy_account(42)


@pytest.fixture(scope="module")
def analog_ledger():
    trace, _ = analog_first_round(b"abc")
    return trace, metrics.energy_account(trace)


def test_analog_ledger(analog_ledger):
    trace, led = analog_ledger
    assert led.backend == metrics.ANALOG
    assert all(v >= 0 for v in led.entries.values())
    assert led.total > 0
    assert led.ordering_ok()
    assert 0 < led.init_fraction < 1
    with pytest.raises(metrics.MissingTrace):
        metrics.energy_account(trace, round=2)


def test_tables(analog_ledger):
    trace, led = analog_ledger
    csv = led.to_csv().splitlines()
    assert csv[0] == "row,operation,energy_pj" and len(csv) == 12
    stages = metrics.stage_table(led).splitlines()
    assert [s.split(",")[0] for s in stages] == ["stage", "initialization", "mapping", "computations"]
    total = sum(float(s.split(",")[1]) for s in stages[1:])
    assert total == pytest.approx(led.total, rel=1e-5)
    rows = metrics.breakdown_table(trace, led).splitlines()
    cycles = {r.split(",")[0]: int(r.split(",")[1]) for r in rows[1:]}
    assert cycles == {"initialization": 2, "mapping": 12, "theta": 175, "rho": 6, "pi": 27, "chi": 50, "iota": 5}


# ---------------------------------------------------------------- comparison


def test_comparison_rows(report):
    rows = metrics.comparison_rows(report)
    names = [r["name"] for r in rows]
    assert names[-1] == "Simulated (SHA3-256)"
    sim = rows[-1]
    assert sim["latency_cycles"] == 6326
    assert sim["computing_kb"] == pytest.approx(1.496)
    assert sim["throughput_gbps"] == pytest.approx(0.17199, abs=1e-5)
    published = [r for r in rows if r["latency_cycles"] == 6326 and r is not sim]
    assert published and published[0]["throughput_gbps"] == pytest.approx(0.1727)
    table = metrics.comparison_table(report).splitlines()
    assert table[0].startswith("Implementation") and len(table) == len(rows) + 2
