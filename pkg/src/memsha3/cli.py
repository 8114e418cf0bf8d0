"""Command-line entry point.

Exit codes: 0 when every requested check passed, 1 when a check failed,
2 for configuration or usage errors (nothing is simulated in that case).
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

import numpy as np

from . import __version__, keccak, metrics
from .accelerator import Accelerator
from .config import BACKENDS, VARIANTS, ConfigError, SimConfig, load_config
from .device import iv_sweep, sine_wave, square_wave
from .gates import KINDS, verify_gate
from .vectors import load_rsp

log = logging.getLogger("memsha3")

EXIT_OK, EXIT_FAIL, EXIT_CONFIG = 0, 1, 2


# ---------------------------------------------------------------- helpers


def _config(args) -> SimConfig:
    cfg = load_config(args.config)
    changes = {}
    if args.variant:
        changes["variant"] = args.variant
    if args.backend:
        changes["backend"] = args.backend
    if changes:
        cfg = cfg.replace(**changes)
    if args.device_preset:
        cfg = cfg.with_device_preset(args.device_preset)
    return cfg.validate()


def _write_report(path: str | None, payload: dict) -> None:
    if not path:
        return
    text = json.dumps(payload, indent=2, sort_keys=True, default=_jsonable) + "\n"
    Path(path).write_text(text)


def _jsonable(obj):
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (np.floating,)):
        return float(obj)
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    raise TypeError(f"cannot serialize {type(obj).__name__}")


def _read_input(args) -> bytes:
    if args.string is not None:
        data = args.string.encode()
    elif args.input in (None, "-"):
        data = sys.stdin.buffer.read()
    else:
        data = Path(args.input).read_bytes()
    if args.hex:
        data = bytes.fromhex(data.decode().strip())
    return data


# ---------------------------------------------------------------- commands


def cmd_hash(args) -> int:
    cfg = _config(args)
    message = _read_input(args)
    acc = Accelerator(cfg, debug_rounds=args.debug_rounds)
    digest, report = acc.hash_message(message, cfg.variant)
    reference = keccak.sha3_digest(message, cfg.variant)
    ok = digest == reference
    print(f"{digest.hex()}  {cfg.variant}")
    summary = report.summary()
    print(
        f"blocks={report.blocks} cycles={report.total_cycles} "
        f"cycles/block={report.total_cycles // report.blocks} reference={'match' if ok else 'MISMATCH'}",
        file=sys.stderr,
    )
    if report.energy is not None:
        print(metrics.breakdown_table(report.trace, report.energy), file=sys.stderr, end="")
    payload = {
        "command": "hash",
        "config": cfg.to_dict(),
        "summary": summary,
        "reference_digest": reference.hex(),
        "match": ok,
        "area": metrics.memristor_area(cfg=cfg).as_dict(),
        "comparison": metrics.comparison_rows(report),
    }
    if args.debug_rounds:
        payload["round_snapshots"] = [
            {"block": b, "round": i, "state": s.to_bytes().hex()} for b, i, s in report.round_snapshots
        ]
    _write_report(args.report, payload)
    if args.trace_csv:
        Path(args.trace_csv).write_text(report.trace.to_csv())
    return EXIT_OK if ok else EXIT_FAIL


def _check_record(job):
    cfg, rec = job
    try:
        digest, report = Accelerator(cfg).hash_message(rec.message, rec.variant)
    except ValueError as e:  # e.g. a digest length the simulator does not implement
        return rec.line, None, None, str(e)
    reference = keccak.sha3_digest(rec.message, rec.variant)
    return rec.line, digest == rec.digest and reference == rec.digest, report.total_cycles, None


def cmd_verify(args) -> int:
    cfg = _config(args).replace(backend="logical")
    records, issues = load_rsp(args.vectors)
    if args.limit is not None:
        records = records[: args.limit]
    for issue in issues:
        print(f"malformed record at {issue}", file=sys.stderr)
    if not records and not issues:
        log.warning("%s holds no records", args.vectors)
        print(f"warning: {args.vectors} holds no records", file=sys.stderr)
    jobs = [(cfg, r) for r in records]
    if args.jobs > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(args.jobs) as pool:
            results = list(pool.map(_check_record, jobs, chunksize=4))
    else:
        results = [_check_record(j) for j in jobs]
    failed = []
    for (line, ok, _, err), rec in zip(results, records):
        if not ok:
            why = err or "digest mismatch"
            failed.append({"line": line, "variant": rec.variant, "length": len(rec.message), "reason": why})
            print(f"FAIL line {line}: {rec.variant} len={len(rec.message)} ({why})", file=sys.stderr)
    passed = len(records) - len(failed)
    print(f"{args.vectors}: {passed}/{len(records)} records passed, {len(failed)} failed, {len(issues)} malformed")
    _write_report(
        args.report,
        {
            "command": "verify",
            "vectors": str(args.vectors),
            "records": len(records),
            "passed": passed,
            "failed": failed,
            "malformed": [{"line": i.line, "reason": i.reason} for i in issues],
        },
    )
    return EXIT_OK if not failed and not issues else EXIT_FAIL


def cmd_validate_gates(args) -> int:
    cfg = _config(args)
    results = [verify_gate(kind, cfg, samples=args.samples, seed=args.seed) for kind in KINDS]
    for r in results:
        status = "pass" if r["passed"] else "FAIL"
        extra = " disturb-violation" if r["disturb_violation"] else ""
        print(
            f"{r['kind']:<20} {status}  domain={r['domain']:<4} mismatches={len(r['mismatches'])} "
            f"max_w_drift={r['max_w_drift']:.3g} max_reverse_current={r['max_reverse_current']:.3g} "
            f"(bound {r['reverse_current_bound']:.3g}){extra}"
        )
    _write_report(args.report, {"command": "validate-gates", "config": cfg.to_dict(), "gates": results})
    return EXIT_OK if all(r["passed"] for r in results) else EXIT_FAIL


def cmd_device_sweep(args) -> int:
    cfg = _config(args)
    if args.waveform == "sine":
        if args.frequency <= 0 or args.samples < 2 or args.periods <= 0:
            raise ConfigError("sine sweep needs a positive frequency, periods and at least 2 samples per period")
        wave, dt = sine_wave(args.amplitude, args.frequency, args.periods, args.samples)
    else:
        if args.pulse_width <= 0 or args.pulses < 1 or args.samples < 1:
            raise ConfigError("square sweep needs a positive pulse width and at least one pulse")
        wave, dt = square_wave(args.amplitude, args.pulse_width, args.pulses, args.samples)
    table = iv_sweep(cfg.device, wave, dt, args.w0)
    t = np.arange(len(table)) * dt
    lines = ["t,v,i,w"] + [f"{ti:.6e},{v:.6e},{i:.6e},{w:.6e}" for ti, (v, i, w) in zip(t, table)]
    text = "\n".join(lines) + "\n"
    if args.output:
        Path(args.output).write_text(text)
    else:
        sys.stdout.write(text)
    reverse = table[table[:, 0] < 0]
    bound = float(np.max(np.abs(reverse[:, 0])) / cfg.device.r_off) if len(reverse) else 0.0
    worst = float(np.max(np.abs(reverse[:, 1]))) if len(reverse) else 0.0
    _write_report(
        args.report,
        {
            "command": "device-sweep",
            "config": cfg.to_dict(),
            "samples": len(table),
            "w_min": float(table[:, 2].min()),
            "w_max": float(table[:, 2].max()),
            "max_reverse_current": worst,
            "reverse_current_bound": bound,
        },
    )
    return EXIT_OK


# ---------------------------------------------------------------- parser


def _add_common(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--config", help="YAML configuration file (defaults to the packaged one)")
    parser.add_argument("--variant", choices=VARIANTS)
    parser.add_argument("--backend", choices=BACKENDS)
    parser.add_argument("--device-preset", help="named device parameter set from the config, e.g. paper_literal")
    parser.add_argument("--report", help="write a JSON report to this path")
    parser.add_argument("--debug-rounds", action="store_true", help="keep round-boundary state snapshots")
    parser.add_argument("-v", "--verbose", action="store_true")


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="memsha3", description="Memristive SHA3 accelerator simulator")
    _add_common(p)
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = p.add_subparsers(dest="command", required=True)

    # the same flags after the subcommand; SUPPRESS keeps values given before it
    sub_common = argparse.ArgumentParser(add_help=False, argument_default=argparse.SUPPRESS)
    _add_common(sub_common)

    h = sub.add_parser("hash", parents=[sub_common], help="hash a message on the accelerator")
    h.add_argument("input", nargs="?", help="input file, or - for standard input (default)")
    h.add_argument("--string", help="hash this text instead of reading a file")
    h.add_argument("--hex", action="store_true", help="input is hex text")
    h.add_argument("--trace-csv", help="write the per-micro-op trace as CSV")
    h.set_defaults(func=cmd_hash)

    v = sub.add_parser("verify", parents=[sub_common], help="check NIST CAVP response files")
    v.add_argument("vectors", help="CAVP .rsp file")
    v.add_argument("--limit", type=int, help="only the first N records")
    v.add_argument("--jobs", type=int, default=1, help="worker processes")
    v.set_defaults(func=cmd_verify)

    g = sub.add_parser("validate-gates", parents=[sub_common], help="truth tables and disturb checks of every gate")
    g.add_argument("--samples", type=int, default=256, help="random samples for the multi-input XOR")
    g.add_argument("--seed", type=int, default=0)
    g.set_defaults(func=cmd_validate_gates)

    d = sub.add_parser("device-sweep", parents=[sub_common], help="i-v table of a single device")
    d.add_argument("--waveform", choices=("sine", "square"), default="sine")
    d.add_argument("--amplitude", type=float, default=1.2, help="V")
    d.add_argument("--frequency", type=float, default=100e6, help="Hz, sine only")
    d.add_argument("--periods", type=float, default=2.0, help="sine only")
    d.add_argument("--samples", type=int, default=400, help="samples per period or per pulse")
    d.add_argument("--pulse-width", type=float, default=1e-9, help="s, square only")
    d.add_argument("--pulses", type=int, default=4, help="square only")
    d.add_argument("--w0", type=float, default=0.0, help="initial state")
    d.add_argument("--output", help="CSV path (default: standard output)")
    d.set_defaults(func=cmd_device_sweep)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    try:
        return args.func(args)
    except ConfigError as e:
        print(f"configuration error: {e}", file=sys.stderr)
        return EXIT_CONFIG
    except (OSError, ValueError) as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
