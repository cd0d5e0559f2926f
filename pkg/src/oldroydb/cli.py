"""Command-line entry point.

Subcommands:

    simulate CONFIG.json          run a simulation; write the ledger (CSV)
                                  and initial/final snapshots
    norms FIELD [--hybrid | --r R --p P] --s S
                                  print a JSON norm report for a snapshot
    verify SUITE [--seed N]       run a named property suite; exit 0/1
    bench-estimates NAME [...]    fitted estimate constants per resolution
    stability CONFIG.json --delta D
                                  twin-run stability report

All output is line-delimited JSON.  The environment variable
``OLDROYD_OUT_DIR`` overrides the output directory.  Exit codes: 0 success,
1 failed verification, 2 configuration or I/O error, 3 solver divergence.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path

import numpy as np

EXIT_OK = 0
EXIT_VERIFY_FAILED = 1
EXIT_CONFIG_ERROR = 2
EXIT_DIVERGED = 3


def _json_default(obj):
    if isinstance(obj, (np.floating, np.integer)):
        return obj.item()
    if isinstance(obj, np.bool_):
        return bool(obj)
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    raise TypeError(f"not JSON serializable: {type(obj)}")


def _emit(record: dict) -> None:
    sys.stdout.write(json.dumps(record, default=_json_default) + "\n")
    sys.stdout.flush()


def _out_dir(configured: str | None) -> Path:
    override = os.environ.get("OLDROYD_OUT_DIR")
    path = Path(override or configured or ".")
    path.mkdir(parents=True, exist_ok=True)
    return path


def _load_config(path: str):
    from .solver import ConfigError, SolverConfig

    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    return SolverConfig.from_json(text)


def cmd_simulate(args) -> int:
    from .snapshots import write_field
    from .solver import DivergenceError, simulate

    config = _load_config(args.config)
    out = _out_dir(config.out_dir)
    try:
        result = simulate(config)
    except DivergenceError as exc:
        ledger = getattr(exc, "ledger", None)
        if ledger is not None:
            ledger.write_csv(out / "ledger.csv")
        _emit({"event": "diverged", "step": exc.step_index, "t": exc.t})
        return EXIT_DIVERGED
    ledger_path = out / "ledger.csv"
    result.ledger.write_csv(ledger_path)
    write_field(out / "initial_u.field", result.initial.u)
    write_field(out / "initial_tau.field", result.initial.tau)
    write_field(out / "final_u.field", result.final.u)
    write_field(out / "final_tau.field", result.final.tau)
    _emit({
        "event": "simulated",
        "t_end": result.final.t,
        "steps": result.n_steps,
        "rows": len(result.ledger.rows),
        "ledger": str(ledger_path),
        "E_final": result.ledger.rows[-1]["E"],
    })
    return EXIT_OK


def cmd_norms(args) -> int:
    from .littlewood_paley import norm_report
    from .snapshots import read_field

    field = read_field(args.field)
    if args.hybrid:
        rec = norm_report(field, "hybrid", s=args.s)
    else:
        r = np.inf if args.r in ("inf", "oo") else float(args.r)
        rec = norm_report(field, "besov", s=args.s, p=args.p, r=r)
    _emit(rec)
    return EXIT_OK


def cmd_verify(args) -> int:
    from .verification import run_suite

    report = run_suite(args.suite, seed=args.seed)
    _emit(report)
    return EXIT_OK if report["passed"] else EXIT_VERIFY_FAILED


def cmd_bench_estimates(args) -> int:
    from .verification import ESTIMATE_NAMES, estimate_bench

    names = ESTIMATE_NAMES if args.estimate == "all" else (args.estimate,)
    report = estimate_bench(names=names, n_list=tuple(args.n),
                            samples=args.samples, seed=args.seed)
    out = _out_dir(None)
    path = out / "estimates.json"
    path.write_text(json.dumps(report, indent=2, default=_json_default),
                    encoding="utf-8")
    _emit(report)
    return EXIT_OK if report["passed"] else EXIT_VERIFY_FAILED


def cmd_stability(args) -> int:
    from .monitor import stability_experiment
    from .solver import DivergenceError

    config = _load_config(args.config)
    try:
        report = stability_experiment(config, args.delta)
    except DivergenceError as exc:
        _emit({"event": "diverged", "step": exc.step_index, "t": exc.t})
        return EXIT_DIVERGED
    out = _out_dir(config.out_dir)
    (out / "stability.json").write_text(
        json.dumps(report, indent=2, default=_json_default), encoding="utf-8")
    _emit(report)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="oldroydb",
        description="Oldroyd-B torus simulator with Littlewood-Paley diagnostics",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate", help="run a configured simulation")
    p.add_argument("config", help="path to a JSON configuration")
    p.set_defaults(fn=cmd_simulate)

    p = sub.add_parser("norms", help="norm report for a field snapshot")
    p.add_argument("field", help="path to a field-v1 snapshot")
    p.add_argument("--s", type=float, required=True, help="regularity index")
    p.add_argument("--p", type=float, default=2.0, help="integrability (2 only)")
    p.add_argument("--r", default="1", help="summation exponent: 1, 2 or inf")
    p.add_argument("--hybrid", action="store_true",
                   help="hybrid low/high norm instead of a Besov norm")
    p.set_defaults(fn=cmd_norms)

    p = sub.add_parser("verify", help="run a named property suite")
    from .verification import SUITES

    p.add_argument("suite", choices=sorted(SUITES))
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(fn=cmd_verify)

    p = sub.add_parser("bench-estimates", help="fit estimate constants per resolution")
    from .verification import ESTIMATE_NAMES

    p.add_argument("estimate", choices=ESTIMATE_NAMES + ("all",))
    p.add_argument("--samples", type=int, default=100)
    p.add_argument("--n", type=int, action="append", default=None,
                   help="resolution; repeat for several (default 64 and 128)")
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(fn=cmd_bench_estimates)

    p = sub.add_parser("stability", help="twin-run stability experiment")
    p.add_argument("config", help="path to a JSON configuration")
    p.add_argument("--delta", type=float, required=True)
    p.set_defaults(fn=cmd_stability)

    return parser


def main(argv=None) -> int:
    from .fields import FieldError
    from .grid import GridError
    from .littlewood_paley import UnsupportedIndexError
    from .snapshots import SnapshotError
    from .solver import ConfigError

    parser = build_parser()
    args = parser.parse_args(argv)
    if getattr(args, "n", "sentinel") is None:
        args.n = [64, 128]
    try:
        return args.fn(args)
    except (ConfigError, SnapshotError, GridError, FieldError,
            UnsupportedIndexError, OSError) as exc:
        _emit({"event": "error", "message": str(exc)})
        return EXIT_CONFIG_ERROR


if __name__ == "__main__":
    sys.exit(main())
