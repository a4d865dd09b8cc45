"""Command line front end: run, validate, export-circuit, convergence."""
from __future__ import annotations

import argparse
import csv
import logging
import sys
from pathlib import Path

from .config import ConfigError, load_config
from .propagator import build_step_circuit
from .runner import build_envelope, build_model, convergence_study, run, trotter_config
from .statevector import circuit_to_text

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_RUNTIME = 3
EXIT_IO = 4


def _cmd_run(args) -> int:
    cfg = load_config(args.config)
    result = run(cfg, args.out)
    print(f"product yield: {result.product_yield:.6f}")
    print(f"report written to {args.out}")
    return EXIT_OK


def _cmd_validate(args) -> int:
    cfg = load_config(args.config)
    t1, t2, tf = cfg.times()
    print(
        f"ok: {cfg.n_qubits} qubits, {cfg.n_steps} steps of dt={cfg.dt!r}, "
        f"tau1={t1!r} tau2={t2!r} t_f={tf!r}"
    )
    return EXIT_OK


def _cmd_export(args) -> int:
    cfg = load_config(args.config)
    if not 0 <= args.step < cfg.n_steps:
        raise ConfigError(f"--step must be in [0, {cfg.n_steps - 1}]")
    tcfg = trotter_config(cfg)
    circuit = build_step_circuit(args.step * cfg.dt, build_model(cfg), build_envelope(cfg), tcfg)
    text = circuit_to_text(circuit)
    if args.out:
        Path(args.out).write_text(text)
        print(f"{len(circuit)} gates written to {args.out}")
    else:
        sys.stdout.write(text)
    return EXIT_OK


def _cmd_convergence(args) -> int:
    cfg = load_config(args.config)
    rows = convergence_study(cfg, args.dt_sweep, args.jobs)
    fh = open(args.out, "w", newline="") if args.out else sys.stdout
    try:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["level", "dt", "n_steps", "deviation", "ratio"])
        for r in rows:
            w.writerow([r["level"], repr(r["dt"]), r["n_steps"], repr(r["deviation"]), r.get("ratio", "")])
    finally:
        if args.out:
            fh.close()
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="qisomer", description=__doc__)
    ap.add_argument("-v", "--verbose", action="store_true")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("run", help="propagate a configured experiment and write reports")
    p.add_argument("config", help="config file, or a shipped scenario name")
    p.add_argument("--out", default="out", help="output directory (default: out)")
    p.set_defaults(func=_cmd_run)

    p = sub.add_parser("validate", help="check a config file without running it")
    p.add_argument("config")
    p.set_defaults(func=_cmd_validate)

    p = sub.add_parser("export-circuit", help="write the gate list of one time step")
    p.add_argument("config")
    p.add_argument("--step", type=int, default=0, help="0-based step index")
    p.add_argument("--out", help="output file (default: stdout)")
    p.set_defaults(func=_cmd_export)

    p = sub.add_parser("convergence", help="dt-halving study against an exact reference")
    p.add_argument("config")
    p.add_argument("--dt-sweep", type=int, default=4, metavar="LEVELS", help="number of dt halvings")
    p.add_argument("--jobs", type=int, default=1)
    p.add_argument("--out", help="CSV output file (default: stdout)")
    p.set_defaults(func=_cmd_convergence)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except OSError as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return EXIT_IO
    except (RuntimeError, ValueError, ArithmeticError) as exc:
        print(f"runtime error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
