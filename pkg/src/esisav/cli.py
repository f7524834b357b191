"""Command-line entry point: ``esisav {evolve,converge,compare,ns} --config run.json``."""

from __future__ import annotations

import argparse
import json
import logging
import sys
from dataclasses import replace
from pathlib import Path

from . import harness
from .config import parse_dt, load_config
from .errors import ConfigError, NumericalError

EXIT_OK, EXIT_CONFIG, EXIT_NUMERICAL, EXIT_CHECK = 0, 2, 3, 4

log = logging.getLogger("esisav")


def _parser():
    p = argparse.ArgumentParser(prog="esisav", description="ESI-SAV gradient-flow experiments")
    sub = p.add_subparsers(dest="command", required=True)
    for name, help_ in (("evolve", "run one evolution and write series/snapshots"),
                        ("converge", "time-step convergence study"),
                        ("compare", "compare schemes over a dt grid"),
                        ("ns", "Navier-Stokes Taylor-Green run")):
        s = sub.add_parser(name, help=help_)
        s.add_argument("--config", required=True, help="JSON run configuration")
        s.add_argument("--dt", type=parse_dt, help="override the time step")
        s.add_argument("--scheme", help="override the scheme")
        s.add_argument("--seed", type=int, help="override the random seed")
        s.add_argument("--t-end", dest="t_end", type=float, help="override the final time")
        s.add_argument("--out", help="output directory (relative output paths resolve here)")
        s.add_argument("--check", action="store_true", help="evaluate the config's check thresholds")
        s.add_argument("-v", "--verbose", action="store_true")
    return p


def _print_rows(rows):
    print(f"{'scheme':<12}{'dt':>12}{'error':>14}{'rate':>9}{'s/step':>11}{'solves':>8}")
    for r in rows:
        rate = "" if r["rate"] is None else f"{r['rate']:.3f}"
        print(f"{r['scheme']:<12}{r['dt']:>12.6g}{r['error']:>14.4e}{rate:>9}"
              f"{r['wall_clock_per_step']:>11.2e}{r['solves_per_step']:>8.3g}")


def _run(args):
    cfg = load_config(args.config)
    if args.t_end is not None:
        # a shorter run keeps only the snapshot times it reaches
        times = tuple(t for t in cfg.outputs.snapshot_times if t <= args.t_end)
        cfg = replace(cfg, t_end=args.t_end, outputs=replace(cfg.outputs, snapshot_times=times))
    cfg = cfg.with_overrides(dt=args.dt, seed=args.seed)
    if args.scheme is not None:
        cfg = replace(cfg, scheme=args.scheme, schemes=(args.scheme,) if args.command == "compare" else cfg.schemes)
    out = Path(args.out) if args.out else None
    log.info("%s: model=%s scheme=%s dt=%g t_end=%g", args.command, cfg.model.name, cfg.scheme, cfg.dt, cfg.t_end)
    if args.command == "evolve":
        report = harness.run_evolution(cfg, out)
    elif args.command == "converge":
        report = harness.run_convergence(cfg)
    elif args.command == "compare":
        report = harness.run_comparison(cfg)
    else:
        report = harness.run_ns(cfg, out)
    if report.rows:
        _print_rows(report.rows)
    elif report.errors and len(report.errors) > 1:
        _print_rows([{"scheme": report.scheme, "dt": d, "error": e, "rate": (report.rates[i - 1] if i else None),
                      "wall_clock_per_step": report.wall_clock_per_step, "solves_per_step": report.solves_per_step}
                     for i, (d, e) in enumerate(zip(report.dts, report.errors))])
    if report.verdicts:
        print(json.dumps(harness._jsonable(report.verdicts)))
    report_path = harness._resolve(cfg.outputs.report, out) or (out / "report.json" if out else None)
    if report_path is not None:
        report.write_json(report_path)
    if args.check:
        results = harness.evaluate_checks(report, cfg.check)
        if not results:
            raise ConfigError("--check given but the config has no 'check' thresholds")
        for name, ok, detail in results:
            print(f"{'PASS' if ok else 'FAIL'} {name}: {detail}")
        if not all(ok for _, ok, _ in results):
            return EXIT_CHECK
    return EXIT_OK


def main(argv=None) -> int:
    args = _parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(message)s")
    try:
        return _run(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (NumericalError, FloatingPointError, OverflowError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL


if __name__ == "__main__":
    sys.exit(main())
