"""Command-line entry point: ``nonlocal-waves {run,sweep,uc,verify}``.

Exit status is 0 when a run completes, 2 when it blows up and 1 on any
error. Outputs go below ``$NONLOCAL_WAVES_OUTPUT_ROOT`` when that variable
is set and the configured directory is relative.
"""

from __future__ import annotations

import argparse
import csv
import json
import logging
import sys
from dataclasses import asdict

from .config import ConfigError, load_config
from .experiments import (
    EXIT_BLOWUP,
    EXIT_COMPLETED,
    EXIT_ERROR,
    _num,
    run,
    sweep,
    uc_experiment,
)

_PARAM_ALIASES = {"δ": "delta", "n": "n", "dt": "dt", "delta": "delta", "L": "L"}


def _values(text: str) -> list[float]:
    try:
        return [float(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a comma-separated list of numbers: {text!r}") from None


class _Parser(argparse.ArgumentParser):
    # argparse exits with 2 on usage errors; 2 is reserved for blow-up here
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_ERROR, f"{self.prog}: error: {message}\n")


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="nonlocal-waves", description=__doc__.splitlines()[0])
    p.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    r = sub.add_parser("run", help="integrate one configuration and write its outputs")
    r.add_argument("config")

    s = sub.add_parser("sweep", help="repeat a run over values of one parameter")
    s.add_argument("config")
    s.add_argument("--param", required=True, choices=sorted(_PARAM_ALIASES))
    s.add_argument("--values", required=True, type=_values)

    u = sub.add_parser("uc", help="unique-continuation experiments")
    u.add_argument("config")
    u.add_argument("--experiment", required=True, choices=("consistency", "burgers"))

    sub.add_parser("verify", help="run the built-in acceptance checks")
    return p


def _cmd_run(args) -> int:
    report = run(load_config(args.config))
    print(report.summary())
    return report.exit_code


def _cmd_sweep(args) -> int:
    cfg = load_config(args.config)
    table = sweep(cfg, _PARAM_ALIASES[args.param], args.values)
    out = cfg.output_path()
    out.mkdir(parents=True, exist_ok=True)
    path = out / f"sweep_{_PARAM_ALIASES[args.param]}.csv"
    table.to_csv(path)
    print(table.format())
    print(f"table: {path}")
    return EXIT_BLOWUP if any(r.status == "blow-up" for r in table.rows) else EXIT_COMPLETED


def _cmd_uc(args) -> int:
    cfg = load_config(args.config)
    rep = uc_experiment(cfg, args.experiment)
    out = cfg.output_path()
    out.mkdir(parents=True, exist_ok=True)
    data = asdict(rep)
    data["message"] = rep.message
    (out / f"uc_{args.experiment}.json").write_text(json.dumps(data, indent=2) + "\n")
    series = rep.max_in_interval if args.experiment == "consistency" else rep.discrepancy
    column = "max_abs_u_in_interval" if args.experiment == "consistency" else "discrepancy"
    with open(out / f"uc_{args.experiment}.csv", "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\r\n")
        w.writerow(["t", column])
        w.writerows([_num(t), _num(v)] for t, v in zip(rep.times, series))
    print(rep.message)
    return EXIT_BLOWUP if rep.blew_up else EXIT_COMPLETED


def _cmd_verify(args) -> int:
    from .verify import run_all

    results = run_all()
    failed = sum(not r.passed for r in results)
    print(f"{len(results) - failed}/{len(results)} checks passed")
    return EXIT_COMPLETED if failed == 0 else EXIT_ERROR


_COMMANDS = {"run": _cmd_run, "sweep": _cmd_sweep, "uc": _cmd_uc, "verify": _cmd_verify}


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return _COMMANDS[args.command](args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
    return EXIT_ERROR


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
