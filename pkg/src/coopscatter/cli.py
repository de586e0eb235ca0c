"""Command-line interface.

    coopscatter run --experiment fig7 --out DIR [--seed 42] [--n-real 8]
    coopscatter run --experiment custom --profile gaussian --sigma 20 \
        --n-atoms 1000 --delta 10 --t-max 6 --dt 0.01 --out DIR
    coopscatter spectrum --profile uniform --sigma 20 --n-atoms 1000 --out DIR
    coopscatter accept --out DIR

Flags can also come from a JSON config file (--config FILE, same keys as the
long flag names with dashes as underscores); explicit flags win.  Exit code 0
on success, nonzero on any error or acceptance failure.
"""

from __future__ import annotations

import argparse
import json
import sys

from . import __version__
from .acceptance import run_all, write_report
from .harness import EXPERIMENTS, RunConfig, preset_config, run, run_spectrum

_CUSTOM_KEYS = (
    "profile",
    "sigma",
    "n_atoms",
    "delta",
    "rabi",
    "protocol",
    "t_max",
    "dt",
    "t_on",
    "dt_decay",
    "n_max",
)


def _add_run_parser(sub):
    p = sub.add_parser("run", help="run one experiment and write CSV + manifest")
    p.add_argument("--experiment", required=False, choices=EXPERIMENTS)
    p.add_argument("--out", required=False, help="output directory")
    p.add_argument("--config", help="JSON file providing defaults for any flag")
    p.add_argument("--seed", type=int)
    p.add_argument("--n-real", type=int, dest="n_real")
    p.add_argument("--rabi", type=float)
    p.add_argument("--r-min", type=float, dest="r_min")
    p.add_argument("--dump-ensembles", action="store_true", default=None, dest="dump_ensembles")
    # custom-experiment physics (rejected for fig presets, whose values are locked)
    p.add_argument("--profile", choices=("uniform", "parabolic", "gaussian"))
    p.add_argument("--sigma", type=float)
    p.add_argument("--n-atoms", type=int, dest="n_atoms")
    p.add_argument("--delta", type=float)
    p.add_argument("--protocol", choices=("driven", "free", "drive_then_cut"))
    p.add_argument("--t-max", type=float, dest="t_max")
    p.add_argument("--dt", type=float)
    p.add_argument("--t-on", type=float, dest="t_on")
    p.add_argument("--dt-decay", type=float, dest="dt_decay")
    p.add_argument("--n-max", type=int, dest="n_max")
    return p


def _merged(args: argparse.Namespace) -> dict:
    merged = {}
    if getattr(args, "config", None):
        with open(args.config) as fh:
            merged.update(json.load(fh))
    for key, val in vars(args).items():
        if key in ("command", "config"):
            continue
        if val is not None:
            merged[key] = val
    return merged


def _cmd_run(args) -> int:
    opts = _merged(args)
    experiment = opts.get("experiment")
    out = opts.get("out")
    if not experiment or not out:
        print("error: --experiment and --out are required (flag or config file)", file=sys.stderr)
        return 2
    if experiment != "custom":
        locked = [k for k in _CUSTOM_KEYS if k in opts]
        if locked:
            print(
                f"error: experiment {experiment!r} locks its physics parameters; "
                f"remove {', '.join('--' + k.replace('_', '-') for k in locked)} or use "
                "--experiment custom",
                file=sys.stderr,
            )
            return 2
        config = preset_config(
            experiment,
            seed=opts.get("seed", 42),
            n_real=opts.get("n_real", 8),
            rabi=opts.get("rabi", 1.0),
        )
        if "r_min" in opts or "dump_ensembles" in opts:
            from dataclasses import replace

            config = replace(
                config,
                r_min=opts.get("r_min", config.r_min),
                dump_ensembles=bool(opts.get("dump_ensembles", config.dump_ensembles)),
            )
    else:
        missing = [k for k in ("profile", "sigma", "n_atoms", "delta") if k not in opts]
        if missing:
            print(f"error: custom experiment needs --{', --'.join(missing)}", file=sys.stderr)
            return 2
        config = RunConfig(
            experiment="custom",
            kind=opts["profile"],
            sigma=float(opts["sigma"]),
            n_atoms=int(opts["n_atoms"]),
            delta=float(opts["delta"]),
            rabi=float(opts.get("rabi", 1.0)),
            protocol=opts.get("protocol", "driven"),
            t_max=float(opts.get("t_max", 2.0)),
            dt=float(opts.get("dt", 0.005)),
            t_on=float(opts.get("t_on", 4.0)),
            dt_decay=float(opts.get("dt_decay", opts.get("dt", 0.01))),
            n_real=int(opts.get("n_real", 8)),
            seed=int(opts.get("seed", 42)),
            r_min=float(opts.get("r_min", 1e-3)),
            n_max=opts.get("n_max"),
            dump_ensembles=bool(opts.get("dump_ensembles", False)),
        )
    manifest = run(config, out)
    print(f"{experiment}: wrote {', '.join(manifest.outputs)} and manifest.json to {out}")
    return 0


def _cmd_spectrum(args) -> int:
    opts = _merged(args)
    missing = [k for k in ("profile", "sigma", "n_atoms", "out") if not opts.get(k)]
    if missing:
        print(f"error: spectrum needs --{', --'.join(missing)}", file=sys.stderr)
        return 2
    manifest = run_spectrum(
        opts["profile"], float(opts["sigma"]), int(opts["n_atoms"]), opts["out"],
        n_max=opts.get("n_max"),
    )
    print(f"spectrum: wrote {manifest.outputs[0]} and manifest.json to {opts['out']}")
    return 0


def _cmd_accept(args) -> int:
    opts = _merged(args)
    report = run_all(seed=int(opts.get("seed", 42)), verbose=True)
    if opts.get("out"):
        path = write_report(report, opts["out"])
        print(f"report: {path}")
    n_fail = sum(not c["passed"] for c in report["criteria"])
    print(f"{len(report['criteria']) - n_fail}/{len(report['criteria'])} criteria passed")
    return 0 if report["all_passed"] else 1


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="coopscatter",
        description="cooperative light scattering: coupled-dipole and mean-field models",
    )
    parser.add_argument("--version", action="version", version=f"coopscatter {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)
    _add_run_parser(sub)

    p_spec = sub.add_parser("spectrum", help="export a collective mode spectrum as CSV")
    p_spec.add_argument("--profile", choices=("uniform", "parabolic", "gaussian"))
    p_spec.add_argument("--sigma", type=float)
    p_spec.add_argument("--n-atoms", type=int, dest="n_atoms")
    p_spec.add_argument("--n-max", type=int, dest="n_max")
    p_spec.add_argument("--out")
    p_spec.add_argument("--config")

    p_acc = sub.add_parser("accept", help="run the acceptance suite")
    p_acc.add_argument("--out", help="directory for acceptance_report.json")
    p_acc.add_argument("--seed", type=int)
    p_acc.add_argument("--config")

    args = parser.parse_args(argv)
    try:
        if args.command == "run":
            return _cmd_run(args)
        if args.command == "spectrum":
            return _cmd_spectrum(args)
        return _cmd_accept(args)
    except (ValueError, OSError, RuntimeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
