"""Command line front end.

    fpmex <mode> [--config study.toml] [overrides...]

Modes: hydro, invariance, operators, pde, rates-audit.  A TOML config
supplies any StudyConfig field; flags override the file.  Exit status:
0 when every check passed, 1 when a numeric check failed, 2 for bad
configuration or usage.
"""

import argparse
import sys

try:
    import tomllib
except ModuleNotFoundError:
    import tomli as tomllib

from .harness import StudyConfig, emit_report, run_study

_MODE_BY_COMMAND = {
    "hydro": "hydro",
    "invariance": "invariance",
    "operators": "operators",
    "pde": "pde-only",
    "rates-audit": "rates-audit",
}


def _build_parser():
    parser = argparse.ArgumentParser(
        prog="fpmex",
        description="exclusion-process and fractional porous-medium studies",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    for name in _MODE_BY_COMMAND:
        p = sub.add_parser(name, help=f"run the {name} suite")
        p.add_argument("--config", help="TOML file with StudyConfig fields")
        p.add_argument("--gamma", type=float, help="jump-law exponent in (0, 2)")
        p.add_argument("--m", type=int, help="kinetic order (>= 1)")
        p.add_argument(
            "--n",
            type=int,
            action="append",
            help="scaling parameter; repeat for a ladder",
        )
        p.add_argument("--seed", type=int, help="master seed")
        p.add_argument("--ensemble", type=int, help="trajectories per scaling index")
        p.add_argument("--t-end", type=float, dest="t_end", help="macroscopic horizon")
        p.add_argument(
            "--out",
            help="output directory (default: output_dir from the config, else 'out')",
        )
        p.add_argument(
            "--format", choices=("json", "csv", "md"), default="json",
            help="report format (default: json)",
        )
        p.add_argument("--jobs", type=int, default=1, help="worker threads")
    return parser


def _load_config(args):
    data = {}
    if args.config:
        with open(args.config, "rb") as fh:
            data = tomllib.load(fh)
    out_dir = args.out or data.get("output_dir") or "out"
    data["mode"] = _MODE_BY_COMMAND[args.command]
    if args.gamma is not None:
        data["gamma"] = args.gamma
    if args.m is not None:
        data["m"] = args.m
    if args.n:
        data["n_list"] = sorted(args.n)
    if args.seed is not None:
        data["master_seed"] = args.seed
    if args.ensemble is not None:
        data["ensemble"] = args.ensemble
    if args.t_end is not None:
        data["t_end"] = args.t_end
    if args.jobs is not None:
        data["jobs"] = args.jobs
    return StudyConfig.from_mapping(data), out_dir


def main(argv=None):
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        cfg, out_dir = _load_config(args)
    except (ValueError, TypeError, OSError, tomllib.TOMLDecodeError) as exc:
        print(f"fpmex: config error: {exc}", file=sys.stderr)
        return 2
    report = run_study(cfg, out_dir=out_dir)
    paths = emit_report(report, out_dir, fmt=args.format)
    for name, check in sorted(report.get("checks", {}).items()):
        state = "pass" if check["pass"] else "FAIL"
        print(f"{state}  {name}")
    for p in paths:
        print(f"wrote {p}")
    return 0 if report.get("all_pass", False) else 1


if __name__ == "__main__":
    sys.exit(main())
