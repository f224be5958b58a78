"""Command-line interface.

Subcommands: ``solve`` (one instance), ``experiment`` (CSV sweeps from a
spec file), ``oracle-gap`` (exhaustive-search cross-check), ``presets``
(print a bundled scenario file).
"""

from __future__ import annotations

import argparse
import dataclasses
import sys

from .config import PRESET_NAMES, load_config, load_preset, preset_text
from .harness import load_experiment_spec, run_experiment, run_oracle_gap, run_single


def _load_scenario(ref):
    if ref in PRESET_NAMES:
        return load_preset(ref)
    return load_config(ref)


def build_parser():
    parser = argparse.ArgumentParser(
        prog="urllc-sched",
        description=(
            "Minimum-power RB assignment, power control and robust "
            "beamforming for URLLC-OFDMA downlinks."
        ),
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_solve = sub.add_parser(
        "solve", help="solve one channel realization of a scenario"
    )
    p_solve.add_argument(
        "config", help="scenario YAML path or a preset name (e.g. table1)"
    )
    p_solve.add_argument("--seed", type=int, default=0,
                         help="channel realization index (default 0)")
    p_solve.add_argument("--out", default=None,
                         help="write the full result as JSON to this path")

    p_exp = sub.add_parser(
        "experiment", help="run a Monte-Carlo sweep from an experiment spec"
    )
    p_exp.add_argument("spec", help="experiment spec YAML path")
    p_exp.add_argument("--out", default=None,
                       help="override the spec's output directory")
    p_exp.add_argument("--jobs", type=int, default=1,
                       help="worker processes (default 1)")

    p_gap = sub.add_parser(
        "oracle-gap", help="compare the solver to exhaustive search"
    )
    p_gap.add_argument("--instances", type=int, default=50)
    p_gap.add_argument("--out", default="oracle_gap.csv")
    p_gap.add_argument("--jobs", type=int, default=1)

    p_pre = sub.add_parser("presets", help="print a bundled scenario file")
    p_pre.add_argument("name", choices=PRESET_NAMES)
    return parser


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        if args.command == "solve":
            config = _load_scenario(args.config)
            result = run_single(config, seed=args.seed, out_path=args.out)
            return 0 if result.status == "Solved" else 1
        if args.command == "experiment":
            spec = load_experiment_spec(args.spec)
            if args.out is not None:
                spec = dataclasses.replace(spec, out_dir=args.out)
            path = run_experiment(spec, jobs=args.jobs)
            print(f"wrote {path}")
            return 0
        if args.command == "oracle-gap":
            rows = run_oracle_gap(args.instances, out_path=args.out,
                                  jobs=args.jobs)
            gaps = sorted(r[3] for r in rows if r[3] == r[3])
            if gaps:
                median = gaps[len(gaps) // 2]
                print(f"{len(gaps)} comparable instances, "
                      f"median gap {median:.4f}%, max gap {gaps[-1]:.4f}%")
            print(f"wrote {args.out}")
            return 0
        if args.command == "presets":
            sys.stdout.write(preset_text(args.name))
            return 0
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    return 2


if __name__ == "__main__":
    raise SystemExit(main())
