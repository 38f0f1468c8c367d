"""Command line interface.

Subcommands: estimate, wipe, timing, background, report.
Fatal configuration errors exit nonzero with a machine-readable JSON
error on stderr.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from .config import load_config
from .errors import ConfigError, ImageLoadError, VaporWipeError
from .experiments import (run_background_study, run_normal_estimation_experiment,
                          run_timing_sweep, run_wiping_experiment)
from .reporting import render_figures, write_report


def _add_common(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--config", type=Path, default=None,
                        help="TOML config file")
    parser.add_argument("--preset", default=None,
                        help="named preset: zero, mirror-calibrated, glass-calibrated")
    parser.add_argument("--seed", type=int, default=None,
                        help="override experiment.seed")
    parser.add_argument("--out", type=Path, default=Path("out"),
                        help="output directory")
    parser.add_argument("--dump-frames", action="store_true",
                        help="write rendered frames as PGM files")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="vaporwipe",
        description="Simulate vapor-assisted plane-normal estimation and "
                    "force-regulated wiping.")
    sub = parser.add_subparsers(dest="command", required=True)

    for name, text in (("estimate", "run the normal-estimation experiment"),
                       ("timing", "grid spray durations vs capture budgets"),
                       ("background", "extraction robustness across backgrounds")):
        p = sub.add_parser(name, help=text)
        _add_common(p)

    p = sub.add_parser("wipe", help="run the wiping experiment")
    _add_common(p)
    p.add_argument("--error-deg", type=float, default=5.8,
                   help="injected normal-estimation error (default 5.8)")
    p.add_argument("--unregulated", action="store_true",
                   help="disable contact-force regulation")

    p = sub.add_parser("report", help="render figures for a written report")
    p.add_argument("--out", type=Path, required=True,
                   help="directory holding rows.csv and report.json")
    return parser


def _frame_sink(outdir: Path):
    frames_dir = outdir / "frames"
    frames_dir.mkdir(parents=True, exist_ok=True)

    def sink(axis, index, frame):
        from .imageio import write_pnm
        write_pnm(frames_dir / f"{axis}_{index:03d}.pgm", frame.image)
        write_pnm(frames_dir / f"{axis}_{index:03d}_mask.pgm",
                  frame.truth_mask.astype("uint8") * 255)

    return sink


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.command == "report":
            created = render_figures(args.out)
            for path in created:
                print(path)
            return 0

        overrides = {}
        if args.seed is not None:
            overrides = {"experiment": {"seed": args.seed}}
        cfg = load_config(path=args.config, preset=args.preset,
                          overrides=overrides)

        if args.command == "estimate":
            sink = _frame_sink(args.out) if args.dump_frames else None
            report = run_normal_estimation_experiment(cfg, frame_sink=sink)
        elif args.command == "wipe":
            report = run_wiping_experiment(cfg, estimation_error_deg=args.error_deg,
                                           regulated=not args.unregulated)
        elif args.command == "timing":
            report = run_timing_sweep(cfg)
        else:
            report = run_background_study(cfg)

        write_report(report, args.out)
        agg = json.dumps(report.aggregates, sort_keys=True)
        print(f"{args.command}: wrote {args.out}/report.json  aggregates={agg}")
        return 0
    except (ConfigError, ImageLoadError, FileNotFoundError) as exc:
        print(json.dumps({"error": type(exc).__name__, "message": str(exc)}),
              file=sys.stderr)
        return 2
    except VaporWipeError as exc:
        print(json.dumps({"error": type(exc).__name__, "message": str(exc)}),
              file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
