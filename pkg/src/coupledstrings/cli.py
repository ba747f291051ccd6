"""Command-line entry point.

Subcommands mirror the run modes; each takes --config <file.toml> plus
optional overrides.  Failures print a machine-readable JSON error record to
stderr and exit nonzero.
"""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import replace

from .config import MODES, load_config
from .exceptions import SimulationError
from .runner import run


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="coupledstrings",
        description="Solvers and diagnostics for a stiff coupled-string system "
                    "and its two-profile leading-order approximation.",
    )
    sub = parser.add_subparsers(dest="mode", required=True)
    for mode in MODES:
        cmd = sub.add_parser(mode, help=f"run the {mode} pipeline")
        cmd.add_argument("--config", required=True, help="TOML configuration file")
        cmd.add_argument("--out-dir", default=None, help="output directory override")
        cmd.add_argument("--eps", type=float, default=None, help="override physical.eps")
        cmd.add_argument("--threads", type=int, default=None,
                         help="worker threads for sweeps")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = load_config(args.config)
        cfg = replace(cfg, mode=args.mode)
        if args.out_dir is not None:
            cfg = replace(cfg, out_dir=args.out_dir)
        if args.eps is not None:
            cfg = cfg.with_eps(args.eps)
        if args.threads is not None:
            cfg = replace(cfg, threads=args.threads)
        run(cfg)
    except SimulationError as exc:
        record = {"error": {"kind": exc.kind, "message": str(exc), "time": exc.time}}
        print(json.dumps(record), file=sys.stderr)
        return 1
    except OSError as exc:
        record = {"error": {"kind": "io-error", "message": str(exc), "time": None}}
        print(json.dumps(record), file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
