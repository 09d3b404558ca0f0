"""Command line entry point: ``basin-atlas <subcommand> --config <path> [--out <dir>]``."""
from __future__ import annotations

import argparse
import logging
import sys

from . import _backend
from .config import load_config
from .errors import ConfigError
from .pipeline import (EXIT_CONFIG, EXIT_OK, StageError, run_all, run_equilibria, run_fit,
                       run_mesh, run_sample)

STAGES = {
    "equilibria": run_equilibria,
    "sample": run_sample,
    "fit": run_fit,
    "mesh": run_mesh,
    "all": run_all,
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="basin-atlas",
        description="Approximate the basins of attraction of a tristable competition model.",
    )
    parser.add_argument("subcommand", choices=list(STAGES))
    parser.add_argument("--config", required=True,
                        help="config file; 'paper.cfg' falls back to the shipped preset")
    parser.add_argument("--out", default=None, help="output directory (overrides output.dir)")
    parser.add_argument("--threads", type=int, default=None,
                        help="worker threads for classification (default: CPU count; capped by $BASIN_ATLAS_THREADS)")
    parser.add_argument("-v", "--verbose", action="store_true")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        cfg = load_config(args.config)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    out = args.out if args.out is not None else cfg.output_dir
    stage = STAGES[args.subcommand]
    kw = {"threads": args.threads} if args.subcommand in ("sample", "all") else {}
    try:
        stage(cfg, out, **kw)
    except StageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.code
    if args.verbose:
        print(f"{args.subcommand}: done ({_backend.NAME} kernels), output in {out}", file=sys.stderr)
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
