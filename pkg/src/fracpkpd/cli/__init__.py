"""Command-line front end: ``simulate <config> [--out DIR] [--no-plots] [--oracle-check]``."""

from __future__ import annotations

import argparse
import logging
import sys

from ..errors import ConfigError
from .config import ScenarioConfig, load_config
from .plots import PlotError, emit_plots
from .sweep import RunManifest, run_sweep

EXIT_OK = 0
EXIT_CONFIG = 1
EXIT_RUN_FAILED = 2

__all__ = ["ScenarioConfig", "RunManifest", "load_config", "run_sweep", "emit_plots", "main"]


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="simulate",
        description="Sweep the fractional PK/PD model over psi functions and fractional orders.",
    )
    parser.add_argument("config", help="scenario file")
    parser.add_argument("--out", help="output directory (overrides [output] directory)")
    parser.add_argument("--no-plots", action="store_true", help="write CSVs and manifest only")
    parser.add_argument(
        "--oracle-check",
        action="store_true",
        help="cross-check each run against the predictor-corrector reference solver",
    )
    parser.add_argument("-v", "--verbose", action="store_true")
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s: %(message)s")

    try:
        cfg = load_config(args.config)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG

    manifest = run_sweep(cfg, out_dir=args.out, oracle_check=args.oracle_check)
    if not args.no_plots:
        try:
            manifest.plots = emit_plots(manifest, formats=cfg.formats)
        except PlotError as exc:
            print(f"plot error: {exc}", file=sys.stderr)
            manifest.write()
            return EXIT_RUN_FAILED
        manifest.write()

    for rec in manifest.runs:
        if rec.status == "ok":
            line = f"psi={rec.psi:<10} alpha={rec.alpha:<5g} BIS(end)={rec.bis_final:7.3f} [{rec.band}]"
            if rec.oracle_max_rel_discrepancy is not None:
                line += f" oracle={rec.oracle_max_rel_discrepancy:.2e}"
        else:
            line = f"psi={rec.psi:<10} alpha={rec.alpha:<5g} FAILED: {rec.error}"
        print(line)
    print(f"wrote {len(manifest.runs) - len(manifest.failed)} runs to {manifest.out_dir}")
    return EXIT_RUN_FAILED if manifest.failed else EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
