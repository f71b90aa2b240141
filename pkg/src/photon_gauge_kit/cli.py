"""``photon-gauge-kit`` command line.

    photon-gauge-kit <basis|gauge|operators|field|verify> [--config PATH]
                     [--out DIR] [--set section.key=value ...]

Exit status is 0 when every assertion of the command passes, 1 when any
fails and 2 for configuration errors.  ``PHOTON_GAUGE_KIT_THREADS`` caps the
BLAS/OpenMP thread pools (it is read when the package is imported).
"""

from __future__ import annotations

import argparse
import sys

from .config import ConfigError, load_config
from .gauge import StringProximityError
from .synthesis import TruncationError

__all__ = ["main", "build_parser"]


def build_parser():
    parser = argparse.ArgumentParser(
        prog="photon-gauge-kit",
        description="Helicity bases, photon position operators and localized-field synthesis.")
    parser.add_argument("command", choices=["basis", "gauge", "operators", "field", "verify"])
    parser.add_argument("--config", help="TOML run configuration (defaults apply when omitted)")
    parser.add_argument("--out", default=None, help="output directory (default: out/<command>)")
    parser.add_argument("--set", dest="overrides", action="append", default=[],
                        metavar="KEY=VALUE", help="override one config key, e.g. field.m=2")
    parser.add_argument("--quiet", action="store_true", help="suppress per-assertion lines")
    return parser


def main(argv=None):
    from .commands import run_command

    args = build_parser().parse_args(argv)
    try:
        cfg = load_config(args.config, args.overrides)
    except (ConfigError, OSError) as exc:
        print(f"photon-gauge-kit: config error: {exc}", file=sys.stderr)
        return 2
    out = args.out or f"out/{args.command}"
    try:
        status, summary = run_command(args.command, cfg, out, quiet=args.quiet)
    except ConfigError as exc:
        print(f"photon-gauge-kit: config error: {exc}", file=sys.stderr)
        return 2
    except (StringProximityError, TruncationError) as exc:
        print(f"photon-gauge-kit: {args.command} aborted: {exc}", file=sys.stderr)
        return 1
    n_fail = sum(not a["passed"] for a in summary["assertions"])
    print(f"{args.command}: {len(summary['assertions']) - n_fail} passed, {n_fail} failed; "
          f"outputs in {out} ({summary['wall_time_s']:.1f} s)")
    return status


if __name__ == "__main__":
    sys.exit(main())
