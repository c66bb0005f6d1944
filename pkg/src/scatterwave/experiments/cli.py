"""Command line entry point.

    scatterwave run <config.json>   [--out-dir DIR] [--threads N]
    scatterwave sweep <config.json> [--out-dir DIR] [--threads N]
    scatterwave verify [--tol-scale X] [--random N]

The output directory defaults to ``$SCATTERWAVE_OUT_DIR`` or, failing that,
``./scatterwave-out``.  Exit codes: 0 success, 1 invariant failure, 2 config
error, 3 numerical failure.
"""

from __future__ import annotations

import argparse
import logging
import os
import sys

from ..dynamics import IntegrationError
from ..scattering import NotAsymptoticallyFree, ProfileError
from .config import ConfigError
from .runner import run_scenario, sweep
from .verify import verify_all

EXIT_OK = 0
EXIT_INVARIANT = 1
EXIT_CONFIG = 2
EXIT_NUMERICAL = 3

OUT_DIR_ENV = "SCATTERWAVE_OUT_DIR"
DEFAULT_OUT_DIR = "scatterwave-out"


def _positive_int(text):
    n = int(text)
    if n < 1:
        raise argparse.ArgumentTypeError("must be >= 1")
    return n


def _non_negative(text):
    x = float(text)
    if not x >= 0:
        raise argparse.ArgumentTypeError("must be >= 0")
    return x


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--out-dir", default=None,
                        help=f"output directory (default: ${OUT_DIR_ENV} or ./{DEFAULT_OUT_DIR})")
    common.add_argument("--threads", type=_positive_int, default=1,
                        help="worker threads; results do not depend on this")
    common.add_argument("-v", "--verbose", action="store_true")

    parser = argparse.ArgumentParser(prog="scatterwave", description=__doc__.split("\n\n")[0])
    sub = parser.add_subparsers(dest="command", required=True)
    p = sub.add_parser("run", parents=[common], help="run one scenario")
    p.add_argument("config")
    p = sub.add_parser("sweep", parents=[common], help="run an (amplitude, exponent) grid")
    p.add_argument("config")
    p = sub.add_parser("verify", parents=[common], help="check every invariant")
    p.add_argument("--tol-scale", type=_non_negative, default=1.0,
                   help="multiply every tolerance (0 exposes rounding noise)")
    p.add_argument("--random", type=int, default=100, dest="n_random",
                   help="number of seeded random scenarios")
    return parser


def _out_dir(args) -> str:
    return args.out_dir or os.environ.get(OUT_DIR_ENV) or DEFAULT_OUT_DIR


def _run(args) -> int:
    report = run_scenario(args.config, _out_dir(args), threads=args.threads)
    for name, value in sorted(report.flags.items()):
        print(f"{value.upper():4s} {name}")
    for path in report.csv_paths:
        print(f"wrote {path}")
    return EXIT_OK if report.passed else EXIT_INVARIANT


def _sweep(args) -> int:
    result = sweep(args.config, _out_dir(args), threads=args.threads)
    print(f"wrote {result.table_path} ({len(result.rows)} cells)")
    for idx, err in sorted(result.errors.items()):
        print(f"cell {idx} failed: {err}", file=sys.stderr)
    return EXIT_OK if result.ok else EXIT_NUMERICAL


def _verify(args) -> int:
    def progress(label):
        logging.getLogger(__name__).info("checking %s", label)

    summary = verify_all(tol_scale=args.tol_scale, n_random=args.n_random, progress=progress)
    for line in summary.lines():
        print(line)
    n_bad = len(summary.failures)
    print(f"{len(summary.results) - n_bad} passed, {n_bad} failed in {summary.elapsed:.1f}s")
    return EXIT_OK if summary.passed else EXIT_INVARIANT


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    handler = {"run": _run, "sweep": _sweep, "verify": _verify}[args.command]
    try:
        return handler(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (IntegrationError, ProfileError, NotAsymptoticallyFree, FloatingPointError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL


if __name__ == "__main__":
    sys.exit(main())
