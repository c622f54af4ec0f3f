"""Command-line front end: run / validate / version.

Exit codes: 0 success, 2 configuration or parameter-range problems, 3
numerical failures (lost unitarity, non-convergent fits, out-of-domain
math). Unexpected exceptions propagate with a traceback -- those are bugs,
not user errors.
"""

import argparse
import sys

from .errors import (
    ConfigurationError,
    DomainError,
    FitError,
    NumericError,
    RangeError,
)

_USER_ERRORS = (ConfigurationError, RangeError)
_NUMERIC_ERRORS = (NumericError, FitError, DomainError)


def _build_parser():
    parser = argparse.ArgumentParser(
        prog="mmwave-qed",
        description="Driven-transmon and millimeter-wave readout simulations from TOML configs.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    run_p = sub.add_parser("run", help="execute an experiment config and write artifacts")
    run_p.add_argument("config", help="path to a TOML experiment config")
    run_p.add_argument(
        "--workers",
        type=int,
        default=None,
        metavar="N",
        help="parallel workers for gridded scans (default: one per CPU)",
    )
    run_p.add_argument(
        "--out",
        default=None,
        metavar="DIR",
        help="output directory (default: config out_dir, else <config stem>_out)",
    )

    val_p = sub.add_parser("validate", help="parse and check a config without running it")
    val_p.add_argument("config", help="path to a TOML experiment config")

    sub.add_parser("version", help="print package and library versions")
    return parser


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)

    if args.command == "version":
        import numpy
        import scipy

        from . import __version__

        print(
            f"mmwave-qed {__version__} "
            f"(python {sys.version.split()[0]}, numpy {numpy.__version__}, "
            f"scipy {scipy.__version__})"
        )
        return 0

    from .config import load_config

    try:
        cfg = load_config(args.config)
        if args.command == "validate":
            print(f"OK: {args.config} is a valid '{cfg.kind}' config (seed {cfg.seed})")
            return 0
        from .runners import run_experiment

        manifest = run_experiment(cfg, out_dir=args.out, workers=args.workers)
        for name in manifest["outputs"] + ["manifest.json"]:
            print(f"wrote {manifest['out_dir']}/{name}")
        print(f"done: kind '{cfg.kind}' in {manifest['wall_time_s']} s")
        return 0
    except _USER_ERRORS as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except _NUMERIC_ERRORS as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    raise SystemExit(main())
