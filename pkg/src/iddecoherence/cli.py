"""Command-line entry point.

Exit codes: 0 success, 2 config or validation error, 3 computational error,
4 I/O error. The worker count for ensembles and sweeps comes from the
IDDECOH_WORKERS environment variable (default: all cores).
"""
from __future__ import annotations

import argparse
import logging
import sys

from .config import ConfigError, parse_config
from .runner import ComputationError, run_experiment, sweep, write_outputs
from .weak_localization import WORKERS_ENV, worker_count

log = logging.getLogger("iddecoherence")

EXIT_OK, EXIT_CONFIG, EXIT_COMPUTE, EXIT_IO = 0, 2, 3, 4

SUBCOMMANDS = {
    "fidelity": "fidelity-trace",
    "visibility": "visibility-scan",
    "wl-loop": "wl-loop",
    "wl-ensemble": "wl-ensemble",
    "sweep": None,
}


def _parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="iddecoh",
        description="Internal-dynamics decoherence experiments (fidelity, visibility, weak localization).",
    )
    sub = p.add_subparsers(dest="command", required=True)
    for name, exp in SUBCOMMANDS.items():
        sp = sub.add_parser(name, help=f"run a {exp} experiment" if exp else "sweep one parameter")
        sp.add_argument("--config", required=True, help="YAML experiment file")
        sp.add_argument("--out", default=None, help="output directory (overrides output.dir)")
        sp.add_argument("--seed", type=int, default=None, help="master seed (overrides config)")
        sp.add_argument("--quiet", action="store_true", help="only report errors")
    return p


def main(argv=None) -> int:
    args = _parser().parse_args(argv)
    logging.basicConfig(
        level=logging.ERROR if args.quiet else logging.INFO, format="%(message)s", stream=sys.stderr
    )
    try:
        with open(args.config, encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        log.error("cannot read config: %s", exc)
        return EXIT_IO

    try:
        if args.seed is not None and not 0 <= args.seed < 2**64:
            raise ConfigError([f"--seed: must be an unsigned 64-bit integer, got {args.seed}"])
        cfg = parse_config(text, experiment=SUBCOMMANDS[args.command], seed=args.seed)
        if args.command == "sweep" and not cfg["sweep"]:
            raise ConfigError(["sweep: the sweep subcommand needs a sweep section"])
        try:
            workers = worker_count()
        except ValueError as exc:
            raise ConfigError([f"{WORKERS_ENV}: {exc}"]) from None
    except ConfigError as exc:
        log.error("%s", exc)
        return EXIT_CONFIG

    try:
        if args.command == "sweep":
            result = sweep(cfg, workers=workers)
        else:
            result = run_experiment(cfg, workers=workers)
    except ConfigError as exc:
        log.error("%s", exc)
        return EXIT_CONFIG
    except ComputationError as exc:
        log.error("computation failed: %s", exc)
        return EXIT_COMPUTE

    out_dir = args.out if args.out is not None else cfg["output"]["dir"]
    try:
        csv_path, json_path = write_outputs(result, out_dir)
    except OSError as exc:
        log.error("cannot write outputs: %s", exc)
        return EXIT_IO
    log.info("wrote %s and %s", csv_path, json_path)
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
