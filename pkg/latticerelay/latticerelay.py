"""latticerelay - Command-line front end.

Parses flags, merges an optional manifest file, validates the result and
dispatches to one of the subcommands. CSV goes to stdout (or --out); logs
go to stderr.
"""

import argparse
import logging
import sys
from pathlib import Path
from typing import Any

from pydantic import ValidationError

from latticerelay.cli.commands import (
    GAPS_COLUMNS,
    RATES_COLUMNS,
    SIMULATE_COLUMNS,
    SWEEP_COLUMNS,
    UCE_COLUMNS,
    cmd_gaps,
    cmd_rates,
    cmd_simulate,
    cmd_sweep,
    cmd_tables,
    cmd_uce,
)
from latticerelay.cli.config import (
    ConfigValidationError,
    GapsOptions,
    RatesOptions,
    SimulateOptions,
    SweepOptions,
    TablesOptions,
    UceOptions,
    load_manifest,
    merge_manifest,
)
from latticerelay.cli.output import write_csv, write_json_lines
from latticerelay.core.channel import RateDomainError
from latticerelay.core.lattice import LatticeError
from latticerelay.sim.schemes import SimulationConfigError

logger = logging.getLogger(__name__)

# Exit codes
EXIT_OK = 0
EXIT_USAGE = 2
EXIT_INTERNAL = 3

DOMAIN_ERRORS = (
    ConfigValidationError,
    LatticeError,
    RateDomainError,
    SimulationConfigError,
    ValidationError,
)

OPTION_MODELS = {
    "rates": RatesOptions,
    "gaps": GapsOptions,
    "sweep": SweepOptions,
    "uce": UceOptions,
    "simulate": SimulateOptions,
    "tables": TablesOptions,
}

# Flags that only steer parsing, never validated options
_PARSER_ONLY = {"command", "config"}

# Manifest spellings of flags whose dest differs from the flag name
FLAG_ALIASES = {"p": "P", "pr": "P_R", "nr": "N_R", "noise": "N_R", "n1": "N_1", "n2": "N_2"}


def setup_logging(debug: bool = False) -> None:
    """Configure logging for the application."""
    level = logging.DEBUG if debug else logging.INFO
    format_str = "[%(asctime)s] %(levelname)s %(name)s: %(message)s"
    logging.basicConfig(
        level=level,
        format=format_str,
        datefmt="%H:%M:%S",
        stream=sys.stderr,
    )
    # Reduce noise from libraries
    logging.getLogger("concurrent.futures").setLevel(logging.WARNING)


def _shared_flags() -> argparse.ArgumentParser:
    """Channel and output flags accepted by every subcommand."""
    shared = argparse.ArgumentParser(add_help=False)
    shared.add_argument("--p", dest="P", type=float, help="Source power P (linear)")
    shared.add_argument("--pr", dest="P_R", type=float, help="Relay power P_R (linear)")
    shared.add_argument("--g", dest="g", type=float, help="Channel gain of node 2 (default 1)")
    shared.add_argument(
        "--nr", "--noise", dest="N_R", type=float, help="Relay noise variance (default 1)"
    )
    shared.add_argument("--n1", dest="N_1", type=float, help="Noise variance at node 1")
    shared.add_argument("--n2", dest="N_2", type=float, help="Noise variance at node 2")
    snr = shared.add_mutually_exclusive_group()
    snr.add_argument("--snr", type=float, help="Uplink SNR P/N_R (linear)")
    snr.add_argument("--snr-db", dest="snr_db", type=float, help="Uplink SNR in dB")
    shared.add_argument(
        "--symmetric", action="store_true", default=None,
        help="Force P_R = P and N_1 = N_2 = N_R",
    )
    shared.add_argument("--out", type=Path, help="Write CSV here instead of stdout")
    shared.add_argument("--seed", type=int, help="Master seed (unsigned 64-bit)")
    shared.add_argument("--config", type=Path, help="key = value manifest file")
    shared.add_argument(
        "--debug", action="store_true", default=None, help="Enable debug logging"
    )
    return shared


def build_parser() -> argparse.ArgumentParser:
    """Argument parser with one sub-parser per subcommand.

    Every option defaults to None so a manifest can fill it in; the
    validated models supply the real defaults.
    """
    parser = argparse.ArgumentParser(
        prog="latticerelay",
        description="Nested lattice coding analysis for the Gaussian two-way relay channel",
    )
    shared = _shared_flags()
    sub = parser.add_subparsers(dest="command", required=True)

    rates = sub.add_parser("rates", parents=[shared], help="Achievable rate region")
    rates.add_argument("--scheme", type=int, choices=[1, 2])

    gaps = sub.add_parser("gaps", parents=[shared], help="Gap to the cut-set bound")
    gaps.add_argument(
        "--g-values", dest="g_values", help="Comma-separated gains (default: --g)"
    )

    sweep = sub.add_parser("sweep", parents=[shared], help="Rates over an SNR grid")
    sweep.add_argument("--snr-db-start", dest="snr_db_start", type=float)
    sweep.add_argument("--snr-db-stop", dest="snr_db_stop", type=float)
    sweep.add_argument("--snr-db-step", dest="snr_db_step", type=float)
    sweep.add_argument("--schemes", help="Comma-separated subset of 1,2")

    uce = sub.add_parser("uce", parents=[shared], help="Upper concave envelope samples")
    uce.add_argument("--user", type=int, choices=[1, 2])
    uce.add_argument("--snr-max", dest="snr_max", type=float)
    uce.add_argument("--points", type=int)

    simulate = sub.add_parser("simulate", parents=[shared], help="Monte-Carlo simulation")
    simulate.add_argument("--scheme", type=int, choices=[1, 2])
    simulate.add_argument("--dim", type=int, help="Lattice dimension (1..16)")
    simulate.add_argument("--trials", type=int)
    simulate.add_argument(
        "--rate-backoff", dest="rate_backoff", type=float,
        help="Bits below the decoding threshold (default 1)",
    )
    simulate.add_argument("--resolution", type=int, help="Fine-lattice resolution k")
    simulate.add_argument("--broadcast-size", dest="broadcast_size", type=int)
    simulate.add_argument("--broadcast-len", dest="broadcast_len", type=int)
    simulate.add_argument("--workers", type=int)
    simulate.add_argument("--trial-log", dest="trial_log", type=Path)

    tables = sub.add_parser("tables", parents=[shared], help="Write the gap tables")
    tables.add_argument("--out-dir", dest="out_dir", type=Path)

    return parser


def resolve_options(args: argparse.Namespace) -> Any:
    """Merge the manifest into the parsed flags and validate.

    Raises:
        ConfigValidationError: If the manifest is unreadable or malformed.
        ValidationError: If the merged values are invalid.
    """
    flags = vars(args).copy()
    if args.config is not None:
        allowed = {dest: dest for dest in flags if dest not in _PARSER_ONLY}
        allowed.update(FLAG_ALIASES)
        flags = merge_manifest(flags, load_manifest(args.config, allowed))
    if args.command == "gaps" and flags.get("g_values") is None and flags.get("g") is not None:
        flags["g_values"] = [flags["g"]]
    values = {
        key: value
        for key, value in flags.items()
        if key not in _PARSER_ONLY and value is not None
    }
    return OPTION_MODELS[args.command].model_validate({"command": args.command, **values})


def run_command(opts: Any) -> None:
    """Execute one validated subcommand and write its output."""
    command = opts.command
    logger.info("Running %s", command)
    if command == "rates":
        write_csv(cmd_rates(opts), opts.out, RATES_COLUMNS)
    elif command == "gaps":
        write_csv(cmd_gaps(opts), opts.out, GAPS_COLUMNS)
    elif command == "sweep":
        write_csv(cmd_sweep(opts), opts.out, SWEEP_COLUMNS)
    elif command == "uce":
        write_csv(cmd_uce(opts), opts.out, UCE_COLUMNS)
    elif command == "simulate":
        rows, records = cmd_simulate(opts)
        write_csv(rows, opts.out, SIMULATE_COLUMNS)
        if opts.trial_log is not None:
            write_json_lines(records, opts.trial_log)
    elif command == "tables":
        for path in cmd_tables(opts):
            logger.info("Table written: %s", path)
    logger.info("Finished %s", command)


def main(argv: list[str] | None = None) -> int:
    """Main entry point; returns the process exit code."""
    parser = build_parser()
    args = parser.parse_args(argv)
    setup_logging(bool(args.debug))

    try:
        opts = resolve_options(args)
        run_command(opts)
    except DOMAIN_ERRORS as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_USAGE
    except AssertionError as e:
        logger.exception("Internal invariant violated")
        print(f"error: internal invariant violated: {e}", file=sys.stderr)
        return EXIT_INTERNAL
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
