"""Application entry point for defsum."""

import argparse
import logging
import sys
from typing import Optional, Sequence

try:
    # When running as package
    from . import config
    from .errors import ConfigError, ScheduleError
    from .runner import COMMANDS, config_from_mapping, read_config_file, run
except ImportError:
    # When running as standalone script
    import config
    from errors import ConfigError, ScheduleError
    from runner import COMMANDS, config_from_mapping, read_config_file, run

logger = logging.getLogger(__name__)

# Flags that map one-to-one onto RunConfig fields (and config file keys).
SETTING_FLAGS = (
    ("--schedule", "deferment schedule family: cesaro, block, poly, sliding, custom-table"),
    ("--schedule-params", "schedule parameters, e.g. a=1,b=2 or p=0;1;2,q=1;3;5"),
    ("--matrix", "matrix catalog id"),
    ("--matrix-params", "matrix parameters, e.g. alpha=0.5 or rows=1;0|0;1"),
    ("--sequence", "sequence family id"),
    ("--sequence-params", "sequence parameters, e.g. s=2 or values=1;-1;0.5"),
    ("--space", "target space for section-test and the wedge/zeta criteria"),
    ("--criterion", "check-conull criterion: c, l, bv, linf, wedge, zeta"),
    ("--suite", "verify suite name"),
    ("--tol", "detection tolerance"),
    ("--window", "detection window"),
    ("--horizon", "number of n evaluated"),
    ("--trunc", "norm truncation"),
    ("--i-horizon", "row cut-off for matrices without a row regime"),
    ("--seed", "random seed"),
    ("--trials", "suite trial count"),
    ("--out", f"output directory (default {config.DEFAULT_OUT_DIR})"),
)


def build_parser() -> argparse.ArgumentParser:
    """Argument parser; every setting defaults to None so config files are not overridden."""
    parser = argparse.ArgumentParser(
        prog="defsum",
        description="Deferred Cesaro means, sigma_p^q[s] membership and conullity criteria")
    parser.add_argument("command", nargs="?", choices=COMMANDS,
                        help="what to run (may also come from --config)")
    parser.add_argument("--config", metavar="FILE", help="key = value settings; flags override them")
    for flag, text in SETTING_FLAGS:
        parser.add_argument(flag, help=text)
    parser.add_argument("--verbose", action="store_true", help="log progress to stderr")
    parser.add_argument("--debug", action="store_true", help="log numerics to stderr")
    return parser


def configure_logging(verbose: bool, debug: bool) -> None:
    """Log to stderr: WARNING by default, INFO with --verbose, DEBUG with --debug."""
    level = logging.DEBUG if debug else logging.INFO if verbose else logging.WARNING
    logging.basicConfig(level=level, stream=sys.stderr,
                        format="%(levelname)s %(name)s: %(message)s")


def collect_settings(args: argparse.Namespace) -> dict[str, str]:
    """Config file values, overridden by flags given on the command line."""
    raw = read_config_file(args.config) if args.config else {}
    raw = {key.replace("_", "-"): value for key, value in raw.items()}
    if args.command:
        raw["command"] = args.command
    for flag, _ in SETTING_FLAGS:
        value = getattr(args, flag[2:].replace("-", "_"))
        if value is not None:
            raw[flag[2:]] = value
    return raw


def main(argv: Optional[Sequence[str]] = None) -> int:
    """Parse arguments, run the command and return its exit status."""
    args = build_parser().parse_args(argv)
    configure_logging(args.verbose, args.debug)
    try:
        status = run(config_from_mapping(collect_settings(args)))
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return config.EXIT_CONFIG
    except ScheduleError as exc:
        print(f"config error: schedule: {exc}", file=sys.stderr)
        return config.EXIT_CONFIG
    return status


if __name__ == "__main__":
    sys.exit(main())
