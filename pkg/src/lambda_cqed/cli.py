"""Command line entry point: ``lambda-cqed run --scenario ... --out ...``."""

from __future__ import annotations

import argparse
import sys

from .config import PRESETS, ConfigError, describe_keys, resolve_scenario
from .initial_state import CapacityError
from .runner import EXIT_CONFIG, run_scenario

__all__ = ["main", "build_parser"]


def _times(text: str) -> tuple[float, ...]:
    try:
        return tuple(float(x) for x in text.split(",") if x.strip())
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from None


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="lambda-cqed",
        description="Exact dynamics of a three-level lambda atom in a two-mode cavity.",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    run = sub.add_parser(
        "run",
        help="run a scenario and write observables",
        formatter_class=argparse.RawDescriptionHelpFormatter,
        epilog=(
            "presets: " + ", ".join(sorted(PRESETS)) + " (prefix with li6/ or rb87/)\n\n"
            "scenario file (TOML)\n" + describe_keys() + "\n\n"
            "exit codes: 0 success, 2 configuration error, 3 oracle comparison failed"
        ),
    )
    run.add_argument("--scenario", required=True, help="TOML file or preset name such as rb87/raman2")
    run.add_argument("--out", required=True, help="output directory (created if missing)")
    run.add_argument("--oracle", action="store_true",
                     help="cross-check against the numeric oracle; required for unequal detunings")
    run.add_argument("--snapshots", type=_times, default=None,
                     help="comma-separated snapshot times, overriding the scenario file")
    run.add_argument("--ns", action="store_true", help="add a t_ns column (time in nanoseconds)")
    run.add_argument("--workers", type=int, default=1, help="worker processes for the time sweep")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = resolve_scenario(args.scenario)
        result = run_scenario(cfg, args.out, oracle=args.oracle, snapshots=args.snapshots,
                              ns=args.ns, workers=args.workers)
    except (ConfigError, CapacityError) as exc:
        print(f"configuration error:\n{exc}", file=sys.stderr)
        return EXIT_CONFIG
    if result.oracle_report is not None:
        rep = result.oracle_report
        print(f"oracle: passed={rep['passed']} block_max_deviation={rep['block_max_deviation']}", file=sys.stderr)
    return result.exit_code


if __name__ == "__main__":
    sys.exit(main())
