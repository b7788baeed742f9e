#!/usr/bin/env python3
"""
CLI for the hybrid teleportation simulator.
Runs single protocol executions, exhaustive branch enumeration, the
correction-table verification and the efficiency report.
"""

import argparse
import json
import logging
import sys
from pathlib import Path
from typing import Optional

from config.settings import AppConfig, ConfigManager
from simulation.errors import InvalidInput, SimulationError
from simulation.files import write_json, write_jsonl
from simulation.harness import (
    EXIT_INVALID,
    CommandResult,
    RunConfig,
    cmd_efficiency,
    cmd_enumerate,
    cmd_run,
    cmd_verify,
    parse_bell_list,
    parse_outcome_list,
)


def _add_run_options(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--n", type=int, help="Qubits per direction (default: profile)")
    parser.add_argument("--seed", type=int, help="Seed for random inputs and sampled outcomes")
    parser.add_argument("--alice", type=Path, metavar="FILE", help="Input file with an 'alice' entry")
    parser.add_argument("--bob", type=Path, metavar="FILE", help="Input file with a 'bob' entry")
    parser.add_argument("--convention", choices=["singlet", "phiminus"], help="Sign of the C=1 channel pairs")
    parser.add_argument("--mode", choices=["product", "general"], help="Form of Bob's random known state")
    parser.add_argument("--workers", type=int, help="Threads for branch enumeration")


def _add_force_options(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--force-bell", metavar="LIST", help="Bell outcomes, e.g. psi-,phi+")
    parser.add_argument("--force-amp", metavar="LIST", help="Amplitude outcomes (1 or 2), e.g. 1,2")
    parser.add_argument("--force-phase", metavar="LIST", help="Phase outcomes (1 or 2), e.g. 2,1")
    parser.add_argument("--force-charlie", type=int, choices=[0, 1], help="Charlie's announced bit")


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", type=Path, metavar="FILE", help="Settings file (default: config/settings.json)")
    common.add_argument("--profile", metavar="NAME", help="Settings profile to use instead of the active one")
    common.add_argument("--log-level", choices=["DEBUG", "INFO", "WARNING", "ERROR"], type=str.upper)
    common.add_argument("--out", type=Path, metavar="FILE", help="Write JSON here instead of stdout")

    parser = argparse.ArgumentParser(
        description="Hybrid teleportation CLI - simulate, enumerate and verify the protocol"
    )
    subparsers = parser.add_subparsers(dest="command", help="Available commands")

    # Run command
    run_parser = subparsers.add_parser("run", parents=[common], help="Run the protocol once and write its transcript")
    _add_run_options(run_parser)
    _add_force_options(run_parser)

    # Enumerate command
    enumerate_parser = subparsers.add_parser("enumerate", parents=[common], help="Report every measurement branch (n <= 3)")
    _add_run_options(enumerate_parser)

    # Verify command
    verify_parser = subparsers.add_parser("verify", parents=[common], help="Check the correction tables and the showcase branch")
    _add_run_options(verify_parser)
    verify_parser.add_argument("--efficiency", type=int, metavar="N", help="Append the efficiency report for N")

    # Efficiency command
    efficiency_parser = subparsers.add_parser("efficiency", parents=[common], help="Efficiency of the protocol for n qubits")
    efficiency_parser.add_argument("--n", type=int, default=1)

    # Profiles command
    subparsers.add_parser("profiles", parents=[common], help="List settings profiles")

    return parser


def _run_config(args: argparse.Namespace, settings: AppConfig) -> RunConfig:
    return RunConfig.from_settings(
        settings,
        n=args.n,
        seed=args.seed,
        alice_file=args.alice,
        bob_file=args.bob,
        convention=args.convention,
        mode=args.mode,
        workers=args.workers,
        force_bell=parse_bell_list(args.force_bell) if getattr(args, "force_bell", None) else None,
        force_amplitude=parse_outcome_list(args.force_amp) if getattr(args, "force_amp", None) else None,
        force_phase=parse_outcome_list(args.force_phase) if getattr(args, "force_phase", None) else None,
        force_charlie=getattr(args, "force_charlie", None),
        output=args.out,
    )


def _emit(result: CommandResult, out: Optional[Path], indent: int, digits: int, lines: bool = False) -> None:
    if lines and isinstance(result.payload, list):
        text = write_jsonl(result.payload, out, digits)
    else:
        text = write_json(result.payload, out, indent, digits)
    if out is None:
        sys.stdout.write(text)


def show_profiles(manager: ConfigManager) -> None:
    """List settings profiles, marking the active one."""
    print("=" * 60)
    print(f"Settings Profiles ({manager.config_path})")
    print("=" * 60)
    print()
    for name in manager.list_profiles():
        marker = "*" if name == manager.active_profile else " "
        print(f"  {marker} {name}")


def main(argv: Optional[list[str]] = None) -> int:
    """Main CLI entry point. Returns the process exit code."""
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.command is None:
        parser.print_help()
        return EXIT_INVALID

    manager = ConfigManager(args.config)
    try:
        settings = manager.effective(args.profile)
    except KeyError as exc:
        print(json.dumps({"error": InvalidInput(str(exc.args[0])).to_dict()}), file=sys.stderr)
        return EXIT_INVALID
    logging.basicConfig(
        level=args.log_level or settings.log_level.upper(),
        stream=sys.stderr,
        format="%(asctime)s %(levelname)s %(name)s: %(message)s",
    )

    if args.command == "profiles":
        show_profiles(manager)
        return 0

    indent, digits = settings.output.indent, settings.output.significant_digits
    try:
        if args.command == "efficiency":
            result = cmd_efficiency(args.n)
        else:
            config = _run_config(args, settings)
            digits = config.significant_digits
            if args.command == "run":
                result = cmd_run(config)
            elif args.command == "enumerate":
                result = cmd_enumerate(config)
            else:
                result = cmd_verify(config, efficiency_n=args.efficiency)
    except SimulationError as exc:
        result = CommandResult(EXIT_INVALID, {"error": exc.to_dict()})
    except ValueError as exc:
        result = CommandResult(EXIT_INVALID, {"error": InvalidInput(str(exc)).to_dict()})

    try:
        _emit(result, args.out, indent, digits, lines=args.command == "verify")
    except OSError as exc:
        print(json.dumps({"error": {"type": "OSError", "code": "io_error", "message": str(exc)}}), file=sys.stderr)
        return EXIT_INVALID
    return result.exit_code


if __name__ == "__main__":
    sys.exit(main())
