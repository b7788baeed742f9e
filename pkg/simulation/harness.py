"""
Batch commands shared by the CLI and the HTTP service.

Each command takes a ``RunConfig`` and returns a ``CommandResult``; callers
decide where the payload goes. Exit codes: 0 success, 1 a fidelity or table
check failed, 2 invalid input, I/O failure or resource bound.
"""

from __future__ import annotations

import functools
import logging
from dataclasses import dataclass, fields, replace
from pathlib import Path
from typing import Any, Callable, Optional

import numpy as np

from simulation.assets import (
    AliceState,
    BellOutcome,
    BobKnownState,
    BobMode,
    ChannelSignConvention,
    CharlieBit,
    random_alice,
    random_bob_general,
    random_bob_product,
)
from simulation.efficiency import efficiency
from simulation.engine import run_protocol
from simulation.errors import DimensionMismatch, InvalidInput, SimulationError
from simulation.files import load_alice, load_bob
from simulation.oracle import (
    MAX_ENUMERATION_N,
    derive_rsp_table,
    enumerate_all_branches,
    reproduce_showcase,
    summarize_branches,
    verify_table1,
)
from simulation.steps import OutcomePolicy

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_FAILED = 1
EXIT_INVALID = 2


@dataclass(frozen=True)
class RunConfig:
    n: int = 1
    seed: int = 7
    alice_file: Optional[Path] = None
    bob_file: Optional[Path] = None
    alice_state: Optional[AliceState] = None
    bob_state: Optional[BobKnownState] = None
    convention: ChannelSignConvention = ChannelSignConvention.SINGLET
    mode: BobMode = BobMode.PRODUCT
    force_bell: Optional[tuple[BellOutcome, ...]] = None
    force_amplitude: Optional[tuple[int, ...]] = None
    force_phase: Optional[tuple[int, ...]] = None
    force_charlie: Optional[CharlieBit] = None
    output: Optional[Path] = None
    workers: int = 1
    max_n: int = MAX_ENUMERATION_N
    significant_digits: int = 15

    def __post_init__(self) -> None:
        if self.n < 1:
            raise InvalidInput(f"n must be at least 1, got {self.n}")
        if self.workers < 1:
            raise InvalidInput(f"workers must be at least 1, got {self.workers}")
        if self.alice_file is not None and self.alice_state is not None:
            raise InvalidInput("give Alice's state as a file or inline, not both")
        if self.bob_file is not None and self.bob_state is not None:
            raise InvalidInput("give Bob's state as a file or inline, not both")
        for name, kind in (("convention", ChannelSignConvention), ("mode", BobMode)):
            value = getattr(self, name)
            try:
                object.__setattr__(self, name, kind(value))
            except ValueError:
                choices = ", ".join(member.value for member in kind)
                raise InvalidInput(f"unknown {name} {value!r} (expected one of {choices})") from None
        for name in ("alice_file", "bob_file", "output"):
            value = getattr(self, name)
            if value is not None:
                object.__setattr__(self, name, Path(value))

    @classmethod
    def from_settings(cls, settings: Any, **overrides: Any) -> RunConfig:
        """
        Build from an ``AppConfig``; overrides set to ``None`` fall back to the
        profile value.
        """
        base = cls(
            n=settings.protocol.n,
            seed=settings.protocol.seed,
            convention=settings.protocol.convention,
            mode=settings.protocol.mode,
            workers=settings.enumeration.workers,
            max_n=settings.enumeration.max_n,
            significant_digits=settings.output.significant_digits,
        )
        known = {f.name for f in fields(cls)}
        unknown = set(overrides) - known
        if unknown:
            raise InvalidInput(f"unknown run options: {', '.join(sorted(unknown))}")
        return replace(base, **{k: v for k, v in overrides.items() if v is not None})

    def seeds(self) -> tuple[np.random.SeedSequence, ...]:
        """Independent children for Alice's state, Bob's state and outcome sampling."""
        return tuple(np.random.SeedSequence(self.seed).spawn(3))

    def load_alice(self) -> AliceState:
        if self.alice_file is not None or self.alice_state is not None:
            alice = self.alice_state if self.alice_state is not None else load_alice(self.alice_file)
            if alice.n != self.n:
                raise DimensionMismatch(f"Alice's state has n={alice.n}, run asks for n={self.n}")
            return alice
        return random_alice(self.n, self.seeds()[0])

    def load_bob(self) -> BobKnownState:
        if self.bob_file is not None or self.bob_state is not None:
            bob = self.bob_state if self.bob_state is not None else load_bob(self.bob_file)
            if bob.n != self.n:
                raise DimensionMismatch(f"Bob's state has n={bob.n}, run asks for n={self.n}")
            return bob
        seed = self.seeds()[1]
        if self.mode is BobMode.GENERAL:
            return random_bob_general(self.n, seed)
        return random_bob_product(self.n, seed)

    def policy(self) -> OutcomePolicy:
        return OutcomePolicy(
            seed=self.seeds()[2],
            bell=self.force_bell,
            amplitude=self.force_amplitude,
            phase=self.force_phase,
            charlie=self.force_charlie,
        )


@dataclass(frozen=True)
class CommandResult:
    exit_code: int
    payload: Any

    @property
    def ok(self) -> bool:
        return self.exit_code == EXIT_OK


def parse_bell_list(text: str) -> tuple[BellOutcome, ...]:
    """``"psi-,phi+"`` -> Bell outcomes; raises InvalidInput on unknown names."""
    return tuple(BellOutcome.parse(part) for part in text.split(",") if part.strip())


def parse_outcome_list(text: str) -> tuple[int, ...]:
    """``"1,2"`` -> ``(1, 2)``; outcomes are 1 or 2."""
    try:
        values = tuple(int(part) for part in text.split(",") if part.strip())
    except ValueError as exc:
        raise InvalidInput(f"bad outcome list {text!r}") from exc
    if any(v not in (1, 2) for v in values):
        raise InvalidInput(f"outcomes must be 1 or 2, got {text!r}")
    return values


def _guarded(command: Callable[..., CommandResult]) -> Callable[..., CommandResult]:
    """Turn library errors into an exit-2 result carrying the error object."""

    @functools.wraps(command)
    def wrapper(*args: Any, **kwargs: Any) -> CommandResult:
        try:
            return command(*args, **kwargs)
        except SimulationError as exc:
            logger.error("%s failed: %s", command.__name__, exc)
            return CommandResult(EXIT_INVALID, {"error": exc.to_dict()})

    return wrapper


# ── Commands ──────────────────────────────────────────────────────────


@_guarded
def cmd_run(config: RunConfig) -> CommandResult:
    alice, bob = config.load_alice(), config.load_bob()
    table = derive_rsp_table(bob, config.convention, config.workers)
    transcript = run_protocol(alice, bob, config.convention, config.policy(), table)
    code = EXIT_OK if transcript.succeeded() else EXIT_FAILED
    if code != EXIT_OK:
        logger.warning(
            "run failed: fidelities %.12f / %.12f",
            transcript.teleport_fidelity,
            transcript.rsp_fidelity,
        )
    return CommandResult(code, transcript.to_dict())


@_guarded
def cmd_enumerate(config: RunConfig) -> CommandResult:
    alice, bob = config.load_alice(), config.load_bob()
    reports = enumerate_all_branches(alice, bob, config.convention, config.workers, config.max_n)
    summary = summarize_branches(reports)
    payload = {
        "n": config.n,
        "convention": config.convention.value,
        "mode": bob.mode.value,
        "summary": summary,
        "branches": [report.to_dict() for report in reports],
    }
    return CommandResult(EXIT_FAILED if summary["uncorrectable"] else EXIT_OK, payload)


def _rsp_table_row(config: RunConfig, bob: BobKnownState) -> dict:
    table = derive_rsp_table(bob, config.convention, config.workers)
    return {
        "check": "rsp_table",
        "n": bob.n,
        "entries": len(table),
        "uncorrectable": table.uncorrectable,
        "table": table.to_dict(),
        "passed": not table.uncorrectable,
    }


@_guarded
def cmd_verify(config: RunConfig, efficiency_n: Optional[int] = None) -> CommandResult:
    """
    Correction-table rows, the showcase branch, the derived remote-preparation
    table and, optionally, an efficiency report. One row per check.
    """
    alice_seed = config.seeds()[0]
    rows: list[dict] = [check.to_dict() for check in verify_table1(config.convention, random_alice(1, alice_seed))]
    rows.append(reproduce_showcase(config.load_alice(), config.load_bob(), config.convention).to_dict())
    rows.append(_rsp_table_row(config, config.load_bob()))
    if efficiency_n is not None:
        rows.append({"check": "efficiency", **efficiency(efficiency_n).to_dict(), "passed": True})

    failures = [row for row in rows if not row["passed"]]
    for row in failures:
        logger.warning("verification failed: %s %s", row["check"], row.get("row", ""))
    return CommandResult(EXIT_FAILED if failures else EXIT_OK, rows)


@_guarded
def cmd_efficiency(n: int) -> CommandResult:
    return CommandResult(EXIT_OK, efficiency(n).to_dict())
