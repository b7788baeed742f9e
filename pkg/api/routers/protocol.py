"""
Protocol API router: runs, SSE branch enumeration, verification and efficiency.
"""

import asyncio
import json
import logging
from typing import Literal, Optional

from fastapi import APIRouter, HTTPException
from pydantic import BaseModel, Field
from sse_starlette.sse import EventSourceResponse

from config.settings import get_config
from simulation.errors import InvalidInput, SimulationError
from simulation.files import AliceSpec, BobSpec, dumps, to_jsonable
from simulation.harness import (
    EXIT_INVALID,
    CommandResult,
    RunConfig,
    cmd_efficiency,
    cmd_run,
    cmd_verify,
    parse_bell_list,
)
from simulation.oracle import check_enumeration_size, enumerate_all_branches, summarize_branches

logger = logging.getLogger(__name__)

router = APIRouter()


# ── Request models ────────────────────────────────────────────────────


class ProtocolRequest(BaseModel):
    n: Optional[int] = Field(default=None, ge=1)
    seed: Optional[int] = None
    convention: Optional[Literal["singlet", "phiminus"]] = None
    mode: Optional[Literal["product", "general"]] = None
    alice: Optional[AliceSpec] = None
    bob: Optional[BobSpec] = None


class RunRequest(ProtocolRequest):
    force_bell: Optional[list[str]] = None
    force_amplitude: Optional[list[Literal[1, 2]]] = None
    force_phase: Optional[list[Literal[1, 2]]] = None
    force_charlie: Optional[Literal[0, 1]] = None


class VerifyRequest(ProtocolRequest):
    efficiency_n: Optional[int] = Field(default=None, ge=1)


def _run_config(req: ProtocolRequest) -> RunConfig:
    settings = get_config().effective()
    overrides = {
        "n": req.n,
        "seed": req.seed,
        "convention": req.convention,
        "mode": req.mode,
        "alice_state": req.alice.to_state() if req.alice else None,
        "bob_state": req.bob.to_state() if req.bob else None,
    }
    if isinstance(req, RunRequest):
        overrides.update(
            force_bell=parse_bell_list(",".join(req.force_bell)) if req.force_bell else None,
            force_amplitude=tuple(req.force_amplitude) if req.force_amplitude else None,
            force_phase=tuple(req.force_phase) if req.force_phase else None,
            force_charlie=req.force_charlie,
        )
    return RunConfig.from_settings(settings, **overrides)


def _config_or_400(req: ProtocolRequest) -> RunConfig:
    try:
        return _run_config(req)
    except SimulationError as exc:
        raise HTTPException(status_code=400, detail=exc.to_dict())
    except ValueError as exc:
        raise HTTPException(status_code=400, detail=InvalidInput(str(exc)).to_dict())


def _unwrap(result: CommandResult, digits: int):
    if result.exit_code == EXIT_INVALID:
        raise HTTPException(status_code=400, detail=result.payload["error"])
    return to_jsonable(result.payload, digits)


# ── Runs ──────────────────────────────────────────────────────────────


@router.post("/runs")
async def create_run(req: RunRequest):
    """Run the protocol once; returns the transcript."""
    config = _config_or_400(req)
    result = await asyncio.to_thread(cmd_run, config)
    return _unwrap(result, config.significant_digits)


# ── Enumeration (SSE stream) ──────────────────────────────────────────


@router.post("/enumerations")
async def create_enumeration(req: ProtocolRequest):
    """Enumerate every branch. Returns an SSE stream with one event per branch."""
    config = _config_or_400(req)
    digits = config.significant_digits

    async def event_generator():
        try:
            alice, bob = config.load_alice(), config.load_bob()
            check_enumeration_size(alice.n, config.max_n)
        except SimulationError as exc:
            logger.error("enumeration rejected: %s", exc)
            yield {"event": "error", "data": json.dumps({"error": exc.to_dict()})}
            return

        yield {
            "event": "start",
            "data": json.dumps({"n": alice.n, "expected_branches": 2 * 16**alice.n}),
        }
        try:
            reports = await asyncio.to_thread(
                enumerate_all_branches, alice, bob, config.convention, config.workers, config.max_n
            )
        except SimulationError as exc:
            logger.error("enumeration failed: %s", exc)
            yield {"event": "error", "data": json.dumps({"error": exc.to_dict()})}
            return

        for report in reports:
            yield {"event": "branch", "data": dumps(report.to_dict(), indent=None, digits=digits)}

        yield {
            "event": "complete",
            "data": dumps(summarize_branches(reports), indent=None, digits=digits),
        }

    return EventSourceResponse(event_generator())


# ── Verification ──────────────────────────────────────────────────────


@router.post("/verify")
async def verify(req: VerifyRequest):
    """Correction-table, showcase and remote-preparation checks."""
    config = _config_or_400(req)
    result = await asyncio.to_thread(cmd_verify, config, req.efficiency_n)
    rows = _unwrap(result, config.significant_digits)
    return {"passed": result.ok, "rows": rows}


@router.get("/efficiency/{n}")
async def get_efficiency(n: int):
    return _unwrap(cmd_efficiency(n), get_config().config.output.significant_digits)
