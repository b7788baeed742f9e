"""
Run transcripts: ordered step records plus the outcome of both transfers.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from typing import Optional

from simulation.assets import BellOutcome, BobMode, ChannelSignConvention, CharlieBit
from simulation.corrections import CorrectionOp, rsp_key, teleport_key
from simulation.errors import InvalidInput, ProtocolOrderError
from simulation.messages import ClassicalMessage, Party
from simulation.statevector import ALGEBRA_ATOL, NORM_ATOL, StateVector

logger = logging.getLogger(__name__)

PROTOCOL_STEPS = (1, 2, 3, 4, 5, 6)

# Classical bits counted by the published efficiency accounting.
PUBLISHED_CLASSICAL_BITS = 0


@dataclass(frozen=True)
class StepRecord:
    step: int
    party: Party
    action: str
    outcomes: tuple = ()
    probability: float = 1.0
    message: Optional[ClassicalMessage] = None

    def outcome_labels(self) -> list[str]:
        return [o.value if isinstance(o, BellOutcome) else str(int(o)) for o in self.outcomes]

    def to_dict(self) -> dict:
        return {
            "step": self.step,
            "party": self.party.value,
            "action": self.action,
            "outcomes": self.outcome_labels(),
            "probability": self.probability,
            "message": self.message.to_dict() if self.message is not None else None,
        }


@dataclass(frozen=True, eq=False)
class ProtocolTranscript:
    """
    Everything one protocol run produced.

    Construction fails unless ``steps`` holds exactly steps 1..6 in order and
    the joint branch probability lies in (0, 1].
    """

    n: int
    convention: ChannelSignConvention
    mode: BobMode
    steps: tuple[StepRecord, ...]
    teleport_correction: CorrectionOp
    rsp_correction: Optional[CorrectionOp]
    teleported_state: StateVector
    prepared_state: StateVector
    teleport_fidelity: float
    rsp_fidelity: float
    classical_bits: int
    rsp_uncorrectable: bool = False

    def __post_init__(self) -> None:
        steps = tuple(self.steps)
        order = tuple(record.step for record in steps)
        if order != PROTOCOL_STEPS:
            raise ProtocolOrderError(f"steps must run 1..6 in order, got {list(order)}")
        object.__setattr__(self, "steps", steps)
        p = self.joint_probability
        if not 0.0 < p <= 1.0 + NORM_ATOL:
            raise InvalidInput(f"joint branch probability {p} outside (0, 1]")

    @property
    def joint_probability(self) -> float:
        return math.prod(record.probability for record in self.steps)

    def _outcomes(self, step: int) -> tuple:
        return self.steps[step - 1].outcomes

    @property
    def bell_outcomes(self) -> tuple[BellOutcome, ...]:
        return self._outcomes(1)

    @property
    def amplitude_outcomes(self) -> tuple[int, ...]:
        return self._outcomes(4)

    @property
    def phase_outcomes(self) -> tuple[int, ...]:
        return self._outcomes(5)

    @property
    def charlie_bit(self) -> CharlieBit:
        return self._outcomes(6)[0]

    @property
    def published_classical_bits(self) -> int:
        return PUBLISHED_CLASSICAL_BITS

    def succeeded(self, atol: float = ALGEBRA_ATOL) -> bool:
        return self.teleport_fidelity >= 1.0 - atol and self.rsp_fidelity >= 1.0 - atol

    def to_dict(self) -> dict:
        return {
            "n": self.n,
            "convention": self.convention.value,
            "mode": self.mode.value,
            "branch": {
                "teleport": teleport_key(self.bell_outcomes, self.charlie_bit),
                "rsp": rsp_key(self.amplitude_outcomes, self.phase_outcomes, self.charlie_bit),
            },
            "steps": [record.to_dict() for record in self.steps],
            "joint_probability": self.joint_probability,
            "teleport_correction": str(self.teleport_correction),
            "rsp_correction": str(self.rsp_correction) if self.rsp_correction is not None else None,
            "rsp_uncorrectable": self.rsp_uncorrectable,
            "teleport_fidelity": self.teleport_fidelity,
            "rsp_fidelity": self.rsp_fidelity,
            "teleported_state": _state_dict(self.teleported_state),
            "prepared_state": _state_dict(self.prepared_state),
            "classical_bits": {
                "audited": self.classical_bits,
                "published": self.published_classical_bits,
            },
            "succeeded": self.succeeded(),
        }


def _state_dict(state: StateVector) -> dict:
    return {
        "register": [str(label) for label in state.labels],
        "amps": list(state.amps),
    }
