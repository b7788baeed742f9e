"""
Alice, Bob and Charlie as state machines over one shared register.

Each party only advances through its own phases; calling an action out of
phase raises ProtocolOrderError. Parties talk exclusively through the
MessageBus: Bob learns Alice's Bell outcomes and Charlie's bit from it, and
Alice learns Bob's amplitude and phase outcomes and Charlie's bit the same way.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from enum import Enum, auto

import numpy as np

from simulation.assets import BobKnownState, CharlieBit, rsp_target_labels, teleport_target_labels
from simulation.corrections import (
    CorrectionOp,
    CorrectionTableArtifact,
    select_rsp_correction,
    select_teleport_correction,
)
from simulation.errors import ProtocolOrderError
from simulation.messages import ClassicalMessage, MessageBus, MessageKind, Party
from simulation.statevector import StateVector
from simulation.steps import (
    OutcomePolicy,
    step1_alice_bell_measurement,
    step2_introduce_ancillas,
    step3_bob_cnot,
    step4_amplitude_measurement,
    step5_phase_measurement,
    step6_charlie_measurement,
)
from simulation.transcript import StepRecord

logger = logging.getLogger(__name__)


@dataclass
class SharedRegister:
    """The one simulated quantum resource all three parties act on."""

    state: StateVector
    records: list[StepRecord] = field(default_factory=list)

    def record(self, record: StepRecord) -> None:
        self.records.append(record)
        logger.debug(
            "step %d (%s, %s) outcomes=%s p=%.6g",
            record.step,
            record.party.value,
            record.action,
            record.outcome_labels(),
            record.probability,
        )


class _Party:
    party: Party

    def __init__(
        self,
        register: SharedRegister,
        bus: MessageBus,
        policy: OutcomePolicy,
        rng: np.random.Generator,
    ):
        self.register = register
        self.bus = bus
        self.policy = policy
        self.rng = rng

    def _require(self, *allowed: Enum) -> None:
        if self.phase not in allowed:
            raise ProtocolOrderError(
                f"{self.party.value} is in phase {self.phase.name}, "
                f"expected {' or '.join(p.name for p in allowed)}"
            )


# ── Alice ─────────────────────────────────────────────────────────────


class AlicePhase(Enum):
    READY = auto()
    BELL_MEASURED = auto()
    CORRECTED = auto()


class AliceParty(_Party):
    party = Party.ALICE

    def __init__(self, register, bus, policy, rng, n: int):
        super().__init__(register, bus, policy, rng)
        self.n = n
        self.phase = AlicePhase.READY
        self.correction: CorrectionOp | None = None

    def measure_bell(self) -> StepRecord:
        """Step 1: Bell measurement on each (a_k, A_k); outcomes go to Bob."""
        self._require(AlicePhase.READY)
        result = step1_alice_bell_measurement(self.register.state, self.policy, self.rng)
        self.register.state = result.state
        message = ClassicalMessage.bell_outcomes(result.outcomes)
        self.bus.send(message)
        record = StepRecord(1, self.party, "bell_measurement", result.outcomes, result.probability, message)
        self.register.record(record)
        self.phase = AlicePhase.BELL_MEASURED
        return record

    def correct(self, table: CorrectionTableArtifact) -> CorrectionOp:
        """Apply the remote-preparation correction once Bob and Charlie have reported."""
        self._require(AlicePhase.BELL_MEASURED)
        amplitude = self.bus.receive(self.party, MessageKind.AMPLITUDE_OUTCOMES).payload
        phase = self.bus.receive(self.party, MessageKind.PHASE_OUTCOMES).payload
        (bit,) = self.bus.receive(self.party, MessageKind.CHARLIE_ANNOUNCEMENT).payload
        self.phase = AlicePhase.CORRECTED
        op = select_rsp_correction(amplitude, phase, bit, table)
        self.register.state = op.apply(self.register.state, rsp_target_labels(self.n))
        self.correction = op
        return op


# ── Bob ───────────────────────────────────────────────────────────────


class BobPhase(Enum):
    READY = auto()
    ANCILLAS_READY = auto()
    ENTANGLED = auto()
    AMPLITUDES_MEASURED = auto()
    PHASES_MEASURED = auto()
    CORRECTED = auto()


class BobParty(_Party):
    party = Party.BOB

    def __init__(self, register, bus, policy, rng, bob: BobKnownState):
        super().__init__(register, bus, policy, rng)
        self.bob = bob
        self.phase = BobPhase.READY
        self.amplitude_outcomes: tuple[int, ...] = ()
        self.correction: CorrectionOp | None = None

    @property
    def _bits_per_block(self) -> int:
        return self.bob.n

    def introduce_ancillas(self) -> StepRecord:
        self._require(BobPhase.READY)
        self.register.state = step2_introduce_ancillas(self.register.state)
        record = StepRecord(2, self.party, "introduce_ancillas")
        self.register.record(record)
        self.phase = BobPhase.ANCILLAS_READY
        return record

    def entangle_ancillas(self) -> StepRecord:
        self._require(BobPhase.ANCILLAS_READY)
        self.register.state = step3_bob_cnot(self.register.state)
        record = StepRecord(3, self.party, "cnot")
        self.register.record(record)
        self.phase = BobPhase.ENTANGLED
        return record

    def measure_amplitudes(self) -> StepRecord:
        self._require(BobPhase.ENTANGLED)
        result = step4_amplitude_measurement(self.register.state, self.bob, self.policy, self.rng)
        self.register.state = result.state
        self.amplitude_outcomes = result.outcomes
        message = ClassicalMessage.amplitude_outcomes(result.outcomes, self._bits_per_block)
        self.bus.send(message)
        record = StepRecord(4, self.party, "amplitude_measurement", result.outcomes, result.probability, message)
        self.register.record(record)
        self.phase = BobPhase.AMPLITUDES_MEASURED
        return record

    def measure_phases(self) -> StepRecord:
        self._require(BobPhase.AMPLITUDES_MEASURED)
        result = step5_phase_measurement(
            self.register.state, self.bob, self.amplitude_outcomes, self.policy, self.rng
        )
        self.register.state = result.state
        message = ClassicalMessage.phase_outcomes(result.outcomes, self._bits_per_block)
        self.bus.send(message)
        record = StepRecord(5, self.party, "phase_measurement", result.outcomes, result.probability, message)
        self.register.record(record)
        self.phase = BobPhase.PHASES_MEASURED
        return record

    def correct(self) -> CorrectionOp:
        """Apply the teleport correction chosen from Alice's and Charlie's reports."""
        self._require(BobPhase.PHASES_MEASURED)
        bell = self.bus.receive(self.party, MessageKind.BELL_OUTCOMES).payload
        (bit,) = self.bus.receive(self.party, MessageKind.CHARLIE_ANNOUNCEMENT).payload
        op = select_teleport_correction(bell, bit)
        self.register.state = op.apply(self.register.state, teleport_target_labels(self.bob.n))
        self.correction = op
        self.phase = BobPhase.CORRECTED
        return op


# ── Charlie ───────────────────────────────────────────────────────────


class CharliePhase(Enum):
    READY = auto()
    ANNOUNCED = auto()


class CharlieParty(_Party):
    party = Party.CHARLIE

    def __init__(self, register, bus, policy, rng):
        super().__init__(register, bus, policy, rng)
        self.phase = CharliePhase.READY
        self.bit: CharlieBit | None = None

    def measure(self) -> StepRecord:
        """Step 6: measure C and broadcast the bit to Alice and Bob."""
        self._require(CharliePhase.READY)
        result = step6_charlie_measurement(self.register.state, self.policy, self.rng)
        self.register.state = result.state
        (self.bit,) = result.outcomes
        message = ClassicalMessage.charlie_announcement(self.bit)
        self.bus.send(message)
        record = StepRecord(6, self.party, "charlie_measurement", result.outcomes, result.probability, message)
        self.register.record(record)
        self.phase = CharliePhase.ANNOUNCED
        return record
