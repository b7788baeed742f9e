"""
Classical side channel between Alice, Bob and Charlie.

Messages are routed through an in-process bus with one FIFO queue per party.
Each message kind has a fixed sender and recipient set; anything else is
rejected when the message is built.
"""

from __future__ import annotations

import logging
from collections import deque
from dataclasses import dataclass
from enum import Enum

from simulation.assets import BellOutcome, CharlieBit
from simulation.errors import InvalidInput, ProtocolOrderError

logger = logging.getLogger(__name__)


class Party(str, Enum):
    ALICE = "alice"
    BOB = "bob"
    CHARLIE = "charlie"


class MessageKind(str, Enum):
    BELL_OUTCOMES = "bell_outcomes"
    AMPLITUDE_OUTCOMES = "amplitude_outcomes"
    PHASE_OUTCOMES = "phase_outcomes"
    CHARLIE_ANNOUNCEMENT = "charlie_announcement"


# kind -> (sender, recipients)
ROUTES: dict[MessageKind, tuple[Party, tuple[Party, ...]]] = {
    MessageKind.BELL_OUTCOMES: (Party.ALICE, (Party.BOB,)),
    MessageKind.AMPLITUDE_OUTCOMES: (Party.BOB, (Party.ALICE,)),
    MessageKind.PHASE_OUTCOMES: (Party.BOB, (Party.ALICE,)),
    MessageKind.CHARLIE_ANNOUNCEMENT: (Party.CHARLIE, (Party.ALICE, Party.BOB)),
}


@dataclass(frozen=True)
class ClassicalMessage:
    kind: MessageKind
    sender: Party
    recipients: tuple[Party, ...]
    payload: tuple
    bits: int

    def __post_init__(self) -> None:
        sender, recipients = ROUTES[self.kind]
        if self.sender is not sender or tuple(self.recipients) != recipients:
            raise InvalidInput(
                f"{self.kind.value} must go {sender.value} -> "
                f"{', '.join(r.value for r in recipients)}"
            )

    @classmethod
    def _routed(cls, kind: MessageKind, payload: tuple, bits: int) -> ClassicalMessage:
        sender, recipients = ROUTES[kind]
        return cls(kind, sender, recipients, payload, bits)

    @classmethod
    def bell_outcomes(cls, outcomes: tuple[BellOutcome, ...]) -> ClassicalMessage:
        # Two bits name one of four Bell states.
        return cls._routed(MessageKind.BELL_OUTCOMES, tuple(outcomes), 2 * len(outcomes))

    @classmethod
    def amplitude_outcomes(cls, outcomes: tuple[int, ...], n: int) -> ClassicalMessage:
        return cls._routed(MessageKind.AMPLITUDE_OUTCOMES, tuple(outcomes), n)

    @classmethod
    def phase_outcomes(cls, outcomes: tuple[int, ...], n: int) -> ClassicalMessage:
        return cls._routed(MessageKind.PHASE_OUTCOMES, tuple(outcomes), n)

    @classmethod
    def charlie_announcement(cls, bit: CharlieBit) -> ClassicalMessage:
        return cls._routed(MessageKind.CHARLIE_ANNOUNCEMENT, (CharlieBit(bit),), 1)

    @property
    def bits_delivered(self) -> int:
        return self.bits * len(self.recipients)

    def labels(self) -> list[str]:
        return [v.value if isinstance(v, BellOutcome) else str(int(v)) for v in self.payload]

    def to_dict(self) -> dict:
        return {
            "kind": self.kind.value,
            "sender": self.sender.value,
            "recipients": [r.value for r in self.recipients],
            "payload": self.labels(),
            "bits": self.bits,
            "bits_delivered": self.bits_delivered,
        }


class MessageBus:
    """Per-recipient FIFO queues plus an ordered log of everything sent."""

    def __init__(self) -> None:
        self._queues: dict[Party, deque[ClassicalMessage]] = {p: deque() for p in Party}
        self.log: list[ClassicalMessage] = []

    def send(self, message: ClassicalMessage) -> None:
        self.log.append(message)
        for recipient in message.recipients:
            self._queues[recipient].append(message)
        logger.debug(
            "%s -> %s: %s %s",
            message.sender.value,
            ",".join(r.value for r in message.recipients),
            message.kind.value,
            message.labels(),
        )

    def receive(self, party: Party, kind: MessageKind) -> ClassicalMessage:
        """Pop the next message for ``party``; it must be of ``kind``."""
        queue = self._queues[party]
        if not queue:
            raise ProtocolOrderError(f"{party.value} expected {kind.value} but has no pending messages")
        if queue[0].kind is not kind:
            raise ProtocolOrderError(
                f"{party.value} expected {kind.value} but next message is {queue[0].kind.value}"
            )
        return queue.popleft()

    def pending(self, party: Party) -> int:
        return len(self._queues[party])

    @property
    def classical_bits(self) -> int:
        return sum(m.bits_delivered for m in self.log)
