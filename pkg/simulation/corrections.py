"""
Signed Pauli corrections and the lookup tables that choose them.

The teleport direction uses the published per-qubit table extended to n
qubits by the tensor rule. The remote-preparation direction has no
published table; it is derived by the oracle and passed in as a
CorrectionTableArtifact.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from enum import Enum
from functools import reduce
from typing import Iterable, Mapping, Sequence

import numpy as np

from simulation.assets import BellOutcome, CharlieBit
from simulation.errors import InvalidInput, MissingTableEntry, UncorrectableBranch
from simulation.statevector import (
    ALGEBRA_ATOL,
    IDENTITY,
    PAULI_X,
    PAULI_XZ,
    PAULI_Z,
    QubitLabel,
    StateVector,
    UnitaryMatrix,
    apply_unitary,
)

logger = logging.getLogger(__name__)

# Lexicographic search order for corrections.
PAULI_ORDER = ("I", "X", "Z", "XZ")

_PAULI_MATRICES = {
    "I": IDENTITY.matrix,
    "X": PAULI_X.matrix,
    "Z": PAULI_Z.matrix,
    "XZ": PAULI_XZ.matrix,
}


@dataclass(frozen=True)
class SignedPauli:
    letter: str
    sign: int = 1

    def __post_init__(self) -> None:
        if self.letter not in _PAULI_MATRICES:
            raise InvalidInput(f"unknown Pauli {self.letter!r} (expected one of {', '.join(PAULI_ORDER)})")
        if self.sign not in (1, -1):
            raise InvalidInput(f"sign must be +1 or -1, got {self.sign}")

    @property
    def matrix(self) -> np.ndarray:
        return self.sign * _PAULI_MATRICES[self.letter]

    def __neg__(self) -> SignedPauli:
        return SignedPauli(self.letter, -self.sign)

    def __str__(self) -> str:
        return f"-{self.letter}" if self.sign < 0 else self.letter

    @classmethod
    def parse(cls, text: str) -> SignedPauli:
        text = text.strip().strip("()").replace("−", "-")
        sign = 1
        if text and text[0] in "+-":
            sign = -1 if text[0] == "-" else 1
            text = text[1:]
        return cls(text, sign)


@dataclass(frozen=True)
class CorrectionOp:
    """Tensor product of signed Paulis; factor k acts on the k-th target qubit."""

    factors: tuple[SignedPauli, ...]

    def __post_init__(self) -> None:
        factors = tuple(self.factors)
        if not factors:
            raise InvalidInput("a correction needs at least one factor")
        object.__setattr__(self, "factors", factors)

    @classmethod
    def identity(cls, num_qubits: int) -> CorrectionOp:
        return cls(tuple(SignedPauli("I") for _ in range(num_qubits)))

    @classmethod
    def from_letters(cls, letters: Iterable[str]) -> CorrectionOp:
        return cls(tuple(SignedPauli(letter) for letter in letters))

    @classmethod
    def parse(cls, text: str) -> CorrectionOp:
        """Inverse of ``str``: ``"(-XZ)⊗I"``, ``"-I"``..."""
        return cls(tuple(SignedPauli.parse(part) for part in text.split("⊗")))

    @property
    def num_qubits(self) -> int:
        return len(self.factors)

    @property
    def sign(self) -> int:
        return reduce(lambda acc, f: acc * f.sign, self.factors, 1)

    @property
    def letters(self) -> tuple[str, ...]:
        return tuple(f.letter for f in self.factors)

    def matrix(self) -> np.ndarray:
        return reduce(np.kron, (f.matrix for f in self.factors))

    def unitary(self) -> UnitaryMatrix:
        return UnitaryMatrix(self.matrix())

    def apply(self, state: StateVector, targets: Sequence[QubitLabel]) -> StateVector:
        if len(targets) != self.num_qubits:
            raise InvalidInput(f"{self.num_qubits}-qubit correction given {len(targets)} targets")
        return apply_unitary(state, targets, self.unitary())

    def equivalent(self, other: CorrectionOp) -> bool:
        """Equal as operators up to global phase."""
        if other.num_qubits != self.num_qubits:
            return False
        overlap = abs(np.trace(self.matrix().conj().T @ other.matrix()))
        return bool(abs(overlap - 2**self.num_qubits) < ALGEBRA_ATOL)

    def __str__(self) -> str:
        if self.num_qubits == 1:
            return str(self.factors[0])
        return "⊗".join(f"({f})" if f.sign < 0 else str(f) for f in self.factors)


# ── Teleport direction ────────────────────────────────────────────────

# (Bell outcome, Charlie bit) -> recovery on the matching B qubit, as published.
PUBLISHED_TELEPORT_CORRECTIONS: Mapping[tuple[BellOutcome, CharlieBit], SignedPauli] = {
    (BellOutcome.PHI_PLUS, CharlieBit.ZERO): SignedPauli("I"),
    (BellOutcome.PHI_MINUS, CharlieBit.ZERO): SignedPauli("Z"),
    (BellOutcome.PSI_PLUS, CharlieBit.ZERO): SignedPauli("X"),
    (BellOutcome.PSI_MINUS, CharlieBit.ZERO): SignedPauli("XZ", -1),
    (BellOutcome.PHI_PLUS, CharlieBit.ONE): SignedPauli("XZ", -1),
    (BellOutcome.PHI_MINUS, CharlieBit.ONE): SignedPauli("X"),
    (BellOutcome.PSI_PLUS, CharlieBit.ONE): SignedPauli("Z", -1),
    (BellOutcome.PSI_MINUS, CharlieBit.ONE): SignedPauli("I", -1),
}


def select_teleport_correction(
    bell_outcomes: Sequence[BellOutcome], c: CharlieBit | int
) -> CorrectionOp:
    """Tensor product of per-pair table entries, ordered B1..Bn."""
    c = CharlieBit(c)
    return CorrectionOp(tuple(PUBLISHED_TELEPORT_CORRECTIONS[(b, c)] for b in bell_outcomes))


# ── Tables ────────────────────────────────────────────────────────────


class Provenance(str, Enum):
    DERIVED = "derived"
    PUBLISHED = "published"


def teleport_key(bell_outcomes: Sequence[BellOutcome], c: CharlieBit | int) -> str:
    return f"{','.join(b.value for b in bell_outcomes)}|{int(c)}"


def rsp_key(amp_outcomes: Sequence[int], phase_outcomes: Sequence[int], c: CharlieBit | int) -> str:
    """``"1,2|2,1|0"``: amplitude outcomes, phase outcomes, Charlie bit."""
    amp = ",".join(str(o) for o in amp_outcomes)
    phase = ",".join(str(o) for o in phase_outcomes)
    return f"{amp}|{phase}|{int(c)}"


@dataclass(frozen=True)
class CorrectionTableArtifact:
    """Outcome key -> correction; ``None`` marks an uncorrectable branch."""

    provenance: Provenance
    direction: str
    entries: Mapping[str, CorrectionOp | None] = field(default_factory=dict)

    def __contains__(self, key: str) -> bool:
        return key in self.entries

    def __len__(self) -> int:
        return len(self.entries)

    @property
    def uncorrectable(self) -> list[str]:
        return [key for key, op in self.entries.items() if op is None]

    def to_dict(self) -> dict:
        return {
            "provenance": self.provenance.value,
            "direction": self.direction,
            "entries": {
                key: (str(op) if op is not None else None)
                for key, op in sorted(self.entries.items())
            },
        }

    @classmethod
    def from_dict(cls, data: dict) -> CorrectionTableArtifact:
        try:
            entries = {
                key: (CorrectionOp.parse(text) if text is not None else None)
                for key, text in data["entries"].items()
            }
            return cls(Provenance(data["provenance"]), data["direction"], entries)
        except (KeyError, ValueError) as exc:
            raise InvalidInput(f"malformed correction table: {exc}") from exc


def published_teleport_table() -> CorrectionTableArtifact:
    entries = {
        teleport_key((bell,), c): CorrectionOp((pauli,))
        for (bell, c), pauli in PUBLISHED_TELEPORT_CORRECTIONS.items()
    }
    return CorrectionTableArtifact(Provenance.PUBLISHED, "teleport", entries)


def select_rsp_correction(
    amp_outcomes: Sequence[int],
    phase_outcomes: Sequence[int],
    c: CharlieBit | int,
    table: CorrectionTableArtifact,
) -> CorrectionOp:
    key = rsp_key(amp_outcomes, phase_outcomes, c)
    if key not in table:
        raise MissingTableEntry(f"no remote-preparation correction for branch {key}")
    op = table.entries[key]
    if op is None:
        raise UncorrectableBranch(f"no signed Pauli product restores the prepared state on branch {key}")
    return op
