"""
Dense statevector engine.

A register is an ordered tuple of QubitLabel. Amplitude indices are big-endian
in register order: the first label is the most significant bit. Measured
qubits are removed from the register on collapse, and every comparison of
states is taken modulo global phase.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from enum import Enum
from typing import Iterable, Sequence

import numpy as np

from simulation.errors import (
    DimensionMismatch,
    DuplicateQubit,
    InvalidInput,
    NotSeparable,
    UnknownQubit,
    ZeroProbabilityOutcome,
)

logger = logging.getLogger(__name__)

# Conservation laws (norms, probability sums).
NORM_ATOL = 1e-12
# Algebraic identities (unitarity, orthonormality, state equality).
ALGEBRA_ATOL = 1e-10
# Outcomes below this probability do not exist.
ZERO_PROBABILITY = 1e-14

Amplitude = complex


class Role(str, Enum):
    """Which group of the protocol a qubit belongs to."""

    ALICE_INPUT = "a"
    ALICE_CHANNEL = "A"
    BOB_CHANNEL = "B"
    BOB_INPUT = "b"
    ANCILLA = "e"
    CHARLIE = "C"
    SCRATCH = "q"


@dataclass(frozen=True, order=True)
class QubitLabel:
    role: Role
    index: int = 1

    def __str__(self) -> str:
        if self.role is Role.CHARLIE:
            return "C"
        return f"{self.role.value}{self.index}"

    @classmethod
    def parse(cls, text: str) -> QubitLabel:
        """Parse labels such as ``"B2"``, ``"e1"`` or ``"C"``."""
        text = text.strip()
        if text == "C":
            return cls(Role.CHARLIE)
        try:
            return cls(Role(text[0]), int(text[1:]))
        except (ValueError, IndexError) as exc:
            raise InvalidInput(f"not a qubit label: {text!r}") from exc


def qubit_labels(role: Role, indices: Iterable[int]) -> tuple[QubitLabel, ...]:
    return tuple(QubitLabel(role, i) for i in indices)


def scratch_register(num_qubits: int) -> tuple[QubitLabel, ...]:
    """Labels q0, q1, ... for free-standing registers."""
    return qubit_labels(Role.SCRATCH, range(num_qubits))


def _is_power_of_two(value: int) -> bool:
    return value > 0 and value & (value - 1) == 0


# ── Domain types ──────────────────────────────────────────────────────


@dataclass(frozen=True, eq=False)
class StateVector:
    """Normalized pure state over an ordered register. Immutable."""

    labels: tuple[QubitLabel, ...]
    amps: np.ndarray

    def __post_init__(self) -> None:
        labels = tuple(self.labels)
        amps = np.array(self.amps, dtype=np.complex128).reshape(-1)
        if len(set(labels)) != len(labels):
            raise DuplicateQubit(f"register has repeated labels: {_fmt(labels)}")
        if amps.size != 2 ** len(labels):
            raise DimensionMismatch(
                f"{len(labels)} qubits need {2 ** len(labels)} amplitudes, got {amps.size}"
            )
        if not np.all(np.isfinite(amps)):
            raise InvalidInput("amplitudes must be finite")
        norm = float(np.vdot(amps, amps).real)
        if abs(norm - 1.0) > NORM_ATOL:
            raise InvalidInput(f"state is not normalized (norm^2 = {norm:.15g})")
        amps.flags.writeable = False
        object.__setattr__(self, "labels", labels)
        object.__setattr__(self, "amps", amps)

    @classmethod
    def from_amplitudes(
        cls,
        amps: Sequence[complex] | np.ndarray,
        labels: Sequence[QubitLabel] | None = None,
        *,
        normalize: bool = False,
    ) -> StateVector:
        arr = np.asarray(amps, dtype=np.complex128).reshape(-1)
        if labels is None:
            if not _is_power_of_two(arr.size):
                raise DimensionMismatch(f"{arr.size} amplitudes is not a power of two")
            labels = scratch_register(arr.size.bit_length() - 1)
        if normalize:
            norm = np.linalg.norm(arr)
            if norm == 0:
                raise InvalidInput("cannot normalize the zero vector")
            arr = arr / norm
        return cls(tuple(labels), arr)

    @classmethod
    def basis_state(
        cls, bits: str, labels: Sequence[QubitLabel] | None = None
    ) -> StateVector:
        """Computational basis state from a bit string, e.g. ``"01"``."""
        amps = np.zeros(2 ** len(bits), dtype=np.complex128)
        amps[int(bits, 2) if bits else 0] = 1.0
        return cls(tuple(labels) if labels is not None else scratch_register(len(bits)), amps)

    @property
    def num_qubits(self) -> int:
        return len(self.labels)

    def index_of(self, label: QubitLabel) -> int:
        try:
            return self.labels.index(label)
        except ValueError:
            raise UnknownQubit(
                f"qubit {label} is not in register [{_fmt(self.labels)}]"
            ) from None

    def positions(self, qubits: Sequence[QubitLabel]) -> list[int]:
        if len(set(qubits)) != len(qubits):
            raise DuplicateQubit(f"qubits must be distinct: {_fmt(qubits)}")
        return [self.index_of(q) for q in qubits]

    def phase_normalized(self) -> StateVector:
        """Same state with its first nonzero amplitude made real-positive."""
        nonzero = np.flatnonzero(np.abs(self.amps) > ALGEBRA_ATOL)
        if nonzero.size == 0:
            return self
        first = self.amps[nonzero[0]]
        return StateVector(self.labels, self.amps * (abs(first) / first))

    def allclose(self, other: StateVector, atol: float = ALGEBRA_ATOL) -> bool:
        """Elementwise equality up to global phase."""
        if other.num_qubits != self.num_qubits:
            return False
        return bool(
            np.allclose(
                self.phase_normalized().amps,
                other.phase_normalized().amps,
                rtol=0.0,
                atol=atol,
            )
        )

    def __repr__(self) -> str:
        return f"StateVector([{_fmt(self.labels)}], {np.array2string(self.amps, precision=4)})"


@dataclass(frozen=True, eq=False)
class UnitaryMatrix:
    matrix: np.ndarray

    def __post_init__(self) -> None:
        m = np.array(self.matrix, dtype=np.complex128)
        if m.ndim != 2 or m.shape[0] != m.shape[1] or not _is_power_of_two(m.shape[0]):
            raise DimensionMismatch(f"unitary must be square with power-of-two size, got {m.shape}")
        if not np.allclose(m @ m.conj().T, np.eye(m.shape[0]), rtol=0.0, atol=ALGEBRA_ATOL):
            raise InvalidInput("matrix is not unitary")
        m.flags.writeable = False
        object.__setattr__(self, "matrix", m)

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    @property
    def num_qubits(self) -> int:
        return self.dim.bit_length() - 1

    def dagger(self) -> UnitaryMatrix:
        return UnitaryMatrix(self.matrix.conj().T)

    def __matmul__(self, other: UnitaryMatrix) -> UnitaryMatrix:
        return UnitaryMatrix(self.matrix @ other.matrix)

    @classmethod
    def kron(cls, *factors: UnitaryMatrix | np.ndarray) -> UnitaryMatrix:
        result = np.eye(1, dtype=np.complex128)
        for factor in factors:
            result = np.kron(result, factor.matrix if isinstance(factor, UnitaryMatrix) else factor)
        return cls(result)


@dataclass(frozen=True, eq=False)
class OrthonormalBasis:
    """Measurement basis; row ``i`` of ``vectors`` is the ket of outcome ``i``."""

    vectors: np.ndarray
    names: tuple[str, ...] = ()

    def __post_init__(self) -> None:
        v = np.array(self.vectors, dtype=np.complex128)
        if v.ndim != 2 or v.shape[0] != v.shape[1] or not _is_power_of_two(v.shape[0]):
            raise DimensionMismatch(f"basis must hold dim vectors of dim entries, got {v.shape}")
        gram = v.conj() @ v.T
        if not np.allclose(gram, np.eye(v.shape[0]), rtol=0.0, atol=ALGEBRA_ATOL):
            raise InvalidInput("basis vectors are not orthonormal")
        if self.names and len(self.names) != v.shape[0]:
            raise InvalidInput(f"expected {v.shape[0]} outcome names, got {len(self.names)}")
        v.flags.writeable = False
        object.__setattr__(self, "vectors", v)
        object.__setattr__(self, "names", tuple(self.names))

    @classmethod
    def computational(cls, num_qubits: int = 1) -> OrthonormalBasis:
        dim = 2**num_qubits
        names = tuple(format(i, f"0{num_qubits}b") for i in range(dim))
        return cls(np.eye(dim), names)

    @property
    def dim(self) -> int:
        return self.vectors.shape[0]

    @property
    def num_qubits(self) -> int:
        return self.dim.bit_length() - 1

    def __len__(self) -> int:
        return self.dim

    def vector(self, index: int) -> np.ndarray:
        return self.vectors[index]

    def name(self, index: int) -> str:
        return self.names[index] if self.names else str(index)


# ── Gates ─────────────────────────────────────────────────────────────

IDENTITY = UnitaryMatrix(np.eye(2))
PAULI_X = UnitaryMatrix(np.array([[0, 1], [1, 0]]))
PAULI_Z = UnitaryMatrix(np.array([[1, 0], [0, -1]]))
# Matrix product X·Z: Z acts first.
PAULI_XZ = PAULI_X @ PAULI_Z
CNOT = UnitaryMatrix(
    np.array(
        [
            [1, 0, 0, 0],
            [0, 1, 0, 0],
            [0, 0, 0, 1],
            [0, 0, 1, 0],
        ]
    )
)


# ── Measurement modes ─────────────────────────────────────────────────


@dataclass(frozen=True)
class Enumerate:
    """Return every outcome with nonzero probability."""


@dataclass(frozen=True)
class Sample:
    """Draw one outcome. ``seed`` may also be a live Generator to share a stream."""

    seed: int | np.random.SeedSequence | np.random.Generator | None = None

    def generator(self) -> np.random.Generator:
        return np.random.default_rng(self.seed)


@dataclass(frozen=True)
class Forced:
    outcome: int


MeasurementMode = Enumerate | Sample | Forced


@dataclass(frozen=True)
class MeasurementOutcome:
    index: int
    probability: float
    collapsed: StateVector
    name: str


# ── Operations ────────────────────────────────────────────────────────


def _as_matrix(
    state: StateVector, qubits: Sequence[QubitLabel]
) -> tuple[np.ndarray, list[int], list[int]]:
    """Reshape amplitudes to (targets, rest) with targets in the given order."""
    positions = state.positions(qubits)
    rest = [i for i in range(state.num_qubits) if i not in positions]
    perm = positions + rest
    tensor = state.amps.reshape((2,) * state.num_qubits)
    return np.transpose(tensor, perm).reshape(2 ** len(positions), -1), perm, rest


def _from_matrix(matrix: np.ndarray, perm: list[int], num_qubits: int) -> np.ndarray:
    tensor = matrix.reshape((2,) * num_qubits)
    return np.transpose(tensor, np.argsort(perm)).reshape(-1)


def tensor_product(a: StateVector, b: StateVector) -> StateVector:
    """Register ``a`` followed by register ``b``."""
    return StateVector(a.labels + b.labels, np.kron(a.amps, b.amps))


def apply_unitary(
    state: StateVector,
    targets: Sequence[QubitLabel],
    u: UnitaryMatrix | np.ndarray,
) -> StateVector:
    """Apply ``u`` to ``targets`` (first target = most significant bit of ``u``)."""
    if not isinstance(u, UnitaryMatrix):
        u = UnitaryMatrix(u)
    targets = tuple(targets)
    if u.dim != 2 ** len(targets):
        raise DimensionMismatch(
            f"{u.dim}x{u.dim} unitary cannot act on {len(targets)} qubit(s)"
        )
    matrix, perm, _ = _as_matrix(state, targets)
    amps = _from_matrix(u.matrix @ matrix, perm, state.num_qubits)
    # UnitaryMatrix is only unitary to ALGEBRA_ATOL; StateVector wants NORM_ATOL.
    return StateVector(state.labels, amps / np.linalg.norm(amps))


def apply_cnot(state: StateVector, control: QubitLabel, target: QubitLabel) -> StateVector:
    if control == target:
        raise DuplicateQubit(f"control and target are both {control}")
    return apply_unitary(state, (control, target), CNOT)


def measure_subsystem(
    state: StateVector,
    qubits: Sequence[QubitLabel],
    basis: OrthonormalBasis,
    mode: MeasurementMode = Enumerate(),
) -> list[MeasurementOutcome]:
    """
    Projective measurement of ``qubits`` in ``basis``.

    Collapsed states are renormalized and no longer contain the measured
    qubits; the remaining qubits keep their relative order.
    """
    qubits = tuple(qubits)
    if basis.dim != 2 ** len(qubits):
        raise DimensionMismatch(
            f"{basis.dim}-dimensional basis cannot measure {len(qubits)} qubit(s)"
        )
    matrix, _, rest = _as_matrix(state, qubits)
    projected = basis.vectors.conj() @ matrix
    probabilities = np.sum(np.abs(projected) ** 2, axis=1)
    remaining = tuple(state.labels[i] for i in rest)

    def outcome(index: int) -> MeasurementOutcome:
        p = float(probabilities[index])
        return MeasurementOutcome(
            index=index,
            probability=p,
            collapsed=StateVector(remaining, projected[index] / np.sqrt(p)),
            name=basis.name(index),
        )

    match mode:
        case Forced(outcome=index):
            if not 0 <= index < basis.dim:
                raise InvalidInput(f"outcome {index} outside 0..{basis.dim - 1}")
            if probabilities[index] < ZERO_PROBABILITY:
                raise ZeroProbabilityOutcome(
                    f"outcome {basis.name(index)} on [{_fmt(qubits)}] has probability "
                    f"{probabilities[index]:.3e}"
                )
            return [outcome(index)]
        case Sample():
            index = int(mode.generator().choice(basis.dim, p=probabilities / probabilities.sum()))
            return [outcome(index)]
        case Enumerate():
            return [outcome(i) for i in range(basis.dim) if probabilities[i] > ZERO_PROBABILITY]
    raise TypeError(f"unsupported measurement mode: {mode!r}")


def fidelity(a: StateVector, b: StateVector) -> float:
    """|<a|b>|^2, insensitive to global phase."""
    if a.num_qubits != b.num_qubits:
        raise DimensionMismatch(f"cannot compare {a.num_qubits}- and {b.num_qubits}-qubit states")
    return float(abs(np.vdot(a.amps, b.amps)) ** 2)


def extract_subsystem(state: StateVector, qubits: Sequence[QubitLabel]) -> StateVector:
    """
    Pure state of ``qubits`` when the register factorizes as (qubits) ⊗ (rest).

    Raises NotSeparable when the Schmidt residual exceeds ALGEBRA_ATOL. The
    result is phase-normalized.
    """
    qubits = tuple(qubits)
    matrix, _, _ = _as_matrix(state, qubits)
    u, s, _ = np.linalg.svd(matrix, full_matrices=False)
    residual = float(np.sqrt(np.sum(s[1:] ** 2)))
    if residual > ALGEBRA_ATOL:
        raise NotSeparable(
            f"[{_fmt(qubits)}] is entangled with the rest of the register "
            f"(Schmidt residual {residual:.3e})"
        )
    return StateVector(qubits, u[:, 0]).phase_normalized()


def _fmt(labels: Iterable[QubitLabel]) -> str:
    return ",".join(str(label) for label in labels)
