"""
The six protocol steps as pure functions over the shared register.

Register layout through a run (n = 1 shown):

    initial   a1, A1, B1, A2, B2, C
    step 1    B1, A2, B2, C                 (a_k, A_k measured and removed)
    step 2    B1, A2, B2, C, e1
    step 3    same register, CNOT(B2 -> e1)
    step 4    B1, A2, C, e1                 (B_{n+k} measured)
    step 5    B1, A2, C                     (e_k measured)
    step 6    B1, A2                        (C measured)

Measurement outcomes are 1-based for the amplitude and phase steps, as in
the protocol description; Bell outcomes and the Charlie bit are enums.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from simulation.assets import (
    CHARLIE_QUBIT,
    AliceState,
    BellOutcome,
    BobKnownState,
    BobMode,
    CharlieBit,
    amplitude_basis,
    amplitude_basis_general,
    ancilla_labels,
    bell_basis,
    phase_basis,
    phase_basis_general,
    state_of,
)
from simulation.errors import DimensionMismatch, InvalidInput
from simulation.statevector import (
    Forced,
    MeasurementMode,
    OrthonormalBasis,
    QubitLabel,
    Role,
    Sample,
    StateVector,
    apply_cnot,
    measure_subsystem,
    tensor_product,
)

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class OutcomePolicy:
    """
    How each measuring step picks its outcome.

    A step whose field is set is forced to that outcome; a step whose field is
    ``None`` is sampled from one generator seeded with ``seed``.
    """

    seed: int | np.random.SeedSequence | None = 0
    bell: Optional[tuple[BellOutcome, ...]] = None
    amplitude: Optional[tuple[int, ...]] = None
    phase: Optional[tuple[int, ...]] = None
    charlie: Optional[CharlieBit] = None

    def __post_init__(self) -> None:
        if self.bell is not None:
            object.__setattr__(self, "bell", tuple(BellOutcome(b) for b in self.bell))
        for name in ("amplitude", "phase"):
            value = getattr(self, name)
            if value is not None:
                object.__setattr__(self, name, tuple(int(v) for v in value))
        if self.charlie is not None:
            object.__setattr__(self, "charlie", CharlieBit(self.charlie))

    @classmethod
    def sample(cls, seed: int | np.random.SeedSequence | None = 0) -> OutcomePolicy:
        return cls(seed=seed)

    @classmethod
    def forced(
        cls,
        bell: Sequence[BellOutcome],
        amplitude: Sequence[int],
        phase: Sequence[int],
        charlie: CharlieBit | int,
    ) -> OutcomePolicy:
        return cls(seed=None, bell=tuple(bell), amplitude=tuple(amplitude), phase=tuple(phase), charlie=charlie)

    @property
    def is_forced(self) -> bool:
        return None not in (self.bell, self.amplitude, self.phase, self.charlie)

    def generator(self) -> np.random.Generator:
        return np.random.default_rng(self.seed)


@dataclass(frozen=True)
class StepResult:
    outcomes: tuple
    state: StateVector
    probability: float


def _mode(forced_index: Optional[int], rng: np.random.Generator) -> MeasurementMode:
    return Forced(forced_index) if forced_index is not None else Sample(rng)


def _count(state: StateVector, role: Role) -> int:
    return sum(1 for label in state.labels if label.role is role)


def _check_forced(values: Optional[tuple], expected: int, what: str) -> None:
    if values is not None and len(values) != expected:
        raise InvalidInput(f"forced {what} outcomes need {expected} entries, got {len(values)}")


def _measure(
    state: StateVector,
    qubits: Sequence[QubitLabel],
    basis: OrthonormalBasis,
    mode: MeasurementMode,
):
    (outcome,) = measure_subsystem(state, qubits, basis, mode)
    logger.debug(
        "measured [%s] -> %s (p=%.6g)",
        ",".join(str(q) for q in qubits),
        outcome.name,
        outcome.probability,
    )
    return outcome


def assemble_initial_state(alice: AliceState, channel: StateVector) -> StateVector:
    """|χ⟩_a ⊗ channel, register a1..an, A1,B1,...,A2n,B2n, C."""
    if channel.num_qubits != 4 * alice.n + 1:
        raise DimensionMismatch(
            f"n={alice.n} needs a {4 * alice.n + 1}-qubit channel, got {channel.num_qubits} qubits"
        )
    return tensor_product(state_of(alice), channel)


def step1_alice_bell_measurement(
    state: StateVector,
    policy: OutcomePolicy,
    rng: Optional[np.random.Generator] = None,
) -> StepResult:
    """Alice measures each (a_k, A_k) pair in the Bell basis, k = 1..n."""
    n = _count(state, Role.ALICE_INPUT)
    _check_forced(policy.bell, n, "Bell")
    rng = rng if rng is not None else policy.generator()
    outcomes: list[BellOutcome] = []
    probability = 1.0
    for k in range(1, n + 1):
        forced = policy.bell[k - 1].index if policy.bell is not None else None
        pair = (QubitLabel(Role.ALICE_INPUT, k), QubitLabel(Role.ALICE_CHANNEL, k))
        outcome = _measure(state, pair, bell_basis(), _mode(forced, rng))
        outcomes.append(BellOutcome.from_index(outcome.index))
        probability *= outcome.probability
        state = outcome.collapsed
    return StepResult(tuple(outcomes), state, probability)


def step2_introduce_ancillas(state: StateVector) -> StateVector:
    """Append e1..en, each in |0⟩."""
    n = _count(state, Role.BOB_CHANNEL) // 2
    return tensor_product(state, StateVector.basis_state("0" * n, ancilla_labels(n)))


def step3_bob_cnot(state: StateVector) -> StateVector:
    """CNOT with control B_{n+k} and target e_k for k = 1..n."""
    n = _count(state, Role.ANCILLA)
    for k in range(1, n + 1):
        state = apply_cnot(state, QubitLabel(Role.BOB_CHANNEL, n + k), QubitLabel(Role.ANCILLA, k))
    return state


def _bob_block(n: int) -> tuple[QubitLabel, ...]:
    return tuple(QubitLabel(Role.BOB_CHANNEL, n + k) for k in range(1, n + 1))


def step4_amplitude_measurement(
    state: StateVector,
    bob: BobKnownState,
    policy: OutcomePolicy,
    rng: Optional[np.random.Generator] = None,
) -> StepResult:
    """
    Bob measures B_{n+1}..B_{2n} in bases built from Bob's β coefficients.

    Product mode yields one outcome per qubit; General mode measures the
    whole block and yields a single outcome in 1..2^n.
    """
    n = bob.n
    rng = rng if rng is not None else policy.generator()
    block = _bob_block(n)

    if bob.mode is BobMode.GENERAL:
        _check_forced(policy.amplitude, 1, "amplitude")
        forced = policy.amplitude[0] - 1 if policy.amplitude is not None else None
        outcome = _measure(state, block, amplitude_basis_general(bob.betas), _mode(forced, rng))
        return StepResult((outcome.index + 1,), outcome.collapsed, outcome.probability)

    _check_forced(policy.amplitude, n, "amplitude")
    outcomes: list[int] = []
    probability = 1.0
    for k, (qubit, params) in enumerate(zip(block, bob.qubits)):
        forced = policy.amplitude[k] - 1 if policy.amplitude is not None else None
        outcome = _measure(
            state, (qubit,), amplitude_basis(params.beta0, params.beta1), _mode(forced, rng)
        )
        outcomes.append(outcome.index + 1)
        probability *= outcome.probability
        state = outcome.collapsed
    return StepResult(tuple(outcomes), state, probability)


def step5_phase_measurement(
    state: StateVector,
    bob: BobKnownState,
    step4_outcomes: Sequence[int],
    policy: OutcomePolicy,
    rng: Optional[np.random.Generator] = None,
) -> StepResult:
    """Bob measures each e_k in the phase basis selected by the step-4 outcome."""
    n = bob.n
    rng = rng if rng is not None else policy.generator()
    ancillas = ancilla_labels(n)

    if bob.mode is BobMode.GENERAL:
        _check_forced(policy.phase, 1, "phase")
        forced = policy.phase[0] - 1 if policy.phase is not None else None
        basis = phase_basis_general(bob.thetas, step4_outcomes[0] - 1)
        outcome = _measure(state, ancillas, basis, _mode(forced, rng))
        return StepResult((outcome.index + 1,), outcome.collapsed, outcome.probability)

    _check_forced(policy.phase, n, "phase")
    outcomes: list[int] = []
    probability = 1.0
    for k, (qubit, params) in enumerate(zip(ancillas, bob.qubits)):
        forced = policy.phase[k] - 1 if policy.phase is not None else None
        basis = phase_basis(params.theta, step4_outcomes[k])
        outcome = _measure(state, (qubit,), basis, _mode(forced, rng))
        outcomes.append(outcome.index + 1)
        probability *= outcome.probability
        state = outcome.collapsed
    return StepResult(tuple(outcomes), state, probability)


def step6_charlie_measurement(
    state: StateVector,
    policy: OutcomePolicy,
    rng: Optional[np.random.Generator] = None,
) -> StepResult:
    """Charlie measures C in {|0⟩, |1⟩}."""
    rng = rng if rng is not None else policy.generator()
    forced = int(policy.charlie) if policy.charlie is not None else None
    outcome = _measure(state, (CHARLIE_QUBIT,), OrthonormalBasis.computational(1), _mode(forced, rng))
    return StepResult((CharlieBit(outcome.index),), outcome.collapsed, outcome.probability)
