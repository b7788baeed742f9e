"""
Brute-force verification, independent of the engine's step functions.

The walker rebuilds every measurement of the protocol directly from the
assets and explores each nonzero-probability outcome depth-first. Corrections
are found by exhaustive search over unsigned Pauli products; global phase is
always quotiented out before comparing states.
"""

from __future__ import annotations

import itertools
import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from functools import lru_cache
from typing import Callable, Iterator, Optional, Sequence, TypeVar

import numpy as np
import pandas as pd

from simulation.assets import (
    CHARLIE_QUBIT,
    AliceState,
    BellOutcome,
    BobKnownState,
    BobMode,
    BobQubit,
    ChannelSignConvention,
    CharlieBit,
    amplitude_basis,
    amplitude_basis_general,
    ancilla_labels,
    bell_basis,
    build_channel,
    phase_basis,
    phase_basis_general,
    random_alice,
    rsp_target_labels,
    state_of,
    teleport_target_labels,
)
from simulation.corrections import (
    PAULI_ORDER,
    CorrectionOp,
    CorrectionTableArtifact,
    Provenance,
    rsp_key,
    select_teleport_correction,
    teleport_key,
)
from simulation.errors import DimensionMismatch, InvalidInput, ResourceBound
from simulation.statevector import (
    ALGEBRA_ATOL,
    NORM_ATOL,
    Enumerate,
    Forced,
    OrthonormalBasis,
    QubitLabel,
    Role,
    StateVector,
    apply_cnot,
    extract_subsystem,
    fidelity,
    measure_subsystem,
    tensor_product,
)

logger = logging.getLogger(__name__)

MAX_ENUMERATION_N = 3
MAX_SEARCH_QUBITS = 3
DEFAULT_SEED = 7

T = TypeVar("T")

Stage = tuple[tuple[QubitLabel, ...], OrthonormalBasis]


# ── Reports ───────────────────────────────────────────────────────────


@dataclass(frozen=True)
class BranchKey:
    bell: tuple[BellOutcome, ...]
    amplitude: tuple[int, ...]
    phase: tuple[int, ...]
    charlie: CharlieBit

    @property
    def sort_key(self) -> tuple:
        return (tuple(b.index for b in self.bell), self.amplitude, self.phase, int(self.charlie))

    @property
    def rsp_key(self) -> str:
        return rsp_key(self.amplitude, self.phase, self.charlie)

    def __str__(self) -> str:
        return f"{','.join(b.value for b in self.bell)}|{self.rsp_key}"

    def to_dict(self) -> dict:
        return {
            "bell": [b.value for b in self.bell],
            "amplitude": list(self.amplitude),
            "phase": list(self.phase),
            "charlie": int(self.charlie),
        }


@dataclass(frozen=True)
class BranchReport:
    key: BranchKey
    probability: float
    teleport_correction: Optional[CorrectionOp]
    rsp_correction: Optional[CorrectionOp]
    teleport_fidelity: float
    rsp_fidelity: float
    table_agrees: bool

    def __post_init__(self) -> None:
        if not 0.0 <= self.probability <= 1.0 + NORM_ATOL:
            raise InvalidInput(f"branch probability {self.probability} outside [0, 1]")
        for value in (self.teleport_fidelity, self.rsp_fidelity):
            if not 0.0 <= value <= 1.0 + NORM_ATOL:
                raise InvalidInput(f"fidelity {value} outside [0, 1]")

    @property
    def corrected(self) -> bool:
        return (
            self.teleport_fidelity >= 1.0 - ALGEBRA_ATOL
            and self.rsp_fidelity >= 1.0 - ALGEBRA_ATOL
        )

    def to_dict(self) -> dict:
        return {
            "key": str(self.key),
            **self.key.to_dict(),
            "probability": self.probability,
            "teleport_correction": _op_str(self.teleport_correction),
            "rsp_correction": _op_str(self.rsp_correction),
            "teleport_fidelity": self.teleport_fidelity,
            "rsp_fidelity": self.rsp_fidelity,
            "table_agrees": self.table_agrees,
        }

    def to_row(self) -> dict:
        return {
            "key": str(self.key),
            "bell_1": self.key.bell[0].value,
            "charlie": int(self.key.charlie),
            "probability": self.probability,
            "teleport_fidelity": self.teleport_fidelity,
            "rsp_fidelity": self.rsp_fidelity,
            "teleport_correctable": self.teleport_correction is not None,
            "rsp_correctable": self.rsp_correction is not None,
            "table_agrees": self.table_agrees,
        }


def _op_str(op: Optional[CorrectionOp]) -> Optional[str]:
    return str(op) if op is not None else None


# ── Branch walker ─────────────────────────────────────────────────────


@dataclass(frozen=True)
class _Filter:
    """0-based outcome indices to force; ``None`` enumerates that step."""

    bell: Optional[tuple[int, ...]] = None
    amplitude: Optional[tuple[int, ...]] = None
    phase: Optional[tuple[int, ...]] = None
    charlie: Optional[int] = None


@dataclass(frozen=True)
class _Leaf:
    key: BranchKey
    probability: float
    state: StateVector


def _measure_sequence(
    state: StateVector,
    stages: Sequence[Stage],
    forced: Optional[Sequence[int]] = None,
) -> Iterator[tuple[tuple[int, ...], float, StateVector]]:
    """Depth-first over measurement stages; yields (indices, probability, state)."""
    if not stages:
        yield (), 1.0, state
        return
    (qubits, basis), rest = stages[0], stages[1:]
    mode = Forced(forced[0]) if forced is not None else Enumerate()
    tail_forced = forced[1:] if forced is not None else None
    for outcome in measure_subsystem(state, qubits, basis, mode):
        for tail, p, collapsed in _measure_sequence(outcome.collapsed, rest, tail_forced):
            yield (outcome.index, *tail), outcome.probability * p, collapsed


def _bob_block(n: int) -> tuple[QubitLabel, ...]:
    return tuple(QubitLabel(Role.BOB_CHANNEL, n + k) for k in range(1, n + 1))


def _bell_stages(n: int) -> list[Stage]:
    return [
        ((QubitLabel(Role.ALICE_INPUT, k), QubitLabel(Role.ALICE_CHANNEL, k)), bell_basis())
        for k in range(1, n + 1)
    ]


def _amplitude_stages(bob: BobKnownState) -> list[Stage]:
    block = _bob_block(bob.n)
    if bob.mode is BobMode.GENERAL:
        return [(block, amplitude_basis_general(bob.betas))]
    return [((q,), amplitude_basis(p.beta0, p.beta1)) for q, p in zip(block, bob.qubits)]


def _phase_stages(bob: BobKnownState, amplitude: Sequence[int]) -> list[Stage]:
    """``amplitude`` holds 0-based outcome indices of the amplitude stage."""
    ancillas = ancilla_labels(bob.n)
    if bob.mode is BobMode.GENERAL:
        return [(ancillas, phase_basis_general(bob.thetas, amplitude[0]))]
    return [
        ((e,), phase_basis(p.theta, a + 1))
        for e, p, a in zip(ancillas, bob.qubits, amplitude)
    ]


_CHARLIE_STAGE: list[Stage] = [((CHARLIE_QUBIT,), OrthonormalBasis.computational(1))]


def _entangle_ancillas(state: StateVector, n: int) -> StateVector:
    state = tensor_product(state, StateVector.basis_state("0" * n, ancilla_labels(n)))
    for k in range(1, n + 1):
        state = apply_cnot(state, QubitLabel(Role.BOB_CHANNEL, n + k), QubitLabel(Role.ANCILLA, k))
    return state


def _after_bell(
    state: StateVector,
    bob: BobKnownState,
    bell: tuple[int, ...],
    p_bell: float,
    flt: _Filter,
) -> Iterator[_Leaf]:
    state = _entangle_ancillas(state, bob.n)
    charlie = (flt.charlie,) if flt.charlie is not None else None
    for amp, p_amp, s_amp in _measure_sequence(state, _amplitude_stages(bob), flt.amplitude):
        for phase, p_phase, s_phase in _measure_sequence(s_amp, _phase_stages(bob, amp), flt.phase):
            for (c,), p_c, final in _measure_sequence(s_phase, _CHARLIE_STAGE, charlie):
                key = BranchKey(
                    bell=tuple(BellOutcome.from_index(i) for i in bell),
                    amplitude=tuple(i + 1 for i in amp),
                    phase=tuple(i + 1 for i in phase),
                    charlie=CharlieBit(c),
                )
                yield _Leaf(key, p_bell * p_amp * p_phase * p_c, final)


def check_enumeration_size(n: int, max_n: int = MAX_ENUMERATION_N) -> None:
    """Raise ResourceBound when n is past the dense enumeration limit."""
    if n > max_n:
        raise ResourceBound(f"n={n} exceeds the dense-simulation bound n <= {max_n}")


def _walk(
    alice: AliceState,
    bob: BobKnownState,
    conv: ChannelSignConvention,
    visit: Callable[[_Leaf], T],
    flt: _Filter = _Filter(),
    workers: int = 1,
) -> list[T]:
    """Visit every branch leaf; results come back sorted by branch key."""
    if alice.n != bob.n:
        raise DimensionMismatch(f"Alice has n={alice.n} but Bob has n={bob.n}")
    check_enumeration_size(alice.n)
    initial = tensor_product(state_of(alice), build_channel(alice.n, conv))
    subtrees = list(_measure_sequence(initial, _bell_stages(alice.n), flt.bell))

    def expand(subtree: tuple[tuple[int, ...], float, StateVector]) -> list[tuple[BranchKey, T]]:
        bell, p_bell, state = subtree
        return [(leaf.key, visit(leaf)) for leaf in _after_bell(state, bob, bell, p_bell, flt)]

    if workers > 1 and len(subtrees) > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            chunks = list(pool.map(expand, subtrees))
    else:
        chunks = [expand(subtree) for subtree in subtrees]

    pairs = [pair for chunk in chunks for pair in chunk]
    pairs.sort(key=lambda pair: pair[0].sort_key)
    return [result for _, result in pairs]


# ── Correction search ─────────────────────────────────────────────────


@lru_cache(maxsize=None)
def _candidates(num_qubits: int) -> tuple[tuple[tuple[str, ...], np.ndarray], ...]:
    return tuple(
        (letters, CorrectionOp.from_letters(letters).matrix())
        for letters in itertools.product(PAULI_ORDER, repeat=num_qubits)
    )


def derive_correction_bruteforce(actual: StateVector, target: StateVector) -> Optional[CorrectionOp]:
    """
    First unsigned Pauli product P (I < X < Z < XZ per qubit) with
    |⟨target|P|actual⟩|² = 1 within ALGEBRA_ATOL, or None.
    """
    if actual.num_qubits != target.num_qubits:
        raise DimensionMismatch(
            f"cannot search corrections between {actual.num_qubits}- and {target.num_qubits}-qubit states"
        )
    if actual.num_qubits > MAX_SEARCH_QUBITS:
        raise ResourceBound(f"correction search is limited to {MAX_SEARCH_QUBITS} qubits")
    for letters, matrix in _candidates(actual.num_qubits):
        overlap = np.vdot(target.amps, matrix @ actual.amps)
        if abs(overlap) ** 2 >= 1.0 - ALGEBRA_ATOL:
            return CorrectionOp.from_letters(letters)
    return None


def _corrected_fidelity(actual: StateVector, op: Optional[CorrectionOp], target: StateVector) -> float:
    if op is not None:
        actual = op.apply(actual, actual.labels)
    return fidelity(actual, target)


# ── Exhaustive enumeration ────────────────────────────────────────────


def enumerate_all_branches(
    alice: AliceState,
    bob: BobKnownState,
    conv: ChannelSignConvention = ChannelSignConvention.SINGLET,
    workers: int = 1,
    max_n: int = MAX_ENUMERATION_N,
) -> list[BranchReport]:
    """Every nonzero-probability branch with oracle-derived corrections for both directions."""
    check_enumeration_size(alice.n, max_n)
    n = alice.n
    alice_target, bob_target = state_of(alice), state_of(bob)

    def visit(leaf: _Leaf) -> BranchReport:
        teleported = extract_subsystem(leaf.state, teleport_target_labels(n))
        prepared = extract_subsystem(leaf.state, rsp_target_labels(n))
        teleport_op = derive_correction_bruteforce(teleported, alice_target)
        rsp_op = derive_correction_bruteforce(prepared, bob_target)
        published = select_teleport_correction(leaf.key.bell, leaf.key.charlie)
        return BranchReport(
            key=leaf.key,
            probability=leaf.probability,
            teleport_correction=teleport_op,
            rsp_correction=rsp_op,
            teleport_fidelity=_corrected_fidelity(teleported, teleport_op, alice_target),
            rsp_fidelity=_corrected_fidelity(prepared, rsp_op, bob_target),
            table_agrees=teleport_op is not None and published.equivalent(teleport_op),
        )

    reports = _walk(alice, bob, conv, visit, workers=workers)
    uncorrectable = [r for r in reports if r.teleport_correction is None or r.rsp_correction is None]
    for report in uncorrectable:
        logger.warning("branch %s has no Pauli correction", report.key)
    logger.info(
        "enumerated %d branches (n=%d, %s, %s), Σp=%.15g, %d uncorrectable",
        len(reports),
        n,
        conv.value,
        bob.mode.value,
        sum(r.probability for r in reports),
        len(uncorrectable),
    )
    return reports


def summarize_branches(reports: Sequence[BranchReport]) -> dict:
    """Totals, fidelity extremes and marginal probabilities of a branch enumeration."""
    if not reports:
        return {"branches": 0, "total_probability": 0.0}
    frame = pd.DataFrame([r.to_row() for r in reports])
    by_charlie = frame.groupby("charlie")["probability"].sum()
    by_bell = frame.groupby("bell_1")["probability"].sum()
    return {
        "branches": int(len(frame)),
        "total_probability": float(frame["probability"].sum()),
        "min_teleport_fidelity": float(frame["teleport_fidelity"].min()),
        "max_teleport_fidelity": float(frame["teleport_fidelity"].max()),
        "min_rsp_fidelity": float(frame["rsp_fidelity"].min()),
        "max_rsp_fidelity": float(frame["rsp_fidelity"].max()),
        "uncorrectable": int((~frame["teleport_correctable"] | ~frame["rsp_correctable"]).sum()),
        "table_agreement": bool(frame["table_agrees"].all()),
        "charlie_marginals": {str(k): float(v) for k, v in by_charlie.items()},
        "first_bell_marginals": {str(k): float(v) for k, v in by_bell.items()},
    }


def joint_probability(
    alice: AliceState,
    bob: BobKnownState,
    conv: ChannelSignConvention,
    key: BranchKey,
) -> float:
    """
    Probability of one full branch from a single unnormalized projection.

    The ancilla CNOTs act on qubits disjoint from Alice's Bell pairs, so they
    are applied up front and every projector is then contracted in turn.
    """
    n = alice.n
    check_enumeration_size(n)
    state = _entangle_ancillas(tensor_product(state_of(alice), build_channel(n, conv)), n)
    amplitude = [a - 1 for a in key.amplitude]
    projectors: list[tuple[tuple[QubitLabel, ...], np.ndarray]] = []
    for (qubits, basis), bell in zip(_bell_stages(n), key.bell):
        projectors.append((qubits, basis.vector(bell.index)))
    for (qubits, basis), a in zip(_amplitude_stages(bob), amplitude):
        projectors.append((qubits, basis.vector(a)))
    for (qubits, basis), p in zip(_phase_stages(bob, amplitude), key.phase):
        projectors.append((qubits, basis.vector(p - 1)))
    ((charlie_qubits, charlie_basis),) = _CHARLIE_STAGE
    projectors.append((charlie_qubits, charlie_basis.vector(int(key.charlie))))

    amps, labels = np.asarray(state.amps), list(state.labels)
    for qubits, vector in projectors:
        tensor = amps.reshape((2,) * len(labels))
        axes = [labels.index(q) for q in qubits]
        bra = vector.conj().reshape((2,) * len(qubits))
        amps = np.tensordot(bra, tensor, axes=(list(range(len(qubits))), axes)).reshape(-1)
        labels = [label for i, label in enumerate(labels) if i not in axes]
    return float(np.vdot(amps, amps).real)


# ── Published table ───────────────────────────────────────────────────

_REFERENCE_BOB = BobKnownState.product([BobQubit(1.0, 0.0, 0.0)])


@dataclass(frozen=True)
class TableRowCheck:
    bell: BellOutcome
    charlie: CharlieBit
    published: CorrectionOp
    derived: Optional[CorrectionOp]
    fidelity: float

    @property
    def passed(self) -> bool:
        return (
            self.fidelity >= 1.0 - ALGEBRA_ATOL
            and self.derived is not None
            and self.published.equivalent(self.derived)
        )

    def to_dict(self) -> dict:
        return {
            "check": "correction_table",
            "row": teleport_key((self.bell,), self.charlie),
            "published": str(self.published),
            "derived": _op_str(self.derived),
            "fidelity": self.fidelity,
            "passed": self.passed,
        }


def verify_table1(
    conv: ChannelSignConvention = ChannelSignConvention.SINGLET,
    alice: Optional[AliceState] = None,
    seed: int = DEFAULT_SEED,
) -> list[TableRowCheck]:
    """
    Check all eight rows of the published single-qubit correction table.

    Each row forces its Bell outcome and Charlie bit, applies the published
    operator to B1 and compares against Alice's state; the oracle must also
    recover the same operator up to global phase.
    """
    alice = alice if alice is not None else random_alice(1, seed)
    if alice.n != 1:
        raise InvalidInput(f"the correction table is single-qubit, got n={alice.n}")
    target = state_of(alice)
    checks = []
    for c in CharlieBit:
        for bell in BellOutcome:
            flt = _Filter(bell=(bell.index,), amplitude=(0,), phase=(0,), charlie=int(c))
            (leaf_state,) = _walk(alice, _REFERENCE_BOB, conv, lambda leaf: leaf.state, flt)
            teleported = extract_subsystem(leaf_state, teleport_target_labels(1))
            published = select_teleport_correction((bell,), c)
            check = TableRowCheck(
                bell=bell,
                charlie=c,
                published=published,
                derived=derive_correction_bruteforce(teleported, target),
                fidelity=_corrected_fidelity(teleported, published, target),
            )
            if not check.passed:
                logger.warning(
                    "table row %s failed under %s (fidelity %.6f, derived %s)",
                    teleport_key((bell,), c),
                    conv.value,
                    check.fidelity,
                    check.derived,
                )
            checks.append(check)
    return checks


# ── Remote-preparation table ──────────────────────────────────────────


def derive_rsp_table(
    bob: BobKnownState,
    conv: ChannelSignConvention = ChannelSignConvention.SINGLET,
    workers: int = 1,
) -> CorrectionTableArtifact:
    """
    Alice's correction for every (amplitude, phase, Charlie) outcome key.

    Alice's side of the transfer does not depend on the Bell outcomes, so the
    walk fixes them to φ+ with a |0…0⟩ input. Branches no Pauli product can
    fix are kept as ``None`` entries.
    """
    n = bob.n
    check_enumeration_size(n)
    target = state_of(bob)
    flt = _Filter(bell=(BellOutcome.PHI_PLUS.index,) * n)

    def visit(leaf: _Leaf) -> tuple[str, Optional[CorrectionOp]]:
        prepared = extract_subsystem(leaf.state, rsp_target_labels(n))
        return leaf.key.rsp_key, derive_correction_bruteforce(prepared, target)

    entries = dict(_walk(AliceState.basis(n), bob, conv, visit, flt, workers))
    table = CorrectionTableArtifact(Provenance.DERIVED, "rsp", entries)
    for key in table.uncorrectable:
        logger.warning("remote-preparation branch %s is not Pauli-correctable", key)
    return table


# ── Showcase branch ───────────────────────────────────────────────────


@dataclass(frozen=True)
class ShowcaseReport:
    n: int
    teleport_deviation: float
    rsp_deviation: float

    @property
    def max_deviation(self) -> float:
        return max(self.teleport_deviation, self.rsp_deviation)

    @property
    def passed(self) -> bool:
        return self.max_deviation <= ALGEBRA_ATOL

    def to_dict(self) -> dict:
        return {
            "check": "showcase",
            "n": self.n,
            "teleport_deviation": self.teleport_deviation,
            "rsp_deviation": self.rsp_deviation,
            "max_deviation": self.max_deviation,
            "passed": self.passed,
        }


def _deviation(actual: StateVector, target: StateVector) -> float:
    return float(np.max(np.abs(actual.phase_normalized().amps - target.phase_normalized().amps)))


def reproduce_showcase(
    alice: AliceState,
    bob: BobKnownState,
    conv: ChannelSignConvention = ChannelSignConvention.SINGLET,
) -> ShowcaseReport:
    """
    Force all-φ+, all-1, all-1, C=0 and compare both registers, uncorrected,
    with the input states.
    """
    n = alice.n
    if n < 1:
        raise InvalidInput(f"n must be at least 1, got {n}")
    block = n if bob.mode is BobMode.PRODUCT else 1
    flt = _Filter(bell=(0,) * n, amplitude=(0,) * block, phase=(0,) * block, charlie=0)
    (final,) = _walk(alice, bob, conv, lambda leaf: leaf.state, flt)
    report = ShowcaseReport(
        n=n,
        teleport_deviation=_deviation(extract_subsystem(final, teleport_target_labels(n)), state_of(alice)),
        rsp_deviation=_deviation(extract_subsystem(final, rsp_target_labels(n)), state_of(bob)),
    )
    logger.info("showcase n=%d: max deviation %.3e", n, report.max_deviation)
    return report


# ── Controller necessity ──────────────────────────────────────────────


@dataclass(frozen=True)
class ControllerReport:
    guessed_bit: CharlieBit
    mean_teleport_fidelity: float
    mean_rsp_fidelity: float

    def to_dict(self) -> dict:
        return {
            "check": "controller_necessity",
            "guessed_bit": int(self.guessed_bit),
            "mean_teleport_fidelity": self.mean_teleport_fidelity,
            "mean_rsp_fidelity": self.mean_rsp_fidelity,
        }


def controller_necessity(
    alice: AliceState,
    bob: BobKnownState,
    conv: ChannelSignConvention = ChannelSignConvention.SINGLET,
    guessed_bit: CharlieBit | int = CharlieBit.ZERO,
    rsp_table: Optional[CorrectionTableArtifact] = None,
) -> ControllerReport:
    """Mean fidelities when both parties correct as if Charlie had announced ``guessed_bit``."""
    guessed = CharlieBit(guessed_bit)
    n = alice.n
    table = rsp_table if rsp_table is not None else derive_rsp_table(bob, conv)
    alice_target, bob_target = state_of(alice), state_of(bob)

    def visit(leaf: _Leaf) -> tuple[float, float, float]:
        teleported = extract_subsystem(leaf.state, teleport_target_labels(n))
        prepared = extract_subsystem(leaf.state, rsp_target_labels(n))
        teleport_op = select_teleport_correction(leaf.key.bell, guessed)
        rsp_op = table.entries.get(rsp_key(leaf.key.amplitude, leaf.key.phase, guessed))
        return (
            leaf.probability,
            _corrected_fidelity(teleported, teleport_op, alice_target),
            _corrected_fidelity(prepared, rsp_op, bob_target),
        )

    weighted = np.array(_walk(alice, bob, conv, visit))
    return ControllerReport(
        guessed_bit=guessed,
        mean_teleport_fidelity=float(np.sum(weighted[:, 0] * weighted[:, 1])),
        mean_rsp_fidelity=float(np.sum(weighted[:, 0] * weighted[:, 2])),
    )
