"""
Protocol inputs and the fixed quantum resources every run is built from.

Covers Alice's unknown state, Bob's known state (product or general form),
the controlled (4n+1)-qubit channel, the Bell basis and Bob's amplitude and
phase measurement bases.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from enum import Enum, IntEnum
from functools import lru_cache, reduce, singledispatch
from typing import Iterable, Sequence

import numpy as np

from simulation.errors import DimensionMismatch, InvalidInput
from simulation.statevector import (
    ALGEBRA_ATOL,
    NORM_ATOL,
    OrthonormalBasis,
    QubitLabel,
    Role,
    StateVector,
    qubit_labels,
)

logger = logging.getLogger(__name__)

SQRT1_2 = 1.0 / np.sqrt(2.0)
CHARLIE_QUBIT = QubitLabel(Role.CHARLIE)


class BellOutcome(str, Enum):
    PHI_PLUS = "phi+"
    PHI_MINUS = "phi-"
    PSI_PLUS = "psi+"
    PSI_MINUS = "psi-"

    @property
    def index(self) -> int:
        return _BELL_ORDER.index(self)

    @classmethod
    def from_index(cls, index: int) -> BellOutcome:
        return _BELL_ORDER[index]

    @classmethod
    def parse(cls, text: str) -> BellOutcome:
        try:
            return cls(text.strip().lower())
        except ValueError:
            choices = ", ".join(b.value for b in cls)
            raise InvalidInput(f"unknown Bell outcome {text!r} (expected one of {choices})") from None


_BELL_ORDER = tuple(BellOutcome)


class ChannelSignConvention(str, Enum):
    """Which two-qubit state fills the C=1 half of the channel."""

    SINGLET = "singlet"
    PHI_MINUS = "phiminus"

    def minus_pair(self) -> np.ndarray:
        if self is ChannelSignConvention.SINGLET:
            return np.array([0, 1, -1, 0], dtype=np.complex128) * SQRT1_2
        return np.array([1, 0, 0, -1], dtype=np.complex128) * SQRT1_2


class CharlieBit(IntEnum):
    ZERO = 0
    ONE = 1


class BobMode(str, Enum):
    PRODUCT = "product"
    GENERAL = "general"


# ── Inputs ────────────────────────────────────────────────────────────


def _check_n(n: int) -> None:
    if n < 1:
        raise InvalidInput(f"n must be at least 1, got {n}")


@dataclass(frozen=True, eq=False)
class AliceState:
    """The unknown n-qubit state Alice teleports: Σ α_i |i⟩."""

    n: int
    alphas: np.ndarray

    def __post_init__(self) -> None:
        _check_n(self.n)
        alphas = np.array(self.alphas, dtype=np.complex128).reshape(-1)
        if alphas.size != 2**self.n:
            raise DimensionMismatch(f"n={self.n} needs {2 ** self.n} alphas, got {alphas.size}")
        if not np.all(np.isfinite(alphas)):
            raise InvalidInput("alphas must be finite")
        norm = float(np.vdot(alphas, alphas).real)
        if abs(norm - 1.0) > NORM_ATOL:
            raise InvalidInput(f"alphas are not normalized (Σ|α|² = {norm:.15g})")
        alphas.flags.writeable = False
        object.__setattr__(self, "alphas", alphas)

    @classmethod
    def from_amplitudes(cls, alphas: Sequence[complex] | np.ndarray) -> AliceState:
        arr = np.asarray(alphas, dtype=np.complex128).reshape(-1)
        n = arr.size.bit_length() - 1
        if arr.size == 0 or 2**n != arr.size:
            raise DimensionMismatch(f"{arr.size} alphas is not a power of two")
        return cls(n, arr)

    @classmethod
    def basis(cls, n: int, index: int = 0) -> AliceState:
        alphas = np.zeros(2**n, dtype=np.complex128)
        alphas[index] = 1.0
        return cls(n, alphas)


@dataclass(frozen=True)
class BobQubit:
    """One factor β₀|0⟩ + β₁e^{iθ}|1⟩ of a product-form known state."""

    beta0: float
    beta1: float
    theta: float = 0.0

    def __post_init__(self) -> None:
        values = (self.beta0, self.beta1, self.theta)
        if not all(np.isfinite(v) for v in values):
            raise InvalidInput("beta and theta values must be finite")
        if self.beta0 < 0 or self.beta1 < 0:
            raise InvalidInput(f"betas must be non-negative, got ({self.beta0}, {self.beta1})")
        norm = self.beta0**2 + self.beta1**2
        if abs(norm - 1.0) > NORM_ATOL:
            raise InvalidInput(f"β₀² + β₁² = {norm:.15g}, expected 1")

    @classmethod
    def from_angle(cls, xi: float, theta: float = 0.0) -> BobQubit:
        """(cos ξ, sin ξ, θ) for ξ in [0, π/2]."""
        return cls(float(np.cos(xi)), float(np.sin(xi)), float(theta))

    def amplitudes(self) -> np.ndarray:
        return np.array([self.beta0, self.beta1 * np.exp(1j * self.theta)], dtype=np.complex128)


@dataclass(frozen=True, eq=False)
class BobKnownState:
    """
    The state Bob prepares remotely at Alice's side.

    Product mode keeps one BobQubit per qubit. General mode keeps 2^n
    magnitudes ``betas`` and phases ``thetas`` with ``thetas[0] == 0``.
    """

    n: int
    mode: BobMode
    qubits: tuple[BobQubit, ...] = ()
    betas: np.ndarray | None = None
    thetas: np.ndarray | None = None

    def __post_init__(self) -> None:
        _check_n(self.n)
        if self.mode is BobMode.PRODUCT:
            qubits = tuple(self.qubits)
            if len(qubits) != self.n:
                raise DimensionMismatch(f"n={self.n} needs {self.n} qubit triples, got {len(qubits)}")
            object.__setattr__(self, "qubits", qubits)
            return

        betas = np.array(self.betas, dtype=np.float64).reshape(-1)
        thetas = np.array(self.thetas, dtype=np.float64).reshape(-1)
        if betas.size != 2**self.n or thetas.size != 2**self.n:
            raise DimensionMismatch(f"n={self.n} needs {2 ** self.n} betas and thetas")
        if not (np.all(np.isfinite(betas)) and np.all(np.isfinite(thetas))):
            raise InvalidInput("beta and theta values must be finite")
        if np.any(betas < 0):
            raise InvalidInput("betas must be non-negative")
        norm = float(np.sum(betas**2))
        if abs(norm - 1.0) > NORM_ATOL:
            raise InvalidInput(f"Σβ² = {norm:.15g}, expected 1")
        if abs(thetas[0]) > ALGEBRA_ATOL:
            raise InvalidInput(f"θ₀ must be 0, got {thetas[0]}")
        betas.flags.writeable = False
        thetas.flags.writeable = False
        object.__setattr__(self, "betas", betas)
        object.__setattr__(self, "thetas", thetas)

    @classmethod
    def product(cls, qubits: Iterable[BobQubit | tuple[float, float, float]]) -> BobKnownState:
        qubits = tuple(q if isinstance(q, BobQubit) else BobQubit(*q) for q in qubits)
        return cls(len(qubits), BobMode.PRODUCT, qubits=qubits)

    @classmethod
    def general(cls, betas: Sequence[float], thetas: Sequence[float]) -> BobKnownState:
        betas = np.asarray(betas, dtype=np.float64)
        n = betas.size.bit_length() - 1
        return cls(n, BobMode.GENERAL, betas=betas, thetas=thetas)

    def amplitudes(self) -> np.ndarray:
        if self.mode is BobMode.PRODUCT:
            return reduce(np.kron, (q.amplitudes() for q in self.qubits))
        return self.betas * np.exp(1j * self.thetas)

    def as_general(self) -> BobKnownState:
        """The same state written as 2^n magnitudes and phases."""
        if self.mode is BobMode.GENERAL:
            return self
        amps = self.amplitudes()
        thetas = np.where(np.abs(amps) > ALGEBRA_ATOL, np.angle(amps), 0.0)
        return BobKnownState(self.n, BobMode.GENERAL, betas=np.abs(amps), thetas=thetas)


# ── Registers ─────────────────────────────────────────────────────────


def alice_input_labels(n: int) -> tuple[QubitLabel, ...]:
    return qubit_labels(Role.ALICE_INPUT, range(1, n + 1))


def bob_input_labels(n: int) -> tuple[QubitLabel, ...]:
    return qubit_labels(Role.BOB_INPUT, range(1, n + 1))


def channel_labels(n: int) -> tuple[QubitLabel, ...]:
    """A1, B1, A2, B2, ..., A2n, B2n, C."""
    labels: list[QubitLabel] = []
    for k in range(1, 2 * n + 1):
        labels += [QubitLabel(Role.ALICE_CHANNEL, k), QubitLabel(Role.BOB_CHANNEL, k)]
    return (*labels, CHARLIE_QUBIT)


def teleport_target_labels(n: int) -> tuple[QubitLabel, ...]:
    """Bob's receiving qubits B1..Bn."""
    return qubit_labels(Role.BOB_CHANNEL, range(1, n + 1))


def rsp_target_labels(n: int) -> tuple[QubitLabel, ...]:
    """Alice's receiving qubits A(n+1)..A(2n)."""
    return qubit_labels(Role.ALICE_CHANNEL, range(n + 1, 2 * n + 1))


def ancilla_labels(n: int) -> tuple[QubitLabel, ...]:
    return qubit_labels(Role.ANCILLA, range(1, n + 1))


# ── Channel and bases ─────────────────────────────────────────────────


def build_channel(n: int, conv: ChannelSignConvention = ChannelSignConvention.SINGLET) -> StateVector:
    """(|φ+⟩^⊗2n |0⟩_C + |minus⟩^⊗2n |1⟩_C) / √2 over A1,B1,...,A2n,B2n,C."""
    _check_n(n)
    plus = np.array([1, 0, 0, 1], dtype=np.complex128) * SQRT1_2
    minus = conv.minus_pair()
    zero_branch = np.kron(reduce(np.kron, [plus] * (2 * n)), [1, 0])
    one_branch = np.kron(reduce(np.kron, [minus] * (2 * n)), [0, 1])
    logger.debug("built %d-qubit channel (n=%d, %s)", 4 * n + 1, n, conv.value)
    return StateVector(channel_labels(n), (zero_branch + one_branch) * SQRT1_2)


@lru_cache(maxsize=1)
def bell_basis() -> OrthonormalBasis:
    vectors = np.array(
        [
            [1, 0, 0, 1],
            [1, 0, 0, -1],
            [0, 1, 1, 0],
            [0, 1, -1, 0],
        ]
    ) * SQRT1_2
    return OrthonormalBasis(vectors, tuple(b.value for b in BellOutcome))


def _check_unit(beta0: float, beta1: float) -> None:
    norm = beta0**2 + beta1**2
    if abs(norm - 1.0) > NORM_ATOL:
        raise InvalidInput(f"β₀² + β₁² = {norm:.15g}, expected 1")


def amplitude_basis(beta0: float, beta1: float) -> OrthonormalBasis:
    """{β₀|0⟩+β₁|1⟩, β₁|0⟩−β₀|1⟩}; outcomes are named "1" and "2"."""
    _check_unit(beta0, beta1)
    return OrthonormalBasis(np.array([[beta0, beta1], [beta1, -beta0]]), ("1", "2"))


def phase_basis(theta: float, b_outcome: int) -> OrthonormalBasis:
    """
    Phase basis chosen by the amplitude outcome ``b_outcome`` (1 or 2).

    Outcome 1 of the amplitude step pairs with {(|0⟩ ± e^{-iθ}|1⟩)/√2},
    outcome 2 with {(e^{-iθ}|0⟩ ± |1⟩)/√2}.
    """
    phase = np.exp(-1j * theta)
    if b_outcome == 1:
        vectors = np.array([[1, phase], [1, -phase]])
    elif b_outcome == 2:
        vectors = np.array([[phase, 1], [phase, -1]])
    else:
        raise InvalidInput(f"amplitude outcome must be 1 or 2, got {b_outcome}")
    return OrthonormalBasis(vectors * SQRT1_2, ("1", "2"))


def amplitude_basis_general(betas: Sequence[float]) -> OrthonormalBasis:
    """
    2^n-outcome amplitude basis whose first vector is Σ β_j |j⟩.

    The rest of the basis comes from the Householder reflection taking e₀
    to that vector; at n=1 this is exactly ``amplitude_basis``.
    """
    v0 = np.asarray(betas, dtype=np.float64).reshape(-1)
    norm = float(np.sum(v0**2))
    if abs(norm - 1.0) > NORM_ATOL:
        raise InvalidInput(f"Σβ² = {norm:.15g}, expected 1")
    dim = v0.size
    w = np.eye(dim)[0] - v0
    if np.linalg.norm(w) < NORM_ATOL:
        reflection = np.eye(dim)
    else:
        reflection = np.eye(dim) - 2.0 * np.outer(w, w) / float(w @ w)
    return OrthonormalBasis(reflection, tuple(str(i + 1) for i in range(dim)))


def phase_basis_general(thetas: Sequence[float], amplitude_outcome: int) -> OrthonormalBasis:
    """
    2^n-outcome phase basis following block amplitude outcome ``m`` (0-based).

    Vector l has components e^{-iθ_{j⊕m}} (-1)^{popcount(j∧l)} / √2ⁿ.
    """
    thetas = np.asarray(thetas, dtype=np.float64).reshape(-1)
    dim = thetas.size
    m = amplitude_outcome
    if not 0 <= m < dim:
        raise InvalidInput(f"block amplitude outcome {m} outside 0..{dim - 1}")
    j = np.arange(dim)
    phases = np.exp(-1j * thetas[j ^ m])
    signs = np.array([[(-1) ** bin(jj & ll).count("1") for jj in j] for ll in j])
    return OrthonormalBasis(signs * phases / np.sqrt(dim), tuple(str(i + 1) for i in range(dim)))


# ── States ────────────────────────────────────────────────────────────


@singledispatch
def state_of(value) -> StateVector:
    raise TypeError(f"no state for {type(value).__name__}")


@state_of.register
def _(alice: AliceState) -> StateVector:
    return StateVector(alice_input_labels(alice.n), alice.alphas)


@state_of.register
def _(bob: BobKnownState) -> StateVector:
    return StateVector(bob_input_labels(bob.n), bob.amplitudes())


# ── Seeded random inputs ──────────────────────────────────────────────

Seed = int | np.random.SeedSequence | np.random.Generator | None


def random_alice(n: int, seed: Seed = None) -> AliceState:
    """Normalized complex Gaussian vector (Haar-distributed direction)."""
    _check_n(n)
    rng = np.random.default_rng(seed)
    z = rng.standard_normal(2**n) + 1j * rng.standard_normal(2**n)
    return AliceState(n, z / np.linalg.norm(z))


def random_bob_product(n: int, seed: Seed = None) -> BobKnownState:
    _check_n(n)
    rng = np.random.default_rng(seed)
    xis = rng.uniform(0.0, np.pi / 2, size=n)
    thetas = rng.uniform(0.0, 2 * np.pi, size=n)
    return BobKnownState.product(BobQubit.from_angle(xi, theta) for xi, theta in zip(xis, thetas))


def random_bob_general(n: int, seed: Seed = None) -> BobKnownState:
    _check_n(n)
    rng = np.random.default_rng(seed)
    magnitudes = np.abs(rng.standard_normal(2**n))
    thetas = rng.uniform(0.0, 2 * np.pi, size=2**n)
    thetas[0] = 0.0
    return BobKnownState(n, BobMode.GENERAL, betas=magnitudes / np.linalg.norm(magnitudes), thetas=thetas)
