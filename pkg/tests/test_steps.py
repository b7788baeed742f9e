import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from simulation.assets import (
    AliceState,
    BellOutcome,
    BobKnownState,
    BobQubit,
    CharlieBit,
    build_channel,
    random_alice,
    random_bob_general,
)
from simulation.errors import DimensionMismatch, InvalidInput, ZeroProbabilityOutcome
from simulation.statevector import (
    Forced,
    OrthonormalBasis,
    QubitLabel,
    Role,
    StateVector,
    extract_subsystem,
    measure_subsystem,
)
from simulation.steps import (
    OutcomePolicy,
    assemble_initial_state,
    step1_alice_bell_measurement,
    step2_introduce_ancillas,
    step3_bob_cnot,
    step4_amplitude_measurement,
    step5_phase_measurement,
    step6_charlie_measurement,
)


def names(state):
    return [str(label) for label in state.labels]


@pytest.fixture
def initial(alice):
    return assemble_initial_state(alice, build_channel(1))


class TestOutcomePolicy:
    def test_forced_and_sampled(self):
        forced = OutcomePolicy.forced([BellOutcome.PHI_PLUS], [1], [2], 1)
        assert forced.is_forced
        assert forced.charlie is CharlieBit.ONE
        assert not OutcomePolicy.sample(3).is_forced

    def test_normalizes_values(self):
        policy = OutcomePolicy(bell=("psi-",), amplitude=[2])
        assert policy.bell == (BellOutcome.PSI_MINUS,)
        assert policy.amplitude == (2,)


class TestSteps:
    def test_initial_register(self, initial):
        assert names(initial) == ["a1", "A1", "B1", "A2", "B2", "C"]

    def test_channel_size_checked(self, alice):
        with pytest.raises(DimensionMismatch):
            assemble_initial_state(alice, build_channel(2))

    def test_bell_measurement(self, initial):
        result = step1_alice_bell_measurement(initial, OutcomePolicy(bell=(BellOutcome.PSI_PLUS,)))
        assert result.outcomes == (BellOutcome.PSI_PLUS,)
        assert result.probability == pytest.approx(0.25)
        assert names(result.state) == ["B1", "A2", "B2", "C"]

    def test_forced_length_checked(self, initial):
        with pytest.raises(InvalidInput):
            step1_alice_bell_measurement(initial, OutcomePolicy(bell=(BellOutcome.PHI_PLUS,) * 2))

    def test_ancillas_and_cnot(self, initial):
        state = step1_alice_bell_measurement(initial, OutcomePolicy(seed=1)).state
        state = step2_introduce_ancillas(state)
        assert names(state)[-1] == "e1"
        entangled = step3_bob_cnot(state)
        assert entangled.labels == state.labels
        assert not entangled.allclose(state)

    def test_full_chain(self, initial, bob):
        policy = OutcomePolicy.forced([BellOutcome.PHI_MINUS], [2], [1], 0)
        state = step1_alice_bell_measurement(initial, policy).state
        state = step3_bob_cnot(step2_introduce_ancillas(state))
        amplitude = step4_amplitude_measurement(state, bob, policy)
        assert amplitude.outcomes == (2,)
        assert amplitude.probability == pytest.approx(0.5)
        phase = step5_phase_measurement(amplitude.state, bob, amplitude.outcomes, policy)
        assert phase.outcomes == (1,)
        assert phase.probability == pytest.approx(0.5)
        charlie = step6_charlie_measurement(phase.state, policy)
        assert charlie.outcomes == (CharlieBit.ZERO,)
        assert charlie.probability == pytest.approx(0.5)
        assert names(charlie.state) == ["B1", "A2"]

    def test_general_mode_block_outcome(self, alice2):
        bob = random_bob_general(2, 8)
        state = assemble_initial_state(alice2, build_channel(2))
        policy = OutcomePolicy(seed=4)
        state = step1_alice_bell_measurement(state, policy).state
        state = step3_bob_cnot(step2_introduce_ancillas(state))
        amplitude = step4_amplitude_measurement(state, bob, policy)
        assert len(amplitude.outcomes) == 1
        assert 1 <= amplitude.outcomes[0] <= 4
        phase = step5_phase_measurement(amplitude.state, bob, amplitude.outcomes, policy)
        assert len(phase.outcomes) == 1
        assert QubitLabel(Role.ANCILLA, 1) not in phase.state.labels

    def test_charlie_bit_selects_channel_half(self, initial):
        state = step1_alice_bell_measurement(initial, OutcomePolicy(seed=2)).state
        collapsed = step6_charlie_measurement(state, OutcomePolicy(charlie=1)).state
        # C=1 leaves (A2, B2) in the singlet, which has no |00⟩ component
        with pytest.raises(ZeroProbabilityOutcome):
            measure_subsystem(
                collapsed,
                (QubitLabel(Role.ALICE_CHANNEL, 2), QubitLabel(Role.BOB_CHANNEL, 2)),
                OrthonormalBasis.computational(2),
                Forced(0),
            )


B1 = QubitLabel(Role.BOB_CHANNEL, 1)
A2 = QubitLabel(Role.ALICE_CHANNEL, 2)
B2 = QubitLabel(Role.BOB_CHANNEL, 2)
E1 = QubitLabel(Role.ANCILLA, 1)


class TestIntermediateStates:
    """Single-qubit run with Bell outcome φ⁺ and Charlie's bit fixed early."""

    @pytest.fixture
    def complex_alice(self):
        return AliceState(1, [math.sqrt(0.3), 1j * math.sqrt(0.7)])

    @pytest.fixture
    def balanced_bob(self):
        return BobKnownState.product([BobQubit(math.sqrt(0.5), math.sqrt(0.5), math.pi / 4)])

    @staticmethod
    def after_cnot(alice, charlie):
        policy = OutcomePolicy(bell=(BellOutcome.PHI_PLUS,), charlie=charlie)
        state = assemble_initial_state(alice, build_channel(1))
        state = step1_alice_bell_measurement(state, policy).state
        state = step3_bob_cnot(step2_introduce_ancillas(state))
        return step6_charlie_measurement(state, policy).state

    @given(st.integers(min_value=0, max_value=2**32 - 1))
    def test_every_bell_outcome_is_a_quarter(self, seed):
        initial = assemble_initial_state(random_alice(1, seed), build_channel(1))
        for bell in BellOutcome:
            result = step1_alice_bell_measurement(initial, OutcomePolicy(bell=(bell,)))
            assert result.probability == pytest.approx(0.25, abs=1e-12)

    def test_phi_plus_leaves_alice_state_on_b1(self, complex_alice):
        state = self.after_cnot(complex_alice, CharlieBit.ZERO)
        b1 = extract_subsystem(state, (B1,))
        assert np.allclose(b1.amps, [math.sqrt(0.3), 1j * math.sqrt(0.7)], atol=1e-10)

    def test_cnot_on_plus_half(self, alice):
        state = self.after_cnot(alice, CharlieBit.ZERO)
        expected = StateVector.from_amplitudes([1, 0, 0, 0, 0, 0, 0, 1], (A2, B2, E1), normalize=True)
        assert extract_subsystem(state, (A2, B2, E1)).allclose(expected)

    def test_cnot_on_singlet_half_keeps_relative_sign(self, alice):
        state = self.after_cnot(alice, CharlieBit.ONE)
        expected = StateVector.from_amplitudes([0, 0, 0, 1, -1, 0, 0, 0], (A2, B2, E1), normalize=True)
        triple = extract_subsystem(state, (A2, B2, E1))
        assert triple.allclose(expected)
        assert triple.amps[3].real > 0 > triple.amps[4].real

    @pytest.mark.parametrize(
        "outcome, amplitudes",
        [(1, lambda b0, b1: [b0, 0, 0, b1]), (2, lambda b0, b1: [b1, 0, 0, -b0])],
    )
    def test_amplitude_step_leaves_correlated_pair(self, alice, generic_bob, outcome, amplitudes):
        state = self.after_cnot(alice, CharlieBit.ZERO)
        result = step4_amplitude_measurement(state, generic_bob, OutcomePolicy(amplitude=(outcome,)))
        assert result.probability == pytest.approx(0.5, abs=1e-12)
        params = generic_bob.qubits[0]
        expected = StateVector.from_amplitudes(amplitudes(params.beta0, params.beta1), (A2, E1))
        assert extract_subsystem(result.state, (A2, E1)).allclose(expected)

    def test_phase_step_prepares_bob_state_on_a2(self, complex_alice, balanced_bob):
        policy = OutcomePolicy(amplitude=(1,), phase=(1,))
        state = self.after_cnot(complex_alice, CharlieBit.ZERO)
        amplitude = step4_amplitude_measurement(state, balanced_bob, policy)
        phase = step5_phase_measurement(amplitude.state, balanced_bob, amplitude.outcomes, policy)
        assert phase.probability == pytest.approx(0.5, abs=1e-12)
        assert names(phase.state) == ["B1", "A2"]
        a2 = extract_subsystem(phase.state, (A2,))
        assert np.allclose(a2.amps, [math.sqrt(0.5), 0.5 + 0.5j], atol=1e-10)
        b1 = extract_subsystem(phase.state, (B1,))
        assert np.allclose(b1.amps, [math.sqrt(0.3), 1j * math.sqrt(0.7)], atol=1e-10)

    def test_second_phase_outcome_leaves_z_flipped_state(self, alice, balanced_bob):
        policy = OutcomePolicy(amplitude=(1,), phase=(2,))
        state = self.after_cnot(alice, CharlieBit.ZERO)
        amplitude = step4_amplitude_measurement(state, balanced_bob, policy)
        phase = step5_phase_measurement(amplitude.state, balanced_bob, amplitude.outcomes, policy)
        a2 = extract_subsystem(phase.state, (A2,))
        assert np.allclose(a2.amps, [math.sqrt(0.5), -0.5 - 0.5j], atol=1e-10)
