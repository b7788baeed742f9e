import numpy as np
import pytest

from simulation.assets import (
    BellOutcome,
    BobMode,
    ChannelSignConvention,
    CharlieBit,
    build_channel,
    random_bob_general,
)
from simulation.corrections import CorrectionOp, CorrectionTableArtifact, Provenance
from simulation.engine import run_protocol
from simulation.errors import DimensionMismatch, InvalidInput, ProtocolOrderError
from simulation.files import dumps
from simulation.messages import ClassicalMessage, MessageBus, MessageKind, Party
from simulation.oracle import BranchKey, joint_probability
from simulation.parties import AliceParty, BobParty, CharlieParty, SharedRegister
from simulation.steps import OutcomePolicy, assemble_initial_state


class TestRunProtocol:
    def test_sampled_run_succeeds(self, alice, bob):
        transcript = run_protocol(alice, bob, policy=OutcomePolicy.sample(7))
        assert transcript.succeeded()
        assert [record.step for record in transcript.steps] == [1, 2, 3, 4, 5, 6]
        assert transcript.teleport_fidelity == pytest.approx(1.0, abs=1e-10)
        assert transcript.rsp_fidelity == pytest.approx(1.0, abs=1e-10)

    def test_joint_probability_is_uniform(self, alice, bob):
        transcript = run_protocol(alice, bob, policy=OutcomePolicy.sample(3))
        assert transcript.joint_probability == pytest.approx(1 / 32)

    @pytest.mark.parametrize(
        ("bit", "expected"),
        [(CharlieBit.ZERO, "(-XZ)⊗I"), (CharlieBit.ONE, "(-I)⊗(-XZ)")],
    )
    def test_two_qubit_teleport_correction(self, alice2, bob2, bit, expected):
        policy = OutcomePolicy(seed=5, bell=(BellOutcome.PSI_MINUS, BellOutcome.PHI_PLUS), charlie=bit)
        transcript = run_protocol(alice2, bob2, policy=policy)
        assert str(transcript.teleport_correction) == expected
        assert transcript.succeeded()

    def test_classical_bit_audit(self, alice, bob):
        transcript = run_protocol(alice, bob, policy=OutcomePolicy.sample(1))
        assert transcript.classical_bits == 6
        assert transcript.published_classical_bits == 0

    def test_classical_bits_grow_with_n(self, alice2, bob2):
        transcript = run_protocol(alice2, bob2, policy=OutcomePolicy.sample(1))
        assert transcript.classical_bits == 4 * 2 + 2

    def test_same_seed_same_transcript(self, alice, bob):
        first = run_protocol(alice, bob, policy=OutcomePolicy.sample(9))
        second = run_protocol(alice, bob, policy=OutcomePolicy.sample(9))
        assert dumps(first.to_dict()) == dumps(second.to_dict())

    def test_probability_chain_matches_projection(self, alice, bob):
        transcript = run_protocol(alice, bob, policy=OutcomePolicy.sample(4))
        key = BranchKey(
            bell=transcript.bell_outcomes,
            amplitude=transcript.amplitude_outcomes,
            phase=transcript.phase_outcomes,
            charlie=transcript.charlie_bit,
        )
        assert joint_probability(alice, bob, ChannelSignConvention.SINGLET, key) == pytest.approx(
            transcript.joint_probability, abs=1e-12
        )

    def test_phi_minus_breaks_charlie_one(self, alice, bob):
        policy = OutcomePolicy(seed=2, charlie=CharlieBit.ONE)
        transcript = run_protocol(alice, bob, ChannelSignConvention.PHI_MINUS, policy)
        assert transcript.teleport_fidelity < 1.0 - 1e-6
        assert not transcript.succeeded()

    def test_general_mode_single_qubit(self, alice):
        bob = random_bob_general(1, 6)
        transcript = run_protocol(alice, bob, policy=OutcomePolicy.sample(8))
        assert transcript.mode is BobMode.GENERAL
        assert transcript.succeeded()

    def test_uncorrectable_branch_is_reported(self, alice, bob):
        policy = OutcomePolicy.forced([BellOutcome.PHI_PLUS], [2], [1], 0)
        table = CorrectionTableArtifact(Provenance.DERIVED, "rsp", {"2|1|0": None})
        transcript = run_protocol(alice, bob, policy=policy, rsp_table=table)
        assert transcript.rsp_uncorrectable
        assert transcript.rsp_correction is None
        assert transcript.to_dict()["rsp_correction"] is None
        assert transcript.teleport_fidelity == pytest.approx(1.0, abs=1e-10)

    def test_size_mismatch(self, alice, bob2):
        with pytest.raises(DimensionMismatch):
            run_protocol(alice, bob2)

    def test_transcript_dict(self, alice, bob):
        policy = OutcomePolicy.forced([BellOutcome.PSI_MINUS], [1], [1], 1)
        data = run_protocol(alice, bob, policy=policy).to_dict()
        assert data["branch"] == {"teleport": "psi-|1", "rsp": "1|1|1"}
        assert data["teleport_correction"] == "-I"
        assert data["rsp_correction"] == "XZ"
        assert data["classical_bits"] == {"audited": 6, "published": 0}
        assert data["teleported_state"]["register"] == ["B1"]
        assert data["prepared_state"]["register"] == ["A2"]


class TestMessages:
    def test_routes_are_enforced(self):
        with pytest.raises(InvalidInput):
            ClassicalMessage(MessageKind.BELL_OUTCOMES, Party.BOB, (Party.ALICE,), (), 2)

    def test_charlie_reaches_both_parties(self):
        bus = MessageBus()
        bus.send(ClassicalMessage.charlie_announcement(CharlieBit.ONE))
        assert bus.pending(Party.ALICE) == 1
        assert bus.pending(Party.BOB) == 1
        assert bus.pending(Party.CHARLIE) == 0
        assert bus.classical_bits == 2

    def test_receive_wrong_kind(self):
        bus = MessageBus()
        bus.send(ClassicalMessage.amplitude_outcomes((1,), 1))
        with pytest.raises(ProtocolOrderError):
            bus.receive(Party.ALICE, MessageKind.PHASE_OUTCOMES)

    def test_receive_empty(self):
        with pytest.raises(ProtocolOrderError):
            MessageBus().receive(Party.BOB, MessageKind.BELL_OUTCOMES)

    def test_fifo_order(self):
        bus = MessageBus()
        bus.send(ClassicalMessage.amplitude_outcomes((2,), 1))
        bus.send(ClassicalMessage.phase_outcomes((1,), 1))
        assert bus.receive(Party.ALICE, MessageKind.AMPLITUDE_OUTCOMES).payload == (2,)
        assert bus.receive(Party.ALICE, MessageKind.PHASE_OUTCOMES).payload == (1,)

    def test_bell_message_bits(self):
        message = ClassicalMessage.bell_outcomes((BellOutcome.PHI_PLUS, BellOutcome.PSI_MINUS))
        assert message.bits == 4
        assert message.to_dict()["payload"] == ["phi+", "psi-"]


class TestParties:
    @pytest.fixture
    def parties(self, alice, bob):
        register = SharedRegister(assemble_initial_state(alice, build_channel(1)))
        bus = MessageBus()
        policy = OutcomePolicy.sample(0)
        rng = np.random.default_rng(0)
        return (
            AliceParty(register, bus, policy, rng, 1),
            BobParty(register, bus, policy, rng, bob),
            CharlieParty(register, bus, policy, rng),
        )

    def test_bob_cannot_skip_ancillas(self, parties):
        _, bob, _ = parties
        with pytest.raises(ProtocolOrderError):
            bob.entangle_ancillas()

    def test_alice_measures_once(self, parties):
        alice, _, _ = parties
        alice.measure_bell()
        with pytest.raises(ProtocolOrderError):
            alice.measure_bell()

    def test_bob_needs_charlie_before_correcting(self, parties):
        alice, bob, _ = parties
        alice.measure_bell()
        bob.introduce_ancillas()
        bob.entangle_ancillas()
        bob.measure_amplitudes()
        bob.measure_phases()
        with pytest.raises(ProtocolOrderError):
            bob.correct()

    def test_alice_needs_bob_before_correcting(self, parties):
        alice, _, _ = parties
        alice.measure_bell()
        table = CorrectionTableArtifact(Provenance.DERIVED, "rsp", {"1|1|0": CorrectionOp.parse("I")})
        with pytest.raises(ProtocolOrderError):
            alice.correct(table)
