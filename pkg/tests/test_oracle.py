import math

import pytest

from simulation.assets import (
    AliceState,
    BellOutcome,
    ChannelSignConvention,
    CharlieBit,
    random_alice,
    random_bob_general,
    random_bob_product,
    state_of,
)
from simulation.errors import DimensionMismatch, ResourceBound
from simulation.oracle import (
    BranchKey,
    controller_necessity,
    derive_correction_bruteforce,
    derive_rsp_table,
    enumerate_all_branches,
    joint_probability,
    reproduce_showcase,
    summarize_branches,
    verify_table1,
)
from simulation.statevector import StateVector

EXPECTED_RSP_TABLE = {
    "1|1|0": "I",
    "1|2|0": "Z",
    "2|1|0": "XZ",
    "2|2|0": "X",
    "1|1|1": "XZ",
    "1|2|1": "X",
    "2|1|1": "I",
    "2|2|1": "Z",
}


class TestCorrectionTable:
    def test_singlet_rows_all_pass(self):
        checks = verify_table1(ChannelSignConvention.SINGLET)
        assert len(checks) == 8
        assert all(check.passed for check in checks)

    def test_phi_minus_fails_charlie_one(self):
        checks = verify_table1(ChannelSignConvention.PHI_MINUS)
        assert all(check.passed for check in checks if check.charlie is CharlieBit.ZERO)
        assert not any(check.passed for check in checks if check.charlie is CharlieBit.ONE)

    def test_row_dict(self, alice):
        row = verify_table1(alice=alice)[0].to_dict()
        assert row["check"] == "correction_table"
        assert row["row"] == "phi+|0"
        assert row["published"] == "I"
        assert row["passed"]


class TestEnumeration:
    def test_single_qubit_branches(self, alice, bob):
        reports = enumerate_all_branches(alice, bob)
        assert len(reports) == 32
        assert all(r.probability == pytest.approx(1 / 32, abs=1e-12) for r in reports)
        assert all(r.corrected for r in reports)
        assert all(r.table_agrees for r in reports)

    def test_summary(self, alice, bob):
        summary = summarize_branches(enumerate_all_branches(alice, bob))
        assert summary["branches"] == 32
        assert summary["total_probability"] == pytest.approx(1.0, abs=1e-12)
        assert summary["uncorrectable"] == 0
        assert summary["table_agreement"]
        assert summary["min_teleport_fidelity"] == pytest.approx(1.0, abs=1e-10)
        assert summary["charlie_marginals"] == pytest.approx({"0": 0.5, "1": 0.5})
        assert summary["first_bell_marginals"] == pytest.approx(
            {b.value: 0.25 for b in BellOutcome}
        )

    def test_two_qubit_branches(self, alice2, bob2):
        reports = enumerate_all_branches(alice2, bob2)
        assert len(reports) == 2 * 16**2
        assert all(r.probability == pytest.approx(1 / 512, abs=1e-12) for r in reports)
        assert all(r.corrected for r in reports)

    @pytest.mark.parametrize(
        "n, pairs",
        [(1, 100), (2, 10)],
    )
    def test_seeded_pairs_are_complete_and_corrected(self, n, pairs):
        for seed in range(pairs):
            reports = enumerate_all_branches(random_alice(n, seed), random_bob_product(n, 1000 + seed))
            assert len(reports) == 2 * 16**n
            assert math.fsum(r.probability for r in reports) == pytest.approx(1.0, abs=1e-12)
            for report in reports:
                assert report.teleport_fidelity == pytest.approx(1.0, abs=1e-10), (seed, str(report.key))
                assert report.rsp_fidelity == pytest.approx(1.0, abs=1e-10), (seed, str(report.key))

    def test_general_mode_two_qubits(self, alice2):
        reports = enumerate_all_branches(alice2, random_bob_general(2, 3))
        summary = summarize_branches(reports)
        assert summary["total_probability"] == pytest.approx(1.0, abs=1e-10)
        assert summary["min_teleport_fidelity"] == pytest.approx(1.0, abs=1e-10)

    def test_workers_do_not_change_result(self, alice, bob):
        serial = [r.to_dict() for r in enumerate_all_branches(alice, bob, workers=1)]
        parallel = [r.to_dict() for r in enumerate_all_branches(alice, bob, workers=4)]
        assert serial == parallel

    def test_branches_are_sorted(self, alice, bob):
        keys = [r.key.sort_key for r in enumerate_all_branches(alice, bob)]
        assert keys == sorted(keys)

    def test_phi_minus_has_failing_branches(self, alice, bob):
        summary = summarize_branches(enumerate_all_branches(alice, bob, ChannelSignConvention.PHI_MINUS))
        assert not summary["table_agreement"]

    def test_resource_bound(self):
        with pytest.raises(ResourceBound):
            enumerate_all_branches(random_alice(4, 1), random_bob_product(4, 1))

    def test_max_n_can_be_lowered(self, alice2, bob2):
        with pytest.raises(ResourceBound):
            enumerate_all_branches(alice2, bob2, max_n=1)

    def test_summary_of_nothing(self):
        assert summarize_branches([]) == {"branches": 0, "total_probability": 0.0}


class TestJointProbability:
    def test_matches_enumeration(self, alice, bob):
        report = enumerate_all_branches(alice, bob)[5]
        assert joint_probability(alice, bob, ChannelSignConvention.SINGLET, report.key) == pytest.approx(
            report.probability, abs=1e-12
        )

    def test_single_branch(self, alice2, bob2):
        key = BranchKey(
            bell=(BellOutcome.PSI_MINUS, BellOutcome.PHI_PLUS),
            amplitude=(1, 2),
            phase=(2, 1),
            charlie=CharlieBit.ONE,
        )
        assert joint_probability(alice2, bob2, ChannelSignConvention.SINGLET, key) == pytest.approx(1 / 512)


class TestRspTable:
    def test_single_qubit_table(self, generic_bob):
        table = derive_rsp_table(generic_bob)
        assert {key: str(op) for key, op in table.entries.items()} == EXPECTED_RSP_TABLE
        assert table.uncorrectable == []

    def test_workers_do_not_change_table(self, bob2):
        assert derive_rsp_table(bob2).to_dict() == derive_rsp_table(bob2, workers=3).to_dict()

    def test_two_qubit_table_size(self, bob2):
        assert len(derive_rsp_table(bob2)) == 2 * 4**2


class TestShowcase:
    @pytest.mark.parametrize("n", [1, 2, 3])
    def test_no_correction_needed(self, n):
        report = reproduce_showcase(random_alice(n, 40 + n), random_bob_product(n, 50 + n))
        assert report.passed
        assert report.to_dict()["check"] == "showcase"


class TestControllerNecessity:
    @pytest.mark.parametrize("guess", [CharlieBit.ZERO, CharlieBit.ONE])
    def test_guessing_halves_teleport_fidelity(self, real_alice, generic_bob, guess):
        report = controller_necessity(real_alice, generic_bob, guessed_bit=guess)
        assert report.mean_teleport_fidelity == pytest.approx(0.5, abs=1e-10)
        assert report.mean_rsp_fidelity < 1.0 - 1e-6
        assert report.to_dict()["guessed_bit"] == int(guess)


class TestBruteforce:
    def test_finds_flip(self):
        target = StateVector.from_amplitudes([0.6, 0.8])
        actual = StateVector.from_amplitudes([0.8, 0.6])
        assert str(derive_correction_bruteforce(actual, target)) == "X"

    def test_identity_first(self, alice):
        assert str(derive_correction_bruteforce(state_of(alice), state_of(alice))) == "I"

    def test_no_pauli_fits(self):
        target = StateVector.from_amplitudes([1, 0])
        actual = StateVector.from_amplitudes([math.sqrt(0.5), math.sqrt(0.5)])
        assert derive_correction_bruteforce(actual, target) is None

    def test_dimension_mismatch(self, alice, alice2):
        with pytest.raises(DimensionMismatch):
            derive_correction_bruteforce(state_of(alice), state_of(alice2))

    def test_size_limit(self):
        state = state_of(AliceState.basis(4))
        with pytest.raises(ResourceBound):
            derive_correction_bruteforce(state, state)
