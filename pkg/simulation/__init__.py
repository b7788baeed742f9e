"""
Statevector simulation of controlled bidirectional hybrid teleportation.

Alice teleports an unknown n-qubit state to Bob while Bob remotely prepares a
known n-qubit state at Alice's side, over one (4n+1)-qubit channel whose last
qubit belongs to the controller Charlie.
"""

from .assets import (
    AliceState,
    BellOutcome,
    BobKnownState,
    BobMode,
    BobQubit,
    ChannelSignConvention,
    CharlieBit,
    build_channel,
    random_alice,
    random_bob_general,
    random_bob_product,
)
from .corrections import CorrectionOp, CorrectionTableArtifact, select_teleport_correction
from .efficiency import EfficiencyReport, efficiency
from .engine import run_protocol
from .errors import SimulationError
from .oracle import (
    controller_necessity,
    derive_rsp_table,
    enumerate_all_branches,
    joint_probability,
    reproduce_showcase,
    verify_table1,
)
from .statevector import StateVector
from .steps import OutcomePolicy
from .transcript import ProtocolTranscript

__all__ = [
    "AliceState",
    "BellOutcome",
    "BobKnownState",
    "BobMode",
    "BobQubit",
    "ChannelSignConvention",
    "CharlieBit",
    "CorrectionOp",
    "CorrectionTableArtifact",
    "EfficiencyReport",
    "OutcomePolicy",
    "ProtocolTranscript",
    "SimulationError",
    "StateVector",
    "build_channel",
    "controller_necessity",
    "derive_rsp_table",
    "efficiency",
    "enumerate_all_branches",
    "joint_probability",
    "random_alice",
    "random_bob_general",
    "random_bob_product",
    "reproduce_showcase",
    "run_protocol",
    "select_teleport_correction",
    "verify_table1",
]
