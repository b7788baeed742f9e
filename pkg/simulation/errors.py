"""
Exception hierarchy for the simulator.

Every failure raised by the simulation package derives from SimulationError and
carries a stable ``code`` so the CLI and the HTTP service can report it as a
machine-readable object instead of a traceback.
"""


class SimulationError(Exception):
    """Base class for all simulator failures."""

    code = "simulation_error"

    def to_dict(self) -> dict:
        return {
            "type": type(self).__name__,
            "code": self.code,
            "message": str(self),
        }


class InvalidInput(SimulationError, ValueError):
    """Input violates a type invariant (normalization, ranges, n < 1...)."""

    code = "invalid_input"


class DimensionMismatch(SimulationError, ValueError):
    code = "dimension_mismatch"


class UnknownQubit(SimulationError, LookupError):
    code = "unknown_qubit"


class DuplicateQubit(SimulationError, ValueError):
    code = "duplicate_qubit"


class ZeroProbabilityOutcome(SimulationError):
    """A forced measurement outcome has (numerically) zero probability."""

    code = "zero_probability_outcome"


class NotSeparable(SimulationError):
    """A requested subsystem is still entangled with the rest of the register."""

    code = "not_separable"


class UncorrectableBranch(SimulationError):
    """No signed Pauli product restores the target state on this branch."""

    code = "uncorrectable_branch"


class MissingTableEntry(SimulationError, LookupError):
    code = "missing_table_entry"


class ResourceBound(SimulationError):
    """Request exceeds the dense-simulation size limit."""

    code = "resource_bound"


class ProtocolOrderError(SimulationError):
    """A protocol step was attempted out of order."""

    code = "protocol_order"
