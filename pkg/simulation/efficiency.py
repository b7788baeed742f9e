"""
Efficiency accounting: η = m_u / (q_k + b_k + A_k).

For this protocol m_u = 2n qubits are transferred over a 4n+1 qubit channel
using n ancillas, and the published accounting charges b_k = 0 classical
bits, so η = 2n / (6n + 1). The audited bit count of an actual transcript is
reported next to it.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional

from simulation.errors import InvalidInput
from simulation.transcript import PUBLISHED_CLASSICAL_BITS, ProtocolTranscript

logger = logging.getLogger(__name__)

EFFICIENCY_LIMIT = Fraction(1, 3)

# Claims in the published comparison that the formula does not reproduce.
PUBLISHED_DISCREPANCIES = (
    {
        "claim": "published comparison lists the proposed scheme at 33.33%",
        "formula": "2n/(6n+1) at n=6 is 12/37 ≈ 32.43%",
    },
    {
        "claim": "efficiency approaches the value of one as n grows",
        "formula": "2n/(6n+1) increases monotonically towards 1/3",
    },
)


@dataclass(frozen=True)
class EfficiencyReport:
    n: int
    m_u: int
    q_k: int
    b_k: int
    a_k: int
    actual_classical_bits: Optional[int] = None
    discrepancies: tuple[dict, ...] = field(default=PUBLISHED_DISCREPANCIES)

    @property
    def eta(self) -> Fraction:
        return Fraction(self.m_u, self.q_k + self.b_k + self.a_k)

    @property
    def limit(self) -> Fraction:
        return EFFICIENCY_LIMIT

    @property
    def audited_eta(self) -> Optional[Fraction]:
        """η with the transcript's classical bits charged in place of b_k."""
        if self.actual_classical_bits is None:
            return None
        return Fraction(self.m_u, self.q_k + self.actual_classical_bits + self.a_k)

    def to_dict(self) -> dict:
        audited = self.audited_eta
        return {
            "n": self.n,
            "m_u": self.m_u,
            "q_k": self.q_k,
            "b_k": self.b_k,
            "A_k": self.a_k,
            "eta": str(self.eta),
            "eta_value": float(self.eta),
            "limit": str(self.limit),
            "limit_value": float(self.limit),
            "actual_classical_bits": self.actual_classical_bits,
            "audited_eta": str(audited) if audited is not None else None,
            "discrepancies": [dict(d) for d in self.discrepancies],
        }


def efficiency(n: int, transcript: Optional[ProtocolTranscript] = None) -> EfficiencyReport:
    if n < 1:
        raise InvalidInput(f"n must be at least 1, got {n}")
    if transcript is not None and transcript.n != n:
        raise InvalidInput(f"transcript is for n={transcript.n}, not n={n}")
    report = EfficiencyReport(
        n=n,
        m_u=2 * n,
        q_k=4 * n + 1,
        b_k=PUBLISHED_CLASSICAL_BITS,
        a_k=n,
        actual_classical_bits=transcript.classical_bits if transcript is not None else None,
    )
    logger.debug("efficiency n=%d: η=%s", n, report.eta)
    return report
