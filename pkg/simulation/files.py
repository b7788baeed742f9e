"""
JSON input and output.

State files hold ``{"num_qubits": m, "amps": [[re, im], ...]}``; input files
hold an ``alice`` entry, a ``bob`` entry or both. Inputs more than 1e-9 away
from normalized are rejected, anything closer is renormalized. Output
numbers are rounded to a fixed number of significant digits so that reruns
produce byte-identical files.
"""

from __future__ import annotations

import json
import logging
import math
from enum import Enum
from fractions import Fraction
from pathlib import Path
from typing import Any, Iterable, Literal, Optional

import numpy as np
from pydantic import BaseModel, Field, ValidationError, model_validator

from simulation.assets import AliceState, BobKnownState, BobMode, BobQubit
from simulation.errors import InvalidInput
from simulation.statevector import StateVector

logger = logging.getLogger(__name__)

FILE_NORM_ATOL = 1e-9
SIGNIFICANT_DIGITS = 15

Pair = tuple[float, float]


def _complex(pairs: Iterable[Pair]) -> np.ndarray:
    return np.array([complex(re, im) for re, im in pairs], dtype=np.complex128)


def _renormalized(amps: np.ndarray, what: str) -> np.ndarray:
    norm = float(np.vdot(amps, amps).real)
    if abs(norm - 1.0) > FILE_NORM_ATOL:
        raise InvalidInput(f"{what} is not normalized (norm^2 = {norm:.15g})")
    return amps / math.sqrt(norm)


# ── Schemas ───────────────────────────────────────────────────────────


class StateFile(BaseModel):
    num_qubits: int = Field(ge=0)
    amps: list[Pair]

    @model_validator(mode="after")
    def _check_length(self) -> StateFile:
        if len(self.amps) != 2**self.num_qubits:
            raise ValueError(f"{self.num_qubits} qubits need {2 ** self.num_qubits} amplitudes, got {len(self.amps)}")
        return self

    def to_state(self) -> StateVector:
        return StateVector.from_amplitudes(_renormalized(_complex(self.amps), "state file"))


class AliceSpec(BaseModel):
    n: int = Field(ge=1)
    alphas: list[Pair]

    def to_state(self) -> AliceState:
        return AliceState(self.n, _renormalized(_complex(self.alphas), "alice.alphas"))


class BobQubitSpec(BaseModel):
    beta0: float = Field(ge=0)
    beta1: float = Field(ge=0)
    theta: float = 0.0

    def to_qubit(self) -> BobQubit:
        norm = math.hypot(self.beta0, self.beta1)
        if abs(norm**2 - 1.0) > FILE_NORM_ATOL:
            raise InvalidInput(f"bob qubit is not normalized (β₀² + β₁² = {norm ** 2:.15g})")
        return BobQubit(self.beta0 / norm, self.beta1 / norm, self.theta)


class BobSpec(BaseModel):
    n: int = Field(ge=1)
    mode: Literal["product", "general"] = "product"
    qubits: Optional[list[BobQubitSpec]] = None
    betas: Optional[list[float]] = None
    thetas: Optional[list[float]] = None

    @model_validator(mode="after")
    def _check_mode_fields(self) -> BobSpec:
        if self.mode == "product" and self.qubits is None:
            raise ValueError("product mode needs 'qubits'")
        if self.mode == "general" and (self.betas is None or self.thetas is None):
            raise ValueError("general mode needs 'betas' and 'thetas'")
        return self

    def to_state(self) -> BobKnownState:
        if self.mode == "product":
            return BobKnownState(self.n, BobMode.PRODUCT, qubits=tuple(q.to_qubit() for q in self.qubits))
        betas = np.asarray(self.betas, dtype=np.float64)
        if np.any(betas < 0):
            raise InvalidInput("bob.betas must be non-negative")
        betas = _renormalized(betas.astype(np.complex128), "bob.betas").real
        return BobKnownState(self.n, BobMode.GENERAL, betas=betas, thetas=self.thetas)


class InputFile(BaseModel):
    alice: Optional[AliceSpec] = None
    bob: Optional[BobSpec] = None


# ── Reading ───────────────────────────────────────────────────────────


def _read_model(path: Path, model: type[BaseModel]) -> Any:
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise InvalidInput(f"cannot read {path}: {exc.strerror or exc}") from exc
    try:
        return model.model_validate_json(text)
    except ValidationError as exc:
        raise InvalidInput(f"{path}: {exc.error_count()} validation error(s): {exc.errors()[0]['msg']}") from exc


def read_state_file(path: Path) -> StateVector:
    return _read_model(path, StateFile).to_state()


def load_input_file(path: Path) -> InputFile:
    return _read_model(path, InputFile)


def load_alice(path: Path) -> AliceState:
    spec = load_input_file(path).alice
    if spec is None:
        raise InvalidInput(f"{path} has no 'alice' entry")
    return spec.to_state()


def load_bob(path: Path) -> BobKnownState:
    spec = load_input_file(path).bob
    if spec is None:
        raise InvalidInput(f"{path} has no 'bob' entry")
    return spec.to_state()


# ── Writing ───────────────────────────────────────────────────────────


def to_jsonable(value: Any, digits: int = SIGNIFICANT_DIGITS) -> Any:
    """Plain JSON types, with every float rounded to ``digits`` significant digits."""
    if isinstance(value, Enum):
        return to_jsonable(value.value, digits)
    if isinstance(value, bool) or value is None or isinstance(value, str):
        return value
    if isinstance(value, np.bool_):
        return bool(value)
    if isinstance(value, (int, np.integer)):
        return int(value)
    if isinstance(value, (float, np.floating)):
        return float(f"{float(value):.{digits}g}")
    if isinstance(value, (complex, np.complexfloating)):
        return [to_jsonable(value.real, digits), to_jsonable(value.imag, digits)]
    if isinstance(value, Fraction):
        return str(value)
    if isinstance(value, np.ndarray):
        return [to_jsonable(v, digits) for v in value.tolist()]
    if isinstance(value, dict):
        return {str(k): to_jsonable(v, digits) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [to_jsonable(v, digits) for v in value]
    raise TypeError(f"cannot serialize {type(value).__name__}")


def dumps(payload: Any, indent: Optional[int] = 2, digits: int = SIGNIFICANT_DIGITS) -> str:
    return json.dumps(to_jsonable(payload, digits), indent=indent, ensure_ascii=False)


def write_json(payload: Any, path: Optional[Path], indent: int = 2, digits: int = SIGNIFICANT_DIGITS) -> str:
    """Serialize ``payload``; write it to ``path`` when one is given."""
    text = dumps(payload, indent, digits) + "\n"
    if path is not None:
        Path(path).write_text(text, encoding="utf-8")
        logger.info("wrote %s", path)
    return text


def write_jsonl(rows: Iterable[Any], path: Optional[Path], digits: int = SIGNIFICANT_DIGITS) -> str:
    text = "".join(dumps(row, indent=None, digits=digits) + "\n" for row in rows)
    if path is not None:
        Path(path).write_text(text, encoding="utf-8")
        logger.info("wrote %s", path)
    return text


def write_state_file(state: StateVector, path: Path) -> None:
    payload = {
        "num_qubits": state.num_qubits,
        "amps": [[a.real, a.imag] for a in state.amps],
    }
    write_json(payload, path)
