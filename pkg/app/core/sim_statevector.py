"""
Gate-Level State-Vector Simulator
Dense simulation of the GAS circuit on n variable qubits plus an m-qubit value register:
Hadamard wall, controlled phase blocks U_G, inverse QFT, sign-qubit oracle and diffusion.
Also hosts the real-coefficient encoding study.
"""

from __future__ import annotations

import math
from collections.abc import Iterable, Iterator, Mapping
from dataclasses import dataclass
from pathlib import Path

import numpy as np
import pandas as pd

from app.config import settings
from app.core.exceptions import GateIndexError, RegisterOverflowError, SimulatorSizeError
from app.core.polynomial import (
    CONSTANT,
    BinaryPolynomial,
    IntegerPolynomial,
    Monomial,
    evaluate_all,
)
from app.utils.logger import app_logger
from app.utils.memory_profiler import ensure_state_fits

# Qubits 0..n-1 hold x (qubit q is bit q of the flat index); qubits n..n+m-1 hold the value
# register MSB first, so qubit n+j is bit n+(m-1-j). Flat index = x + 2^n * register.


@dataclass(frozen=True, slots=True)
class Hadamard:
    qubit: int

    def inverse(self) -> Hadamard:
        return self


@dataclass(frozen=True, slots=True)
class Phase:
    """R(theta) = diag(1, e^{i theta})."""

    qubit: int
    theta: float

    def inverse(self) -> Phase:
        return Phase(self.qubit, -self.theta)


@dataclass(frozen=True, slots=True)
class ControlledPhase:
    controls: tuple[int, ...]
    qubit: int
    theta: float

    def inverse(self) -> ControlledPhase:
        return ControlledPhase(self.controls, self.qubit, -self.theta)


@dataclass(frozen=True, slots=True)
class Swap:
    qubit_a: int
    qubit_b: int

    def inverse(self) -> Swap:
        return self


@dataclass(frozen=True, slots=True)
class PauliZ:
    qubit: int

    def inverse(self) -> PauliZ:
        return self


@dataclass(frozen=True, slots=True)
class Diffusion:
    """2|0><0| - I on every qubit."""

    def inverse(self) -> Diffusion:
        return self


Gate = Hadamard | Phase | ControlledPhase | Swap | PauliZ | Diffusion


def _gate_qubits(gate: Gate) -> tuple[int, ...]:
    if isinstance(gate, ControlledPhase):
        return (*gate.controls, gate.qubit)
    if isinstance(gate, Swap):
        return (gate.qubit_a, gate.qubit_b)
    if isinstance(gate, Diffusion):
        return ()
    return (gate.qubit,)


@dataclass(frozen=True, slots=True)
class GateSequence:
    gates: tuple[Gate, ...]
    n_vars: int
    m: int

    def __post_init__(self) -> None:
        object.__setattr__(self, "gates", tuple(self.gates))
        for gate in self.gates:
            for q in _gate_qubits(gate):
                if not 0 <= q < self.n_qubits:
                    raise GateIndexError(
                        f"{gate} addresses qubit {q} of a {self.n_qubits}-qubit register",
                        "statevector",
                    )

    @property
    def n_qubits(self) -> int:
        return self.n_vars + self.m

    def __len__(self) -> int:
        return len(self.gates)

    def __iter__(self) -> Iterator[Gate]:
        return iter(self.gates)

    def __add__(self, other: GateSequence) -> GateSequence:
        if (self.n_vars, self.m) != (other.n_vars, other.m):
            raise GateIndexError(
                "cannot concatenate sequences of different registers", "statevector"
            )
        return GateSequence(self.gates + other.gates, self.n_vars, self.m)

    def inverse(self) -> GateSequence:
        return GateSequence(tuple(g.inverse() for g in reversed(self.gates)), self.n_vars, self.m)


@dataclass(frozen=True, slots=True, eq=False)
class StateVector:
    amps: np.ndarray
    n_vars: int
    m: int

    @classmethod
    def zero(cls, n_vars: int, m: int) -> StateVector:
        ensure_state_fits(n_vars + m)
        amps = np.zeros(1 << (n_vars + m), dtype=np.complex128)
        amps[0] = 1.0
        return cls(amps=amps, n_vars=n_vars, m=m)

    @property
    def n_qubits(self) -> int:
        return self.n_vars + self.m

    @property
    def probabilities(self) -> np.ndarray:
        return np.abs(self.amps) ** 2

    @property
    def norm(self) -> float:
        return float(np.sum(self.probabilities))


def _bit(q: int, n_vars: int, m: int) -> int:
    """Flat-index bit position of qubit q."""
    return q if q < n_vars else n_vars + (m - 1 - (q - n_vars))


def apply(seq: GateSequence, state: StateVector) -> StateVector:
    """
    Apply the gates in order and return the new state.

    Consecutive diagonal gates are folded into one phase vector before touching amplitudes.

    Raises:
        GateIndexError: Sequence and state disagree on the register shape
    """
    if (seq.n_vars, seq.m) != (state.n_vars, state.m):
        raise GateIndexError(
            f"sequence on {seq.n_vars}+{seq.m} qubits applied to {state.n_vars}+{state.m}",
            "statevector",
        )
    n, m = state.n_vars, state.m
    amps = state.amps.copy()
    index = np.arange(amps.size, dtype=np.int64)
    phase = np.zeros(amps.size, dtype=np.float64)
    pending = False

    for gate in seq:
        if isinstance(gate, Phase | ControlledPhase | PauliZ):
            qubits = _gate_qubits(gate)
            mask = sum(1 << _bit(q, n, m) for q in qubits)
            theta = math.pi if isinstance(gate, PauliZ) else gate.theta
            phase[(index & mask) == mask] += theta
            pending = True
            continue

        if pending:
            amps *= np.exp(1j * phase)
            phase[:] = 0.0
            pending = False

        if isinstance(gate, Hadamard):
            b = _bit(gate.qubit, n, m)
            view = amps.reshape(-1, 2, 1 << b)
            low, high = view[:, 0, :].copy(), view[:, 1, :].copy()
            view[:, 0, :] = (low + high) / math.sqrt(2)
            view[:, 1, :] = (low - high) / math.sqrt(2)
        elif isinstance(gate, Swap):
            a, b = _bit(gate.qubit_a, n, m), _bit(gate.qubit_b, n, m)
            differs = ((index >> a) ^ (index >> b)) & 1
            partner = index ^ (differs * ((1 << a) | (1 << b)))
            amps = amps[partner]
        else:
            origin = amps[0]
            amps = -amps
            amps[0] += 2 * origin

    if pending:
        amps *= np.exp(1j * phase)
    return StateVector(amps=amps, n_vars=n, m=m)


def qft_sequence(n_vars: int, m: int) -> GateSequence:
    """QFT on the value register: H and controlled rotations per qubit, then reversal swaps."""
    gates: list[Gate] = []
    for a in range(m):
        target = n_vars + a
        gates.append(Hadamard(target))
        for b in range(a + 1, m):
            gates.append(ControlledPhase((n_vars + b,), target, 2 * math.pi / (1 << (b - a + 1))))
    for a in range(m // 2):
        gates.append(Swap(n_vars + a, n_vars + m - 1 - a))
    return GateSequence(tuple(gates), n_vars, m)


def iqft_sequence(n_vars: int, m: int) -> GateSequence:
    return qft_sequence(n_vars, m).inverse()


def _phase_blocks(terms: Mapping[Monomial, float | int], n_vars: int, m: int) -> list[Gate]:
    """U_G(2 pi a / 2^m) per term: value qubit j gets 2^(m-1-j) theta, controlled on the term."""
    gates: list[Gate] = []
    for mono, a in terms.items():
        if a == 0:
            continue
        theta = 2 * math.pi * a / (1 << m)
        for j in range(m):
            angle = theta * (1 << (m - 1 - j))
            if mono:
                gates.append(ControlledPhase(tuple(mono), n_vars + j, angle))
            else:
                gates.append(Phase(n_vars + j, angle))
    return gates


def _shifted_terms(
    terms: Mapping[Monomial, float | int], shift: float | int
) -> dict[Monomial, float | int]:
    shifted: dict[Monomial, float | int] = {CONSTANT: terms.get(CONSTANT, 0) - shift}
    shifted.update((mono, c) for mono, c in terms.items() if mono)
    return shifted


def _a_y(terms: Mapping[Monomial, float | int], n_vars: int, m: int) -> GateSequence:
    gates: list[Gate] = [Hadamard(q) for q in range(n_vars + m)]
    gates += _phase_blocks(terms, n_vars, m)
    return GateSequence(tuple(gates), n_vars, m) + iqft_sequence(n_vars, m)


def build_a_y(p: IntegerPolynomial, y_int: int, m: int) -> GateSequence:
    """State preparation A_y encoding E(x) - y into the value register."""
    return _a_y(_shifted_terms(p.terms, int(y_int)), p.n_vars, m)


def encode_real_coefficients(p: BinaryPolynomial, m: int, y: float = 0.0) -> GateSequence:
    """A_y with real phases; the register ends up concentrated near E(x) - y."""
    if not p.is_real:
        p = p.real_part()
    return _a_y(_shifted_terms(p.terms, y), p.n_vars, m)


def grover_operator(a_y: GateSequence, m: int) -> GateSequence:
    """G = A_y D A_y^H O as a gate list: oracle first, A_y last."""
    if a_y.m != m:
        raise GateIndexError(f"A_y built for m={a_y.m}, not {m}", "statevector")
    oracle = GateSequence((PauliZ(a_y.n_vars),), a_y.n_vars, m)
    diffusion = GateSequence((Diffusion(),), a_y.n_vars, m)
    return oracle + a_y.inverse() + diffusion + a_y


def prepare_state(a_y: GateSequence) -> StateVector:
    return apply(a_y, StateVector.zero(a_y.n_vars, a_y.m))


def _grid(state: StateVector) -> np.ndarray:
    """Probabilities as a (2^m registers, 2^n assignments) array."""
    return state.probabilities.reshape(1 << state.m, 1 << state.n_vars)


def x_marginal(state: StateVector) -> np.ndarray:
    return _grid(state).sum(axis=0)


def register_distribution(state: StateVector, x: int) -> np.ndarray:
    """Joint probabilities P(x, register = r) for r = 0..2^m - 1."""
    return _grid(state)[:, x]


def sign_qubit_probability(state: StateVector) -> np.ndarray:
    """P(sign qubit = 1 | x) for every x."""
    grid = _grid(state)
    negative = grid[1 << (state.m - 1) :, :].sum(axis=0)
    marginal = grid.sum(axis=0)
    return np.divide(negative, marginal, out=np.zeros_like(negative), where=marginal > 0)


def to_signed(register: np.ndarray | int, m: int) -> np.ndarray | int:
    """Two's complement reading of an m-bit register value."""
    return register - (1 << m) * (register >= (1 << (m - 1)))


def dump_state(state: StateVector, path: str | Path) -> Path:
    """Write (x, register, value, probability) for every basis state."""
    if state.n_qubits > settings.DEBUG_DUMP_MAX_QUBITS:
        raise SimulatorSizeError(
            "state too large for a per-basis-state dump",
            state.n_qubits,
            settings.DEBUG_DUMP_MAX_QUBITS,
        )
    index = np.arange(state.amps.size)
    x = index & ((1 << state.n_vars) - 1)
    register = index >> state.n_vars
    frame = pd.DataFrame(
        {
            "x": x,
            "register": register,
            "value": to_signed(register, state.m),
            "probability": state.probabilities,
        }
    )
    target = Path(path)
    target.parent.mkdir(parents=True, exist_ok=True)
    frame.to_csv(target, index=False)
    return target


class StateVectorSampler:
    """Gate-level Sampler back-end; A_y and G are rebuilt only when the threshold moves."""

    def __init__(self, quantized: IntegerPolynomial, m: int):
        ensure_state_fits(quantized.n_vars + m)
        self.quantized = quantized
        self.m = m
        self._threshold: int | None = None
        self._circuits: tuple[GateSequence, GateSequence] | None = None

    def _circuits_for(self, threshold: int) -> tuple[GateSequence, GateSequence]:
        if self._circuits is None or self._threshold != threshold:
            a_y = build_a_y(self.quantized, threshold, self.m)
            self._circuits = (a_y, grover_operator(a_y, self.m))
            self._threshold = threshold
        return self._circuits

    def sample(self, threshold: int, rotations: int, rng: np.random.Generator) -> int:
        a_y, g = self._circuits_for(threshold)
        state = prepare_state(a_y)
        for _ in range(rotations):
            state = apply(g, state)
        probabilities = x_marginal(state)
        probabilities /= probabilities.sum()
        return int(rng.choice(probabilities.size, p=probabilities))


@dataclass(frozen=True, slots=True)
class SignErrorRates:
    m: int
    false_negative_rate: float
    false_positive_rate: float
    wrong_sign_mass: float


def sign_error_rates(p: BinaryPolynomial, y: float, m: int, integer_bits: int) -> SignErrorRates:
    """
    Oracle misclassification under real-phase encoding.

    E(x) - y is scaled by 2^(m - integer_bits), so qubits beyond integer_bits act as
    fractional precision. An x counts as misclassified when its sign qubit reads the
    wrong sign with probability of at least one half.

    Raises:
        RegisterOverflowError: Scaled values leave the m-bit window
    """
    if integer_bits < 1 or integer_bits > m:
        raise RegisterOverflowError(f"integer_bits={integer_bits} must lie in 1..{m}", m)
    factor = float(1 << (m - integer_bits))
    exact = evaluate_all(p.real_part()) - y
    if np.any(exact * factor < -(1 << (m - 1))) or np.any(exact * factor >= (1 << (m - 1))):
        raise RegisterOverflowError(f"E(x) - y does not fit {integer_bits} integer bits", m)

    scaled = p.real_part().scale(factor)
    state = prepare_state(encode_real_coefficients(scaled, m, y * factor))
    p_negative = sign_qubit_probability(state)

    negative = exact < 0
    wrong = np.where(negative, 1 - p_negative, p_negative)
    false_negative = negative & (p_negative <= 0.5)
    false_positive = ~negative & (p_negative >= 0.5)
    return SignErrorRates(
        m=m,
        false_negative_rate=float(false_negative.sum() / max(int(negative.sum()), 1)),
        false_positive_rate=float(false_positive.sum() / max(int((~negative).sum()), 1)),
        wrong_sign_mass=float(wrong.mean()),
    )


def sign_error_sweep(
    p: BinaryPolynomial, y: float, m_values: Iterable[int], integer_bits: int
) -> list[SignErrorRates]:
    rates = [sign_error_rates(p, y, m, integer_bits) for m in m_values]
    app_logger.debug(
        "Sign error sweep finished",
        extra={"m_values": [r.m for r in rates], "integer_bits": integer_bits},
    )
    return rates


