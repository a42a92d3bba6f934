"""
Structured GAS Simulator
Exact amplitude dynamics over the 2^n search register. With integer coefficients A_y leaves
each x entangled with the single register value E(x) - y, so G acts on the x amplitudes as a
sign flip of the negative-value states followed by a reflection about the uniform state.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from app.config import settings
from app.core.exceptions import RegisterOverflowError, SimulatorSizeError
from app.core.polynomial import IntegerPolynomial, evaluate_all


@dataclass(frozen=True, slots=True, eq=False)
class AmplitudeState:
    amps: np.ndarray
    values: np.ndarray
    m: int

    @property
    def n_vars(self) -> int:
        return self.amps.size.bit_length() - 1

    @property
    def marked(self) -> np.ndarray:
        """Mask of x whose register holds a negative two's complement value."""
        return self.values < 0

    @property
    def norm(self) -> float:
        return float(np.sum(np.abs(self.amps) ** 2))


def prepare_from_table(table: np.ndarray, y_int: int, m: int) -> AmplitudeState:
    """
    Uniform superposition entangled with E(x) - y.

    Raises:
        RegisterOverflowError: A value falls outside the m-bit two's complement window
    """
    size = table.size
    if size & (size - 1) or size == 0:
        raise SimulatorSizeError(f"value table of length {size} is not 2^n", size, 0, "structured")
    values = np.asarray(table, dtype=np.int64) - int(y_int)
    low, high = -(1 << (m - 1)), (1 << (m - 1)) - 1
    if values.min() < low or values.max() > high:
        raise RegisterOverflowError(
            f"E(x) - y spans [{values.min()}, {values.max()}], outside [{low}, {high}] at m={m}",
            m,
        )
    amps = np.full(size, 1 / np.sqrt(size), dtype=np.complex128)
    return AmplitudeState(amps=amps, values=values, m=m)


def prepare(problem: IntegerPolynomial, y_int: int, m: int) -> AmplitudeState:
    """Build the value table of a quantized objective, then prepare as above."""
    if problem.n_vars > settings.STRUCTURED_MAX_VARIABLES:
        raise SimulatorSizeError(
            f"{problem.n_vars} variables exceed the structured limit",
            problem.n_vars,
            settings.STRUCTURED_MAX_VARIABLES,
            "structured",
        )
    return prepare_from_table(evaluate_all(problem), y_int, m)


def grover_step(state: AmplitudeState) -> AmplitudeState:
    """One application of G: oracle sign flip, then amps <- 2 mean(amps) - amps."""
    flipped = np.where(state.marked, -state.amps, state.amps)
    reflected = 2 * flipped.mean() - flipped
    return AmplitudeState(amps=reflected, values=state.values, m=state.m)


def measure(state: AmplitudeState, rng: np.random.Generator) -> int:
    probabilities = np.abs(state.amps) ** 2
    probabilities /= probabilities.sum()
    return int(rng.choice(probabilities.size, p=probabilities))


def success_probability(state: AmplitudeState) -> float:
    return float(np.sum(np.abs(state.amps[state.marked]) ** 2))


def amplitude_blocks(state: AmplitudeState) -> tuple[complex | None, complex | None, float]:
    """Shared amplitude of the marked block, of the unmarked block, and the largest deviation."""
    marked = state.marked
    blocks: list[complex | None] = []
    deviation = 0.0
    for mask in (marked, ~marked):
        block = state.amps[mask]
        if block.size == 0:
            blocks.append(None)
            continue
        blocks.append(complex(block[0]))
        deviation = max(deviation, float(np.max(np.abs(block - block[0]))))
    return blocks[0], blocks[1], deviation


class StructuredSampler:
    """Sampler back-end bound to one quantized objective and register width."""

    def __init__(self, quantized: IntegerPolynomial, m: int, table: np.ndarray | None = None):
        self.quantized = quantized
        self.m = m
        self.table = evaluate_all(quantized) if table is None else table

    def sample(self, threshold: int, rotations: int, rng: np.random.Generator) -> int:
        state = prepare_from_table(self.table, threshold, self.m)
        for _ in range(rotations):
            state = grover_step(state)
        return measure(state, rng)
