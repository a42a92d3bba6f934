"""Unit tests for the structured amplitude simulator."""

import math

import numpy as np
import pytest

from app.core.exceptions import RegisterOverflowError, SimulatorSizeError
from app.core.polynomial import IntegerPolynomial
from app.core.sim_structured import (
    AmplitudeState,
    StructuredSampler,
    amplitude_blocks,
    grover_step,
    measure,
    prepare,
    prepare_from_table,
    success_probability,
)
from app.services.validation import grover_law_error

# n = 3 with exactly two negative entries
TWO_MARKED = np.array([-1, -1, 0, 1, 2, 3, 4, 5])


class TestPrepare:
    def test_uniform_amplitudes(self) -> None:
        state = prepare(IntegerPolynomial({(0,): 1, (1,): 2}, 2), 0, 3)
        np.testing.assert_allclose(state.amps, np.full(4, 0.5))
        assert state.n_vars == 2

    def test_constant_objective_at_its_value(self) -> None:
        state = prepare(IntegerPolynomial({(): 6}, 3), 6, 2)
        assert np.all(state.values == 0)
        assert not state.marked.any()

    def test_values_are_shifted_by_threshold(self) -> None:
        state = prepare(IntegerPolynomial({(): 2, (0,): -3}, 1), 1, 4)
        assert state.values.tolist() == [1, -2]

    def test_window_overflow(self) -> None:
        with pytest.raises(RegisterOverflowError):
            prepare_from_table(np.array([0, 9]), 0, 4)

    def test_variable_limit(self) -> None:
        with pytest.raises(SimulatorSizeError):
            prepare(IntegerPolynomial({}, 40), 0, 2)


class TestGroverStep:
    def test_two_of_eight_marked_after_one_step(self) -> None:
        """sin^2(3 arcsin(sqrt(2/8))) = 1."""
        state = grover_step(prepare_from_table(TWO_MARKED, 0, 4))
        assert success_probability(state) == pytest.approx(1.0, abs=1e-9)

    def test_no_marked_states(self) -> None:
        state = prepare_from_table(np.arange(8), 0, 5)
        for _ in range(5):
            state = grover_step(state)
            assert success_probability(state) == 0.0
            np.testing.assert_allclose(np.abs(state.amps), np.full(8, 1 / math.sqrt(8)))

    def test_fresh_state_success_probability(self) -> None:
        state = prepare_from_table(TWO_MARKED, 0, 4)
        assert success_probability(state) == pytest.approx(2 / 8)

    def test_norm_and_two_block_structure(self) -> None:
        table = np.random.default_rng(4).integers(-10, 11, size=64)
        state = prepare_from_table(table, 0, 6)
        for _ in range(12):
            state = grover_step(state)
            assert state.norm == pytest.approx(1.0, abs=1e-9)
            _, _, deviation = amplitude_blocks(state)
            assert deviation < 1e-9

    def test_grover_law_on_random_tables(self) -> None:
        rng = np.random.default_rng(20)
        for _ in range(20):
            n = int(rng.integers(3, 9))
            table = rng.integers(-20, 21, size=1 << n)
            y = int(rng.choice(table))
            assert grover_law_error(table, y, 7, max_rotations=10) < 1e-9


class TestMeasure:
    def test_deterministic_state(self, rng) -> None:
        amps = np.zeros(8, dtype=np.complex128)
        amps[5] = 1.0
        state = AmplitudeState(amps=amps, values=np.zeros(8, dtype=np.int64), m=2)
        assert {measure(state, rng) for _ in range(20)} == {5}

    def test_uniform_state(self) -> None:
        rng = np.random.default_rng(99)
        state = prepare_from_table(np.zeros(8, dtype=np.int64), 0, 2)
        draws = np.array([measure(state, rng) for _ in range(100_000)])
        counts = np.bincount(draws, minlength=8)
        expected = draws.size / 8
        chi2 = float(np.sum((counts - expected) ** 2 / expected))
        assert chi2 < 24.32  # df = 7, p = 0.001

    def test_optimal_rotation_count_success_rate(self) -> None:
        """One marked state out of 16 after floor(pi / 4 theta) steps."""
        rng = np.random.default_rng(16)
        table = np.arange(16) - 1
        theta = math.asin(math.sqrt(1 / 16))
        rotations = math.floor(math.pi / (4 * theta))
        state = prepare_from_table(table, 0, 6)
        for _ in range(rotations):
            state = grover_step(state)
        expected = math.sin((2 * rotations + 1) * theta) ** 2
        hits = sum(measure(state, rng) == 0 for _ in range(10_000))
        sigma = math.sqrt(expected * (1 - expected) / 10_000)
        assert abs(hits / 10_000 - expected) < 4 * sigma


def test_sampler_rejects_overflowing_threshold() -> None:
    sampler = StructuredSampler(IntegerPolynomial({(0,): 3}, 1), 3)
    with pytest.raises(RegisterOverflowError):
        sampler.sample(-10, 0, np.random.default_rng(0))
