"""
Grover Adaptive Search Driver
Threshold descent with randomized rotation counts and geometric growth of the rotation bound.
The driver never touches amplitudes: a Sampler back-end performs the quantum part.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Any, Protocol

import numpy as np

from app.config import settings
from app.core.exceptions import ConfigurationError
from app.core.mld_encoder import MldProblem
from app.core.polynomial import (
    BinaryPolynomial,
    IntegerPolynomial,
    evaluate_all,
    index_to_assignment,
    poly_eval,
    range_bound,
)
from app.utils.logger import app_logger

CEIL_NUDGE = 1e-12


class Sampler(Protocol):
    """Measurement back-end: prepare A_y for `threshold`, apply G `rotations` times, measure x."""

    def sample(self, threshold: int, rotations: int, rng: np.random.Generator) -> int: ...


@dataclass(frozen=True, slots=True, eq=False)
class PolynomialProblem:
    """Quantized objective, its full value table and (optionally) the exact objective."""

    quantized: IntegerPolynomial
    table: np.ndarray
    exact: BinaryPolynomial | None = None

    @classmethod
    def from_polynomial(
        cls, quantized: IntegerPolynomial, exact: BinaryPolynomial | None = None
    ) -> PolynomialProblem:
        return cls(quantized=quantized, table=evaluate_all(quantized), exact=exact)

    @classmethod
    def from_mld(cls, problem: MldProblem) -> PolynomialProblem:
        return cls.from_polynomial(problem.quantized, problem.objective)

    @property
    def n_vars(self) -> int:
        return self.quantized.n_vars

    @property
    def optimum(self) -> int:
        return int(self.table.min())

    def exact_value(self, x: int) -> float:
        if self.exact is None:
            return float(self.table[x]) * self.quantized.scale
        return float(poly_eval(self.exact, index_to_assignment(x, self.n_vars)))


@dataclass(frozen=True, slots=True)
class Termination:
    """Stop conditions; any condition left as None is inactive."""

    patience: int | None = None
    max_qcqd: float | None = None
    target: int | None = None

    @classmethod
    def default(cls, n_vars: int) -> Termination:
        """Patience ceil(sqrt(2^n)) non-improving iterations, rotation budget 10 sqrt(2^n)."""
        root = math.sqrt(2**n_vars)
        return cls(patience=math.ceil(root), max_qcqd=10 * root)

    @classmethod
    def until_target(cls, target: int) -> Termination:
        return cls(target=int(target))


@dataclass(frozen=True, slots=True)
class GasParams:
    lambda_growth: float = field(default_factory=lambda: settings.GAS_LAMBDA_GROWTH)
    m: int | None = None
    termination: Termination | None = None
    seed: int | np.random.SeedSequence | None = None
    max_iterations: int = field(default_factory=lambda: settings.GAS_MAX_ITERATIONS)

    def __post_init__(self) -> None:
        if not self.lambda_growth > 1:
            raise ConfigurationError("lambda_growth must exceed 1", "gas")
        if self.m is not None and self.m < 1:
            raise ConfigurationError("m must be at least 1", "gas")
        if self.max_iterations < 1:
            raise ConfigurationError("max_iterations must be positive", "gas")


@dataclass(frozen=True, slots=True)
class GasRecord:
    """One iteration; `threshold` is the value after this iteration's update."""

    iteration: int
    rotations: int
    x: int
    value: int
    threshold: int
    improved: bool
    cumulative_qcqd: int
    cumulative_qccd: int


@dataclass(frozen=True, slots=True)
class GasResult:
    best_x: int
    best_value: float
    best_value_int: int
    initial_x: int
    initial_value_int: int
    trace: tuple[GasRecord, ...]
    m: int
    scale: float
    stop_reason: str

    @property
    def qcqd(self) -> int:
        return sum(r.rotations for r in self.trace)

    @property
    def qccd(self) -> int:
        return len(self.trace) + 1

    @property
    def qcqd_at_best(self) -> int:
        improved = [r for r in self.trace if r.improved]
        return improved[-1].cumulative_qcqd if improved else 0

    @property
    def qccd_at_best(self) -> int:
        improved = [r for r in self.trace if r.improved]
        return improved[-1].cumulative_qccd if improved else 1


def choose_m(p: IntegerPolynomial, margin_bits: int | None = None) -> int:
    """
    Smallest two's complement width holding E(x) - y for every threshold y in range.

    Since y itself lies in [lower, upper], the register must cover
    [lower - upper, upper - lower].
    """
    margin = settings.DEFAULT_MARGIN_BITS if margin_bits is None else margin_bits
    if margin < 0:
        raise ConfigurationError("margin_bits must be non-negative", "gas")
    lower, upper = range_bound(p)
    span_low, span_high = lower - upper, upper - lower
    m = 1
    while not (-(1 << (m - 1)) <= span_low and span_high < (1 << (m - 1))):
        m += 1
    return m + margin


def sample_rotation_count(k: float, rng: np.random.Generator) -> int:
    """Uniform draw from {0, ..., ceil(k - 1)}."""
    if k < 1:
        raise ConfigurationError(f"rotation bound k={k} must be at least 1", "gas")
    upper = math.ceil(k - 1 - CEIL_NUDGE)
    return int(rng.integers(0, upper + 1))


def run_gas(
    problem: PolynomialProblem | MldProblem,
    sampler: Sampler,
    params: GasParams | None = None,
) -> GasResult:
    """
    Minimize the quantized objective with Grover adaptive search.

    Args:
        problem: Objective to minimize (MLD problems are adapted automatically)
        sampler: Measurement back-end bound to the same quantized objective
        params: Growth factor, register width, termination and seed

    Returns:
        GasResult with the iteration trace and query counts

    Raises:
        ConfigurationError: params.m is narrower than the objective needs
    """
    if isinstance(problem, MldProblem):
        problem = PolynomialProblem.from_mld(problem)
    params = params or GasParams()
    n = problem.n_vars
    termination = params.termination or Termination.default(n)

    required_m = choose_m(problem.quantized, 0)
    m = required_m if params.m is None else params.m
    if m < required_m:
        raise ConfigurationError(f"m={m} cannot hold the objective range ({required_m})", "gas")

    rng = np.random.default_rng(params.seed)
    k_cap = math.sqrt(2**n)
    table = problem.table

    best_x = initial_x = int(rng.integers(0, 1 << n))
    threshold = initial_value = int(table[initial_x])
    k = 1.0
    qcqd = 0
    stall = 0
    trace: list[GasRecord] = []
    stop_reason = "target" if _reached(termination, threshold) else ""

    while not stop_reason:
        if len(trace) >= params.max_iterations:
            stop_reason = "max_iterations"
            break

        rotations = sample_rotation_count(k, rng)
        x = sampler.sample(threshold, rotations, rng)
        value = int(table[x])
        qcqd += rotations

        improved = value < threshold
        if improved:
            best_x, threshold = x, value
            k = 1.0
            stall = 0
        else:
            k = min(params.lambda_growth * k, k_cap)
            stall += 1

        trace.append(
            GasRecord(
                iteration=len(trace) + 1,
                rotations=rotations,
                x=x,
                value=value,
                threshold=threshold,
                improved=improved,
                cumulative_qcqd=qcqd,
                cumulative_qccd=len(trace) + 2,
            )
        )

        if _reached(termination, threshold):
            stop_reason = "target"
        elif termination.patience is not None and stall >= termination.patience:
            stop_reason = "patience"
        elif termination.max_qcqd is not None and qcqd >= termination.max_qcqd:
            stop_reason = "budget"

    result = GasResult(
        best_x=best_x,
        best_value=problem.exact_value(best_x),
        best_value_int=threshold,
        initial_x=initial_x,
        initial_value_int=initial_value,
        trace=tuple(trace),
        m=m,
        scale=problem.quantized.scale,
        stop_reason=stop_reason,
    )
    app_logger.debug(
        f"GAS stopped ({stop_reason}) after {len(trace)} iterations",
        extra={"n_vars": n, "m": m, "qcqd": result.qcqd, "qccd": result.qccd},
    )
    return result


def _reached(termination: Termination, threshold: int) -> bool:
    return termination.target is not None and threshold <= termination.target


def trace_rows(result: GasResult, trial: int, scale: float | None = None) -> list[dict[str, Any]]:
    """Per-iteration CSV rows with values converted back to objective units."""
    unit = result.scale if scale is None else scale
    return [
        {
            "trial": trial,
            "i": r.iteration,
            "L_i": r.rotations,
            "y_i": r.threshold * unit,
            "measured_value": r.value * unit,
            "improved": int(r.improved),
            "cumulative_qcqd": r.cumulative_qcqd,
            "cumulative_qccd": r.cumulative_qccd,
        }
        for r in result.trace
    ]
