"""
Validation Suite
Golden values, Grover-law checks, cross-simulator equivalence and encoder-vs-exhaustive
oracle checks, collected into one report.
"""

from __future__ import annotations

import math
from collections.abc import Callable
from dataclasses import dataclass, field
from decimal import Decimal
from typing import Literal

import numpy as np

from app.core.exceptions import GasGsmError, ValidationFailure
from app.core.gas import choose_m
from app.core.gsm import (
    Constellation,
    GsmConfig,
    build_ap_codebook,
    classical_mld,
    constellation_points,
    format_ap_table,
    map_symbol,
    synthesize,
)
from app.core.mld_encoder import build_objective, decode_assignment, encode_candidate
from app.core.polynomial import (
    IntegerPolynomial,
    evaluate_all,
    index_to_assignment,
    poly_eval,
)
from app.core.sim_statevector import (
    apply,
    build_a_y,
    grover_operator,
    prepare_state,
    register_distribution,
    x_marginal,
)
from app.core.sim_structured import grover_step, prepare_from_table, success_probability
from app.services.complexity import complexity_row
from app.services.experiment import ExperimentConfig, run_experiment
from app.utils.logger import app_logger

Level = Literal["fast", "full"]

AP_TABLE_GOLDEN = (
    "bits | antennas | matrix\n"
    "00 | (0, 1, 2) | [1 0 0; 0 1 0; 0 0 1; 0 0 0]\n"
    "01 | (1, 2, 3) | [0 0 0; 1 0 0; 0 1 0; 0 0 1]\n"
    "10 | (2, 3, 0) | [0 0 1; 0 0 0; 1 0 0; 0 1 0]\n"
    "11 | (3, 0, 1) | [0 1 0; 0 0 1; 0 0 0; 1 0 0]\n"
)

_R2 = 1 / math.sqrt(2)
QPSK_GOLDEN = {
    (0, 0): complex(_R2, _R2),
    (0, 1): complex(_R2, -_R2),
    (1, 0): complex(-_R2, _R2),
    (1, 1): complex(-_R2, -_R2),
}

# (instances for Grover law, simulator equivalence, encoder oracle, GAS optimality trials)
_LEVEL_SIZES: dict[str, tuple[int, int, int, int]] = {
    "fast": (5, 5, 10, 5),
    "full": (20, 20, 100, 100),
}


@dataclass(frozen=True, slots=True)
class CheckResult:
    name: str
    passed: bool
    detail: str = ""


@dataclass
class ValidationReport:
    level: str
    checks: list[CheckResult] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    @property
    def failures(self) -> list[CheckResult]:
        return [c for c in self.checks if not c.passed]

    def format(self) -> str:
        lines = [f"validation level: {self.level}"]
        for c in self.checks:
            status = "PASS" if c.passed else "FAIL"
            lines.append(f"[{status}] {c.name}" + (f" - {c.detail}" if c.detail else ""))
        lines.append(f"{len(self.checks) - len(self.failures)}/{len(self.checks)} checks passed")
        return "\n".join(lines)

    def raise_for_failures(self) -> None:
        if self.failures:
            names = ", ".join(c.name for c in self.failures)
            raise ValidationFailure(f"failed checks: {names}", "bench")


def random_integer_polynomial(
    rng: np.random.Generator,
    n_vars: int,
    n_terms: int,
    max_degree: int = 2,
    coeff_range: tuple[int, int] = (-4, 4),
) -> IntegerPolynomial:
    """Random multilinear integer polynomial with a constant term."""
    terms: dict[tuple[int, ...], int] = {(): int(rng.integers(coeff_range[0], coeff_range[1] + 1))}
    for _ in range(n_terms):
        degree = int(rng.integers(1, min(max_degree, n_vars) + 1))
        mono = tuple(sorted(rng.choice(n_vars, size=degree, replace=False).tolist()))
        terms[mono] = terms.get(mono, 0) + int(rng.integers(coeff_range[0], coeff_range[1] + 1))
    return IntegerPolynomial(terms, n_vars)


def grover_law_error(table: np.ndarray, y_int: int, m: int, max_rotations: int = 10) -> float:
    """Largest deviation of simulated success probability from sin^2((2L+1) theta)."""
    state = prepare_from_table(table, y_int, m)
    t = int(np.sum(state.marked))
    theta = math.asin(math.sqrt(t / table.size))
    worst = 0.0
    for rotations in range(max_rotations + 1):
        expected = math.sin((2 * rotations + 1) * theta) ** 2
        worst = max(worst, abs(success_probability(state) - expected))
        state = grover_step(state)
    return worst


def simulator_mismatch(p: IntegerPolynomial, y_int: int, m: int, rotations: int = 3) -> float:
    """Max |structured - gate-level| x-marginal difference over L = 0..rotations."""
    a_y = build_a_y(p, y_int, m)
    g = grover_operator(a_y, m)
    gate_state = prepare_state(a_y)
    structured = prepare_from_table(evaluate_all(p), y_int, m)
    worst = 0.0
    for step in range(rotations + 1):
        if step:
            gate_state = apply(g, gate_state)
            structured = grover_step(structured)
        diff = np.abs(x_marginal(gate_state) - np.abs(structured.amps) ** 2)
        worst = max(worst, float(diff.max()))
    return worst


def register_mismatch(p: IntegerPolynomial, y_int: int, m: int) -> float:
    """Deviation of P(x, register = (E(x) - y) mod 2^m) from 1/2^n after A_y."""
    state = prepare_state(build_a_y(p, y_int, m))
    values = evaluate_all(p) - y_int
    weight = 1 / (1 << p.n_vars)
    return max(
        abs(register_distribution(state, x)[int(v) % (1 << m)] - weight)
        for x, v in enumerate(values)
    )


def _check_constellations() -> list[CheckResult]:
    checks = []
    qpsk_ok = all(
        abs(map_symbol(bits, Constellation.QPSK) - point) < 1e-12
        for bits, point in QPSK_GOLDEN.items()
    )
    checks.append(CheckResult("golden: QPSK points", qpsk_ok))
    qam_ok = (
        abs(map_symbol((0, 0, 0, 0), Constellation.QAM16) - complex(1, 1) / math.sqrt(10)) < 1e-12
        and abs(map_symbol((1, 0, 1, 0), Constellation.QAM16) - complex(-3, 1) / math.sqrt(10))
        < 1e-12
    )
    checks.append(CheckResult("golden: 16QAM points", qam_ok))
    for c in Constellation:
        energy = float(np.mean(np.abs(constellation_points(c)) ** 2))
        checks.append(
            CheckResult(f"unit energy: {c.value}", abs(energy - 1) < 1e-12, f"{energy:.15f}")
        )
    return checks


def _check_table() -> CheckResult:
    rendered = format_ap_table(build_ap_codebook(4, 3, 4, "cyclic"))
    return CheckResult("golden: AP mapping table (4, 3, 4)", rendered == AP_TABLE_GOLDEN)


def _check_ratio() -> list[CheckResult]:
    low = complexity_row(16, 1, 2, 16).ratio
    high = complexity_row(16, 8, 16, 12870).ratio
    ratios = [complexity_row(16, k, 16).ratio for k in range(1, 9)]
    return [
        CheckResult("ratio: N_t=16 K=1 L=2", low == Decimal(2048), str(low)),
        CheckResult(
            "ratio: N_t=16 K=8 L=16",
            abs(float(high) - 0.0199) / 0.0199 < 1e-3,
            f"{float(high):.6f}",
        ),
        CheckResult(
            "ratio: decreasing in K at L=16",
            all(a > b for a, b in zip(ratios, ratios[1:], strict=False)),
        ),
    ]


def _check_grover_law(instances: int, rng: np.random.Generator) -> CheckResult:
    worst = 0.0
    for _ in range(instances):
        n = int(rng.integers(3, 11))
        table = rng.integers(-20, 21, size=1 << n)
        y = int(rng.choice(table))
        worst = max(worst, grover_law_error(table, y, m=7))
    return CheckResult("Grover law (L <= 10)", worst < 1e-9, f"max error {worst:.2e}")


def _check_equivalence(instances: int, rng: np.random.Generator) -> list[CheckResult]:
    worst_marginal = worst_register = 0.0
    for _ in range(instances):
        n = int(rng.integers(2, 6))
        p = random_integer_polynomial(rng, n, n_terms=n + 2, max_degree=min(3, n))
        m = choose_m(p, 0)
        if n + m > 16:
            continue
        values = evaluate_all(p)
        y = int(rng.choice(values))
        worst_marginal = max(worst_marginal, simulator_mismatch(p, y, m))
        worst_register = max(worst_register, register_mismatch(p, y, m))
    return [
        CheckResult(
            "simulators agree on x-marginals", worst_marginal < 1e-9, f"{worst_marginal:.2e}"
        ),
        CheckResult(
            "value register is deterministic", worst_register < 1e-9, f"{worst_register:.2e}"
        ),
    ]


def _check_encoder(instances: int, seed: int) -> CheckResult:
    cfg = GsmConfig(4, 4, 3, 4)
    codebook = build_ap_codebook(4, 3, 4)
    mismatches = 0
    worst = 0.0
    for t in range(instances):
        _, chan = synthesize(cfg, codebook, seed + t)
        problem = build_objective(chan, cfg, codebook, 15.0)
        classical = classical_mld(chan, cfg, codebook)
        table = evaluate_all(problem.objective)
        best = index_to_assignment(int(np.argmin(table)), problem.n_vars)
        decoded = decode_assignment(best, problem)
        if (decoded.ap_index, decoded.symbol_indices) != (
            classical.ap_index,
            classical.symbol_indices,
        ):
            mismatches += 1
        x = encode_candidate(classical.ap_index, classical.symbol_indices, problem)
        worst = max(worst, abs(float(poly_eval(problem.objective, x)) - classical.metric))
    return CheckResult(
        "encoder argmin matches exhaustive MLD",
        mismatches == 0 and worst < 1e-9,
        f"{mismatches} mismatches, feasible error {worst:.2e}",
    )


def _check_gas(trials: int, seed: int) -> CheckResult:
    cfg = ExperimentConfig.reference_preset(
        trials=trials, stop_at_optimum=True, seed=seed, precision_bits=20
    )
    summary = run_experiment(cfg, write=False)
    worst = max(
        abs(o.final_objective - o.classical_metric) / max(o.classical_metric, 1e-12)
        for o in summary.outcomes
    )
    ok = summary.optimum_found_count == trials and worst <= 1e-6
    return CheckResult(
        "GAS reaches the exhaustive MLD optimum",
        ok,
        f"{summary.optimum_found_count}/{trials} found, worst relative gap {worst:.2e}",
    )


def validate(level: Level = "fast", seed: int = 2024) -> ValidationReport:
    """
    Run the validation suite.

    Args:
        level: fast keeps every check small; full uses the acceptance-sized instance counts
        seed: Seed of the random instances

    Returns:
        ValidationReport listing every check
    """
    if level not in _LEVEL_SIZES:
        raise ValueError(f"unknown validation level {level!r}")
    grover_n, equivalence_n, encoder_n, gas_n = _LEVEL_SIZES[level]
    rng = np.random.default_rng(seed)
    report = ValidationReport(level=level)

    suites: list[Callable[[], CheckResult | list[CheckResult]]] = [
        _check_constellations,
        _check_table,
        _check_ratio,
        lambda: _check_grover_law(grover_n, rng),
        lambda: _check_equivalence(equivalence_n, rng),
        lambda: _check_encoder(encoder_n, seed),
        lambda: _check_gas(gas_n, seed),
    ]
    for suite in suites:
        try:
            outcome = suite()
        except GasGsmError as exc:
            outcome = CheckResult(f"{exc.component} check raised", False, exc.message)
        report.checks.extend(outcome if isinstance(outcome, list) else [outcome])

    app_logger.info(
        "Validation finished",
        extra={"level": level, "checks": len(report.checks), "failed": len(report.failures)},
    )
    return report

