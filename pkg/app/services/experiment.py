"""
Monte Carlo Experiment Harness
Runs GAS detection over independent channel realizations, compares every trial with the
exhaustive detector and writes plot-ready CSV/JSON outputs.
"""

from __future__ import annotations

import asyncio
import json
import time
from collections import Counter
from collections.abc import Iterable, Mapping
from dataclasses import asdict, dataclass
from pathlib import Path
from typing import Any, Literal

import numpy as np
import pandas as pd
from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

from app import __version__
from app.config import settings
from app.core.exceptions import ConfigurationError, GasGsmError
from app.core.gas import (
    GasParams,
    GasResult,
    PolynomialProblem,
    Sampler,
    Termination,
    choose_m,
    run_gas,
    trace_rows,
)
from app.core.gsm import (
    ApCodebook,
    CodebookRule,
    Constellation,
    GsmConfig,
    build_ap_codebook,
    candidate_metrics,
    classical_mld,
    synthesize,
)
from app.core.mld_encoder import build_objective, decode_assignment
from app.core.polynomial import IntegerPolynomial, index_to_assignment
from app.core.sim_statevector import StateVectorSampler
from app.core.sim_structured import StructuredSampler
from app.services.data_utils import load_key_value_file
from app.utils.logger import app_logger, log_trial_result
from app.utils.memory_profiler import get_memory_usage

try:
    from itertools import batched  # Python 3.12+
except ImportError:  # pragma: no cover

    def batched(iterable, n):
        it = iter(iterable)
        while True:
            batch = []
            try:
                for _ in range(n):
                    batch.append(next(it))
            except StopIteration:
                if batch:
                    yield tuple(batch)
                break
            if batch:
                yield tuple(batch)


Backend = Literal["structured", "statevector"]

TRACE_COLUMNS = [
    "trial",
    "i",
    "L_i",
    "y_i",
    "measured_value",
    "improved",
    "cumulative_qcqd",
    "cumulative_qccd",
]

# N_t=4, N_r=4, K=3, Q=4, QPSK, lambda1=15, 0 dB, averaged over 1000 channels
REFERENCE_PRESET: dict[str, Any] = {
    "n_tx": 4,
    "n_rx": 4,
    "k_active": 3,
    "q_aps": 4,
    "constellation": "QPSK",
    "snr_db": 0.0,
    "codebook_rule": "cyclic",
    "lambda1": 15.0,
    "trials": 1000,
}

# both names select the same link
PRESETS: dict[str, dict[str, Any]] = {
    "reference": REFERENCE_PRESET,
    "paper": REFERENCE_PRESET,
}


class ExperimentConfig(BaseModel):
    """Everything one Monte Carlo run depends on."""

    model_config = ConfigDict(extra="forbid", frozen=True)

    # Link
    n_tx: int = Field(default=4, ge=1, description="Transmit antennas N_t")
    n_rx: int = Field(default=4, ge=1, description="Receive antennas N_r")
    k_active: int = Field(default=3, ge=1, description="Active antennas K")
    q_aps: int = Field(default=4, ge=2, description="Activation-pattern codebook size Q")
    constellation: Constellation = Field(default=Constellation.QPSK)
    snr_db: float = Field(default=0.0, description="Per-symbol SNR in dB")
    codebook_rule: CodebookRule = Field(default=CodebookRule.CYCLIC)
    ap_table: str | None = Field(default=None, description="AP table file for explicit-table")

    # Objective
    lambda1: float = Field(default_factory=lambda: settings.DEFAULT_LAMBDA1, gt=0)
    lambda2: float | None = Field(default=None, ge=0)
    precision_bits: int = Field(default_factory=lambda: settings.DEFAULT_PRECISION_BITS, ge=0)
    margin_bits: int = Field(default_factory=lambda: settings.DEFAULT_MARGIN_BITS, ge=0)

    # Search
    lambda_growth: float = Field(default_factory=lambda: settings.GAS_LAMBDA_GROWTH, gt=1)
    patience: int | None = Field(default=None, ge=1)
    max_qcqd: float | None = Field(default=None, gt=0)
    stop_at_optimum: bool = Field(default=False, description="Stop once the optimum is reached")
    max_iterations: int = Field(default_factory=lambda: settings.GAS_MAX_ITERATIONS, ge=1)

    # Harness
    trials: int = Field(default=100, ge=1)
    backend: Backend = "structured"
    seed: int = Field(default=0, ge=0)
    output_dir: str = Field(default_factory=lambda: settings.OUTPUT_DIR)

    @field_validator("constellation", mode="before")
    @classmethod
    def validate_constellation(cls, v: Any) -> Constellation:
        """Accept aliases such as 16QAM"""
        return Constellation(v)

    @model_validator(mode="after")
    def validate_link(self) -> ExperimentConfig:
        """Link and codebook constraints"""
        if self.codebook_rule is CodebookRule.EXPLICIT and not self.ap_table:
            raise ValueError("codebook_rule explicit-table needs ap_table")
        try:
            self.gsm_config()
            if self.codebook_rule is not CodebookRule.EXPLICIT:
                self.build_codebook()
        except ConfigurationError as exc:
            raise ValueError(exc.message) from exc
        return self

    @classmethod
    def reference_preset(cls, **overrides: Any) -> ExperimentConfig:
        return cls.model_validate({**REFERENCE_PRESET, **overrides})

    @classmethod
    def from_mapping(cls, entries: Mapping[str, Any], **overrides: Any) -> ExperimentConfig:
        """Build from parsed file entries; `preset = reference` seeds defaults, overrides win."""
        data = dict(entries)
        preset = data.pop("preset", None)
        if preset is not None and preset not in PRESETS:
            raise ConfigurationError(f"unknown preset {preset!r}", "bench")
        base = dict(PRESETS[preset]) if preset is not None else {}
        base.update(data)
        base.update({k: v for k, v in overrides.items() if v is not None})
        return cls.model_validate(base)

    @classmethod
    def from_file(cls, path: str | Path, **overrides: Any) -> ExperimentConfig:
        return cls.from_mapping(load_key_value_file(path), **overrides)

    def gsm_config(self) -> GsmConfig:
        return GsmConfig(
            n_tx=self.n_tx,
            n_rx=self.n_rx,
            k_active=self.k_active,
            q_aps=self.q_aps,
            constellation=self.constellation,
            snr_db=self.snr_db,
        )

    def build_codebook(self) -> ApCodebook:
        return build_ap_codebook(
            self.n_tx, self.k_active, self.q_aps, self.codebook_rule, table_path=self.ap_table
        )

    def termination(self, problem: PolynomialProblem) -> Termination:
        if self.stop_at_optimum:
            return Termination.until_target(problem.optimum)
        default = Termination.default(problem.n_vars)
        return Termination(
            patience=self.patience or default.patience,
            max_qcqd=self.max_qcqd or default.max_qcqd,
        )

    def echo(self) -> dict[str, Any]:
        """Config as written to summary.json (output location excluded)."""
        return self.model_dump(mode="json", exclude={"output_dir"})


@dataclass(frozen=True, slots=True)
class TrialOutcome:
    trial: int
    n_vars: int
    m: int
    optimum_found: bool
    matches_classical: bool
    qcqd: int
    qccd: int
    qcqd_to_optimum: int | None
    qccd_to_optimum: int | None
    classical_queries_to_optimum: int
    initial_objective: float
    final_objective: float
    classical_metric: float
    stop_reason: str


@dataclass(frozen=True, slots=True, eq=False)
class TrialRun:
    """Outcome plus the step curves needed for aggregation."""

    outcome: TrialOutcome
    gas: GasResult
    qcqd_points: np.ndarray
    qccd_points: np.ndarray
    best_values: np.ndarray
    baseline: np.ndarray


@dataclass(eq=False)
class ExperimentSummary:
    config: ExperimentConfig
    outcomes: list[TrialOutcome]
    trace: pd.DataFrame
    curves: pd.DataFrame
    cdf: pd.DataFrame
    classical_baseline: int
    n_vars: int

    @property
    def optimum_found_count(self) -> int:
        return sum(o.optimum_found for o in self.outcomes)

    @property
    def matches_classical_count(self) -> int:
        return sum(o.matches_classical for o in self.outcomes)

    def to_dict(self) -> dict[str, Any]:
        found = [o for o in self.outcomes if o.optimum_found]
        return {
            "version": __version__,
            "seed": self.config.seed,
            "config": self.config.echo(),
            "trials": len(self.outcomes),
            "n_vars": self.n_vars,
            "classical_baseline": self.classical_baseline,
            "optimum_found": self.optimum_found_count,
            "matches_classical": self.matches_classical_count,
            "mean_qcqd_to_optimum": _mean(o.qcqd_to_optimum for o in found),
            "mean_qccd_to_optimum": _mean(o.qccd_to_optimum for o in found),
            "mean_classical_queries_to_optimum": _mean(
                o.classical_queries_to_optimum for o in self.outcomes
            ),
            "mean_qcqd": _mean(o.qcqd for o in self.outcomes),
            "mean_qccd": _mean(o.qccd for o in self.outcomes),
            "mean_initial_objective": _mean(o.initial_objective for o in self.outcomes),
            "mean_final_objective": _mean(o.final_objective for o in self.outcomes),
            "mean_classical_metric": _mean(o.classical_metric for o in self.outcomes),
            "stop_reasons": dict(sorted(Counter(o.stop_reason for o in self.outcomes).items())),
        }


def _mean(values: Iterable[float | int | None]) -> float | None:
    collected = [float(v) for v in values if v is not None]
    return float(np.mean(collected)) if collected else None


def make_sampler(
    backend: Backend, quantized: IntegerPolynomial, m: int, table: np.ndarray | None = None
) -> Sampler:
    if backend == "structured":
        return StructuredSampler(quantized, m, table)
    if backend == "statevector":
        return StateVectorSampler(quantized, m)
    raise ConfigurationError(f"unknown back-end {backend!r}", "bench")


def run_trial(cfg: ExperimentConfig, codebook: ApCodebook, trial: int) -> TrialRun:
    """
    One channel realization end to end.

    Seeds: SeedSequence(seed + trial) spawns the channel, GAS and baseline streams.
    """
    gsm_cfg = cfg.gsm_config()
    channel_seed, gas_seed, baseline_seed = np.random.SeedSequence(cfg.seed + trial).spawn(3)

    _, chan = synthesize(gsm_cfg, codebook, channel_seed)
    problem = build_objective(
        chan, gsm_cfg, codebook, cfg.lambda1, cfg.lambda2, precision_bits=cfg.precision_bits
    )
    target = PolynomialProblem.from_mld(problem)
    m = choose_m(problem.quantized, cfg.margin_bits)
    params = GasParams(
        lambda_growth=cfg.lambda_growth,
        m=m,
        termination=cfg.termination(target),
        seed=gas_seed,
        max_iterations=cfg.max_iterations,
    )
    result = run_gas(target, make_sampler(cfg.backend, problem.quantized, m, target.table), params)

    classical = classical_mld(chan, gsm_cfg, codebook)
    decoded = decode_assignment(index_to_assignment(result.best_x, problem.n_vars), problem)
    matches = (
        decoded.valid
        and decoded.ap_index == classical.ap_index
        and decoded.symbol_indices == classical.symbol_indices
    )

    metrics = candidate_metrics(chan, gsm_cfg, codebook).ravel()
    order = np.random.default_rng(baseline_seed).permutation(metrics.size)
    baseline = np.minimum.accumulate(metrics[order])
    classical_queries = int(np.argmax(baseline <= metrics.min())) + 1

    steps = [(0, 1, result.initial_x)] + [
        (r.cumulative_qcqd, r.cumulative_qccd, r.x) for r in result.trace if r.improved
    ]
    best_values = np.minimum.accumulate([target.exact_value(x) for _, _, x in steps])
    optimum_found = result.best_value_int == target.optimum

    outcome = TrialOutcome(
        trial=trial,
        n_vars=problem.n_vars,
        m=m,
        optimum_found=optimum_found,
        matches_classical=matches,
        qcqd=result.qcqd,
        qccd=result.qccd,
        qcqd_to_optimum=result.qcqd_at_best if optimum_found else None,
        qccd_to_optimum=result.qccd_at_best if optimum_found else None,
        classical_queries_to_optimum=classical_queries,
        initial_objective=float(best_values[0]),
        final_objective=result.best_value,
        classical_metric=classical.metric,
        stop_reason=result.stop_reason,
    )
    return TrialRun(
        outcome=outcome,
        gas=result,
        qcqd_points=np.array([s[0] for s in steps], dtype=np.int64),
        qccd_points=np.array([s[1] for s in steps], dtype=np.int64),
        best_values=best_values,
        baseline=baseline,
    )


def _timed_trial(cfg: ExperimentConfig, codebook: ApCodebook, trial: int) -> TrialRun:
    start = time.perf_counter()
    try:
        run = run_trial(cfg, codebook, trial)
    except GasGsmError as exc:
        log_trial_result(app_logger, trial, False, 0, 0, time.perf_counter() - start, str(exc))
        raise
    log_trial_result(
        app_logger,
        trial,
        run.outcome.optimum_found,
        run.outcome.qcqd,
        run.outcome.qccd,
        time.perf_counter() - start,
    )
    return run


def _step_curve(points: np.ndarray, values: np.ndarray, grid: np.ndarray) -> np.ndarray:
    """Value of a right-continuous step function at each grid point (NaN before the first)."""
    position = np.searchsorted(points, grid, side="right") - 1
    return np.where(position >= 0, values[np.clip(position, 0, None)], np.nan)


def build_curves(runs: list[TrialRun]) -> pd.DataFrame:
    """Mean best-so-far objective against QCQD, QCCD and classical queries."""
    n_candidates = runs[0].baseline.size
    grid = np.unique(
        np.concatenate(
            [np.arange(0, n_candidates + 1)]
            + [r.qcqd_points for r in runs]
            + [r.qccd_points for r in runs]
            + [np.array([r.outcome.qcqd, r.outcome.qccd]) for r in runs]
        )
    )
    classical_points = np.arange(1, n_candidates + 1)

    return pd.DataFrame(
        {
            "queries": grid,
            "gas_qcqd_mean": np.mean(
                [_step_curve(r.qcqd_points, r.best_values, grid) for r in runs], axis=0
            ),
            "gas_qccd_mean": np.mean(
                [_step_curve(r.qccd_points, r.best_values, grid) for r in runs], axis=0
            ),
            "classical_mean": np.mean(
                [_step_curve(classical_points, r.baseline, grid) for r in runs], axis=0
            ),
            "classical_optimum_mean": float(np.mean([r.outcome.classical_metric for r in runs])),
        }
    )


def empirical_cdf(samples: Iterable[int | None], n_trials: int) -> pd.DataFrame:
    """Fraction of all trials reaching the optimum within each observed query count."""
    values = np.array([v for v in samples if v is not None], dtype=np.int64)
    if values.size == 0:
        return pd.DataFrame({"queries": pd.Series(dtype=np.int64), "cdf": pd.Series(dtype=float)})
    queries, counts = np.unique(values, return_counts=True)
    return pd.DataFrame({"queries": queries, "cdf": np.cumsum(counts) / n_trials})


def build_cdf(outcomes: list[TrialOutcome]) -> pd.DataFrame:
    metrics = {
        "qcqd_to_optimum": [o.qcqd_to_optimum for o in outcomes],
        "qccd_to_optimum": [o.qccd_to_optimum for o in outcomes],
        "classical_queries_to_optimum": [o.classical_queries_to_optimum for o in outcomes],
    }
    frames = [
        empirical_cdf(samples, len(outcomes)).assign(metric=name)
        for name, samples in metrics.items()
    ]
    return pd.concat(frames, ignore_index=True)[["metric", "queries", "cdf"]]


async def run_experiment_async(cfg: ExperimentConfig) -> ExperimentSummary:
    """Dispatch trials in concurrent batches and fold results in trial order."""
    codebook = cfg.build_codebook()
    app_logger.info(
        "Experiment started",
        extra={
            "trials": cfg.trials,
            "backend": cfg.backend,
            "seed": cfg.seed,
            **get_memory_usage(),
        },
    )

    runs: list[TrialRun] = []
    batch_size = max(settings.TRIAL_BATCH_SIZE, 1)
    for batch in batched(range(cfg.trials), batch_size):
        results = await asyncio.gather(
            *(asyncio.to_thread(_timed_trial, cfg, codebook, t) for t in batch)
        )
        runs.extend(results)
        app_logger.info(
            "Trial batch finished",
            extra={"completed": len(runs), "total": cfg.trials},
        )

    runs.sort(key=lambda r: r.outcome.trial)
    outcomes = [r.outcome for r in runs]
    trace = pd.DataFrame(
        [row for r in runs for row in trace_rows(r.gas, r.outcome.trial)], columns=TRACE_COLUMNS
    )
    summary = ExperimentSummary(
        config=cfg,
        outcomes=outcomes,
        trace=trace,
        curves=build_curves(runs),
        cdf=build_cdf(outcomes),
        classical_baseline=cfg.gsm_config().search_space_size,
        n_vars=cfg.gsm_config().n_vars,
    )
    app_logger.info(
        "Experiment finished",
        extra={
            "optimum_found": summary.optimum_found_count,
            "matches_classical": summary.matches_classical_count,
            **get_memory_usage(),
        },
    )
    return summary


def run_experiment(cfg: ExperimentConfig, write: bool = True) -> ExperimentSummary:
    """
    Run the Monte Carlo experiment described by cfg.

    Args:
        cfg: Experiment configuration
        write: Write trace.csv, trials.csv, curves.csv, cdf.csv and summary.json
            under cfg.output_dir

    Raises:
        SimulatorSizeError: The chosen back-end cannot hold the problem
        ConfigurationError: Codebook or link parameters are invalid
    """
    summary = asyncio.run(run_experiment_async(cfg))
    if write:
        write_outputs(summary, cfg.output_dir)
    return summary


def write_outputs(summary: ExperimentSummary, output_dir: str | Path) -> dict[str, Path]:
    target = Path(output_dir)
    target.mkdir(parents=True, exist_ok=True)
    paths = {
        "trace": target / "trace.csv",
        "trials": target / "trials.csv",
        "curves": target / "curves.csv",
        "cdf": target / "cdf.csv",
        "summary": target / "summary.json",
    }
    summary.trace.to_csv(paths["trace"], index=False)
    pd.DataFrame([asdict(o) for o in summary.outcomes]).to_csv(paths["trials"], index=False)
    summary.curves.to_csv(paths["curves"], index=False)
    summary.cdf.to_csv(paths["cdf"], index=False)
    paths["summary"].write_text(
        json.dumps(summary.to_dict(), indent=2, sort_keys=True) + "\n", encoding="utf-8"
    )
    app_logger.info("Experiment outputs written", extra={"output_dir": str(target)})
    return paths
