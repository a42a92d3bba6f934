"""
Command-Line Interface
`python -m app run|ratio|validate`. Exit codes: 0 success, 1 validation failure,
2 configuration error.
"""

from __future__ import annotations

import argparse
import json
import sys
from collections.abc import Sequence
from pathlib import Path

import sentry_sdk
from pydantic import ValidationError

from app import __version__
from app.config import settings
from app.core.exceptions import ConfigurationError, SimulatorSizeError, ValidationFailure
from app.services.complexity import complexity_ratio, ratio_frame, write_ratio_csv
from app.services.data_utils import load_key_value_file, parse_int_range
from app.services.experiment import PRESETS, ExperimentConfig, run_experiment
from app.services.validation import validate
from app.utils.logger import app_logger

EXIT_OK = 0
EXIT_VALIDATION_FAILED = 1
EXIT_CONFIG_ERROR = 2


def init_sentry() -> bool:
    dsn = (settings.SENTRY_DSN or "").strip()
    if not dsn:
        return False
    sentry_sdk.init(
        dsn=dsn,
        environment=settings.ENVIRONMENT,
        traces_sample_rate=1.0 if settings.is_development else 0.1,
        release=f"gasgsm@{__version__}",
    )
    return True


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="gasgsm",
        description="Grover adaptive search for generalized spatial modulation MLD",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="Monte Carlo experiment over channel realizations")
    run.add_argument("--config", type=Path, help="key = value experiment file")
    run.add_argument("--preset", choices=sorted(PRESETS), help="start from a named preset")
    run.add_argument("--seed", type=int)
    run.add_argument("--trials", type=int)
    run.add_argument("--backend", choices=["structured", "statevector"])
    run.add_argument("--output-dir", dest="output_dir")
    run.add_argument("--precision-bits", dest="precision_bits", type=int)
    run.add_argument(
        "--stop-at-optimum",
        dest="stop_at_optimum",
        action="store_true",
        default=None,
        help="terminate each trial once the objective minimum is measured",
    )

    ratio = sub.add_parser("ratio", help="f/g complexity ratio table")
    ratio.add_argument("--ntx", default="16", help="N_t values, e.g. 16 or 8,16")
    ratio.add_argument("--k", default="1-8", help="K values, e.g. 1-8")
    ratio.add_argument("--l", default="2,4,16", help="constellation sizes, e.g. 2,4,16")
    ratio.add_argument("--output", type=Path, help="CSV path (default OUTPUT_DIR/ratio.csv)")

    check = sub.add_parser("validate", help="golden, equivalence and oracle checks")
    check.add_argument("--level", choices=["fast", "full"], default="fast")
    check.add_argument("--seed", type=int, default=2024)
    return parser


def _experiment_config(args: argparse.Namespace) -> ExperimentConfig:
    overrides = {
        "seed": args.seed,
        "trials": args.trials,
        "backend": args.backend,
        "output_dir": args.output_dir,
        "precision_bits": args.precision_bits,
        "stop_at_optimum": args.stop_at_optimum,
    }
    entries = load_key_value_file(args.config) if args.config is not None else {}
    if args.preset:
        entries["preset"] = args.preset
    return ExperimentConfig.from_mapping(entries, **overrides)


def cmd_run(args: argparse.Namespace) -> int:
    cfg = _experiment_config(args)
    summary = run_experiment(cfg)
    print(json.dumps(summary.to_dict(), indent=2, sort_keys=True))
    return EXIT_OK


def cmd_ratio(args: argparse.Namespace) -> int:
    rows = complexity_ratio(
        parse_int_range(args.ntx), parse_int_range(args.k), parse_int_range(args.l)
    )
    if not rows:
        raise ConfigurationError("no (N_t, K, L) combination with K <= N_t", "bench")
    output = args.output or Path(settings.OUTPUT_DIR) / "ratio.csv"
    write_ratio_csv(rows, output)
    print(ratio_frame(rows).to_string(index=False))
    app_logger.info("Ratio table written", extra={"path": str(output)})
    return EXIT_OK


def cmd_validate(args: argparse.Namespace) -> int:
    report = validate(args.level, seed=args.seed)
    print(report.format())
    try:
        report.raise_for_failures()
    except ValidationFailure as exc:
        app_logger.error("Validation failed", extra={"error": exc.message})
        return EXIT_VALIDATION_FAILED
    return EXIT_OK


COMMANDS = {"run": cmd_run, "ratio": cmd_ratio, "validate": cmd_validate}


def main(argv: Sequence[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    init_sentry()
    try:
        return COMMANDS[args.command](args)
    except ValidationError as exc:
        app_logger.error("Invalid experiment configuration", extra={"error": str(exc)})
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG_ERROR
    except (ConfigurationError, SimulatorSizeError) as exc:
        app_logger.error(
            "Configuration error", extra={"component": exc.component, "error": exc.message}
        )
        print(f"configuration error: {exc.message}", file=sys.stderr)
        return EXIT_CONFIG_ERROR
    except Exception as exc:
        sentry_sdk.capture_exception(exc)
        raise
