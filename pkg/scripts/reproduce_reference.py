"""Run the N_t=4, K=3, QPSK Monte Carlo preset and the N_t=16 complexity ratio table."""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

# Ensure project root is on the import path when running as a script
PROJECT_ROOT = Path(__file__).resolve().parents[1]
if str(PROJECT_ROOT) not in sys.path:
    sys.path.insert(0, str(PROJECT_ROOT))

from app.services.complexity import complexity_ratio, write_ratio_csv
from app.services.experiment import ExperimentConfig, run_experiment
from app.utils.logger import app_logger


def reproduce(output_dir: Path, trials: int, seed: int) -> None:
    """Write ratio.csv plus the Monte Carlo outputs under output_dir."""

    rows = complexity_ratio(16, range(1, 9), [2, 4, 16])
    write_ratio_csv(rows, output_dir / "ratio.csv")

    cfg = ExperimentConfig.reference_preset(trials=trials, seed=seed, output_dir=str(output_dir))
    summary = run_experiment(cfg)
    app_logger.info(
        "Reproduction finished",
        extra={
            "output_dir": str(output_dir),
            "optimum_found": summary.optimum_found_count,
            "matches_classical": summary.matches_classical_count,
        },
    )


if __name__ == "__main__":
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--output-dir", type=Path, default=PROJECT_ROOT / "results" / "reference")
    parser.add_argument("--trials", type=int, default=1000)
    parser.add_argument("--seed", type=int, default=0)
    args = parser.parse_args()
    reproduce(args.output_dir, args.trials, args.seed)
