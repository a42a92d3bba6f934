"""Query-count comparison between GAS over the expanded register and exhaustive MLD."""

from __future__ import annotations

import math
from collections.abc import Iterable
from dataclasses import dataclass
from decimal import Decimal, localcontext
from pathlib import Path

import pandas as pd

from app.core.exceptions import ConfigurationError
from app.utils.logger import app_logger

DECIMAL_PRECISION = 50


@dataclass(frozen=True, slots=True)
class RatioRow:
    n_tx: int
    k_active: int
    constellation_size: int
    q_aps: int
    n_vars: int
    gas_queries: Decimal
    classical_queries: int
    ratio: Decimal


def _check(n_tx: int, k_active: int, constellation_size: int) -> None:
    if n_tx < 1:
        raise ConfigurationError(f"N_t={n_tx} must be positive", "bench")
    if not 1 <= k_active <= n_tx:
        raise ConfigurationError(f"K={k_active} must lie in 1..{n_tx}", "bench")
    if constellation_size < 2 or constellation_size & (constellation_size - 1):
        raise ConfigurationError(f"L={constellation_size} must be a power of two >= 2", "bench")


def gas_query_count(n_tx: int, constellation_size: int) -> Decimal:
    """sqrt(2^n) with n = N_t log2 L + N_t binary variables."""
    n_vars = n_tx * (constellation_size.bit_length() - 1) + n_tx
    with localcontext() as ctx:
        ctx.prec = DECIMAL_PRECISION
        return (Decimal(2) ** n_vars).sqrt()


def classical_query_count(constellation_size: int, k_active: int, q_aps: int) -> int:
    return constellation_size**k_active * q_aps


def complexity_row(
    n_tx: int, k_active: int, constellation_size: int, q_aps: int | None = None
) -> RatioRow:
    """
    One f/g entry.

    Args:
        n_tx: Transmit antennas
        k_active: Active antennas
        constellation_size: L
        q_aps: Codebook size; defaults to the full binomial C(N_t, K)

    Raises:
        ConfigurationError: Parameters out of range
    """
    _check(n_tx, k_active, constellation_size)
    q = math.comb(n_tx, k_active) if q_aps is None else q_aps
    if q < 1:
        raise ConfigurationError(f"Q={q} must be positive", "bench")

    f = gas_query_count(n_tx, constellation_size)
    g = classical_query_count(constellation_size, k_active, q)
    with localcontext() as ctx:
        ctx.prec = DECIMAL_PRECISION
        ratio = f / Decimal(g)
    return RatioRow(
        n_tx=n_tx,
        k_active=k_active,
        constellation_size=constellation_size,
        q_aps=q,
        n_vars=n_tx * (constellation_size.bit_length() - 1) + n_tx,
        gas_queries=f,
        classical_queries=g,
        ratio=ratio,
    )


def complexity_ratio(
    n_tx: int | Iterable[int], k_range: Iterable[int], l_range: Iterable[int]
) -> list[RatioRow]:
    """f/g table over every (N_t, L, K) combination with Q = C(N_t, K); K > N_t is skipped."""
    n_values = [n_tx] if isinstance(n_tx, int) else list(n_tx)
    k_values, l_values = list(k_range), list(l_range)
    rows = [
        complexity_row(n, k, size)
        for n in n_values
        for size in l_values
        for k in k_values
        if k <= n
    ]
    app_logger.info(
        "Complexity ratio table computed",
        extra={"rows": len(rows), "n_tx": n_values, "k": k_values, "l": l_values},
    )
    return rows


def ratio_frame(rows: Iterable[RatioRow]) -> pd.DataFrame:
    return pd.DataFrame(
        [
            {
                "n_tx": r.n_tx,
                "k": r.k_active,
                "L": r.constellation_size,
                "Q": r.q_aps,
                "n_vars": r.n_vars,
                "f": float(r.gas_queries),
                "g": r.classical_queries,
                "ratio": float(r.ratio),
            }
            for r in rows
        ]
    )


def write_ratio_csv(rows: Iterable[RatioRow], path: str | Path) -> Path:
    target = Path(path)
    target.parent.mkdir(parents=True, exist_ok=True)
    ratio_frame(rows).to_csv(target, index=False)
    return target
