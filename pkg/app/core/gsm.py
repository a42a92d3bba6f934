"""
Generalized Spatial Modulation Link Model
5G NR constellation mappings, activation-pattern codebooks, Rayleigh channel synthesis
and the classical exhaustive-search maximum-likelihood detector.
"""

from __future__ import annotations

import math
from collections.abc import Sequence
from dataclasses import dataclass
from enum import Enum
from functools import lru_cache
from itertools import combinations, islice, product
from pathlib import Path

import numpy as np

from app.core.exceptions import (
    CodebookError,
    ConfigurationError,
    DemappingError,
    VariableCountMismatchError,
)

_INV_SQRT2 = 1 / math.sqrt(2)
_INV_SQRT10 = 1 / math.sqrt(10)


class Constellation(str, Enum):
    """Supported modulation alphabets."""

    BPSK = "BPSK"
    QPSK = "QPSK"
    QAM16 = "QAM16"

    @classmethod
    def _missing_(cls, value: object) -> Constellation | None:
        if isinstance(value, str):
            normalized = value.upper().replace("-", "").replace("_", "")
            if normalized == "16QAM":
                return cls.QAM16
            for member in cls:
                if member.value == normalized:
                    return member
        return None

    @property
    def bits_per_symbol(self) -> int:
        return {"BPSK": 1, "QPSK": 2, "QAM16": 4}[self.value]

    @property
    def size(self) -> int:
        return 1 << self.bits_per_symbol


class CodebookRule(str, Enum):
    """How activation patterns are assigned to bit sequences."""

    CYCLIC = "cyclic"  # reproduces the N_t=4, K=3, Q=4 mapping table
    LEX = "lex"
    EXPLICIT = "explicit-table"


def int_to_bits(value: int, width: int) -> tuple[int, ...]:
    """MSB-first bit tuple."""
    return tuple((value >> (width - 1 - i)) & 1 for i in range(width))


def bits_to_int(bits: Sequence[int]) -> int:
    """Inverse of int_to_bits (first bit most significant)."""
    value = 0
    for bit in bits:
        value = (value << 1) | int(bit)
    return value


def map_symbol(bits: Sequence[int], constellation: Constellation) -> complex:
    """
    Map a bit sequence to its constellation point.

    Args:
        bits: log2(L) bits, b0 first
        constellation: Modulation alphabet

    Returns:
        Unit-average-energy complex symbol

    Raises:
        VariableCountMismatchError: Wrong number of bits for the constellation
    """
    constellation = Constellation(constellation)
    if len(bits) != constellation.bits_per_symbol:
        raise VariableCountMismatchError(constellation.bits_per_symbol, len(bits), "gsm")
    s = [1 - 2 * int(b) for b in bits]

    if constellation is Constellation.BPSK:
        return complex(s[0], s[0]) * _INV_SQRT2
    if constellation is Constellation.QPSK:
        return complex(s[0], s[1]) * _INV_SQRT2
    return complex(s[0] * (2 - s[2]), s[1] * (2 - s[3])) * _INV_SQRT10


@lru_cache(maxsize=None)
def _points(constellation: Constellation) -> tuple[complex, ...]:
    width = constellation.bits_per_symbol
    return tuple(
        map_symbol(int_to_bits(i, width), constellation) for i in range(constellation.size)
    )


def constellation_points(constellation: Constellation) -> np.ndarray:
    """All L points; entry i is the symbol of bit pattern int_to_bits(i)."""
    return np.array(_points(Constellation(constellation)), dtype=np.complex128)


def demap_symbol(
    point: complex, constellation: Constellation, atol: float = 1e-9
) -> tuple[int, ...]:
    """Bits of a constellation point; raises DemappingError for points off the alphabet."""
    constellation = Constellation(constellation)
    points = constellation_points(constellation)
    distances = np.abs(points - point)
    index = int(np.argmin(distances))
    if distances[index] > atol:
        raise DemappingError(f"{point!r} is not a {constellation.value} point", "gsm")
    return int_to_bits(index, constellation.bits_per_symbol)


def max_codebook_size(n_tx: int, k_active: int) -> int:
    """2^floor(log2 C(N_t, K)): the largest power-of-two codebook."""
    combos = math.comb(n_tx, k_active)
    return 1 << (combos.bit_length() - 1) if combos else 0


def _check_codebook_size(n_tx: int, k_active: int, q_aps: int) -> None:
    if not 1 <= k_active <= n_tx:
        raise ConfigurationError(f"K={k_active} must lie in 1..N_t={n_tx}", "gsm")
    if q_aps < 2 or q_aps & (q_aps - 1):
        raise ConfigurationError(f"Q={q_aps} must be a power of two >= 2", "gsm")
    limit = max_codebook_size(n_tx, k_active)
    if q_aps > limit:
        raise ConfigurationError(
            f"Q={q_aps} exceeds 2^floor(log2 C({n_tx},{k_active})) = {limit}", "gsm"
        )


@dataclass(frozen=True, slots=True)
class GsmConfig:
    """Antenna counts, alphabet and SNR of one GSM link."""

    n_tx: int
    n_rx: int
    k_active: int
    q_aps: int
    constellation: Constellation = Constellation.QPSK
    snr_db: float = 0.0

    def __post_init__(self) -> None:
        try:
            object.__setattr__(self, "constellation", Constellation(self.constellation))
        except ValueError as exc:
            raise ConfigurationError(str(exc), "gsm") from exc
        if self.n_tx < 1 or self.n_rx < 1:
            raise ConfigurationError("antenna counts must be positive", "gsm")
        _check_codebook_size(self.n_tx, self.k_active, self.q_aps)

    @property
    def constellation_size(self) -> int:
        return self.constellation.size

    @property
    def bits_per_symbol(self) -> int:
        return self.constellation.bits_per_symbol

    @property
    def ap_bits(self) -> int:
        return self.q_aps.bit_length() - 1

    @property
    def frame_bits(self) -> int:
        return self.k_active * self.bits_per_symbol + self.ap_bits

    @property
    def n_vars(self) -> int:
        """Binary variables of the GAS formulation: N_t log2 L + N_t."""
        return self.n_tx * self.bits_per_symbol + self.n_tx

    @property
    def noise_var(self) -> float:
        """sigma_n^2 = sigma_s^2 / rho with unit per-symbol power."""
        return 10 ** (-self.snr_db / 10)

    @property
    def search_space_size(self) -> int:
        """Candidates scanned by exhaustive MLD: L^K Q."""
        return self.constellation_size**self.k_active * self.q_aps


@dataclass(frozen=True, slots=True)
class ApCodebook:
    """Ordered activation patterns; pattern q lists the antenna carrying each symbol column."""

    patterns: tuple[tuple[int, ...], ...]
    n_tx: int

    def __post_init__(self) -> None:
        patterns = tuple(tuple(int(i) for i in p) for p in self.patterns)
        object.__setattr__(self, "patterns", patterns)
        if len(patterns) < 2 or len(patterns) & (len(patterns) - 1):
            raise CodebookError(f"codebook size {len(patterns)} is not a power of two >= 2", "gsm")
        widths = {len(p) for p in patterns}
        if len(widths) != 1:
            raise CodebookError("patterns activate different numbers of antennas", "gsm")
        for p in patterns:
            if len(set(p)) != len(p) or any(not 0 <= i < self.n_tx for i in p):
                raise CodebookError(f"pattern {p} is not a valid activation", "gsm")
        if len({frozenset(p) for p in patterns}) != len(patterns):
            raise CodebookError("codebook contains repeated activation sets", "gsm")

    @property
    def q_aps(self) -> int:
        return len(self.patterns)

    @property
    def k_active(self) -> int:
        return len(self.patterns[0])

    @property
    def bit_width(self) -> int:
        return self.q_aps.bit_length() - 1

    @property
    def active_sets(self) -> tuple[frozenset[int], ...]:
        return tuple(frozenset(p) for p in self.patterns)

    def matrix(self, index: int) -> np.ndarray:
        """N_t x K activation matrix with a single 1 per column."""
        a = np.zeros((self.n_tx, self.k_active), dtype=np.int8)
        for column, antenna in enumerate(self.patterns[index]):
            a[antenna, column] = 1
        return a

    @property
    def matrices(self) -> np.ndarray:
        return np.stack([self.matrix(q) for q in range(self.q_aps)])

    def index_of(self, pattern: Sequence[int]) -> int | None:
        try:
            return self.patterns.index(tuple(int(i) for i in pattern))
        except ValueError:
            return None

    def index_of_active_set(self, active: set[int] | frozenset[int]) -> int | None:
        try:
            return self.active_sets.index(frozenset(active))
        except ValueError:
            return None


def parse_ap_table(text: str) -> list[tuple[int, ...]]:
    """One pattern per line, comma-separated antenna indices; '#' starts a comment."""
    patterns: list[tuple[int, ...]] = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        try:
            patterns.append(tuple(int(tok) for tok in line.split(",") if tok.strip()))
        except ValueError as exc:
            raise CodebookError(f"line {lineno}: {exc}", "gsm") from exc
    return patterns


def load_ap_table(path: str | Path) -> list[tuple[int, ...]]:
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise CodebookError(f"cannot read AP table {path}: {exc}", "gsm") from exc
    return parse_ap_table(text)


def build_ap_codebook(
    n_tx: int,
    k_active: int,
    q_aps: int,
    rule: CodebookRule | str = CodebookRule.CYCLIC,
    table_path: str | Path | None = None,
    patterns: Sequence[Sequence[int]] | None = None,
) -> ApCodebook:
    """
    Build the Q-pattern codebook.

    Args:
        n_tx: Transmit antennas N_t
        k_active: Active antennas K
        q_aps: Codebook size Q
        rule: cyclic (pattern q activates q, q+1, ..., q+K-1 mod N_t), lex (first Q
            K-combinations) or explicit-table (patterns or table_path)
        table_path: AP table file for the explicit rule
        patterns: In-memory table for the explicit rule

    Raises:
        ConfigurationError: Q/K violate the codebook constraints
        CodebookError: Rule cannot produce Q distinct valid patterns
    """
    _check_codebook_size(n_tx, k_active, q_aps)
    rule = CodebookRule(rule)

    if rule is CodebookRule.CYCLIC:
        if q_aps > n_tx:
            raise CodebookError(
                f"cyclic rule gives at most N_t={n_tx} patterns, Q={q_aps} requested; use lex",
                "gsm",
            )
        table = [tuple((q + j) % n_tx for j in range(k_active)) for q in range(q_aps)]
    elif rule is CodebookRule.LEX:
        table = list(islice(combinations(range(n_tx), k_active), q_aps))
    else:
        if patterns is None:
            if table_path is None:
                raise CodebookError("explicit-table rule needs a table", "gsm")
            patterns = load_ap_table(table_path)
        table = [tuple(p) for p in patterns]
        if len(table) != q_aps:
            raise CodebookError(f"table has {len(table)} patterns, expected {q_aps}", "gsm")
        if any(len(p) != k_active for p in table):
            raise CodebookError(f"every pattern must list {k_active} antennas", "gsm")

    return ApCodebook(tuple(table), n_tx)


def format_ap_table(codebook: ApCodebook) -> str:
    """Bit sequence, antenna indices and AP matrix per row."""
    lines = ["bits | antennas | matrix"]
    for q, pattern in enumerate(codebook.patterns):
        bits = "".join(map(str, int_to_bits(q, codebook.bit_width)))
        rows = "; ".join(" ".join(str(v) for v in row) for row in codebook.matrix(q))
        lines.append(f"{bits} | ({', '.join(map(str, pattern))}) | [{rows}]")
    return "\n".join(lines) + "\n"


@dataclass(frozen=True, slots=True)
class TransmitFrame:
    """Bits and symbols of one transmitted GSM codeword."""

    bits_symbols: tuple[int, ...]
    bits_ap: tuple[int, ...]
    symbols: tuple[complex, ...]
    ap_index: int


@dataclass(frozen=True, slots=True, eq=False)
class ChannelRealization:
    """Channel matrix, noise variance and received vector y = H A s + n."""

    h: np.ndarray
    noise_var: float
    y: np.ndarray


@dataclass(frozen=True, slots=True)
class MldEstimate:
    """Detector output: symbols in codebook column order plus the pattern index."""

    symbols: tuple[complex, ...]
    symbol_indices: tuple[int, ...]
    ap_index: int
    metric: float
    n_evaluations: int


def draw_channel(rng: np.random.Generator, n_rx: int, n_tx: int) -> np.ndarray:
    """i.i.d. CN(0, 1) entries: real and imaginary parts each of variance 1/2."""
    return (rng.standard_normal((n_rx, n_tx)) + 1j * rng.standard_normal((n_rx, n_tx))) * _INV_SQRT2


def draw_noise(rng: np.random.Generator, n_rx: int, noise_var: float) -> np.ndarray:
    scale = math.sqrt(noise_var / 2)
    return (rng.standard_normal(n_rx) + 1j * rng.standard_normal(n_rx)) * scale


def synthesize(
    cfg: GsmConfig,
    codebook: ApCodebook,
    seed: int | np.random.SeedSequence | None,
    noise_var: float | None = None,
) -> tuple[TransmitFrame, ChannelRealization]:
    """
    Draw uniform bits, a Rayleigh channel and noise, and form y = H A s + n.

    Args:
        cfg: Link configuration
        codebook: Activation-pattern codebook
        seed: RNG seed; identical seeds give identical outputs
        noise_var: Override of cfg.noise_var (0 gives the noiseless signal)
    """
    rng = np.random.default_rng(seed)
    bps = cfg.bits_per_symbol

    bits_symbols = tuple(int(b) for b in rng.integers(0, 2, size=cfg.k_active * bps))
    bits_ap = tuple(int(b) for b in rng.integers(0, 2, size=cfg.ap_bits))
    ap_index = bits_to_int(bits_ap)
    symbols = tuple(
        map_symbol(bits_symbols[k * bps : (k + 1) * bps], cfg.constellation)
        for k in range(cfg.k_active)
    )

    sigma2 = cfg.noise_var if noise_var is None else noise_var
    h = draw_channel(rng, cfg.n_rx, cfg.n_tx)
    noise = draw_noise(rng, cfg.n_rx, sigma2)
    codeword = codebook.matrix(ap_index) @ np.array(symbols, dtype=np.complex128)
    y = h @ codeword + noise

    frame = TransmitFrame(bits_symbols, bits_ap, symbols, ap_index)
    return frame, ChannelRealization(h=h, noise_var=sigma2, y=y)


def _symbol_index_grid(constellation_size: int, k_active: int) -> np.ndarray:
    """All symbol-index vectors, first symbol most significant."""
    return np.array(list(product(range(constellation_size), repeat=k_active)), dtype=np.int64)


def candidate_metrics(
    chan: ChannelRealization, cfg: GsmConfig, codebook: ApCodebook
) -> np.ndarray:
    """||y - H A s||^2 for every (pattern, symbol vector); shape (Q, L^K)."""
    points = constellation_points(cfg.constellation)
    candidates = points[_symbol_index_grid(cfg.constellation_size, cfg.k_active)]
    metrics = np.empty((codebook.q_aps, len(candidates)), dtype=np.float64)
    for q, pattern in enumerate(codebook.patterns):
        residual = chan.y[:, None] - chan.h[:, list(pattern)] @ candidates.T
        metrics[q] = np.sum(np.abs(residual) ** 2, axis=0)
    return metrics


def classical_mld(chan: ChannelRealization, cfg: GsmConfig, codebook: ApCodebook) -> MldEstimate:
    """
    Exhaustive-search MLD over all L^K Q candidates.

    Ties resolve to the smallest (ap_index, symbol-bits-as-integer).
    """
    metrics = candidate_metrics(chan, cfg, codebook)
    flat = int(np.argmin(metrics))
    ap_index, symbol_index = divmod(flat, metrics.shape[1])
    indices = _symbol_index_grid(cfg.constellation_size, cfg.k_active)[symbol_index]
    points = constellation_points(cfg.constellation)
    return MldEstimate(
        symbols=tuple(complex(points[i]) for i in indices),
        symbol_indices=tuple(int(i) for i in indices),
        ap_index=ap_index,
        metric=float(metrics[ap_index, symbol_index]),
        n_evaluations=int(metrics.size),
    )


def demap(
    symbols: Sequence[complex],
    pattern: Sequence[int],
    codebook: ApCodebook,
    cfg: GsmConfig,
) -> tuple[tuple[int, ...], tuple[int, ...]]:
    """
    Inverse mapping of a detected (s, A) to (bits_symbols, bits_ap).

    Raises:
        DemappingError: Symbol off the constellation or pattern outside the codebook
    """
    ap_index = codebook.index_of(pattern)
    if ap_index is None:
        raise DemappingError(f"pattern {tuple(pattern)} is not in the codebook", "gsm")
    bits: list[int] = []
    for s in symbols:
        bits.extend(demap_symbol(s, cfg.constellation))
    return tuple(bits), int_to_bits(ap_index, codebook.bit_width)
