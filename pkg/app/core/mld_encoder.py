"""
MLD Objective Compiler
Turns one GSM channel realization into a multilinear binary objective: the squared
residual norm of the codeword polynomials plus the activation-pattern penalties.
"""

from __future__ import annotations

import math
from collections.abc import Sequence
from dataclasses import dataclass
from itertools import combinations

import numpy as np

from app.config import settings
from app.core.exceptions import ConfigurationError, EncodingError, VariableCountMismatchError
from app.core.gsm import (
    ApCodebook,
    ChannelRealization,
    Constellation,
    GsmConfig,
    TransmitFrame,
    bits_to_int,
    map_symbol,
)
from app.core.polynomial import BinaryPolynomial, IntegerPolynomial, quantize, to_text

_SQRT2 = math.sqrt(2)
_SQRT10 = math.sqrt(10)


@dataclass(frozen=True, slots=True)
class VariableLayout:
    """
    Bit layout of the search register.

    Symbol bits come first in antenna-major, bit-minor order; the N_t activation bits follow.
    """

    n_tx: int
    bits_per_symbol: int

    @classmethod
    def for_config(cls, cfg: GsmConfig) -> VariableLayout:
        return cls(cfg.n_tx, cfg.bits_per_symbol)

    @property
    def n_symbol_vars(self) -> int:
        return self.n_tx * self.bits_per_symbol

    @property
    def n_vars(self) -> int:
        return self.n_symbol_vars + self.n_tx

    def symbol_var(self, antenna: int, bit: int) -> int:
        if not (0 <= antenna < self.n_tx and 0 <= bit < self.bits_per_symbol):
            raise EncodingError(f"no symbol bit ({antenna}, {bit})", "encoder")
        return antenna * self.bits_per_symbol + bit

    def symbol_vars(self, antenna: int) -> tuple[int, ...]:
        return tuple(self.symbol_var(antenna, b) for b in range(self.bits_per_symbol))

    def activation_var(self, antenna: int) -> int:
        if not 0 <= antenna < self.n_tx:
            raise EncodingError(f"no activation bit for antenna {antenna}", "encoder")
        return self.n_symbol_vars + antenna

    @property
    def activation_vars(self) -> tuple[int, ...]:
        return tuple(range(self.n_symbol_vars, self.n_vars))

    def describe(self) -> list[str]:
        lines = [
            f"x{self.symbol_var(i, b)} <- antenna {i} symbol bit {b}"
            for i in range(self.n_tx)
            for b in range(self.bits_per_symbol)
        ]
        lines += [f"x{self.activation_var(i)} <- antenna {i} active" for i in range(self.n_tx)]
        return lines


@dataclass(frozen=True, slots=True, eq=False)
class MldProblem:
    """One channel realization compiled to an objective over `layout.n_vars` bits."""

    likelihood: BinaryPolynomial
    penalty: BinaryPolynomial
    objective: BinaryPolynomial
    quantized: IntegerPolynomial
    layout: VariableLayout
    lambda1: float
    lambda2: float
    excluded_patterns: tuple[tuple[int, ...], ...]
    cfg: GsmConfig
    codebook: ApCodebook
    chan: ChannelRealization

    @property
    def n_vars(self) -> int:
        return self.layout.n_vars


@dataclass(frozen=True, slots=True)
class DecodedAssignment:
    symbols: tuple[complex, ...]
    symbol_indices: tuple[int, ...]
    ap_index: int | None
    valid: bool


def symbol_polynomial(
    bit_vars: Sequence[int], constellation: Constellation, n_vars: int
) -> BinaryPolynomial:
    """Closed-form constellation mapping with every bit b replaced by the variable x_b."""
    constellation = Constellation(constellation)
    if len(bit_vars) != constellation.bits_per_symbol:
        raise VariableCountMismatchError(constellation.bits_per_symbol, len(bit_vars), "encoder")
    spins = [1 - 2 * BinaryPolynomial.variable(v, n_vars) for v in bit_vars]

    if constellation is Constellation.BPSK:
        return spins[0] * ((1 + 1j) / _SQRT2)
    if constellation is Constellation.QPSK:
        return (spins[0] + 1j * spins[1]) * (1 / _SQRT2)
    real = spins[0] * (2 - spins[2])
    imag = spins[1] * (2 - spins[3])
    return (real + 1j * imag) * (1 / _SQRT10)


def codeword_polynomials(layout: VariableLayout, cfg: GsmConfig) -> tuple[BinaryPolynomial, ...]:
    """Entry i: symbol polynomial of antenna i times its activation bit."""
    n = layout.n_vars
    return tuple(
        symbol_polynomial(layout.symbol_vars(i), cfg.constellation, n)
        * BinaryPolynomial.variable(layout.activation_var(i), n)
        for i in range(cfg.n_tx)
    )


def excluded_patterns(codebook: ApCodebook) -> tuple[tuple[int, ...], ...]:
    """K-subsets of antennas that no codebook pattern activates."""
    allowed = set(codebook.active_sets)
    return tuple(
        subset
        for subset in combinations(range(codebook.n_tx), codebook.k_active)
        if frozenset(subset) not in allowed
    )


def _likelihood(
    chan: ChannelRealization, codewords: Sequence[BinaryPolynomial], n_vars: int
) -> BinaryPolynomial:
    norm = BinaryPolynomial.zero(n_vars)
    for r in range(chan.h.shape[0]):
        residual = BinaryPolynomial.constant_poly(complex(chan.y[r]), n_vars)
        for i, c in enumerate(codewords):
            residual = residual - c * complex(chan.h[r, i])
        norm = norm + residual * residual.conjugate()
    return norm.real_part()


def _penalty(
    layout: VariableLayout,
    k_active: int,
    lambda1: float,
    lambda2: float,
    excluded: Sequence[tuple[int, ...]],
) -> BinaryPolynomial:
    n = layout.n_vars
    active = BinaryPolynomial.zero(n)
    for i in range(layout.n_tx):
        active = active + BinaryPolynomial.variable(layout.activation_var(i), n)
    cardinality = active - k_active
    penalty = cardinality * cardinality * lambda1

    for subset in excluded:
        penalty = penalty + BinaryPolynomial(
            {tuple(layout.activation_var(i) for i in subset): lambda2}, n
        )
    return penalty


def build_objective(
    chan: ChannelRealization,
    cfg: GsmConfig,
    codebook: ApCodebook,
    lambda1: float | None = None,
    lambda2: float | None = None,
    layout: VariableLayout | None = None,
    precision_bits: int | None = None,
) -> MldProblem:
    """
    Compile a channel realization into the penalized binary objective.

    Args:
        chan: Channel matrix and received vector
        cfg: Link configuration
        codebook: Legal activation patterns
        lambda1: Cardinality penalty weight (defaults to settings.DEFAULT_LAMBDA1)
        lambda2: Weight of each excluded K-subset; defaults to lambda1 and is unused
            when the codebook covers every K-subset
        layout: Variable layout (defaults to the standard one for cfg)
        precision_bits: Fractional bits of the quantized objective

    Returns:
        MldProblem holding the exact and quantized objectives

    Raises:
        ConfigurationError: Non-positive lambda1 or negative lambda2
    """
    lambda1 = settings.DEFAULT_LAMBDA1 if lambda1 is None else float(lambda1)
    if lambda1 <= 0:
        raise ConfigurationError("lambda1 must be positive", "encoder")
    if lambda2 is not None and lambda2 < 0:
        raise ConfigurationError("lambda2 must be non-negative", "encoder")
    layout = layout or VariableLayout.for_config(cfg)
    precision = settings.DEFAULT_PRECISION_BITS if precision_bits is None else precision_bits

    excluded = excluded_patterns(codebook)
    weight2 = (lambda1 if lambda2 is None else float(lambda2)) if excluded else 0.0

    likelihood = _likelihood(chan, codeword_polynomials(layout, cfg), layout.n_vars)
    penalty = _penalty(layout, cfg.k_active, lambda1, weight2, excluded)
    objective = likelihood + penalty

    return MldProblem(
        likelihood=likelihood,
        penalty=penalty,
        objective=objective,
        quantized=quantize(objective, precision),
        layout=layout,
        lambda1=lambda1,
        lambda2=weight2,
        excluded_patterns=excluded,
        cfg=cfg,
        codebook=codebook,
        chan=chan,
    )


def decode_assignment(x: Sequence[int] | np.ndarray, problem: MldProblem) -> DecodedAssignment:
    """Read (s, A) from a bit assignment; invalid activations come back with valid=False."""
    layout = problem.layout
    if len(x) != layout.n_vars:
        raise VariableCountMismatchError(layout.n_vars, len(x), "encoder")

    active = {i for i in range(layout.n_tx) if x[layout.activation_var(i)]}
    ap_index = (
        problem.codebook.index_of_active_set(active)
        if len(active) == problem.cfg.k_active
        else None
    )
    if ap_index is None:
        return DecodedAssignment(symbols=(), symbol_indices=(), ap_index=None, valid=False)

    bit_groups = [
        [int(x[v]) for v in layout.symbol_vars(antenna)]
        for antenna in problem.codebook.patterns[ap_index]
    ]
    return DecodedAssignment(
        symbols=tuple(map_symbol(bits, problem.cfg.constellation) for bits in bit_groups),
        symbol_indices=tuple(bits_to_int(bits) for bits in bit_groups),
        ap_index=ap_index,
        valid=True,
    )


def encode_candidate(
    ap_index: int, symbol_indices: Sequence[int], problem: MldProblem
) -> np.ndarray:
    """Bit assignment of a (pattern, symbol-index vector) pair; idle antennas get zero bits."""
    layout = problem.layout
    pattern = problem.codebook.patterns[ap_index]
    if len(symbol_indices) != len(pattern):
        raise VariableCountMismatchError(len(pattern), len(symbol_indices), "encoder")

    x = np.zeros(layout.n_vars, dtype=np.uint8)
    bps = layout.bits_per_symbol
    for antenna, index in zip(pattern, symbol_indices, strict=True):
        for b in range(bps):
            x[layout.symbol_var(antenna, b)] = (index >> (bps - 1 - b)) & 1
        x[layout.activation_var(antenna)] = 1
    return x


def encode_frame(frame: TransmitFrame, problem: MldProblem) -> np.ndarray:
    bps = problem.layout.bits_per_symbol
    indices = [
        bits_to_int(frame.bits_symbols[k * bps : (k + 1) * bps])
        for k in range(len(frame.symbols))
    ]
    return encode_candidate(frame.ap_index, indices, problem)


def dump_problem(problem: MldProblem) -> str:
    """Debug dump: layout comments followed by the objective in polynomial text form."""
    header = [
        f"# lambda1={problem.lambda1!r} lambda2={problem.lambda2!r}",
        *(f"# {line}" for line in problem.layout.describe()),
    ]
    for subset in problem.excluded_patterns:
        header.append(f"# excluded {','.join(map(str, subset))}")
    return "\n".join(header) + "\n" + to_text(problem.objective)
