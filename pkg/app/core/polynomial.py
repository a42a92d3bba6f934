"""
Multilinear Polynomial Algebra
Pseudo-Boolean polynomials over binary variables with idempotent reduction (x_i^2 = x_i),
evaluation, range bounding and integer quantization for two's complement encoding.
"""

from __future__ import annotations

from collections.abc import Iterable, Mapping, Sequence
from dataclasses import dataclass
from types import MappingProxyType

import numpy as np

from app.config import settings
from app.core.exceptions import (
    CoefficientOverflowError,
    EncodingError,
    VariableCountMismatchError,
)

Monomial = tuple[int, ...]
Coefficient = float | complex

CONSTANT: Monomial = ()


def monomial(*indices: int) -> Monomial:
    """Canonical monomial: sorted, duplicate-free variable indices."""
    return tuple(sorted(set(indices)))


def _monomial_key(mono: Monomial) -> tuple[int, Monomial]:
    return (len(mono), mono)


def _canonical_terms(
    terms: Mapping[Monomial, Coefficient] | Iterable[tuple[Monomial, Coefficient]],
    n_vars: int,
    component: str = "polynomial",
) -> MappingProxyType:
    items = terms.items() if isinstance(terms, Mapping) else terms
    merged: dict[Monomial, Coefficient] = {}
    for raw, coeff in items:
        mono = monomial(*raw)
        if mono and (mono[0] < 0 or mono[-1] >= n_vars):
            raise EncodingError(
                f"monomial {raw} addresses a variable outside 0..{n_vars - 1}", component
            )
        merged[mono] = merged.get(mono, 0) + coeff
    ordered = {
        mono: merged[mono] for mono in sorted(merged, key=_monomial_key) if merged[mono] != 0
    }
    return MappingProxyType(ordered)


@dataclass(frozen=True, slots=True)
class BinaryPolynomial:
    """Multilinear polynomial with real (or intermediate complex) coefficients."""

    terms: Mapping[Monomial, Coefficient]
    n_vars: int

    def __post_init__(self) -> None:
        if self.n_vars < 0:
            raise EncodingError("n_vars must be non-negative", "polynomial")
        object.__setattr__(self, "terms", _canonical_terms(self.terms, self.n_vars))

    @classmethod
    def zero(cls, n_vars: int) -> BinaryPolynomial:
        return cls({}, n_vars)

    @classmethod
    def constant_poly(cls, value: Coefficient, n_vars: int) -> BinaryPolynomial:
        return cls({CONSTANT: value}, n_vars)

    @classmethod
    def variable(cls, index: int, n_vars: int, coeff: Coefficient = 1.0) -> BinaryPolynomial:
        return cls({(index,): coeff}, n_vars)

    @property
    def constant(self) -> Coefficient:
        return self.terms.get(CONSTANT, 0.0)

    @property
    def degree(self) -> int:
        return max((len(mono) for mono in self.terms), default=0)

    @property
    def is_real(self) -> bool:
        return all(not isinstance(c, complex) or c.imag == 0 for c in self.terms.values())

    def __len__(self) -> int:
        return len(self.terms)

    def scale(self, factor: Coefficient) -> BinaryPolynomial:
        return BinaryPolynomial({mono: c * factor for mono, c in self.terms.items()}, self.n_vars)

    def conjugate(self) -> BinaryPolynomial:
        return BinaryPolynomial(
            {mono: c.conjugate() for mono, c in self.terms.items()}, self.n_vars
        )

    def real_part(self, tolerance: float | None = None) -> BinaryPolynomial:
        """
        Drop imaginary residues left over by an expansion that is real analytically.

        Raises:
            EncodingError: When an imaginary part exceeds tolerance relative to the coefficient.
        """
        tol = settings.IMAG_TOLERANCE if tolerance is None else tolerance
        real_terms: dict[Monomial, float] = {}
        for mono, c in self.terms.items():
            if isinstance(c, complex):
                if abs(c.imag) > tol * max(1.0, abs(c)):
                    raise EncodingError(
                        f"imaginary residue {c.imag:.3e} on monomial {mono} exceeds tolerance",
                        "polynomial",
                    )
                real_terms[mono] = c.real
            else:
                real_terms[mono] = float(c)
        return BinaryPolynomial(real_terms, self.n_vars)

    def __add__(self, other: BinaryPolynomial | Coefficient) -> BinaryPolynomial:
        if isinstance(other, BinaryPolynomial):
            return poly_add(self, other)
        return poly_add(self, BinaryPolynomial.constant_poly(other, self.n_vars))

    __radd__ = __add__

    def __neg__(self) -> BinaryPolynomial:
        return self.scale(-1)

    def __sub__(self, other: BinaryPolynomial | Coefficient) -> BinaryPolynomial:
        return self + (-other)

    def __rsub__(self, other: Coefficient) -> BinaryPolynomial:
        return (-self) + other

    def __mul__(self, other: BinaryPolynomial | Coefficient) -> BinaryPolynomial:
        if isinstance(other, BinaryPolynomial):
            return poly_mul(self, other)
        return self.scale(other)

    __rmul__ = __mul__


@dataclass(frozen=True, slots=True)
class IntegerPolynomial:
    """Integer-coefficient polynomial; `scale` converts one integer unit back to objective units."""

    terms: Mapping[Monomial, int]
    n_vars: int
    scale: float = 1.0

    def __post_init__(self) -> None:
        if not self.scale > 0:
            raise EncodingError("scale must be positive", "polynomial")
        for c in (self.terms.values() if isinstance(self.terms, Mapping) else []):
            if not isinstance(c, int | np.integer):
                raise EncodingError(f"non-integer coefficient {c!r}", "polynomial")
        canonical = _canonical_terms(self.terms, self.n_vars)
        object.__setattr__(
            self, "terms", MappingProxyType({m: int(c) for m, c in canonical.items()})
        )

    @property
    def constant(self) -> int:
        return self.terms.get(CONSTANT, 0)

    @property
    def degree(self) -> int:
        return max((len(mono) for mono in self.terms), default=0)

    def __len__(self) -> int:
        return len(self.terms)

    def shift(self, delta: int) -> IntegerPolynomial:
        """Add an integer to the constant term (used to fold in -y)."""
        terms = dict(self.terms)
        terms[CONSTANT] = terms.get(CONSTANT, 0) + int(delta)
        return IntegerPolynomial(terms, self.n_vars, self.scale)

    def evaluate(self, x: Sequence[int] | np.ndarray) -> int:
        _check_assignment(self.n_vars, x)
        return int(sum(c for mono, c in self.terms.items() if all(x[i] for i in mono)))

    def evaluate_scaled(self, x: Sequence[int] | np.ndarray) -> float:
        return self.evaluate(x) * self.scale

    def to_real(self) -> BinaryPolynomial:
        return BinaryPolynomial(
            {mono: c * self.scale for mono, c in self.terms.items()}, self.n_vars
        )


def _check_same_vars(a: BinaryPolynomial, b: BinaryPolynomial) -> None:
    if a.n_vars != b.n_vars:
        raise VariableCountMismatchError(a.n_vars, b.n_vars)


def _check_assignment(n_vars: int, x: Sequence[int] | np.ndarray) -> None:
    if len(x) != n_vars:
        raise VariableCountMismatchError(n_vars, len(x))


def poly_add(a: BinaryPolynomial, b: BinaryPolynomial) -> BinaryPolynomial:
    """Coefficient-wise sum; cancelled terms are removed."""
    _check_same_vars(a, b)
    terms = dict(a.terms)
    for mono, c in b.terms.items():
        terms[mono] = terms.get(mono, 0) + c
    return BinaryPolynomial(terms, a.n_vars)


def poly_mul(a: BinaryPolynomial, b: BinaryPolynomial) -> BinaryPolynomial:
    """Distributive product with x_i * x_i -> x_i applied to every produced monomial."""
    _check_same_vars(a, b)
    terms: dict[Monomial, Coefficient] = {}
    for mono_a, ca in a.terms.items():
        for mono_b, cb in b.terms.items():
            mono = tuple(sorted(set(mono_a).union(mono_b)))
            terms[mono] = terms.get(mono, 0) + ca * cb
    return BinaryPolynomial(terms, a.n_vars)


def poly_eval(p: BinaryPolynomial, x: Sequence[int] | np.ndarray) -> Coefficient:
    """Sum of the coefficients whose variables are all set in x."""
    _check_assignment(p.n_vars, x)
    return sum((c for mono, c in p.terms.items() if all(x[i] for i in mono)), 0.0)


def evaluate_all(p: BinaryPolynomial | IntegerPolynomial) -> np.ndarray:
    """
    Evaluate over every assignment.

    Index x of the result encodes the assignment with variable 0 as the least-significant bit.
    Integer polynomials give an int64 table, real ones float64, complex ones complex128.
    """
    if p.n_vars > settings.STRUCTURED_MAX_VARIABLES:
        raise EncodingError(
            f"{p.n_vars} variables exceed the exhaustive evaluation limit "
            f"({settings.STRUCTURED_MAX_VARIABLES})",
            "polynomial",
        )
    if isinstance(p, IntegerPolynomial):
        lower, upper = range_bound(p)
        if max(-lower, upper) >= 1 << 63:
            raise CoefficientOverflowError("objective range exceeds int64", "polynomial")
        dtype: type = np.int64
    elif p.is_real:
        dtype = np.float64
    else:
        dtype = np.complex128

    index = np.arange(1 << p.n_vars, dtype=np.int64)
    values = np.zeros(1 << p.n_vars, dtype=dtype)
    for mono, c in p.terms.items():
        mask = sum(1 << i for i in mono)
        coeff = c.real if dtype is np.float64 and isinstance(c, complex) else c
        if mask == 0:
            values += coeff
        else:
            values[(index & mask) == mask] += coeff
    return values


def quantize(
    p: BinaryPolynomial, precision_bits: int, max_bits: int | None = None
) -> IntegerPolynomial:
    """
    Round every coefficient to an integer multiple of 2^-precision_bits.

    Raises:
        CoefficientOverflowError: When a rounded coefficient needs more than max_bits bits.
    """
    if precision_bits < 0:
        raise EncodingError("precision_bits must be non-negative", "polynomial")
    limit = 1 << (settings.MAX_COEFFICIENT_BITS if max_bits is None else max_bits)
    factor = float(1 << precision_bits)

    terms: dict[Monomial, int] = {}
    for mono, c in p.real_part().terms.items():
        scaled = c * factor
        if not np.isfinite(scaled):
            raise CoefficientOverflowError(f"coefficient {c!r} is not finite", "polynomial")
        value = int(round(scaled))
        if abs(value) >= limit:
            raise CoefficientOverflowError(
                f"coefficient {c!r} at {precision_bits} fractional bits overflows "
                f"{limit.bit_length() - 1}-bit width",
                "polynomial",
            )
        if value:
            terms[mono] = value
    return IntegerPolynomial(terms, p.n_vars, scale=1.0 / factor)


def range_bound(p: IntegerPolynomial) -> tuple[int, int]:
    """Sign-split bound: lower <= min E and max E <= upper."""
    lower = upper = p.constant
    for mono, c in p.terms.items():
        if not mono:
            continue
        if c < 0:
            lower += c
        else:
            upper += c
    return lower, upper


def exhaustive_range(p: IntegerPolynomial) -> tuple[int, int]:
    """Exact min/max by enumeration; verification helper for small n."""
    if p.n_vars > settings.EXHAUSTIVE_RANGE_MAX_VARS:
        raise EncodingError(
            f"exhaustive range limited to {settings.EXHAUSTIVE_RANGE_MAX_VARS} variables",
            "polynomial",
        )
    values = evaluate_all(p)
    return int(values.min()), int(values.max())


def index_to_assignment(index: int, n_vars: int) -> np.ndarray:
    """Bit vector of an assignment index, variable 0 first (least-significant bit)."""
    return np.array([(index >> i) & 1 for i in range(n_vars)], dtype=np.uint8)


def assignment_to_index(x: Sequence[int] | np.ndarray) -> int:
    return sum(int(bit) << i for i, bit in enumerate(x))


def to_text(p: BinaryPolynomial | IntegerPolynomial) -> str:
    """One term per line: 'coeff i j k'; the constant term is 'coeff' alone."""
    header = f"# n_vars={p.n_vars}"
    if isinstance(p, IntegerPolynomial):
        header += f" scale={p.scale!r}"
    elif not p.is_real:
        raise EncodingError("complex polynomials have no text form", "polynomial")
    lines = [header]
    for mono, c in p.terms.items():
        coeff = str(c) if isinstance(p, IntegerPolynomial) else repr(complex(c).real)
        lines.append(" ".join([coeff, *map(str, mono)]))
    return "\n".join(lines) + "\n"


def from_text(
    text: str, n_vars: int | None = None, integer: bool | None = None
) -> BinaryPolynomial | IntegerPolynomial:
    """Parse the text form; header comments supply n_vars and scale when present."""
    header: dict[str, str] = {}
    rows: list[tuple[str, Monomial]] = []
    for raw in text.splitlines():
        line = raw.strip()
        if not line:
            continue
        if line.startswith("#"):
            for token in line.lstrip("#").split():
                key, _, value = token.partition("=")
                header[key] = value
            continue
        coeff, *indices = line.split()
        rows.append((coeff, tuple(int(i) for i in indices)))

    if n_vars is None:
        n_vars = int(header["n_vars"]) if "n_vars" in header else max(
            (max(mono) + 1 for _, mono in rows if mono), default=0
        )
    if integer is None:
        integer = "scale" in header or all(_is_int_literal(c) for c, _ in rows)

    if integer:
        scale = float(header.get("scale", 1.0))
        return IntegerPolynomial({mono: int(c) for c, mono in rows}, n_vars, scale)
    return BinaryPolynomial({mono: float(c) for c, mono in rows}, n_vars)


def _is_int_literal(token: str) -> bool:
    return token.lstrip("+-").isdigit()
