"""Unit tests for multilinear polynomial algebra."""

import itertools

import numpy as np
import pytest

from app.core.exceptions import (
    CoefficientOverflowError,
    EncodingError,
    VariableCountMismatchError,
)
from app.core.polynomial import (
    BinaryPolynomial,
    IntegerPolynomial,
    assignment_to_index,
    evaluate_all,
    exhaustive_range,
    from_text,
    index_to_assignment,
    poly_add,
    poly_eval,
    poly_mul,
    quantize,
    range_bound,
    to_text,
)


def _x(i: int, n: int = 2) -> BinaryPolynomial:
    return BinaryPolynomial.variable(i, n)


def _random_poly(rng: np.random.Generator, n_vars: int, n_terms: int) -> BinaryPolynomial:
    """Random real polynomial of degree <= 2 with a constant term."""
    terms = {(): float(rng.normal())}
    for _ in range(n_terms):
        degree = int(rng.integers(1, 3))
        mono = tuple(sorted(rng.choice(n_vars, size=degree, replace=False).tolist()))
        terms[mono] = terms.get(mono, 0.0) + float(rng.normal())
    return BinaryPolynomial(terms, n_vars)


def _all_assignments(n: int):
    return [np.array(bits[::-1], dtype=np.uint8) for bits in itertools.product((0, 1), repeat=n)]


class TestArithmetic:
    def test_add_merges_coefficients(self) -> None:
        """x0 + x0 gives 2 x0."""
        result = poly_add(_x(0), _x(0))
        assert dict(result.terms) == {(0,): 2.0}

    def test_add_removes_cancelled_terms(self) -> None:
        """(x0x1 + 1) + (-x0x1) leaves only the constant."""
        a = BinaryPolynomial({(0, 1): 1.0, (): 1.0}, 2)
        b = BinaryPolynomial({(0, 1): -1.0}, 2)
        assert dict(poly_add(a, b).terms) == {(): 1.0}

    def test_add_zero_is_identity(self) -> None:
        p = BinaryPolynomial({(0,): 3.0, (0, 1): -2.0}, 2)
        assert poly_add(p, BinaryPolynomial.zero(2)) == p

    def test_mul_applies_idempotence(self) -> None:
        """(x0 + 1)(x0 + x1) = 2 x0 + x0x1 + x1."""
        result = poly_mul(_x(0) + 1, _x(0) + _x(1))
        assert dict(result.terms) == {(0,): 2.0, (1,): 1.0, (0, 1): 1.0}

    def test_square_of_variable_is_variable(self) -> None:
        assert dict(poly_mul(_x(0), _x(0)).terms) == {(0,): 1.0}

    def test_mismatched_variable_counts_raise(self) -> None:
        with pytest.raises(VariableCountMismatchError):
            poly_add(_x(0, 2), _x(0, 3))
        with pytest.raises(VariableCountMismatchError):
            poly_mul(_x(0, 2), _x(0, 3))

    def test_product_evaluates_as_product_of_evaluations(self) -> None:
        """Random degree-2 factors over 6 variables, checked on all 64 assignments."""
        rng = np.random.default_rng(7)
        a = _random_poly(rng, 6, 8)
        b = _random_poly(rng, 6, 8)
        product = poly_mul(a, b)
        for x in _all_assignments(6):
            assert poly_eval(product, x) == pytest.approx(poly_eval(a, x) * poly_eval(b, x))

    def test_no_zero_coefficient_is_stored(self) -> None:
        p = (_x(0) + _x(1)) - _x(1)
        assert (1,) not in p.terms
        assert all(c != 0 for c in p.terms.values())

    def test_monomial_index_out_of_range_raises(self) -> None:
        with pytest.raises(EncodingError):
            BinaryPolynomial({(0, 2): 1.0}, 2)

    def test_complex_real_part(self) -> None:
        z = BinaryPolynomial({(0,): 1 + 1j}, 1)
        assert dict((z * z.conjugate()).real_part().terms) == {(0,): 2.0}

    def test_real_part_rejects_large_imaginary_residue(self) -> None:
        with pytest.raises(EncodingError):
            BinaryPolynomial({(0,): 1 + 0.5j}, 1).real_part()


class TestEvaluation:
    def test_eval_direct_sum(self) -> None:
        p = BinaryPolynomial({(0,): 2.0, (0, 1): 1.0, (1,): 1.0}, 2)
        assert poly_eval(p, (1, 1)) == 4

    def test_eval_zero_assignment_is_constant(self) -> None:
        p = BinaryPolynomial({(): -1.5, (0,): 2.0, (1, 2): 7.0}, 3)
        assert poly_eval(p, (0, 0, 0)) == -1.5

    def test_eval_length_mismatch_raises(self) -> None:
        with pytest.raises(VariableCountMismatchError):
            poly_eval(_x(0), (1, 0, 1))

    def test_evaluate_all_uses_lsb_first_indexing(self) -> None:
        """Index 1 sets variable 0, index 2 sets variable 1."""
        p = BinaryPolynomial({(0,): 1.0, (1,): 10.0, (0, 1): 100.0}, 2)
        np.testing.assert_allclose(evaluate_all(p), [0.0, 1.0, 10.0, 111.0])

    def test_evaluate_all_matches_poly_eval(self) -> None:
        rng = np.random.default_rng(3)
        p = _random_poly(rng, 5, 10)
        table = evaluate_all(p)
        for index in range(32):
            assert table[index] == pytest.approx(poly_eval(p, index_to_assignment(index, 5)))

    def test_eval_is_linear_over_every_assignment(self) -> None:
        rng = np.random.default_rng(11)
        for _ in range(5):
            a, b = _random_poly(rng, 4, 6), _random_poly(rng, 4, 6)
            total = poly_add(a, b)
            for bits in itertools.product((0, 1), repeat=4):
                x = np.array(bits, dtype=np.uint8)
                expected = poly_eval(a, x) + poly_eval(b, x)
                assert poly_eval(total, x) == pytest.approx(expected, abs=1e-12)

    def test_integer_table_dtype(self) -> None:
        p = IntegerPolynomial({(): 3, (0,): -2}, 2)
        table = evaluate_all(p)
        assert table.dtype == np.int64
        assert table.tolist() == [3, 1, 3, 1]

    def test_assignment_index_helpers(self) -> None:
        x = index_to_assignment(6, 4)
        assert x.tolist() == [0, 1, 1, 0]
        assert assignment_to_index(x) == 6


class TestQuantization:
    def test_quantize_rounds_to_precision(self) -> None:
        p = BinaryPolynomial({(): 0.3, (0,): -1.26}, 1)
        q = quantize(p, 2)
        assert dict(q.terms) == {(): 1, (0,): -5}
        assert q.scale == 0.25

    def test_quantization_error_is_bounded(self) -> None:
        """Scaled integer evaluation stays within s/2 per term of the real value."""
        rng = np.random.default_rng(11)
        p = _random_poly(rng, 8, 20)
        q = quantize(p, 6)
        bound = q.scale / 2 * len(p)
        real = evaluate_all(p)
        scaled = evaluate_all(q) * q.scale
        assert np.max(np.abs(real - scaled)) <= bound + 1e-12

    def test_quantize_preserves_integer_coefficients(self) -> None:
        p = BinaryPolynomial({(): 3.0, (0, 1): -2.0}, 2)
        q = quantize(p, 0)
        assert dict(q.terms) == {(): 3, (0, 1): -2}
        assert q.scale == 1.0

    def test_quantize_overflow(self) -> None:
        p = BinaryPolynomial({(0,): 1e6}, 1)
        with pytest.raises(CoefficientOverflowError):
            quantize(p, 8, max_bits=16)

    def test_negative_precision_rejected(self) -> None:
        with pytest.raises(EncodingError):
            quantize(_x(0), -1)


class TestRange:
    def test_range_bound_sign_split(self) -> None:
        p = IntegerPolynomial({(): 2, (0,): 3, (1,): -4, (0, 1): 5}, 2)
        assert range_bound(p) == (-2, 10)

    def test_range_bound_contains_exhaustive_range(self) -> None:
        rng = np.random.default_rng(5)
        for _ in range(10):
            p = quantize(_random_poly(rng, 6, 10), 4)
            lower, upper = range_bound(p)
            low, high = exhaustive_range(p)
            assert lower <= low <= high <= upper

    def test_constant_polynomial_range(self) -> None:
        p = IntegerPolynomial({(): -7}, 3)
        assert range_bound(p) == (-7, -7)
        assert exhaustive_range(p) == (-7, -7)


class TestTextForm:
    def test_integer_round_trip(self) -> None:
        p = IntegerPolynomial({(): -3, (0,): 2, (1, 2): 5}, 3, scale=0.125)
        text = to_text(p)
        assert text.splitlines()[0] == "# n_vars=3 scale=0.125"
        assert from_text(text) == p

    def test_real_polynomial_parses_as_real(self) -> None:
        p = BinaryPolynomial({(): 0.5, (0, 3): -1.25}, 4)
        parsed = from_text(to_text(p))
        assert isinstance(parsed, BinaryPolynomial)
        assert parsed == p

    def test_complex_polynomial_has_no_text_form(self) -> None:
        with pytest.raises(EncodingError):
            to_text(BinaryPolynomial({(0,): 1j}, 1))
