"""Parser, printer and evaluator tests for the flux expression language."""

import numpy as np
import pytest
from hypothesis import given, strategies as st

from coupledstrings.exceptions import (
    FluxSyntaxError,
    NonzeroAtOriginError,
    UnknownSymbolError,
)
from coupledstrings.fluxexpr import (
    BinOp,
    Num,
    Power,
    Var,
    parse_flux,
)

# the round-trip corpus: parse -> print -> parse must evaluate identically
ROUND_TRIP_EXPRESSIONS = [
    "u*v",
    "u^2",
    "u^3",
    "-u",
    "u - v",
    "u + v",
    "0.5*u*v",
    "u^2 - 0.5*u*v",
    "u*(u - v)",
    "(u + v)*(u - v)",
    "-(u*v)",
    "-u*v + v^2",
    "u^2*v^2",
    "2*u - 2*v",
    "u*v*u",
    "(u - v)^3",
    "u^2 - v^2 + u*v",
    "-0.25*(u + v)^2 + 0.25*u^2 + 0.25*v^2",
    "1e-2*u",
    "u*(v*(u - 1) + v)",
]


@pytest.mark.parametrize("source", ROUND_TRIP_EXPRESSIONS)
def test_round_trip_evaluates_identically(source):
    rng = np.random.default_rng(7)
    f = parse_flux(source)
    g = parse_flux(f.to_source())
    pts = rng.uniform(-10.0, 10.0, size=(100, 2))
    for u, v in pts:
        assert f.eval(u, v) == g.eval(u, v)


def test_round_trip_corpus_size():
    # grammar coverage contract: at least 20 distinct expressions
    assert len(set(ROUND_TRIP_EXPRESSIONS)) >= 20


class TestGrammar:
    def test_product_shape(self):
        f = parse_flux("u*v")
        assert f.root == BinOp("*", Var("u"), Var("v"))

    def test_mixed_shape(self):
        f = parse_flux("u^2 - 0.5*u*v")
        assert isinstance(f.root, BinOp) and f.root.op == "-"
        assert f.root.left == Power(Var("u"), 2)
        right = f.root.right
        assert isinstance(right, BinOp) and right.op == "*"
        assert f.eval(2.0, 4.0) == 0.0

    def test_power_binds_tighter_than_unary_minus(self):
        assert parse_flux("-u^2").eval(3.0, 0.0) == -9.0

    def test_product_binds_tighter_than_sum(self):
        assert parse_flux("u + u*v").eval(2.0, 3.0) == 8.0

    def test_parentheses(self):
        assert parse_flux("(u + v)*u").eval(2.0, 3.0) == 10.0

    def test_whitespace_insensitive(self):
        a = parse_flux("u^2-0.5*u*v")
        b = parse_flux("  u^2   -   0.5 * u * v ")
        assert a.eval(1.7, -2.2) == b.eval(1.7, -2.2)

    def test_scientific_notation(self):
        assert parse_flux("1.5e2*u").eval(1.0, 0.0) == 150.0
        assert parse_flux("2E-1*v").eval(0.0, 1.0) == pytest.approx(0.2)


class TestEvaluation:
    def test_hand_values(self):
        assert parse_flux("u*v").eval(2.0, 3.0) == 6.0
        assert parse_flux("u^2 - u*v").eval(1.0, 1.0) == 0.0

    def test_integer_polynomials_exact_at_integers(self):
        f = parse_flux("u^3 - 2*u*v + v^2")
        for u in range(-8, 9):
            for v in range(-8, 9):
                assert f.eval(float(u), float(v)) == u**3 - 2 * u * v + v**2

    def test_vectorized(self):
        f = parse_flux("u*v - v^2")
        u = np.array([0.0, 1.0, 2.0])
        v = np.array([1.0, 2.0, 3.0])
        np.testing.assert_array_equal(f.eval(u, v), u * v - v**2)

    @given(st.floats(-10, 10), st.floats(-10, 10))
    def test_origin_invariant(self, u, v):
        # any accepted flux vanishes when both arguments vanish
        f = parse_flux("u^2*v - 3*v")
        assert f.eval(0.0, 0.0) == 0.0
        assert np.isfinite(f.eval(u, v))


class TestErrors:
    def test_syntax_error_with_position(self):
        with pytest.raises(FluxSyntaxError) as err:
            parse_flux("u*(v")
        assert err.value.position == 4

    def test_trailing_garbage(self):
        with pytest.raises(FluxSyntaxError):
            parse_flux("u*v)")

    def test_bad_character(self):
        with pytest.raises(FluxSyntaxError) as err:
            parse_flux("u @ v")
        assert err.value.position == 2

    def test_missing_operand(self):
        with pytest.raises(FluxSyntaxError):
            parse_flux("u*")

    def test_non_integer_exponent(self):
        with pytest.raises(FluxSyntaxError):
            parse_flux("u^v")
        with pytest.raises(FluxSyntaxError):
            parse_flux("u^-2")
        with pytest.raises(FluxSyntaxError):
            parse_flux("u^1.5")

    def test_unknown_symbol(self):
        with pytest.raises(UnknownSymbolError) as err:
            parse_flux("u*w")
        assert "w" in str(err.value)
        assert err.value.position == 2

    def test_unknown_symbol_is_a_syntax_error(self):
        # the CLI maps exception kinds; unknown-symbol refines syntax-error
        with pytest.raises(FluxSyntaxError):
            parse_flux("sin(u)")

    def test_nonzero_at_origin(self):
        with pytest.raises(NonzeroAtOriginError):
            parse_flux("u + 1")

    def test_nonzero_at_origin_constant(self):
        with pytest.raises(NonzeroAtOriginError):
            parse_flux("1")

    def test_nonzero_at_origin_through_power(self):
        # 0^0 = 1 by the empty-product convention, so u^0 is rejected
        with pytest.raises(NonzeroAtOriginError):
            parse_flux("u^0")

    def test_kind_tags(self):
        with pytest.raises(FluxSyntaxError) as err:
            parse_flux("u*(")
        assert err.value.kind == "syntax-error"
        with pytest.raises(UnknownSymbolError) as err:
            parse_flux("w")
        assert err.value.kind == "unknown-symbol"
        with pytest.raises(NonzeroAtOriginError) as err:
            parse_flux("v + 2")
        assert err.value.kind == "nonzero-at-origin"


class TestAliases:
    def test_bilinear(self):
        f = parse_flux("bilinear")
        assert f.eval(2.0, 3.0) == 6.0

    def test_quadratic(self):
        f = parse_flux("quadratic")
        assert f.eval(3.0, 99.0) == 9.0

    def test_alias_whitespace(self):
        assert parse_flux("  bilinear ").eval(2.0, 5.0) == 10.0


class TestIsZero:
    def test_zero_literal(self):
        assert parse_flux("0").is_zero
        assert parse_flux("0.0").is_zero

    def test_nonzero_expressions(self):
        assert not parse_flux("u*v").is_zero
        assert not parse_flux("u - u").is_zero  # structural test, not algebraic


@given(
    coeffs=st.lists(
        st.integers(min_value=-5, max_value=5), min_size=3, max_size=3),
    u=st.floats(-5, 5, allow_nan=False),
    v=st.floats(-5, 5, allow_nan=False),
)
def test_random_polynomial_round_trip(coeffs, u, v):
    c1, c2, c3 = coeffs
    source = f"{c1}*u^2 + {c2}*u*v + {c3}*v^2"
    f = parse_flux(source)
    g = parse_flux(f.to_source())
    assert f.eval(u, v) == g.eval(u, v)
