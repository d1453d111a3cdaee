"""
Unit tests for analytic function trees: evaluation, derivatives,
simplification, the constancy test, the circle minimum and the
parser/printer pair.
"""

import cmath
import math
import sys
from pathlib import Path

import numpy as np
import pytest

# Add src to path
sys.path.insert(0, str(Path(__file__).parent.parent.parent / "src"))

from omt_lab.analytic import (  # noqa: E402
    CircleSpec,
    Const,
    Z,
    compose,
    constant,
    deriv,
    evaluate,
    exp,
    format_complex,
    format_expression,
    is_nonconstant,
    min_on_circle,
    parse_complex,
    parse_expression,
    simplify,
)
from omt_lab.errors import ContractError, EvaluationOverflowError, ExpressionSyntaxError  # noqa: E402


ADMITTED = [
    "z^2",
    "z^2 + z",
    "z^3",
    "exp(z)",
    "exp(z^2)",
    "(2.0-3.0i) * z^4 + exp(0.5 * z) + 1.0",
    "z * exp(z) - 3.0",
]


# ============================================================================
# EVALUATION
# ============================================================================

@pytest.mark.unit
def test_evaluate_examples():
    """Test evaluation on exact cases."""
    assert evaluate(Z ** 2 + 1, 1j) == 0
    assert evaluate(Z, 3 + 4j) == 3 + 4j
    assert evaluate(exp(Z), 0) == 1


@pytest.mark.unit
def test_evaluate_vectorized_matches_scalar():
    """Test that array evaluation agrees with pointwise evaluation."""
    f = parse_expression("z^3 + exp(z) * (1.0+2.0i)")
    points = np.array([0.1 + 0.2j, -0.5j, 1.5, -2 + 1j])

    values = evaluate(f, points)

    assert values.shape == points.shape
    for z, w in zip(points, values):
        assert w == pytest.approx(evaluate(f, complex(z)))


@pytest.mark.unit
def test_evaluate_overflow_raises():
    """Test that non-finite intermediate values raise EvaluationOverflowError."""
    with pytest.raises(EvaluationOverflowError):
        evaluate(exp(exp(Z)), 10.0)


@pytest.mark.unit
def test_constant_must_be_finite():
    """Test that constants reject inf and nan."""
    with pytest.raises(ContractError):
        constant(complex(math.inf, 0))


# ============================================================================
# DERIVATIVES
# ============================================================================

@pytest.mark.unit
def test_deriv_examples():
    """Test the power rule, constants and the chain rule."""
    assert evaluate(deriv(Z ** 2), 2) == 4
    assert evaluate(deriv(Const(5.0)), 1 + 1j) == 0
    assert evaluate(deriv(exp(Z ** 2)), 1) == pytest.approx(2 * math.e, rel=1e-12)


@pytest.mark.unit
def test_deriv_of_composition_uses_chain_rule():
    """Test that (g o h)' = g'(h) * h'."""
    f = compose(exp(Z), Z ** 2 + Z)
    z = 0.3 - 0.4j
    expected = cmath.exp(z * z + z) * (2 * z + 1)
    assert evaluate(deriv(f), z) == pytest.approx(expected, rel=1e-12)


@pytest.mark.unit
@pytest.mark.parametrize("text", ADMITTED)
def test_deriv_matches_central_difference(text):
    """Test the structural derivative against central finite differences."""
    f = parse_expression(text)
    f_prime = deriv(f)
    rng = np.random.default_rng(2024)
    points = rng.uniform(-1, 1, 100) + 1j * rng.uniform(-1, 1, 100)
    h = 1e-6

    for z in points:
        exact = evaluate(f_prime, z)
        numeric = (evaluate(f, z + h) - evaluate(f, z - h)) / (2 * h)
        assert abs(exact - numeric) <= 1e-5 * (1 + abs(exact))


# ============================================================================
# SIMPLIFICATION AND CONSTANCY
# ============================================================================

@pytest.mark.unit
def test_is_nonconstant_examples():
    """Test the constancy verdicts."""
    assert is_nonconstant(Z ** 2)
    assert not is_nonconstant(Const(5.0))
    assert not is_nonconstant(Z - Z)


@pytest.mark.unit
def test_is_nonconstant_handles_exp_trees():
    """Test constancy on trees the polynomial normal form cannot absorb."""
    assert is_nonconstant(exp(Z))
    assert not is_nonconstant(exp(Z - Z) * 3)
    assert not is_nonconstant(exp(Z) - exp(Z) * 1)


@pytest.mark.unit
def test_simplify_collapses_polynomials():
    """Test polynomial normalization and constant folding."""
    assert simplify(Z - Z) == Const(0.0)
    assert simplify((Z + 1) * (Z + 1) - Z ** 2 - 2 * Z) == Const(1.0)
    assert simplify(exp(Const(0.0))) == Const(1.0)


@pytest.mark.unit
def test_simplify_preserves_values():
    """Test that simplification does not change the function."""
    f = parse_expression("(z + 1.0)^3 - z * (z - 2.0) + exp(z - z)")
    g = simplify(f)
    for z in (0.2 + 0.1j, -1.3j, 2.0):
        assert evaluate(g, z) == pytest.approx(evaluate(f, z), rel=1e-12)


# ============================================================================
# CIRCLE MINIMUM
# ============================================================================

@pytest.mark.unit
def test_min_on_circle_examples():
    """Test the margin on the documented circles."""
    unit = CircleSpec(0, 1)

    assert min_on_circle(Z ** 2, unit, 0, 1024).m == pytest.approx(1.0, abs=1e-12)
    assert min_on_circle(Z, unit, 0, 1024).m == pytest.approx(1.0, abs=1e-12)

    result = min_on_circle(Z ** 2 + Z, CircleSpec(0, 0.5), 0, 1024)
    assert result.m == pytest.approx(0.25, abs=1e-9)
    assert result.argmin_angle == pytest.approx(math.pi, abs=1e-6)


@pytest.mark.unit
def test_min_on_circle_against_dense_sampling():
    """Test the refined minimum against 10^6 circle points."""
    f = parse_expression("z^2 + (0.3+0.1i) * z")
    circle = CircleSpec(0.1j, 0.7)
    v = 0.05

    result = min_on_circle(f, circle, v, 256)
    dense = np.abs(evaluate(f, circle.point(np.linspace(0, 2 * np.pi, 1_000_000, endpoint=False))) - v)

    assert 0 <= result.argmin_angle < 2 * math.pi
    assert result.m >= dense.min() - 1e-9
    assert result.m - dense.min() <= result.tolerance
    assert result.m == pytest.approx(dense.min(), abs=1e-8)


@pytest.mark.unit
def test_min_on_circle_requires_enough_samples():
    """Test that K < 64 is rejected."""
    with pytest.raises(ContractError):
        min_on_circle(Z, CircleSpec(0, 1), 0, 32)


# ============================================================================
# PARSING AND PRINTING
# ============================================================================

@pytest.mark.unit
@pytest.mark.parametrize("text, z, expected", [
    ("z^2 + 1", 1j, 0),
    ("z - 2", 5, 3),
    ("-z", 2, -2),
    ("2 * -z", 1, -2),
    ("z*2+3i", 1, 2 + 3j),
    ("(2+3i) * z", 1j, -3 + 2j),
    ("0.5i * z", 2, 1j),
    ("-2^2", 0, -4),
    ("(-2)^2", 0, 4),
    ("-z^2", 3, -9),
    ("1 - 2^2", 0, -3),
    ("exp(z) + exp(2 * z)", 0, 2),
    ("z^0", 7, 1),
])
def test_parse_expression_values(text, z, expected):
    """Test the grammar through the values of parsed functions."""
    assert evaluate(parse_expression(text), z) == pytest.approx(expected)


@pytest.mark.unit
@pytest.mark.parametrize("text", ["", "z^", "z^-1", "z^1.5", "exp z", "(z", "z)", "w", "z ** 2", "1e"])
def test_parse_expression_rejects_malformed_text(text):
    """Test that malformed expressions raise ExpressionSyntaxError."""
    with pytest.raises(ExpressionSyntaxError):
        parse_expression(text)


@pytest.mark.unit
@pytest.mark.parametrize("text", ADMITTED + ["-z + (-0.0)", "(1.0-0.0i) * z", "1e-300 * z^2"])
def test_format_parse_round_trip(text):
    """Test that printing and reparsing is bit-exact."""
    printed = format_expression(parse_expression(text))
    assert format_expression(parse_expression(printed)) == printed


@pytest.mark.unit
def test_format_expands_compositions():
    """Test that compositions print as their substituted form."""
    f = compose(Z ** 2 + 1, exp(Z))
    printed = format_expression(f)

    assert "exp(z)" in printed
    assert evaluate(parse_expression(printed), 0.3) == pytest.approx(evaluate(f, 0.3))


@pytest.mark.unit
@pytest.mark.parametrize("text, expected", [
    ("0", 0j),
    ("-1.5", -1.5 + 0j),
    ("2+3i", 2 + 3j),
    ("0-0.5i", -0.5j),
    ("1e-3+2e2i", 0.001 + 200j),
])
def test_parse_complex(text, expected):
    """Test the CLI complex literal grammar."""
    assert parse_complex(text) == expected


@pytest.mark.unit
@pytest.mark.parametrize("text", ["", "2 + 3i", "i", "3i", "1+2j", "abc", "1+i"])
def test_parse_complex_rejects_malformed(text):
    """Test that malformed complex literals are rejected."""
    with pytest.raises(ExpressionSyntaxError):
        parse_complex(text)


@pytest.mark.unit
def test_format_complex_round_trip():
    """Test that format_complex reads back exactly."""
    for value in (0j, 2 - 3j, 0.1 + 0.2j, complex(-1e-300, 5e300)):
        assert parse_complex(format_complex(value)) == value


@pytest.mark.unit
def test_compose_evaluates_inner_then_outer():
    """Test that compose(f, g)(z) equals f(g(z)) bit for bit."""
    f = parse_expression("z^3 + (0.5-1.0i) * z")
    g = parse_expression("exp(z) - 2.0")
    for z in (0.1 + 0.7j, -1.2, 3j):
        assert evaluate(compose(f, g), z) == evaluate(f, evaluate(g, z))
