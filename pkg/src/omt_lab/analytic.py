"""
Entire analytic functions as expression trees.

An AnalyticFn is a finite tree over constants, the variable z, sums,
products, nonnegative integer powers, the exponential and composition.
There are no reciprocal nodes, so every function is entire and every
evaluation is defined. Derivatives are structural, never finite differences.

The printed form of a function parses back to a function with the same
printed form, bit for bit:

    >>> f = parse_expression("z^2 + (2.0-3.0i) * exp(z)")
    >>> format_expression(parse_expression(format_expression(f))) == format_expression(f)
    True
"""

from __future__ import annotations

import logging
import math
import re
from dataclasses import dataclass
from functools import singledispatch
from typing import NamedTuple, Optional, Union

import numpy as np

from .errors import ContractError, EvaluationOverflowError, ExpressionSyntaxError

logger = logging.getLogger(__name__)

ComplexLike = Union[complex, float, int]

# Fixed sample points of the constancy test: 0.5 * e^{i*pi*k/8}, k = 0..15
CONSTANCY_POINTS = 0.5 * np.exp(1j * np.pi * np.arange(16) / 8)
NONCONSTANT_EPS = 1e-12

# Polynomial normalization gives up above this degree
_MAX_POLY_DEGREE = 4096

_GOLDEN = (math.sqrt(5.0) - 1.0) / 2.0


def _check_finite(value: complex, what: str) -> complex:
    if not (math.isfinite(value.real) and math.isfinite(value.imag)):
        raise ContractError(f"{what} must be finite, got {value!r}")
    return value


# ============================================================================
# EXPRESSION TREE
# ============================================================================

class AnalyticFn:
    """Base class of all expression nodes."""

    precedence = 4

    def __call__(self, z):
        return evaluate(self, z)

    def __str__(self) -> str:
        return format_expression(self)

    def __add__(self, other) -> "AnalyticFn":
        return Sum(self, _coerce(other))

    def __radd__(self, other) -> "AnalyticFn":
        return Sum(_coerce(other), self)

    def __sub__(self, other) -> "AnalyticFn":
        return Sum(self, negate(_coerce(other)))

    def __rsub__(self, other) -> "AnalyticFn":
        return Sum(_coerce(other), negate(self))

    def __mul__(self, other) -> "AnalyticFn":
        return Product(self, _coerce(other))

    def __rmul__(self, other) -> "AnalyticFn":
        return Product(_coerce(other), self)

    def __neg__(self) -> "AnalyticFn":
        return negate(self)

    def __pow__(self, exponent: int) -> "AnalyticFn":
        return Power(self, exponent)


@dataclass(frozen=True)
class Const(AnalyticFn):
    value: complex

    def __post_init__(self):
        object.__setattr__(self, "value", _check_finite(complex(self.value), "constant"))


@dataclass(frozen=True)
class Var(AnalyticFn):
    """The variable z."""


@dataclass(frozen=True)
class Sum(AnalyticFn):
    left: AnalyticFn
    right: AnalyticFn
    precedence = 1


@dataclass(frozen=True)
class Product(AnalyticFn):
    left: AnalyticFn
    right: AnalyticFn
    precedence = 2


@dataclass(frozen=True)
class Power(AnalyticFn):
    base: AnalyticFn
    exponent: int
    precedence = 3

    def __post_init__(self):
        if isinstance(self.exponent, bool) or not isinstance(self.exponent, (int, np.integer)):
            raise ContractError(f"power exponent must be an integer, got {self.exponent!r}")
        if self.exponent < 0:
            raise ContractError(f"power exponent must be nonnegative, got {self.exponent}")
        object.__setattr__(self, "exponent", int(self.exponent))


@dataclass(frozen=True)
class Exp(AnalyticFn):
    arg: AnalyticFn


@dataclass(frozen=True)
class Compose(AnalyticFn):
    """outer evaluated at inner: (outer o inner)(z) = outer(inner(z))."""

    outer: AnalyticFn
    inner: AnalyticFn


Z = Var()


def _coerce(value) -> AnalyticFn:
    if isinstance(value, AnalyticFn):
        return value
    return Const(complex(value))


def constant(value: ComplexLike) -> Const:
    return Const(complex(value))


def exp(arg: AnalyticFn) -> Exp:
    return Exp(_coerce(arg))


def compose(outer: AnalyticFn, inner: AnalyticFn) -> Compose:
    return Compose(outer, inner)


def negate(f: AnalyticFn) -> AnalyticFn:
    """-f; constants are negated in place, keeping a +0.0 imaginary part."""
    if isinstance(f, Const):
        c = f.value
        return Const(complex(-c.real, -c.imag if c.imag != 0 else 0.0))
    return Product(Const(-1.0), f)


def substitute(outer: AnalyticFn, inner: AnalyticFn) -> AnalyticFn:
    """Replace every occurrence of z in `outer` by the tree `inner`."""
    if isinstance(outer, Var):
        return inner
    if isinstance(outer, Const):
        return outer
    if isinstance(outer, Sum):
        return Sum(substitute(outer.left, inner), substitute(outer.right, inner))
    if isinstance(outer, Product):
        return Product(substitute(outer.left, inner), substitute(outer.right, inner))
    if isinstance(outer, Power):
        return Power(substitute(outer.base, inner), outer.exponent)
    if isinstance(outer, Exp):
        return Exp(substitute(outer.arg, inner))
    if isinstance(outer, Compose):
        return substitute(substitute(outer.outer, outer.inner), inner)
    raise TypeError(f"Unknown expression node {type(outer).__name__}")


# ============================================================================
# EVALUATION
# ============================================================================

@singledispatch
def _eval(node, z: np.ndarray) -> np.ndarray:
    raise NotImplementedError(f"Cannot evaluate a {type(node).__name__}")


@_eval.register(Const)
def _(node, z):
    return np.full(z.shape, node.value, dtype=np.complex128)


@_eval.register(Var)
def _(node, z):
    return z


@_eval.register(Sum)
def _(node, z):
    return _finite(_eval(node.left, z) + _eval(node.right, z), node)


@_eval.register(Product)
def _(node, z):
    return _finite(_eval(node.left, z) * _eval(node.right, z), node)


@_eval.register(Power)
def _(node, z):
    base = _eval(node.base, z)
    result = np.ones(z.shape, dtype=np.complex128)
    n = node.exponent
    # binary exponentiation keeps small powers exact (i*i == -1)
    while n:
        if n & 1:
            result = result * base
        n >>= 1
        if n:
            base = base * base
    return _finite(result, node)


@_eval.register(Exp)
def _(node, z):
    return _finite(np.exp(_eval(node.arg, z)), node)


@_eval.register(Compose)
def _(node, z):
    return _eval(node.outer, _eval(node.inner, z))


def _finite(values: np.ndarray, node: AnalyticFn) -> np.ndarray:
    if not np.all(np.isfinite(values)):
        raise EvaluationOverflowError(
            f"Non-finite value while evaluating {type(node).__name__} node"
        )
    return values


def evaluate(f: AnalyticFn, z):
    """
    Evaluate f at a point or at an array of points.

    Args:
        f: Function to evaluate
        z: Complex scalar or array-like of complex points

    Returns:
        Python complex for scalar input, complex128 ndarray otherwise

    Raises:
        EvaluationOverflowError: If any intermediate value is not finite
    """
    points = np.asarray(z, dtype=np.complex128)
    with np.errstate(all="ignore"):
        values = _eval(f, points)
    if points.ndim == 0:
        return complex(values[()])
    return values


# ============================================================================
# DIFFERENTIATION
# ============================================================================

def _add(left: AnalyticFn, right: AnalyticFn) -> AnalyticFn:
    if _is_const(left, 0):
        return right
    if _is_const(right, 0):
        return left
    return Sum(left, right)


def _mul(left: AnalyticFn, right: AnalyticFn) -> AnalyticFn:
    if _is_const(left, 0) or _is_const(right, 0):
        return Const(0.0)
    if _is_const(left, 1):
        return right
    if _is_const(right, 1):
        return left
    return Product(left, right)


def _is_const(node: AnalyticFn, value: complex) -> bool:
    return isinstance(node, Const) and node.value == value


@singledispatch
def _deriv(node) -> AnalyticFn:
    raise NotImplementedError(f"Cannot differentiate a {type(node).__name__}")


@_deriv.register(Const)
def _(node):
    return Const(0.0)


@_deriv.register(Var)
def _(node):
    return Const(1.0)


@_deriv.register(Sum)
def _(node):
    return _add(_deriv(node.left), _deriv(node.right))


@_deriv.register(Product)
def _(node):
    # product rule
    return _add(_mul(_deriv(node.left), node.right), _mul(node.left, _deriv(node.right)))


@_deriv.register(Power)
def _(node):
    n = node.exponent
    if n == 0:
        return Const(0.0)
    if n == 1:
        return _deriv(node.base)
    outer = Product(Const(float(n)), node.base if n == 2 else Power(node.base, n - 1))
    return _mul(outer, _deriv(node.base))


@_deriv.register(Exp)
def _(node):
    return _mul(node, _deriv(node.arg))


@_deriv.register(Compose)
def _(node):
    # chain rule
    return _mul(Compose(deriv(node.outer), node.inner), _deriv(node.inner))


def deriv(f: AnalyticFn) -> AnalyticFn:
    """Exact structural derivative of f; the result is itself an AnalyticFn."""
    return _deriv(f)


# ============================================================================
# SIMPLIFICATION AND CONSTANCY
# ============================================================================

def _poly_add(p: list[complex], q: list[complex]) -> list[complex]:
    if len(p) < len(q):
        p, q = q, p
    out = list(p)
    for k, c in enumerate(q):
        out[k] += c
    return out


def _poly_mul(p: list[complex], q: list[complex]) -> Optional[list[complex]]:
    if len(p) + len(q) - 2 > _MAX_POLY_DEGREE:
        return None
    out = [0j] * (len(p) + len(q) - 1)
    for i, a in enumerate(p):
        if a == 0:
            continue
        for j, b in enumerate(q):
            out[i + j] += a * b
    return out


def _as_polynomial(node: AnalyticFn) -> Optional[list[complex]]:
    """Coefficient list (lowest degree first) of an exp-free tree, else None."""
    if isinstance(node, Const):
        return [node.value]
    if isinstance(node, Var):
        return [0j, 1 + 0j]
    if isinstance(node, Sum):
        left, right = _as_polynomial(node.left), _as_polynomial(node.right)
        if left is None or right is None:
            return None
        return _poly_add(left, right)
    if isinstance(node, Product):
        left, right = _as_polynomial(node.left), _as_polynomial(node.right)
        if left is None or right is None:
            return None
        return _poly_mul(left, right)
    if isinstance(node, Power):
        base = _as_polynomial(node.base)
        if base is None:
            return None
        out: Optional[list[complex]] = [1 + 0j]
        for _ in range(node.exponent):
            out = _poly_mul(out, base)
            if out is None:
                return None
        return out
    if isinstance(node, Compose):
        outer, inner = _as_polynomial(node.outer), _as_polynomial(node.inner)
        if outer is None or inner is None:
            return None
        # Horner
        out = [outer[-1]]
        for c in reversed(outer[:-1]):
            out = _poly_mul(out, inner)
            if out is None:
                return None
            out = _poly_add(out, [c])
        return out
    return None


def _from_polynomial(coeffs: list[complex]) -> AnalyticFn:
    result: Optional[AnalyticFn] = None
    for k, c in enumerate(coeffs):
        if c == 0:
            continue
        if k == 0:
            term: AnalyticFn = Const(c)
        else:
            monomial = Z if k == 1 else Power(Z, k)
            term = monomial if c == 1 else Product(Const(c), monomial)
        result = term if result is None else Sum(result, term)
    return result if result is not None else Const(0.0)


def simplify(f: AnalyticFn) -> AnalyticFn:
    """
    Structural simplification: exp-free subtrees are normalized as
    polynomials (so z - z collapses to 0) and constant subtrees are folded.
    """
    coeffs = _as_polynomial(f)
    if coeffs is not None:
        return _from_polynomial(coeffs)
    if isinstance(f, Sum):
        left, right = simplify(f.left), simplify(f.right)
        if isinstance(left, Const) and isinstance(right, Const):
            return Const(left.value + right.value)
        return _add(left, right)
    if isinstance(f, Product):
        left, right = simplify(f.left), simplify(f.right)
        if isinstance(left, Const) and isinstance(right, Const):
            return Const(left.value * right.value)
        return _mul(left, right)
    if isinstance(f, Power):
        base = simplify(f.base)
        if isinstance(base, Const):
            return Const(evaluate(Power(base, f.exponent), 0j))
        return Power(base, f.exponent) if f.exponent != 1 else base
    if isinstance(f, Exp):
        arg = simplify(f.arg)
        if isinstance(arg, Const):
            return Const(evaluate(Exp(arg), 0j))
        return Exp(arg)
    if isinstance(f, Compose):
        outer, inner = simplify(f.outer), simplify(f.inner)
        if isinstance(outer, Const):
            return outer
        if isinstance(inner, Const):
            return Const(evaluate(outer, inner.value))
        return Compose(outer, inner)
    return f


def is_nonconstant(f: AnalyticFn) -> bool:
    """
    Decide whether f is not identically constant.

    The tree is simplified first; a constant result is constant. Otherwise
    f' is evaluated at the 16 points 0.5*e^{i*pi*k/8}: any nonzero value
    means nonconstant, all zero gives the constant verdict.
    """
    simplified = simplify(f)
    if isinstance(simplified, Const):
        return False
    try:
        values = evaluate(deriv(simplified), CONSTANCY_POINTS)
    except EvaluationOverflowError:
        return True
    return bool(np.any(np.abs(values) > NONCONSTANT_EPS))


# ============================================================================
# CIRCLES
# ============================================================================

@dataclass(frozen=True)
class CircleSpec:
    """The circle {|z - center| = radius} and its open disk."""

    center: complex
    radius: float

    def __post_init__(self):
        object.__setattr__(self, "center", _check_finite(complex(self.center), "circle center"))
        if not (math.isfinite(self.radius) and self.radius > 0):
            raise ContractError(f"circle radius must be positive and finite, got {self.radius!r}")
        object.__setattr__(self, "radius", float(self.radius))

    def point(self, theta):
        """a + r*e^{i*theta}, for a scalar or an array of angles."""
        return self.center + self.radius * np.exp(1j * np.asarray(theta, dtype=float))

    def contains(self, z: complex) -> bool:
        """True if z lies strictly inside the disk."""
        return abs(complex(z) - self.center) < self.radius


class CircleMinimum(NamedTuple):
    m: float
    argmin_angle: float
    tolerance: float


def min_on_circle(f: AnalyticFn, circle: CircleSpec, v: complex, K: int) -> CircleMinimum:
    """
    Minimum of |f(z) - v| over the circle.

    K uniformly spaced points are sampled, then one golden-section pass
    refines the best sample on its two neighbouring arc segments. The
    returned m is an upper estimate of the true minimum; the true minimum
    is at least m - tolerance, where tolerance = r * max|f'| * pi / K with
    max|f'| taken over the samples.

    Args:
        f: Function to minimize over the circle
        circle: Circle {|z - a| = r}
        v: Target value
        K: Number of circle samples (at least 64)

    Returns:
        CircleMinimum(m, argmin_angle in [0, 2*pi), tolerance)
    """
    if K < 64:
        raise ContractError(f"min_on_circle needs K >= 64, got {K}")
    v = complex(v)
    step = 2.0 * math.pi / K
    thetas = step * np.arange(K)
    distances = np.abs(evaluate(f, circle.point(thetas)) - v)
    best = int(np.argmin(distances))

    def objective(theta: float) -> float:
        return abs(evaluate(f, circle.point(theta)) - v)

    lo, hi = thetas[best] - step, thetas[best] + step
    x1 = hi - _GOLDEN * (hi - lo)
    x2 = lo + _GOLDEN * (hi - lo)
    g1, g2 = objective(x1), objective(x2)
    while hi - lo > 1e-12:
        if g1 <= g2:
            hi, x2, g2 = x2, x1, g1
            x1 = hi - _GOLDEN * (hi - lo)
            g1 = objective(x1)
        else:
            lo, x1, g1 = x1, x2, g2
            x2 = lo + _GOLDEN * (hi - lo)
            g2 = objective(x2)
    theta_ref, m_ref = (x1, g1) if g1 <= g2 else (x2, g2)

    if m_ref < distances[best]:
        m, argmin = m_ref, theta_ref
    else:
        m, argmin = float(distances[best]), float(thetas[best])

    lipschitz = circle.radius * float(np.max(np.abs(evaluate(deriv(f), circle.point(thetas)))))
    tolerance = lipschitz * step / 2.0
    return CircleMinimum(m=float(m), argmin_angle=float(argmin % (2.0 * math.pi)), tolerance=tolerance)


# ============================================================================
# PARSING AND PRINTING
# ============================================================================

_REAL = r"(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?"
_LITERAL_RE = re.compile(
    rf"(?P<re>-?{_REAL})(?:(?P<im>[+-]{_REAL})i|(?P<pure>i))?(?![A-Za-z0-9_.])"
)
_COMPLEX_RE = re.compile(rf"(?P<re>[+-]?{_REAL})(?:(?P<im>[+-]{_REAL})i)?")
_INT_RE = re.compile(r"\d+")


def parse_complex(text: str) -> complex:
    """
    Parse a complex literal: `<real>` or `<real>+<real>i` / `<real>-<real>i`,
    without spaces (e.g. "0", "-1.5", "2+3i", "0-0.5i").
    """
    match = _COMPLEX_RE.fullmatch(text.strip()) if isinstance(text, str) else None
    if match is None:
        raise ExpressionSyntaxError(f"Malformed complex literal {text!r}")
    real = float(match.group("re"))
    imag = float(match.group("im")) if match.group("im") else 0.0
    return _check_finite(complex(real, imag), "complex literal")


def format_complex(value: complex) -> str:
    """Shortest round-tripping text of a complex value, e.g. '2.0-3.0i'."""
    value = complex(value)
    sign = "-" if math.copysign(1.0, value.imag) < 0 else "+"
    return f"{value.real!r}{sign}{abs(value.imag)!r}i"


def _format_const(value: complex) -> str:
    if value.imag == 0 and math.copysign(1.0, value.imag) > 0:
        text = repr(value.real)
        return f"({text})" if math.copysign(1.0, value.real) < 0 else text
    return f"({format_complex(value)})"


def _wrap(node: AnalyticFn, text: str, min_precedence: int) -> str:
    return f"({text})" if node.precedence < min_precedence else text


def expand_compositions(f: AnalyticFn) -> AnalyticFn:
    """Equivalent tree without Compose nodes (z substituted textually)."""
    if isinstance(f, Compose):
        return substitute(expand_compositions(f.outer), expand_compositions(f.inner))
    if isinstance(f, Sum):
        return Sum(expand_compositions(f.left), expand_compositions(f.right))
    if isinstance(f, Product):
        return Product(expand_compositions(f.left), expand_compositions(f.right))
    if isinstance(f, Power):
        return Power(expand_compositions(f.base), f.exponent)
    if isinstance(f, Exp):
        return Exp(expand_compositions(f.arg))
    return f


def _format(f: AnalyticFn) -> str:
    if isinstance(f, Const):
        return _format_const(f.value)
    if isinstance(f, Var):
        return "z"
    if isinstance(f, Sum):
        return f"{_wrap(f.left, _format(f.left), 1)} + {_wrap(f.right, _format(f.right), 2)}"
    if isinstance(f, Product):
        return f"{_wrap(f.left, _format(f.left), 2)} * {_wrap(f.right, _format(f.right), 3)}"
    if isinstance(f, Power):
        return f"{_wrap(f.base, _format(f.base), 4)}^{f.exponent}"
    if isinstance(f, Exp):
        return f"exp({_format(f.arg)})"
    raise TypeError(f"Unknown expression node {type(f).__name__}")


def format_expression(f: AnalyticFn) -> str:
    """
    Canonical printed form; parse_expression reads it back exactly.
    Compositions print as their substituted expansion.
    """
    return _format(expand_compositions(f))


class _Parser:
    """Recursive-descent parser for the expression grammar."""

    def __init__(self, text: str):
        self.text = text
        self.pos = 0

    def error(self, message: str) -> ExpressionSyntaxError:
        return ExpressionSyntaxError(message, self.text, self.pos)

    def skip(self) -> None:
        while self.pos < len(self.text) and self.text[self.pos].isspace():
            self.pos += 1

    def peek(self) -> str:
        self.skip()
        return self.text[self.pos] if self.pos < len(self.text) else ""

    def expect(self, token: str) -> None:
        self.skip()
        if not self.text.startswith(token, self.pos):
            raise self.error(f"Expected {token!r}")
        self.pos += len(token)

    def parse(self) -> AnalyticFn:
        node = self.expression()
        if self.peek():
            raise self.error(f"Unexpected {self.peek()!r}")
        return node

    def expression(self) -> AnalyticFn:
        node = self.term()
        while self.peek() in ("+", "-"):
            op = self.text[self.pos]
            self.pos += 1
            right = self.term()
            node = Sum(node, right if op == "+" else negate(right))
        return node

    def term(self) -> AnalyticFn:
        node = self.unary()
        while self.peek() == "*":
            self.pos += 1
            node = Product(node, self.unary())
        return node

    def unary(self) -> AnalyticFn:
        if self.peek() == "-" and not self._literal_ahead():
            self.pos += 1
            return negate(self.unary())
        return self.power()

    def power(self) -> AnalyticFn:
        signed = self.peek() == "-"
        node = self.primary()
        if self.peek() == "^":
            self.pos += 1
            self.skip()
            match = _INT_RE.match(self.text, self.pos)
            if match is None:
                raise self.error("Expected a nonnegative integer exponent")
            self.pos = match.end()
            exponent = int(match.group())
            # -2^2 is -(2^2): the sign of a literal binds looser than ^
            node = negate(Power(negate(node), exponent)) if signed else Power(node, exponent)
        return node

    def _literal_ahead(self) -> bool:
        return _LITERAL_RE.match(self.text, self.pos) is not None

    def primary(self) -> AnalyticFn:
        char = self.peek()
        if char == "(":
            self.pos += 1
            node = self.expression()
            self.expect(")")
            return node
        if self.text.startswith("exp", self.pos):
            self.pos += 3
            self.expect("(")
            node = self.expression()
            self.expect(")")
            return Exp(node)
        if char == "z":
            self.pos += 1
            return Z
        match = _LITERAL_RE.match(self.text, self.pos)
        if match is None:
            raise self.error("Expected a literal, 'z', 'exp(' or '('")
        self.pos = match.end()
        real = float(match.group("re"))
        if match.group("pure"):
            return Const(complex(0.0, real))
        imag = float(match.group("im")) if match.group("im") else 0.0
        return Const(complex(real, imag))


def parse_expression(text: str) -> AnalyticFn:
    """
    Parse an analytic function from text.

    Grammar: literals (`1.5`, `-2`, `2+3i`, `0.5i`; a complex literal is one
    token without spaces), `z`, `+`, `-`, `*`, `^n` with n a nonnegative
    integer, `exp(...)` and parentheses.

    Unary minus binds looser than `^`, for signed literals too: `-2^2` is
    -4 and `-z^2` is -(z^2). Write `(-2)^2` for the square of -2.

    Raises:
        ExpressionSyntaxError: If the text does not match the grammar
    """
    if not isinstance(text, str) or not text.strip():
        raise ExpressionSyntaxError("Empty expression")
    try:
        return _Parser(text).parse()
    except ContractError as e:
        if isinstance(e, ExpressionSyntaxError):
            raise
        raise ExpressionSyntaxError(str(e), text) from e
