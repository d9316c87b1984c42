"""
Exact Coefficient Arithmetic
============================
Scalars used throughout the package are either exact rationals (elements of
sympy's ``QQ``) or rational functions over ``QQ`` (elements of a sympy
``FracField`` with graded lexicographic order). Both are immutable and
canonically reduced, so ``==`` is structural equality.

This module adds what the rest of the package needs on top of them:
conversion, division with explicit errors, evaluation at rational points,
canonical text serialization, Laurent polynomials in ``z`` and the
subtraction-free certificate.
"""

import numbers
import random
from enum import Enum
from fractions import Fraction
from functools import lru_cache
from typing import Dict, Iterable, Iterator, Mapping, Optional, Sequence, Tuple, Union

from sympy import QQ
from sympy.polys.fields import FracElement, FracField, field
from sympy.polys.orderings import grlex
from sympy.polys.rings import PolyElement

from tnnflag.config import settings
from tnnflag.errors import FieldZeroDivisionError, InvalidInputError, OutsideDomainError

Rational = type(QQ(0))
Scalar = Union[Rational, FracElement]

SAMPLE_VALUES = (QQ(1, 3), QQ(1, 2), QQ(1), QQ(2), QQ(3), QQ(5), QQ(7))


# ===========================================
# SCALARS
# ===========================================

def rational(value) -> Rational:
    """Convert an int, Fraction, QQ element or "p/q" string into a QQ element."""
    if isinstance(value, Rational):
        return value
    if isinstance(value, bool):
        raise InvalidInputError(f"not a rational number: {value!r}")
    if isinstance(value, numbers.Integral):
        return QQ(int(value))
    if isinstance(value, Fraction):
        return QQ(value.numerator, value.denominator)
    if isinstance(value, str):
        try:
            parsed = Fraction(value.strip())
        except (ValueError, ZeroDivisionError) as exc:
            raise InvalidInputError(f"not a rational number: {value!r}") from exc
        return QQ(parsed.numerator, parsed.denominator)
    raise InvalidInputError(f"not a rational number: {value!r}")


def scalar(value) -> Scalar:
    """Coerce plain Python numbers to QQ; pass field elements through."""
    if isinstance(value, FracElement):
        return value
    return rational(value)


def is_zero(a: Scalar) -> bool:
    return a == 0


def is_rational(a: Scalar) -> bool:
    """True for QQ elements and for rational functions that are constants."""
    if isinstance(a, FracElement):
        return a.numer.is_ground and a.denom.is_ground
    return isinstance(a, Rational)


def to_rational(a: Scalar) -> Rational:
    if isinstance(a, FracElement):
        if not is_rational(a):
            raise InvalidInputError(f"not a constant: {format_scalar(a)}")
        return QQ(a.numer.LC) / QQ(a.denom.LC) if a.numer else QQ(0)
    return rational(a)


def inv(a: Scalar) -> Scalar:
    if is_zero(a):
        raise FieldZeroDivisionError("inverse of zero")
    return 1 / scalar(a)


def div(a: Scalar, b: Scalar) -> Scalar:
    if is_zero(b):
        raise FieldZeroDivisionError("division by zero")
    return scalar(a) / scalar(b)


def sign(a: Scalar) -> int:
    """Sign of a constant scalar."""
    value = to_rational(a)
    return (value > 0) - (value < 0)


# ===========================================
# RATIONAL FUNCTION FIELDS
# ===========================================

@lru_cache(maxsize=None)
def _fraction_field(names: Tuple[str, ...]) -> FracField:
    return field(names, QQ, grlex)[0]


class VariableField:
    """
    The field QQ(names) in graded lexicographic order.

    With no names the field degenerates to QQ itself and every conversion
    returns QQ elements.
    """

    def __init__(self, names: Iterable[str]):
        self.names: Tuple[str, ...] = tuple(names)
        if len(set(self.names)) != len(self.names):
            raise InvalidInputError(f"repeated variable names: {self.names}")
        self.field: Optional[FracField] = _fraction_field(self.names) if self.names else None

    def __repr__(self) -> str:
        return f"VariableField({', '.join(self.names)})"

    def __call__(self, value) -> Scalar:
        if self.field is None:
            return scalar(value)
        if isinstance(value, FracElement):
            return value if value.field == self.field else self.field.from_expr(value.as_expr())
        return self.field(rational(value))

    def gen(self, name: str) -> Scalar:
        if name not in self.names:
            raise InvalidInputError(f"unknown variable {name!r}")
        return self.field.gens[self.names.index(name)]

    def gens(self) -> Dict[str, Scalar]:
        return {name: self.gen(name) for name in self.names}


def variables_of(a: Scalar) -> Tuple[str, ...]:
    """Names of the variables that actually occur in a."""
    if not isinstance(a, FracElement):
        return ()
    names = [str(s) for s in a.field.symbols]
    used = set()
    for poly in (a.numer, a.denom):
        for monom in poly.monoms():
            used.update(i for i, e in enumerate(monom) if e)
    return tuple(names[i] for i in sorted(used))


def _eval_poly(poly: PolyElement, values: Sequence[Rational]) -> Rational:
    total = QQ(0)
    for monom, coeff in poly.terms():
        term = QQ(coeff)
        for exponent, value in zip(monom, values):
            if exponent:
                term *= value ** exponent
        total += term
    return total


def evaluate(a: Scalar, point: Mapping[str, object]) -> Rational:
    """
    Exact value of a at a rational point.

    Every variable occurring in a must be bound; a vanishing denominator
    raises FieldZeroDivisionError.
    """
    if not isinstance(a, FracElement):
        return rational(a)
    names = [str(s) for s in a.field.symbols]
    missing = [name for name in variables_of(a) if name not in point]
    if missing:
        raise OutsideDomainError(f"unbound variables: {missing}", {"missing": missing})
    values = [rational(point[name]) if name in point else QQ(0) for name in names]
    denominator = _eval_poly(a.denom, values)
    if denominator == 0:
        raise FieldZeroDivisionError(
            f"denominator {format_scalar(a)} vanishes at the point", {"point": _point_text(point)}
        )
    return _eval_poly(a.numer, values) / denominator


def eval_positive(a: Scalar, point: Mapping[str, object]) -> Rational:
    """Evaluate at a point whose coordinates are all positive rationals."""
    for name in variables_of(a):
        if name in point and rational(point[name]) <= 0:
            raise OutsideDomainError(f"coordinate {name} is not positive", {"point": _point_text(point)})
    return evaluate(a, point)


def substitute(a: Scalar, values: Mapping[str, Scalar]) -> Scalar:
    """Partial substitution inside the field of a; unbound variables stay symbolic."""
    if not isinstance(a, FracElement):
        return a
    K = a.field
    names = [str(s) for s in K.symbols]
    images = [K(values[name]) if name in values else gen for name, gen in zip(names, K.gens)]

    def image(poly: PolyElement) -> Scalar:
        total = K.zero
        for monom, coeff in poly.terms():
            term = K(coeff)
            for exponent, value in zip(monom, images):
                if exponent:
                    term *= value ** exponent
            total += term
        return total

    return div(image(a.numer), image(a.denom))


def _point_text(point: Mapping[str, object]) -> Dict[str, str]:
    return {name: format_scalar(rational(value)) for name, value in sorted(point.items())}


# ===========================================
# CANONICAL TEXT
# ===========================================

def _format_rational(q: Rational) -> str:
    q = QQ(q)
    if q.denominator == 1:
        return str(q.numerator)
    return f"{q.numerator}/{q.denominator}"


def _format_monomial(monom: Sequence[int], names: Sequence[str]) -> str:
    factors = []
    for exponent, name in zip(monom, names):
        if exponent == 1:
            factors.append(name)
        elif exponent > 1:
            factors.append(f"{name}^{exponent}")
    return "*".join(factors)


def format_poly(poly: PolyElement) -> str:
    """Expanded polynomial, terms in descending graded lexicographic order."""
    if not poly:
        return "0"
    names = [str(s) for s in poly.ring.symbols]
    pieces = []
    for monom, coeff in poly.terms(order=grlex):
        coeff = QQ(coeff)
        negative = coeff < 0
        magnitude = -coeff if negative else coeff
        body = _format_monomial(monom, names)
        if not body:
            text = _format_rational(magnitude)
        elif magnitude == 1:
            text = body
        else:
            text = f"{_format_rational(magnitude)}*{body}"
        if not pieces:
            pieces.append(f"-{text}" if negative else text)
        else:
            pieces.append(f" - {text}" if negative else f" + {text}")
    return "".join(pieces)


def scalar_parts(a: Scalar) -> Tuple[str, Optional[str]]:
    """(numerator text, denominator text or None when the denominator is 1)."""
    if isinstance(a, FracElement):
        denominator = None if a.denom == 1 else format_poly(a.denom)
        return format_poly(a.numer), denominator
    q = rational(a)
    return str(q.numerator), (None if q.denominator == 1 else str(q.denominator))


def format_scalar(a: Scalar) -> str:
    """
    Canonical serialization: "p/q" for rationals, the expanded numerator for
    polynomials, "(numerator)/(denominator)" otherwise.
    """
    if not isinstance(a, FracElement):
        return _format_rational(rational(a))
    numerator, denominator = scalar_parts(a)
    if denominator is None:
        return numerator
    return f"({numerator})/({denominator})"


def parse_scalar(text: str, space: VariableField) -> Scalar:
    """Inverse of format_scalar for the variables of space."""
    if space.field is None:
        return rational(text)
    try:
        return space.field.from_expr(_sympify(text))
    except Exception as exc:
        raise InvalidInputError(f"cannot parse {text!r} in {space!r}") from exc


def _sympify(text: str):
    from sympy import sympify

    return sympify(text.replace("^", "**"))


# ===========================================
# LAURENT POLYNOMIALS
# ===========================================

class LaurentPoly:
    """Finite map z-degree -> nonzero scalar coefficient."""

    __slots__ = ("_coeffs",)

    def __init__(self, coeffs: Optional[Mapping[int, object]] = None):
        cleaned = {}
        for degree, value in (coeffs or {}).items():
            value = scalar(value)
            if not is_zero(value):
                cleaned[int(degree)] = value
        self._coeffs: Dict[int, Scalar] = cleaned

    @classmethod
    def monomial(cls, coefficient, degree: int = 0) -> "LaurentPoly":
        return cls({degree: coefficient})

    @classmethod
    def zero(cls) -> "LaurentPoly":
        return cls()

    @classmethod
    def one(cls) -> "LaurentPoly":
        return cls({0: 1})

    @staticmethod
    def lift(value) -> "LaurentPoly":
        return value if isinstance(value, LaurentPoly) else LaurentPoly({0: value})

    def __iter__(self) -> Iterator[Tuple[int, Scalar]]:
        return iter(sorted(self._coeffs.items()))

    def items(self):
        return sorted(self._coeffs.items())

    def coeff(self, degree: int) -> Scalar:
        return self._coeffs.get(degree, QQ(0))

    @property
    def degrees(self) -> list:
        return sorted(self._coeffs)

    @property
    def min_degree(self) -> Optional[int]:
        return min(self._coeffs) if self._coeffs else None

    @property
    def max_degree(self) -> Optional[int]:
        return max(self._coeffs) if self._coeffs else None

    def is_zero(self) -> bool:
        return not self._coeffs

    def is_monomial(self) -> bool:
        return len(self._coeffs) == 1

    def __bool__(self) -> bool:
        return bool(self._coeffs)

    def __eq__(self, other) -> bool:
        if not isinstance(other, LaurentPoly):
            try:
                other = LaurentPoly.lift(other)
            except InvalidInputError:
                return NotImplemented
        return self._coeffs == other._coeffs

    def __hash__(self) -> int:
        return hash(frozenset(self._coeffs.items()))

    def __neg__(self) -> "LaurentPoly":
        return LaurentPoly({d: -c for d, c in self._coeffs.items()})

    def __add__(self, other) -> "LaurentPoly":
        other = LaurentPoly.lift(other)
        merged = dict(self._coeffs)
        for degree, value in other._coeffs.items():
            merged[degree] = merged[degree] + value if degree in merged else value
        return LaurentPoly(merged)

    __radd__ = __add__

    def __sub__(self, other) -> "LaurentPoly":
        return self + (-LaurentPoly.lift(other))

    def __rsub__(self, other) -> "LaurentPoly":
        return LaurentPoly.lift(other) - self

    def __mul__(self, other) -> "LaurentPoly":
        other = LaurentPoly.lift(other)
        product: Dict[int, Scalar] = {}
        for d1, c1 in self._coeffs.items():
            for d2, c2 in other._coeffs.items():
                key = d1 + d2
                product[key] = product[key] + c1 * c2 if key in product else c1 * c2
        return LaurentPoly(product)

    __rmul__ = __mul__

    def map_coefficients(self, fn) -> "LaurentPoly":
        return LaurentPoly({d: fn(c) for d, c in self._coeffs.items()})

    def twist(self, factor) -> "LaurentPoly":
        """Multiply the degree-d coefficient by factor(d)."""
        return LaurentPoly({d: c * factor(d) for d, c in self._coeffs.items()})

    def __repr__(self) -> str:
        return f"LaurentPoly({self.pretty()})"

    def to_json(self) -> Dict[str, str]:
        return {str(d): format_scalar(c) for d, c in self.items()}

    def pretty(self) -> str:
        """Fraction display, e.g. "x4/(x3 z)" or "-x1 + x2/z"."""
        if not self._coeffs:
            return "0"
        return " + ".join(_pretty_term(c, d) for d, c in sorted(self._coeffs.items(), reverse=True)).replace("+ -", "- ")


def _needs_parens(text: str) -> bool:
    return any(ch in text[1:] for ch in "+-") or " " in text


def _pretty_term(c: Scalar, degree: int) -> str:
    numerator, denominator = scalar_parts(c)
    power = "z" if abs(degree) == 1 else f"z^{abs(degree)}"
    if degree > 0:
        if numerator in ("1", "-1"):
            numerator = power if numerator == "1" else f"-{power}"
        else:
            numerator = f"({numerator}) {power}" if _needs_parens(numerator) else f"{numerator} {power}"
    elif degree < 0:
        denominator = power if denominator is None else f"{denominator} {power}"
    if denominator is None:
        return numerator
    if _needs_parens(numerator):
        numerator = f"({numerator})"
    if _needs_parens(denominator) or "*" in denominator:
        denominator = f"({denominator})"
    return f"{numerator}/{denominator}"


# ===========================================
# SUBTRACTION-FREE CERTIFICATES
# ===========================================

class SignCertificate(str, Enum):
    """Outcome of certify_subtraction_free"""
    CERTIFIED = "certified"
    REFUTED = "refuted"
    UNKNOWN = "unknown"


def _all_positive(poly: PolyElement) -> bool:
    return all(QQ(c) > 0 for c in poly.coeffs())


def sample_points(names: Sequence[str], count: int, seed: int) -> list:
    """Seeded points with coordinates in {1/3, 1/2, 1, 2, 3, 5, 7}."""
    rng = random.Random(seed)
    return [{name: rng.choice(SAMPLE_VALUES) for name in names} for _ in range(count)]


def certify_subtraction_free(a: Scalar, seed: Optional[int] = None, samples: Optional[int] = None) -> SignCertificate:
    """
    Sufficient test for membership in the positive subtraction-free semifield.

    CERTIFIED when the reduced numerator and denominator have only positive
    coefficients, REFUTED when a sampled positive point gives a value <= 0,
    UNKNOWN otherwise.
    """
    if is_zero(a):
        raise OutsideDomainError("zero is not a positive subtraction-free expression")
    if not isinstance(a, FracElement):
        return SignCertificate.CERTIFIED if rational(a) > 0 else SignCertificate.REFUTED
    if _all_positive(a.numer) and _all_positive(a.denom):
        return SignCertificate.CERTIFIED

    names = variables_of(a)
    count = samples if samples is not None else settings.sample_points
    for point in sample_points(names, count, settings.seed if seed is None else seed):
        try:
            value = evaluate(a, point)
        except FieldZeroDivisionError:
            continue
        if value <= 0:
            return SignCertificate.REFUTED
    return SignCertificate.UNKNOWN
