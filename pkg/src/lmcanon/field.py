"""Exact scalar fields: the rationals and prime fields F_p.

Matrices store raw Python values (``Fraction`` for Q, ``int`` residues for
F_p) and call the field object for arithmetic.  ``FieldElement`` wraps a
value together with its field for the public, operator-based API.
"""
from __future__ import annotations

import enum
import functools
import numbers
import re
from fractions import Fraction
from typing import Iterable, Sequence

from .errors import DivisionByZero, FieldMismatch, ParseError

_RATIONAL_RE = re.compile(r"^-?\d+(/\d+)?$")
_RESIDUE_RE = re.compile(r"^\d+$")


def is_prime(n: int) -> bool:
    """Deterministic Miller-Rabin, exact for every n below 3.3e24."""
    if n < 2:
        return False
    small = (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41)
    for p in small:
        if n % p == 0:
            return n == p
    d, s = n - 1, 0
    while d % 2 == 0:
        d //= 2
        s += 1
    for a in small:
        x = pow(a, d, n)
        if x in (1, n - 1):
            continue
        for _ in range(s - 1):
            x = x * x % n
            if x == n - 1:
                break
        else:
            return False
    return True


class Ordering(enum.IntEnum):
    LESS = -1
    EQUAL = 0
    GREATER = 1


class Field:
    """Common interface of the exact fields."""

    name: str
    characteristic: int
    zero: object
    one: object

    def __repr__(self) -> str:
        return f"<field {self.name}>"

    def __str__(self) -> str:
        return self.name

    # elementwise arithmetic
    def add(self, a, b):
        raise NotImplementedError

    def sub(self, a, b):
        raise NotImplementedError

    def mul(self, a, b):
        raise NotImplementedError

    def neg(self, a):
        raise NotImplementedError

    def inv(self, a):
        raise NotImplementedError

    def div(self, a, b):
        return self.mul(a, self.inv(b))

    def is_zero(self, a) -> bool:
        return a == 0

    def coerce(self, x):
        raise NotImplementedError

    def parse(self, text: str):
        raise NotImplementedError

    def render(self, a) -> str:
        return str(a)

    def sort_key(self, a):
        """Key realising the fixed total order on the field."""
        raise NotImplementedError

    def random(self, rng, bound: int = 3):
        raise NotImplementedError

    # vector helpers used by the elimination loops
    def dot(self, xs: Sequence, ys: Sequence):
        raise NotImplementedError

    def axpy(self, xs: Sequence, f, ys: Sequence) -> list:
        """Return xs - f * ys."""
        raise NotImplementedError

    def scale(self, f, xs: Sequence) -> list:
        raise NotImplementedError

    def element(self, x) -> "FieldElement":
        return FieldElement(self, self.coerce(x))


class RationalField(Field):
    name = "Q"
    characteristic = 0
    zero = Fraction(0)
    one = Fraction(1)
    is_finite = False

    def __eq__(self, other):
        return isinstance(other, RationalField)

    def __hash__(self):
        return hash("Q")

    def __reduce__(self):
        return (get_field, ("Q",))

    def add(self, a, b):
        return a + b

    def sub(self, a, b):
        return a - b

    def mul(self, a, b):
        return a * b

    def neg(self, a):
        return -a

    def inv(self, a):
        if a == 0:
            raise DivisionByZero("division by zero in Q")
        return 1 / a

    def div(self, a, b):
        if b == 0:
            raise DivisionByZero("division by zero in Q")
        return a / b

    def coerce(self, x):
        if isinstance(x, Fraction):
            return x
        if isinstance(x, bool):
            return Fraction(int(x))
        if isinstance(x, int):
            return Fraction(x)
        if isinstance(x, str):
            return self.parse(x)
        if isinstance(x, FieldElement):
            if x.field != self:
                raise FieldMismatch(f"{x.field} element used in Q")
            return x.value
        if isinstance(x, numbers.Rational):
            return Fraction(int(x.numerator), int(x.denominator))
        raise TypeError(f"cannot interpret {x!r} as an exact rational")

    def parse(self, text: str):
        text = text.strip()
        if not _RATIONAL_RE.match(text):
            raise ParseError(f"not a rational literal: {text!r}")
        try:
            return Fraction(text)
        except ZeroDivisionError:
            raise ParseError(f"zero denominator in {text!r}") from None

    def render(self, a) -> str:
        return str(a)

    def sort_key(self, a):
        return a

    def random(self, rng, bound: int = 3):
        return Fraction(rng.randint(-bound, bound))

    def dot(self, xs, ys):
        total = 0
        for x, y in zip(xs, ys):
            if x and y:
                total += x * y
        return Fraction(total)

    def axpy(self, xs, f, ys):
        if not f:
            return list(xs)
        return [x - f * y if y else x for x, y in zip(xs, ys)]

    def scale(self, f, xs):
        return [f * x for x in xs]


class PrimeField(Field):
    """The field of residues modulo a prime ``p``, ordered 0 < 1 < ... < p-1."""

    characteristic: int
    is_finite = True

    def __init__(self, p: int):
        if not isinstance(p, int) or not is_prime(p):
            raise ValueError(f"modulus {p!r} is not prime")
        self.p = p
        self.characteristic = p
        self.name = f"F{p}"
        self.zero = 0
        self.one = 1

    def __eq__(self, other):
        return isinstance(other, PrimeField) and other.p == self.p

    def __hash__(self):
        return hash(("F", self.p))

    def __reduce__(self):
        return (get_field, (self.name,))

    def add(self, a, b):
        return (a + b) % self.p

    def sub(self, a, b):
        return (a - b) % self.p

    def mul(self, a, b):
        return a * b % self.p

    def neg(self, a):
        return -a % self.p

    def inv(self, a):
        if a % self.p == 0:
            raise DivisionByZero(f"division by zero in {self.name}")
        return pow(a, -1, self.p)

    def coerce(self, x):
        if isinstance(x, bool):
            return int(x)
        if isinstance(x, int):
            return x % self.p
        if isinstance(x, Fraction):
            if x.denominator % self.p == 0:
                raise DivisionByZero(f"{x} has no image in {self.name}")
            return x.numerator * pow(x.denominator, -1, self.p) % self.p
        if isinstance(x, str):
            return self.parse(x)
        if isinstance(x, FieldElement):
            if x.field != self:
                raise FieldMismatch(f"{x.field} element used in {self.name}")
            return x.value
        if isinstance(x, numbers.Rational):
            return self.coerce(Fraction(int(x.numerator), int(x.denominator)))
        raise TypeError(f"cannot interpret {x!r} as an element of {self.name}")

    def parse(self, text: str):
        text = text.strip()
        if not _RESIDUE_RE.match(text):
            raise ParseError(f"not a residue literal: {text!r}")
        value = int(text)
        if value >= self.p:
            raise ParseError(f"residue {value} out of range for {self.name}")
        return value

    def sort_key(self, a):
        return a

    def random(self, rng, bound: int = 3):
        return rng.randrange(self.p)

    def elements(self) -> range:
        return range(self.p)

    def dot(self, xs, ys):
        return sum(x * y for x, y in zip(xs, ys)) % self.p

    def axpy(self, xs, f, ys):
        if not f:
            return list(xs)
        p = self.p
        return [(x - f * y) % p for x, y in zip(xs, ys)]

    def scale(self, f, xs):
        p = self.p
        return [f * x % p for x in xs]


QQ = RationalField()


@functools.lru_cache(maxsize=None)
def _prime_field(p: int) -> PrimeField:
    return PrimeField(p)


def get_field(spec) -> Field:
    """Resolve ``"Q"``, ``"F7"``, a prime ``int`` or a ``Field`` to a field."""
    if isinstance(spec, Field):
        return spec
    if isinstance(spec, int):
        return _prime_field(spec)
    if isinstance(spec, str):
        text = spec.strip()
        if text in ("Q", "QQ"):
            return QQ
        if re.fullmatch(r"F\d+", text):
            p = int(text[1:])
            if not is_prime(p):
                raise ParseError(f"{text}: modulus is not prime")
            return _prime_field(p)
    raise ParseError(f"unknown field spec {spec!r}")


@functools.total_ordering
class FieldElement:
    """A scalar tagged with its field, supporting the usual operators."""

    __slots__ = ("field", "value")

    def __init__(self, field: Field, value):
        self.field = field
        self.value = field.coerce(value)

    def _other(self, other) -> object:
        if isinstance(other, FieldElement):
            if other.field != self.field:
                raise FieldMismatch(f"{self.field} vs {other.field}")
            return other.value
        return self.field.coerce(other)

    def __add__(self, other):
        return FieldElement(self.field, self.field.add(self.value, self._other(other)))

    def __sub__(self, other):
        return FieldElement(self.field, self.field.sub(self.value, self._other(other)))

    def __mul__(self, other):
        return FieldElement(self.field, self.field.mul(self.value, self._other(other)))

    def __truediv__(self, other):
        return FieldElement(self.field, self.field.div(self.value, self._other(other)))

    __radd__ = __add__
    __rmul__ = __mul__

    def __rsub__(self, other):
        return FieldElement(self.field, self.field.sub(self._other(other), self.value))

    def __rtruediv__(self, other):
        return FieldElement(self.field, self.field.div(self._other(other), self.value))

    def __neg__(self):
        return FieldElement(self.field, self.field.neg(self.value))

    def __eq__(self, other):
        if isinstance(other, FieldElement):
            return self.field == other.field and self.value == other.value
        try:
            return self.value == self.field.coerce(other)
        except (TypeError, ParseError, DivisionByZero):
            return NotImplemented

    def __lt__(self, other):
        return cmp_order(self, other if isinstance(other, FieldElement) else self.field.element(other)) < 0

    def __hash__(self):
        return hash((self.field, self.value))

    def __repr__(self):
        return f"FieldElement({self.field.name}, {self.field.render(self.value)})"

    def __str__(self):
        return self.field.render(self.value)


def arith(a: FieldElement, b: FieldElement, op: str) -> FieldElement:
    """Apply ``op`` (one of ``+ - * /``) to two elements of the same field."""
    if a.field != b.field:
        raise FieldMismatch(f"{a.field} vs {b.field}")
    ops = {"+": a.field.add, "-": a.field.sub, "*": a.field.mul, "/": a.field.div}
    try:
        fn = ops[op]
    except KeyError:
        raise ValueError(f"unknown operator {op!r}") from None
    return FieldElement(a.field, fn(a.value, b.value))


def cmp_order(a: FieldElement, b: FieldElement) -> Ordering:
    if a.field != b.field:
        raise FieldMismatch(f"{a.field} vs {b.field}")
    ka, kb = a.field.sort_key(a.value), a.field.sort_key(b.value)
    if ka < kb:
        return Ordering.LESS
    if ka > kb:
        return Ordering.GREATER
    return Ordering.EQUAL


def coerce_all(field: Field, values: Iterable) -> list:
    return [field.coerce(v) for v in values]
