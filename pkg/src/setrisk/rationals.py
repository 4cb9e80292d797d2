"""Exact rational scalars: ``p/q`` string codec and tagged extended values."""

from __future__ import annotations

from fractions import Fraction
from typing import Union

Rational = Union[int, Fraction]


def parse_rational(text: str) -> Fraction:
    """Parse a ``"p/q"`` (or plain ``"p"``) string into a Fraction."""
    if not isinstance(text, str):
        raise TypeError(f"rational must be a string, got {type(text).__name__}")
    try:
        return Fraction(text.strip())
    except (ValueError, ZeroDivisionError) as exc:
        raise ValueError(f"invalid rational literal {text!r}") from exc


def format_rational(value: Rational) -> str:
    """Format a rational as the canonical ``"p/q"`` string (q > 0, reduced)."""
    f = Fraction(value)
    return f"{f.numerator}/{f.denominator}"


class ExtRat:
    """A rational extended with explicit -inf/+inf tags.

    Infinities are tags, never sentinel numerics.  Addition treats -inf as
    absorbing against finite values; -inf + +inf is undefined and raises.
    """

    __slots__ = ("tag", "value")

    def __init__(self, value: Rational = 0, tag: int = 0):
        if tag not in (-1, 0, 1):
            raise ValueError("tag must be -1, 0 or +1")
        self.tag = tag
        self.value = Fraction(value) if tag == 0 else None

    @classmethod
    def finite(cls, value: Rational) -> "ExtRat":
        return cls(value, 0)

    @property
    def is_finite(self) -> bool:
        return self.tag == 0

    @property
    def is_neg_inf(self) -> bool:
        return self.tag == -1

    @property
    def is_pos_inf(self) -> bool:
        return self.tag == 1

    def _key(self):
        return (self.tag, self.value if self.tag == 0 else 0)

    def __eq__(self, other) -> bool:
        other = _coerce(other)
        if other is NotImplemented:
            return NotImplemented
        return self._key() == other._key()

    def __hash__(self):
        return hash(self._key())

    def __lt__(self, other) -> bool:
        other = _coerce(other)
        if other is NotImplemented:
            return NotImplemented
        if self.tag != other.tag:
            return self.tag < other.tag
        if self.tag != 0:
            return False
        return self.value < other.value

    def __le__(self, other) -> bool:
        other = _coerce(other)
        if other is NotImplemented:
            return NotImplemented
        return self == other or self < other

    def __gt__(self, other) -> bool:
        other = _coerce(other)
        if other is NotImplemented:
            return NotImplemented
        return other < self

    def __ge__(self, other) -> bool:
        other = _coerce(other)
        if other is NotImplemented:
            return NotImplemented
        return other <= self

    def __add__(self, other) -> "ExtRat":
        other = _coerce(other)
        if other is NotImplemented:
            return NotImplemented
        if self.tag == 0 and other.tag == 0:
            return ExtRat(self.value + other.value)
        tags = {self.tag, other.tag}
        if tags == {-1, 1}:
            raise ArithmeticError("(-inf) + (+inf) is undefined")
        return NEG_INF if -1 in tags else POS_INF

    __radd__ = __add__

    def __neg__(self) -> "ExtRat":
        if self.tag == 0:
            return ExtRat(-self.value)
        return POS_INF if self.tag == -1 else NEG_INF

    def __repr__(self) -> str:
        if self.tag == -1:
            return "ExtRat(-inf)"
        if self.tag == 1:
            return "ExtRat(+inf)"
        return f"ExtRat({self.value})"

    def to_document(self) -> str:
        """String form used in JSON documents: ``p/q``, ``-inf`` or ``+inf``."""
        if self.tag == -1:
            return "-inf"
        if self.tag == 1:
            return "+inf"
        return format_rational(self.value)

    @classmethod
    def from_document(cls, text: str) -> "ExtRat":
        if text == "-inf":
            return NEG_INF
        if text == "+inf":
            return POS_INF
        return cls.finite(parse_rational(text))


def _coerce(x) -> ExtRat:
    if isinstance(x, ExtRat):
        return x
    if isinstance(x, (int, Fraction)):
        return ExtRat(x)
    return NotImplemented


NEG_INF = ExtRat(tag=-1)
POS_INF = ExtRat(tag=1)
