"""Exact rational numbers and closed rational intervals.

``Rational`` is the stdlib ``fractions.Fraction``: it already maintains the
reduced form with a positive denominator, which is the whole contract.  No
floating point enters any computation in this package.
"""

from __future__ import annotations

from fractions import Fraction

from .errors import FormulaSyntaxError

Rational = Fraction

_MINUS = "−"  # an accepted alias for "-" in text input


def rat_from_text(text: str) -> Rational:
    """Parse "p/q" or "p", with an optional leading minus sign."""
    s = text.strip().replace(_MINUS, "-")
    try:
        return Fraction(s)
    except (ValueError, ZeroDivisionError) as exc:
        raise FormulaSyntaxError(f"bad rational literal {text!r}: {exc}") from exc


def rat_to_text(value: Rational) -> str:
    if value.denominator == 1:
        return str(value.numerator)
    return f"{value.numerator}/{value.denominator}"


def sign(value: Rational | int) -> int:
    if value > 0:
        return 1
    if value < 0:
        return -1
    return 0


class Interval:
    """Closed interval [lo, hi] with exact rational endpoints."""

    __slots__ = ("lo", "hi")

    def __init__(self, lo, hi=None):
        lo = Fraction(lo)
        hi = lo if hi is None else Fraction(hi)
        if lo > hi:
            raise ValueError(f"interval endpoints out of order: [{lo}, {hi}]")
        self.lo = lo
        self.hi = hi

    def __repr__(self):
        return f"Interval({rat_to_text(self.lo)}, {rat_to_text(self.hi)})"

    def __eq__(self, other):
        return isinstance(other, Interval) and self.lo == other.lo and self.hi == other.hi

    def __hash__(self):
        return hash((self.lo, self.hi))

    @property
    def width(self) -> Rational:
        return self.hi - self.lo

    @property
    def mid(self) -> Rational:
        return (self.lo + self.hi) / 2

    def is_point(self) -> bool:
        return self.lo == self.hi

    def contains(self, value: Rational) -> bool:
        return self.lo <= value <= self.hi

    def contains_interval(self, other: "Interval") -> bool:
        return self.lo <= other.lo and other.hi <= self.hi

    def intersects(self, other: "Interval") -> bool:
        return self.lo <= other.hi and other.lo <= self.hi

    def hull(self, other: "Interval") -> "Interval":
        return Interval(min(self.lo, other.lo), max(self.hi, other.hi))

    # arithmetic (closed-interval enclosure rules)
    def __add__(self, other):
        other = _as_interval(other)
        return Interval(self.lo + other.lo, self.hi + other.hi)

    def __neg__(self):
        return Interval(-self.hi, -self.lo)

    def __sub__(self, other):
        return self + (-_as_interval(other))

    def __mul__(self, other):
        other = _as_interval(other)
        products = (
            self.lo * other.lo,
            self.lo * other.hi,
            self.hi * other.lo,
            self.hi * other.hi,
        )
        return Interval(min(products), max(products))

    def power(self, exponent: int) -> "Interval":
        """Tight enclosure of x**exponent over the interval."""
        if exponent == 0:
            return Interval(1, 1)
        if exponent % 2 == 1 or self.lo >= 0:
            return Interval(self.lo**exponent, self.hi**exponent)
        if self.hi <= 0:
            return Interval(self.hi**exponent, self.lo**exponent)
        return Interval(0, max(self.lo**exponent, self.hi**exponent))

    def sign(self) -> int | None:
        """Definite sign of every point, or None if the interval straddles 0."""
        if self.lo > 0:
            return 1
        if self.hi < 0:
            return -1
        if self.lo == self.hi == 0:
            return 0
        return None

    def to_json(self) -> list[str]:
        return [rat_to_text(self.lo), rat_to_text(self.hi)]

    @staticmethod
    def from_json(data) -> "Interval":
        return Interval(rat_from_text(data[0]), rat_from_text(data[1]))


def _as_interval(value) -> Interval:
    if isinstance(value, Interval):
        return value
    return Interval(Fraction(value))


def box_from_text(text: str, k: int) -> list[Interval]:
    """Parse "lo,hi;lo,hi;..." into a k-dimensional box.

    A single "lo,hi" pair is broadcast to every axis.
    """
    parts = [p for p in text.split(";") if p.strip()]
    if len(parts) == 1 and k > 1:
        parts = parts * k
    if len(parts) != k:
        raise FormulaSyntaxError(f"box has {len(parts)} axes, expected {k}")
    box = []
    for part in parts:
        pieces = part.split(",")
        if len(pieces) != 2:
            raise FormulaSyntaxError(f"bad box axis {part!r}")
        box.append(Interval(rat_from_text(pieces[0]), rat_from_text(pieces[1])))
    return box
