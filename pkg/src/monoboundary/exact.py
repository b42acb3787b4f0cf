"""Signed square roots of rationals, closed under the arithmetic that sphere
operators actually need.

A value is sign * sqrt(sq) with sq a non-negative Fraction; the pair is a
canonical form (the square determines the magnitude).  Products always stay
in the class; sums stay in it when the two radicands have a rational square
ratio, which covers every composition and defect built here.  Anything else
raises ExactnessLost so a caller can drop to floats deliberately.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction


class ExactnessLost(ArithmeticError):
    """A sum of radicals left the representable class."""


def fraction_sqrt(q: Fraction) -> Fraction | None:
    """Exact square root of a non-negative rational, or None."""
    if q < 0:
        return None
    if q == 0:
        return Fraction(0)
    rn = math.isqrt(q.numerator)
    rd = math.isqrt(q.denominator)
    if rn * rn == q.numerator and rd * rd == q.denominator:
        return Fraction(rn, rd)
    return None


def fraction_sqrt_upper(q: Fraction, bits: int = 48) -> Fraction:
    """A rational upper bound for sqrt(q), exact when q is a perfect square."""
    exact = fraction_sqrt(q)
    if exact is not None:
        return exact
    scale = 1 << bits
    approx = math.isqrt(q.numerator * scale * scale // q.denominator) + 1
    return Fraction(approx, scale)


@dataclass(frozen=True)
class Rad:
    """sign * sqrt(sq), with sq >= 0 and sq == 0 iff sign == 0."""

    sign: int
    sq: Fraction

    @classmethod
    def zero(cls) -> "Rad":
        return cls(0, Fraction(0))

    @classmethod
    def from_rational(cls, q: Fraction | int) -> "Rad":
        q = Fraction(q)
        if q == 0:
            return cls.zero()
        return cls(1 if q > 0 else -1, q * q)

    @classmethod
    def sqrt(cls, q: Fraction | int) -> "Rad":
        q = Fraction(q)
        if q < 0:
            raise ValueError("radicand must be non-negative")
        if q == 0:
            return cls.zero()
        return cls(1, q)

    @property
    def is_zero(self) -> bool:
        return self.sign == 0

    def __mul__(self, other: "Rad") -> "Rad":
        s = self.sign * other.sign
        if s == 0:
            return Rad.zero()
        return Rad(s, self.sq * other.sq)

    def __neg__(self) -> "Rad":
        return Rad(-self.sign, self.sq)

    def __add__(self, other: "Rad") -> "Rad":
        if self.is_zero:
            return other
        if other.is_zero:
            return self
        ratio = fraction_sqrt(self.sq / other.sq)
        if ratio is None:
            raise ExactnessLost(
                f"cannot add sqrt({self.sq}) and sqrt({other.sq}) exactly"
            )
        coeff = self.sign * ratio + other.sign
        if coeff == 0:
            return Rad.zero()
        return Rad(1 if coeff > 0 else -1, coeff * coeff * other.sq)

    def __sub__(self, other: "Rad") -> "Rad":
        return self + (-other)

    def as_rational(self) -> Fraction | None:
        """The exact rational value when sq is a perfect square, else None."""
        root = fraction_sqrt(self.sq)
        if root is None:
            return None
        return self.sign * root

    def __float__(self) -> float:
        return self.sign * math.sqrt(self.sq)

    def __repr__(self) -> str:
        if self.sign == 0:
            return "Rad(0)"
        prefix = "-" if self.sign < 0 else ""
        return f"Rad({prefix}sqrt({self.sq}))"


RAD_ONE = Rad.from_rational(1)
