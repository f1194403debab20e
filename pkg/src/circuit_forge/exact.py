"""Exact rational helpers so that no size or norm comparison touches floats."""

from __future__ import annotations

from fractions import Fraction
from math import floor


def parse_alpha(text) -> Fraction:
    """Parse ``"3/2"``, ``"1.5"`` or an int into a Fraction >= 1."""
    alpha = Fraction(str(text)) if not isinstance(text, Fraction) else text
    if alpha < 1:
        raise ValueError(f"alpha must be at least 1, got {alpha}")
    return alpha


def floor_times(alpha: Fraction, r: int) -> int:
    """floor(alpha * r), i.e. the largest size allowed by |C| <= alpha r."""
    return floor(Fraction(alpha) * r)


def within_power(count: int, base, exponent) -> bool:
    """True iff count <= base ** exponent, decided in integers.

    ``base`` and ``exponent`` may be Fractions; base must be positive.
    """
    base = Fraction(base)
    exponent = Fraction(exponent)
    if base <= 0:
        raise ValueError("base must be positive")
    if count <= 0:
        return True
    p, q = exponent.numerator, exponent.denominator
    if p < 0:
        raise ValueError("exponent must be nonnegative")
    # count^q <= (a/b)^p  <=>  count^q * b^p <= a^p
    return count**q * base.denominator**p <= base.numerator**p


def power_value(base, exponent):
    """base ** exponent as an int when exact, otherwise a float."""
    base = Fraction(base)
    exponent = Fraction(exponent)
    if exponent.denominator == 1:
        v = base ** exponent.numerator
        return v.numerator if v.denominator == 1 else float(v)
    return float(base) ** float(exponent)
