"""Small helpers shared by the file formats and the tie-breaking rules."""

from __future__ import annotations

import re
from fractions import Fraction
from numbers import Real

_DIGITS = re.compile(r"(\d+)")


def natural_key(ident: str) -> tuple:
    """Sort key that orders ``n2`` before ``n10``."""
    parts = _DIGITS.split(str(ident))
    return tuple((0, int(p)) if p.isdigit() else (1, p) for p in parts if p != "")


def parse_number(value, *, field: str = "value") -> Real:
    """Accept an int, a float or a rational string such as ``"2/3"``."""
    if isinstance(value, bool):
        raise ValueError(f"{field}: boolean is not a number")
    if isinstance(value, (int, float, Fraction)):
        return value
    if isinstance(value, str):
        try:
            frac = Fraction(value.strip())
        except (ValueError, ZeroDivisionError) as exc:
            raise ValueError(f"{field}: cannot parse {value!r} as a number") from exc
        return int(frac) if frac.denominator == 1 else frac
    raise ValueError(f"{field}: expected a number, got {type(value).__name__}")


def dump_number(value):
    """JSON-safe form of a number; non-integral rationals become ``"p/q"``."""
    if isinstance(value, Fraction):
        if value.denominator == 1:
            return int(value.numerator)
        return f"{value.numerator}/{value.denominator}"
    if isinstance(value, float) and value.is_integer() and abs(value) < 2**53:
        return int(value)
    return value


def exact(value) -> Fraction:
    """Exact rational view of an int, float or Fraction."""
    return value if isinstance(value, Fraction) else Fraction(value)


def div(a, b):
    """Division that stays rational when both operands are rational."""
    if isinstance(a, (int, Fraction)) and isinstance(b, (int, Fraction)):
        q = Fraction(a) / Fraction(b)
        return q
    return a / b


def mean(values):
    values = list(values)
    if not values:
        raise ValueError("mean of empty sequence")
    total = sum(values[1:], values[0])
    return div(total, len(values))
