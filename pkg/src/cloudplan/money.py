"""Exact currency arithmetic in integer micro-dollars.

Every cost in the planner is an integer count of micro-dollars so that plan
comparisons are exact and reproducible. Prices are kept as rationals and a
product is rounded to whole micro-dollars exactly once, at the point where a
currency value is produced.
"""

from __future__ import annotations

from decimal import Decimal, InvalidOperation
from fractions import Fraction

MICROS_PER_DOLLAR = 10**6


def micros_from_dollars(value) -> int:
    """Parse a dollar amount (decimal string or number) into micro-dollars.

    Rejects amounts finer than one micro-dollar rather than rounding them,
    so that input files cannot silently lose precision.
    """
    try:
        quantity = Decimal(str(value))
    except InvalidOperation as exc:
        raise ValueError(f"bad currency value: {value!r}") from exc
    scaled = quantity * MICROS_PER_DOLLAR
    micros = int(scaled)
    if scaled != micros:
        raise ValueError(f"sub-micro-dollar precision: {value!r}")
    return micros


def dollars_str(micros: int) -> str:
    """Format micro-dollars as a decimal dollar string with 6 fraction digits."""
    sign = "-" if micros < 0 else ""
    whole, frac = divmod(abs(micros), MICROS_PER_DOLLAR)
    return f"{sign}{whole}.{frac:06d}"


def round_micros(value: Fraction) -> int:
    """Round an exact micro-dollar quantity to an integer (ties to even)."""
    return round(value)


def rational(value) -> Fraction:
    """Parse a number, decimal string, or "p/q" string into an exact Fraction.

    Floats are interpreted through their shortest decimal repr, i.e. as the
    literal that appeared in a JSON document, not as their binary expansion.
    """
    if isinstance(value, Fraction):
        return value
    if isinstance(value, float):
        value = str(value)
    try:
        return Fraction(value)
    except (ValueError, ZeroDivisionError, TypeError) as exc:
        raise ValueError(f"bad numeric value: {value!r}") from exc


def fraction_str(value: Fraction) -> str:
    """Render a Fraction as a decimal string when exact, else as "p/q"."""
    num, den = value.numerator, value.denominator
    twos = fives = 0
    d = den
    while d % 2 == 0:
        d //= 2
        twos += 1
    while d % 5 == 0:
        d //= 5
        fives += 1
    if d != 1:
        return f"{num}/{den}"
    digits = max(twos, fives)
    scaled = num * 10**digits // den
    if digits == 0:
        return str(scaled)
    sign = "-" if scaled < 0 else ""
    whole, frac = divmod(abs(scaled), 10**digits)
    return f"{sign}{whole}.{frac:0{digits}d}"
