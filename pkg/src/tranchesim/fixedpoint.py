"""18-decimal fixed point on plain Python ints.

Amounts, rates and fractions are all stored as an integer count of 10**-18
units. Division always floors, like EVM integer math.
"""
from __future__ import annotations

from decimal import Decimal, InvalidOperation, localcontext
from fractions import Fraction

DECIMALS = 18
WAD = 10**DECIMALS


def to_units(value: int | str | Decimal) -> int:
    """Parse a decimal value into fixed-point units, exactly.

    Strings and Decimals with more than 18 fractional digits are rejected
    rather than rounded. Floats are rejected outright.
    """
    if isinstance(value, bool) or isinstance(value, float):
        raise TypeError(f"amounts must be decimal strings or ints, got {value!r}")
    if isinstance(value, int):
        return value * WAD
    try:
        d = Decimal(value) if isinstance(value, str) else value
    except InvalidOperation:
        raise ValueError(f"not a decimal number: {value!r}") from None
    if not d.is_finite():
        raise ValueError(f"not a finite number: {value!r}")
    with localcontext() as ctx:
        ctx.prec = 100
        scaled = d.scaleb(DECIMALS)
    if scaled != scaled.to_integral_value():
        raise ValueError(f"{value!r} has more than {DECIMALS} fractional digits")
    return int(scaled)


def to_decimal(units: int) -> Decimal:
    with localcontext() as ctx:
        ctx.prec = 100
        return Decimal(units).scaleb(-DECIMALS)


def fmt(units: int) -> str:
    """Canonical decimal string: no exponent, no trailing zeros."""
    sign = "-" if units < 0 else ""
    whole, frac = divmod(abs(units), WAD)
    if not frac:
        return f"{sign}{whole}"
    return f"{sign}{whole}.{frac:018d}".rstrip("0")


def to_fraction(units: int) -> Fraction:
    return Fraction(units, WAD)


def wmul(a: int, b: int) -> int:
    return a * b // WAD


def wdiv(a: int, b: int) -> int:
    return a * WAD // b


def units(value: int | str | Decimal) -> int:
    """Shorthand alias used in scripts and tests: ``units("52.5")``."""
    return to_units(value)
