"""Text encoding of exact rationals as ``"num/den"`` strings."""
from __future__ import annotations

from fractions import Fraction

from .errors import InputError


def fmt_q(q) -> str:
    q = Fraction(q)
    return f"{q.numerator}/{q.denominator}"


def parse_q(text) -> Fraction:
    """Parse ``"num/den"`` (or a bare integer) into a :class:`Fraction`.

    Floats are rejected so that exact data never silently loses precision.
    """
    if isinstance(text, bool):
        raise InputError(f"not a rational: {text!r}")
    if isinstance(text, int):
        return Fraction(text)
    if not isinstance(text, str):
        raise InputError(f"rationals are encoded as 'num/den' strings, got {text!r}")
    try:
        q = Fraction(text.strip())
    except (ValueError, ZeroDivisionError):
        raise InputError(f"not a rational: {text!r}") from None
    if "." in text or "e" in text.lower():
        raise InputError(f"rationals must be written as 'num/den', got {text!r}")
    return q
