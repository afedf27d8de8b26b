"""
Scalar helpers shared by the exact and floating code paths.

Graph-native quantities are ``Fraction`` when every input is rational and
binary64 ``float`` otherwise; mixing the two promotes to ``float``.

:copyright: (c) 2026 by the inflap developers.
:license: MPL-2.0, see LICENSE for more details.
"""

import math
from fractions import Fraction
from typing import Iterable

from inflap.const import FLOAT_TOL

Scalar = Fraction | float


def parse_scalar(value: object) -> Scalar:
    """Parse an int, float, Fraction or string ("3", "0.4", "1/3") into a Scalar."""
    if isinstance(value, bool):
        raise ValueError(f"not a number: {value!r}")
    if isinstance(value, Fraction):
        return value
    if isinstance(value, int):
        return Fraction(value)
    if isinstance(value, float):
        if not math.isfinite(value):
            raise ValueError(f"not a finite number: {value!r}")
        return value
    if isinstance(value, str):
        text = value.strip()
        try:
            return Fraction(text)
        except (ValueError, ZeroDivisionError):
            pass
        try:
            number = float(text)
        except ValueError:
            raise ValueError(f"not a number: {value!r}") from None
        if not math.isfinite(number):
            raise ValueError(f"not a finite number: {value!r}")
        return number
    raise ValueError(f"not a number: {value!r}")


def format_scalar(value: Scalar) -> str | float:
    """JSON form: rationals as "p/q" strings, floats as numbers."""
    if isinstance(value, Fraction):
        return str(value)
    if isinstance(value, int):
        return str(value)
    return float(value)


def is_exact(*values: object) -> bool:
    return all(isinstance(v, (Fraction, int)) for v in values)


def tolerance(*values: object, tol: float = FLOAT_TOL) -> float:
    """Comparison slack: 0 for exact operands, relative ``tol`` otherwise."""
    if is_exact(*values):
        return 0
    scale = max([1.0] + [abs(float(v)) for v in values])
    return tol * scale


def close(a: Scalar, b: Scalar, tol: float = FLOAT_TOL) -> bool:
    if is_exact(a, b):
        return a == b
    return abs(a - b) <= tolerance(a, b, tol=tol)


def leq(a: Scalar, b: Scalar, tol: float = FLOAT_TOL) -> bool:
    if is_exact(a, b):
        return a <= b
    return a <= b + tolerance(a, b, tol=tol)


def zero_like(*values: object) -> Scalar:
    return Fraction(0) if is_exact(*values) else 0.0


def dedupe_sorted(values: Iterable[Scalar], tol: float = FLOAT_TOL) -> list[Scalar]:
    """Sort and drop values equal (or float-close) to their predecessor."""
    out: list[Scalar] = []
    for value in sorted(values):
        if out and close(out[-1], value, tol):
            # keep an exact representative when one is available
            if is_exact(value) and not is_exact(out[-1]):
                out[-1] = value
            continue
        out.append(value)
    return out
