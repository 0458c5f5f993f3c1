"""Scalar helpers: parsing, zero tests and JSON rendering.

Two working fields are used throughout: exact rationals (``Fraction``) and
complex floats. Anything else that supports ``+ - * /`` (e.g. sympy
expressions for exact algebraic numbers) passes through the engine untouched.
"""
from __future__ import annotations

from fractions import Fraction
from numbers import Rational

DEFAULT_EPS = 1e-10


def parse_scalar(text):
    """Parse ``"p/q"``, a decimal or an integer exactly; ``"a+bj"`` as complex."""
    if isinstance(text, (int, Fraction)):
        return Fraction(text)
    s = str(text).strip()
    if s.endswith("j"):
        return complex(s.replace(" ", ""))
    try:
        return Fraction(s)
    except ValueError:
        raise ValueError(f"cannot parse scalar {text!r}") from None


def parse_list(text):
    return [parse_scalar(tok) for tok in str(text).split(",") if tok.strip()]


def is_exact(x) -> bool:
    return isinstance(x, Rational)


def is_zero(x, eps: float = DEFAULT_EPS) -> bool:
    if isinstance(x, Rational):
        return x == 0
    if isinstance(x, (float, complex)):
        return abs(x) < eps
    # symbolic values, e.g. sympy expressions in sqrt(7) and I
    import sympy

    return sympy.expand(x) == 0


def to_json(x):
    """Exact rationals serialize as ``"p/q"`` strings, complex as ``[re, im]``."""
    if isinstance(x, bool) or x is None or isinstance(x, str):
        return x
    if isinstance(x, int):
        return x
    if isinstance(x, Fraction):
        return f"{x.numerator}/{x.denominator}" if x.denominator != 1 else str(x.numerator)
    if isinstance(x, float):
        return x
    if isinstance(x, complex):
        return [x.real, x.imag]
    if isinstance(x, dict):
        return {str(k): to_json(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [to_json(v) for v in x]
    return str(x)


def to_float(x) -> float:
    if isinstance(x, complex):
        return abs(x)
    return float(x)
