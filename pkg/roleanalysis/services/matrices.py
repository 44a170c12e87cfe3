"""Matrix products used by the semigroup engines.

Boolean matrices are numpy ``bool`` arrays; weighted ones are object arrays of Fractions
so every product and rounding step is exact.
"""

import math
from fractions import Fraction
from typing import Hashable

import numpy as np

from roleanalysis.exceptions import DimensionMismatchError
from roleanalysis.graph.models import Matrix, as_fraction_matrix

ROUNDING_RULES = ("half_even", "half_up")


def _check_conformable(a: Matrix, b: Matrix) -> None:
    if a.ndim != 2 or b.ndim != 2 or a.shape[1] != b.shape[0]:
        raise DimensionMismatchError(f"cannot multiply {a.shape} by {b.shape}")


def bool_product(a: Matrix, b: Matrix) -> Matrix:
    """C(i, j) = OR_k A(i, k) AND B(k, j)."""
    a, b = np.asarray(a), np.asarray(b)
    _check_conformable(a, b)
    return (a.astype(np.int64) @ b.astype(np.int64)) > 0


def max_times(a: Matrix, b: Matrix) -> Matrix:
    """C(i, j) = max_k A(i, k) * B(k, j), exact on Fractions."""
    a, b = np.asarray(a), np.asarray(b)
    _check_conformable(a, b)
    if a.dtype != object:
        a = as_fraction_matrix(a)
    if b.dtype != object:
        b = as_fraction_matrix(b)
    if a.shape[1] == 0:
        out = np.empty((a.shape[0], b.shape[1]), dtype=object)
        out.fill(Fraction(0))
        return out
    return (a[:, :, None] * b[None, :, :]).max(axis=1)


def round_value(value: Fraction, digits: int, rule: str = "half_even") -> Fraction:
    """Round an exact value to ``digits`` decimal places."""
    if digits < 0:
        raise ValueError(f"digits must be >= 0, got {digits}")
    scale = 10**digits
    scaled = Fraction(value) * scale
    if rule == "half_even":
        quotient = round(scaled)
    elif rule == "half_up":
        quotient = math.floor(scaled + Fraction(1, 2))
    else:
        raise ValueError(f"unknown rounding rule {rule!r}; expected one of {ROUNDING_RULES}")
    return Fraction(quotient, scale)


def round_matrix(a: Matrix, digits: int, rule: str = "half_even") -> Matrix:
    """Entrywise rounding on exact decimal values."""
    a = np.asarray(a)
    if a.dtype != object:
        a = as_fraction_matrix(a)
    return np.vectorize(lambda v: round_value(v, digits, rule), otypes=[object])(a)


def is_zero(a: Matrix) -> bool:
    return not np.any(np.asarray(a) != 0)


def matrix_key(a: Matrix) -> Hashable:
    """Exact-equality lookup key."""
    if a.dtype == bool:
        return (a.shape, a.tobytes())
    return (a.shape, tuple(a.flat))
