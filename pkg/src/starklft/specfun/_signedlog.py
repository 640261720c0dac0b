"""Sign-tracked log-domain reals and compensated summation primitives.

Gamma-function ratios appearing in the transformation matrices mix factors
like (2l)! and 1/Gamma(1+l-n) whose magnitudes individually overflow or
underflow binary64 while their products stay moderate.  All such products
are assembled as SignedLogValue and exponentiated only at the end.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ..errors import RangeError

# exp() overflows above this; used for round-trip range checks
_LOG_HUGE = math.log(np.finfo(float).max)  # ~709.78
_LOG_TINY = math.log(np.finfo(float).tiny)  # ~-708.4


@dataclass(frozen=True)
class SignedLogValue:
    """A real number stored as (log|value|, sign).

    ``sign`` is +1.0, -1.0 or 0.0; ``log_abs = -inf`` if and only if
    ``sign = 0`` (exact zero).  Multiplication and division are exact in
    the sign and additive in the log magnitude.
    """

    log_abs: float
    sign: float

    def __post_init__(self):
        s = self.sign
        if s not in (1.0, -1.0, 0.0):
            raise ValueError(f"sign must be +1, -1 or 0, got {s}")
        if (s == 0.0) != (self.log_abs == -math.inf):
            raise ValueError("sign 0 requires log_abs == -inf and vice versa")

    @staticmethod
    def zero() -> "SignedLogValue":
        return SignedLogValue(-math.inf, 0.0)

    @staticmethod
    def one() -> "SignedLogValue":
        return SignedLogValue(0.0, 1.0)

    @staticmethod
    def from_real(x: float) -> "SignedLogValue":
        if x == 0.0:
            return SignedLogValue.zero()
        if not math.isfinite(x):
            raise ValueError(f"cannot represent non-finite value {x}")
        return SignedLogValue(math.log(abs(x)), math.copysign(1.0, x))

    def to_real(self) -> float:
        """Round-trip to a plain float; raises RangeError instead of
        silently over/underflowing."""
        if self.sign == 0.0:
            return 0.0
        if self.log_abs > _LOG_HUGE:
            raise RangeError(f"log-domain value exp({self.log_abs:.3f}) overflows binary64")
        if self.log_abs < _LOG_TINY:
            raise RangeError(f"log-domain value exp({self.log_abs:.3f}) underflows binary64")
        return self.sign * math.exp(self.log_abs)

    @property
    def is_zero(self) -> bool:
        return self.sign == 0.0

    def __mul__(self, other: "SignedLogValue") -> "SignedLogValue":
        s = self.sign * other.sign
        if s == 0.0:
            return SignedLogValue.zero()
        return SignedLogValue(self.log_abs + other.log_abs, s)

    def __truediv__(self, other: "SignedLogValue") -> "SignedLogValue":
        if other.sign == 0.0:
            raise ZeroDivisionError("division by log-domain zero")
        if self.sign == 0.0:
            return SignedLogValue.zero()
        return SignedLogValue(self.log_abs - other.log_abs, self.sign * other.sign)

    def __neg__(self) -> "SignedLogValue":
        return SignedLogValue(self.log_abs, -self.sign)

    def scaled_by_log(self, dlog: float) -> "SignedLogValue":
        if self.sign == 0.0:
            return self
        return SignedLogValue(self.log_abs + dlog, self.sign)

    def powi(self, k: int) -> "SignedLogValue":
        if self.sign == 0.0:
            return self if k > 0 else SignedLogValue.one()
        s = 1.0 if (self.sign > 0 or k % 2 == 0) else -1.0
        return SignedLogValue(k * self.log_abs, s)


def signedlog_sum(terms) -> SignedLogValue:
    """Sum an iterable of SignedLogValue, rescaled to the largest magnitude.

    The scaled terms are accumulated with Neumaier compensation so that the
    result is accurate to ~eps relative to the largest term.
    """
    terms = [t for t in terms if t.sign != 0.0]
    if not terms:
        return SignedLogValue.zero()
    lmax = max(t.log_abs for t in terms)
    acc = NeumaierSum()
    for t in terms:
        acc.add(t.sign * math.exp(t.log_abs - lmax))
    total = acc.total
    if total == 0.0:
        return SignedLogValue.zero()
    return SignedLogValue(lmax + math.log(abs(total)), math.copysign(1.0, total))


class NeumaierSum:
    """Kahan-Neumaier compensated accumulator."""

    __slots__ = ("s", "c")

    def __init__(self):
        self.s = 0.0
        self.c = 0.0

    def add(self, x: float) -> None:
        t = self.s + x
        if abs(self.s) >= abs(x):
            self.c += (self.s - t) + x
        else:
            self.c += (x - t) + self.s
        self.s = t

    @property
    def total(self) -> float:
        return self.s + self.c


def neumaier_sum_array(a: np.ndarray, axis: int = 0) -> np.ndarray:
    """Compensated sum of an array along ``axis`` (deterministic order)."""
    a = np.moveaxis(np.asarray(a, dtype=float), axis, 0)
    s = np.zeros(a.shape[1:])
    c = np.zeros(a.shape[1:])
    for row in a:
        t = s + row
        big = np.abs(s) >= np.abs(row)
        c += np.where(big, (s - t) + row, (row - t) + s)
        s = t
    return s + c


# ---------------------------------------------------------------------------
# Minimal double-double arithmetic (Dekker / Knuth error-free transforms).
# Used for the optional extended-precision mode of the alternating p-sums.
# ---------------------------------------------------------------------------

_SPLIT = 134217729.0  # 2**27 + 1


def _two_sum(a: float, b: float):
    s = a + b
    bb = s - a
    err = (a - (s - bb)) + (b - bb)
    return s, err


def _two_prod(a: float, b: float):
    p = a * b
    a_hi = _SPLIT * a
    a_hi = a_hi - (a_hi - a)
    a_lo = a - a_hi
    b_hi = _SPLIT * b
    b_hi = b_hi - (b_hi - b)
    b_lo = b - b_hi
    err = ((a_hi * b_hi - p) + a_hi * b_lo + a_lo * b_hi) + a_lo * b_lo
    return p, err


class DoubleDouble:
    """Unevaluated sum of two floats giving ~31 significant digits."""

    __slots__ = ("hi", "lo")

    def __init__(self, hi: float = 0.0, lo: float = 0.0):
        self.hi = hi
        self.lo = lo

    def add(self, x: float) -> "DoubleDouble":
        s, e = _two_sum(self.hi, x)
        e += self.lo
        hi, lo = _two_sum(s, e)
        self.hi, self.lo = hi, lo
        return self

    def add_dd(self, other: "DoubleDouble") -> "DoubleDouble":
        s, e = _two_sum(self.hi, other.hi)
        e += self.lo + other.lo
        hi, lo = _two_sum(s, e)
        self.hi, self.lo = hi, lo
        return self

    def mul_float(self, x: float) -> "DoubleDouble":
        p, e = _two_prod(self.hi, x)
        e += self.lo * x
        hi, lo = _two_sum(p, e)
        self.hi, self.lo = hi, lo
        return self

    @property
    def total(self) -> float:
        return self.hi + self.lo
