"""Floating point values with an out-of-band power-of-two exponent.

High-degree eigenfunctions carry Gaussian factors such as ``exp(-x**2/2)``
that underflow long before the polynomial part overflows.  Everything that
runs a recurrence or accumulates spectral sums keeps a float mantissa and a
separate integer exponent so that neither side leaves the double range.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable

import numpy as np

LN2 = math.log(2.0)
# Cody-Waite split of ln 2: q * _LN2_HI is exact for |q| < 2**20.
_LN2_HI = 6.93147180369123816490e-01
_LN2_LO = 1.90821492927058770002e-10
_SPLIT = 134217729.0  # 2**27 + 1


@dataclass(frozen=True, eq=False)
class ScaledValue:
    """``sign * mantissa * 2**exponent`` with ``mantissa`` in [1, 2) or 0."""

    sign: int
    mantissa: float
    exponent: int

    def __post_init__(self):
        m = self.mantissa
        if m == 0.0:
            if self.sign != 0 or self.exponent != 0:
                object.__setattr__(self, "sign", 0)
                object.__setattr__(self, "exponent", 0)
            return
        if not (1.0 <= m < 2.0):
            raise ValueError(f"mantissa {m!r} outside [1, 2)")
        if self.sign not in (-1, 1):
            raise ValueError("sign must be -1 or +1 for a nonzero value")

    # construction -----------------------------------------------------
    @classmethod
    def zero(cls) -> "ScaledValue":
        return cls(0, 0.0, 0)

    @classmethod
    def from_float(cls, x: float) -> "ScaledValue":
        x = float(x)
        if not math.isfinite(x):
            raise ValueError(f"cannot scale non-finite value {x!r}")
        if x == 0.0:
            return cls.zero()
        m, e = math.frexp(abs(x))
        return cls(1 if x > 0 else -1, 2.0 * m, e - 1)

    @classmethod
    def from_parts(cls, value: float, exponent: int) -> "ScaledValue":
        """Normalise ``value * 2**exponent`` for an arbitrary finite ``value``."""
        v = cls.from_float(value)
        if v.sign == 0:
            return v
        return cls(v.sign, v.mantissa, v.exponent + int(exponent))

    @classmethod
    def from_log(cls, log_abs: float, sign: int = 1) -> "ScaledValue":
        """Build from a natural logarithm of the magnitude."""
        if log_abs == -math.inf or sign == 0:
            return cls.zero()
        l2 = log_abs / LN2
        e = math.floor(l2)
        m = 2.0 ** (l2 - e)
        if m >= 2.0:
            m, e = 1.0, e + 1
        return cls(1 if sign > 0 else -1, m, int(e))

    # conversion -------------------------------------------------------
    def to_float(self) -> float:
        if self.sign == 0:
            return 0.0
        try:
            return math.ldexp(self.sign * self.mantissa, self.exponent)
        except OverflowError:
            return self.sign * math.inf

    __float__ = to_float

    def log(self) -> float:
        """Natural log of the magnitude (``-inf`` for zero)."""
        if self.sign == 0:
            return -math.inf
        return math.log(self.mantissa) + self.exponent * LN2

    def log2(self) -> float:
        if self.sign == 0:
            return -math.inf
        return math.log2(self.mantissa) + self.exponent

    # arithmetic -------------------------------------------------------
    def __neg__(self):
        return ScaledValue(-self.sign, self.mantissa, self.exponent)

    def __abs__(self):
        return ScaledValue(abs(self.sign), self.mantissa, self.exponent)

    def __mul__(self, other):
        other = _coerce(other)
        if self.sign == 0 or other.sign == 0:
            return ScaledValue.zero()
        return ScaledValue.from_parts(
            self.sign * other.sign * self.mantissa * other.mantissa,
            self.exponent + other.exponent,
        )

    __rmul__ = __mul__

    def __truediv__(self, other):
        other = _coerce(other)
        if other.sign == 0:
            raise ZeroDivisionError("division by a zero ScaledValue")
        if self.sign == 0:
            return ScaledValue.zero()
        return ScaledValue.from_parts(
            self.sign * other.sign * self.mantissa / other.mantissa,
            self.exponent - other.exponent,
        )

    def __add__(self, other):
        other = _coerce(other)
        if self.sign == 0:
            return other
        if other.sign == 0:
            return self
        hi, lo = (self, other) if self.exponent >= other.exponent else (other, self)
        shift = lo.exponent - hi.exponent
        if shift < -1100:
            return hi
        total = hi.sign * hi.mantissa + math.ldexp(lo.sign * lo.mantissa, shift)
        if total == 0.0:
            return ScaledValue.zero()
        return ScaledValue.from_parts(total, hi.exponent)

    __radd__ = __add__

    def __sub__(self, other):
        return self + (-_coerce(other))

    def __rsub__(self, other):
        return _coerce(other) - self

    def __pow__(self, p: float):
        if self.sign == 0:
            return ScaledValue.zero() if p > 0 else ScaledValue.from_float(1.0)
        if self.sign < 0 and float(p) != int(p):
            raise ValueError("fractional power of a negative value")
        sign = 1 if self.sign > 0 or int(p) % 2 == 0 else -1
        return ScaledValue.from_log(p * self.log(), sign)

    def sqrt(self):
        return self ** 0.5

    # comparison -------------------------------------------------------
    def __eq__(self, other):
        if not isinstance(other, (ScaledValue, int, float)):
            return NotImplemented
        other = _coerce(other)
        return (self.sign, self.mantissa, self.exponent) == (
            other.sign, other.mantissa, other.exponent)

    def __hash__(self):
        return hash((self.sign, self.mantissa, self.exponent))

    def __lt__(self, other):
        return (self - _coerce(other)).sign < 0

    def __le__(self, other):
        return (self - _coerce(other)).sign <= 0

    def __gt__(self, other):
        return (self - _coerce(other)).sign > 0

    def __ge__(self, other):
        return (self - _coerce(other)).sign >= 0

    def __repr__(self):
        if self.sign == 0:
            return "ScaledValue(0)"
        s = "-" if self.sign < 0 else ""
        return f"ScaledValue({s}{self.mantissa!r} * 2**{self.exponent})"


def _coerce(x) -> ScaledValue:
    if isinstance(x, ScaledValue):
        return x
    return ScaledValue.from_float(float(x))


def scaled_sum(values: Iterable[ScaledValue]) -> ScaledValue:
    total = ScaledValue.zero()
    for v in values:
        total = total + v
    return total


# --------------------------------------------------------------------------
# array helpers

def split(x):
    """Split an array into ``(mantissa, exponent)``; ``|mantissa|`` lies in [1, 2)."""
    x = np.asarray(x, dtype=float)
    m, e = np.frexp(x)
    nz = m != 0
    m = np.where(nz, 2.0 * m, 0.0)
    e = np.where(nz, e - 1, 0).astype(np.int64)
    return m, e


def join(mantissa, exponent):
    """Inverse of :func:`split`; overflows to inf and underflows to 0 quietly."""
    m = np.asarray(mantissa, dtype=float)
    e = np.asarray(exponent, dtype=np.int64)
    # ldexp saturates correctly, but exponents beyond int32 must be clipped first
    e = np.clip(e, -4000, 4000).astype(np.int32)
    with np.errstate(over="ignore", under="ignore"):
        return np.ldexp(m, e)


def two_square(x):
    """Exact ``x*x`` as an unevaluated sum ``hi + lo`` (Dekker)."""
    x = np.asarray(x, dtype=float)
    hi = x * x
    c = _SPLIT * x
    xh = c - (c - x)
    xl = x - xh
    lo = ((xh * xh - hi) + 2.0 * xh * xl) + xl * xl
    return hi, lo


def exp_neg_split(hi, lo=0.0):
    """``exp(-(hi + lo))`` as ``(mantissa_factor, power_of_two)`` arrays.

    Returns ``f, q`` with ``exp(-(hi+lo)) == f * 2**(-q)``, ``f`` in
    ``[0.7, 1.42]``; the reduction is exact for ``hi < 2**19``.
    """
    hi = np.asarray(hi, dtype=float)
    lo = np.asarray(lo, dtype=float)
    q = np.rint(hi / LN2)
    r = (hi - q * _LN2_HI) - q * _LN2_LO + lo
    return np.exp(-r), q.astype(np.int64)


def log_sum_exp(logs) -> float:
    """Stable ``log(sum(exp(logs)))`` for a 1-D array (``-inf`` if empty)."""
    logs = np.asarray(logs, dtype=float)
    if logs.size == 0:
        return -math.inf
    top = np.max(logs)
    if top == -math.inf:
        return -math.inf
    if top == math.inf:
        return math.inf
    return float(top + math.log(math.fsum(np.exp(logs - top))))
