"""Moment measures, Carleman-type diagnostics and the ``a_m`` sequence with its bound.

The moment measure of a coefficient sequence puts mass ``c_k |fhat(k)| / 2``
at ``+-sqrt(lambda_k)``; its even moments are
``M(2m) = sum_k lambda_k^m c_k |fhat(k)|`` and its odd moments vanish.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .errors import ParameterError, PreconditionError, TruncationError
from .expansion import CoefficientSequence
from .scaled import LN2, ScaledValue, log_sum_exp

_TAIL_RATIO = 1e-16
_N_CAP = 10 ** 8


# ---------------------------------------------------------------------------
# moments

@dataclass(frozen=True, eq=False)
class MomentSequence:
    """Even moments ``M(0), M(2), ..., M(2 M_max)`` stored as natural logs."""

    log_values: np.ndarray
    source: CoefficientSequence | None = field(default=None, repr=False)

    @property
    def values(self) -> tuple[ScaledValue, ...]:
        return tuple(ScaledValue.from_log(v) for v in self.log_values)

    def moment(self, order: int) -> ScaledValue:
        """``M(order)``; odd orders are zero by evenness of the measure."""
        if order < 0:
            raise ParameterError("moment order must be nonnegative")
        if order % 2:
            return ScaledValue.zero()
        return ScaledValue.from_log(self.log_values[order // 2])

    def is_log_convex(self, slack: float = 1e-10) -> bool:
        v = self.log_values
        if v.size < 3 or not np.all(np.isfinite(v)):
            return True
        return bool(np.all(2 * v[1:-1] <= v[:-2] + v[2:] + slack))


def _log_parts(seq):
    with np.errstate(divide="ignore"):
        return seq.log_norming + np.log(np.abs(seq.coeffs)), np.log(seq.eigenvalues)


def moments(seq: CoefficientSequence, M: int) -> MomentSequence:
    """``M(2m) = sum_k lambda_k^m c_k |fhat(k)|`` for ``m = 0..M``."""
    if M < 0:
        raise ParameterError("M must be nonnegative")
    base, loglam = _log_parts(seq)
    out = np.empty(M + 1)
    for m in range(M + 1):
        terms = base if m == 0 else np.where(np.isfinite(loglam), base + m * loglam, -math.inf)
        out[m] = log_sum_exp(terms)
    return MomentSequence(out, seq)


@dataclass(frozen=True)
class CSBound:
    m: int
    j: int
    log_lhs: float
    log_rhs: float

    @property
    def lhs(self) -> float:
        return math.exp(self.log_lhs) if self.log_lhs < 709 else math.inf

    @property
    def rhs(self) -> float:
        return math.exp(self.log_rhs) if self.log_rhs < 709 else math.inf

    @property
    def holds(self) -> bool:
        return self.log_lhs <= self.log_rhs + 1e-12 * max(1.0, abs(self.log_rhs))


def moment_cs_bound(seq: CoefficientSequence, m: int, j: int) -> CSBound:
    """Both sides of ``M(2m) <= sqrt(C_j) ||P^{m+j} f||`` with ``C_j = sum lambda_k^{-2j} c_k``.

    Indices with ``lambda_k = 0`` are left out of ``C_j`` (and carry no moment
    mass for ``m >= 1``).
    """
    if m < 1 or j < 0:
        raise ParameterError("need m >= 1 and j >= 0")
    base, loglam = _log_parts(seq)
    pos = np.isfinite(loglam)
    log_cj = log_sum_exp(seq.log_norming[pos] - 2 * j * loglam[pos])
    log_lhs = log_sum_exp(np.where(pos, base + m * loglam, -math.inf))
    energy = 2 * base - seq.log_norming  # log(c_k |fhat|^2)
    log_norm = 0.5 * log_sum_exp(np.where(pos, energy + 2 * (m + j) * loglam, -math.inf))
    return CSBound(m, j, log_lhs, 0.5 * log_cj + log_norm)


def shifted_sum_diagnostic(a, j: int, M: int | None = None):
    """Partial sums of ``a_m`` and of ``a_m^(1 + j/m)`` for ``m = 1..M``."""
    a = np.asarray(a, dtype=float)
    if M is not None:
        a = a[:M]
    if np.any(a <= 0):
        raise ParameterError("sequence must be positive")
    m = np.arange(1, a.size + 1, dtype=float)
    shifted = np.exp((1.0 + j / m) * np.log(a))
    return np.cumsum(a), np.cumsum(shifted)


# ---------------------------------------------------------------------------
# decay profiles

@dataclass(frozen=True, eq=False)
class DecayProfile:
    """Positive decreasing ``theta`` with integrability and floor metadata.

    ``integrable`` records whether ``int_1^inf theta(t)/t dt`` converges;
    ``floor`` whether ``theta(t) >= c (1+t)^{-1/2}`` for some ``c > 0``.
    """

    theta: Callable
    integrable: bool
    floor: bool
    name: str = "custom"

    def __call__(self, t):
        return self.theta(np.asarray(t, dtype=float))

    def check_monotone(self, grid) -> bool:
        v = self(np.sort(np.asarray(grid, dtype=float)))
        return bool(np.all(v > 0) and np.all(np.diff(v) <= 0))

    def vanishing_report(self, t_max: float) -> bool:
        """Soft check ``theta(t_max) < theta(1) / 2``."""
        return bool(self(t_max) < 0.5 * self(1.0))

    @classmethod
    def inverse_sqrt(cls) -> "DecayProfile":
        return cls(lambda t: (1.0 + t) ** -0.5, True, True, "inverse_sqrt")

    @classmethod
    def constant(cls, tau: float = 1.0) -> "DecayProfile":
        if tau <= 0:
            raise ParameterError("constant profile needs tau > 0")
        return cls(lambda t: np.full(np.shape(t), float(tau))[()], False, True, f"constant({tau!r})")

    @classmethod
    def inverse_log(cls) -> "DecayProfile":
        return cls(lambda t: 1.0 / np.log(math.e + t), False, True, "inverse_log")

    @classmethod
    def power(cls, p: float) -> "DecayProfile":
        """``(1+t)^(-p)``; integrable for ``p > 0``, floored for ``p <= 1/2``."""
        if p <= 0:
            raise ParameterError("power profile needs p > 0")
        return cls(lambda t: (1.0 + t) ** (-p), True, p <= 0.5, f"power({p!r})")


# ---------------------------------------------------------------------------
# the a_m sequence

def _log_a_sq(theta: DecayProfile, rho: float, k: int, m: int) -> float:
    """``log sum_n (n+rho)^(4m+k) exp(-2 (n+rho) theta(n+rho))`` with tail truncation."""
    p = 4 * m + k
    logs = []
    start = 0
    block = 1024
    running = -math.inf
    while True:
        t = rho + np.arange(start, start + block, dtype=float)
        lt = p * np.log(t) - 2.0 * t * theta(t)
        logs.append(lt)
        running = np.logaddexp(running, log_sum_exp(lt))
        last = lt[-1]
        decreasing = lt.size > 1 and lt[-1] < lt[-2]
        if decreasing and last + math.log(t[-1]) < running + math.log(_TAIL_RATIO):
            return float(log_sum_exp(np.concatenate(logs)))
        start += block
        if start >= _N_CAP:
            raise TruncationError(
                f"a_m sum did not reach tail ratio {_TAIL_RATIO} before n = {_N_CAP} (m = {m})")
        block = min(2 * block, 1 << 20)


def growth_sequence(theta: DecayProfile, rho: float, k: int, m: int) -> ScaledValue:
    """``a_m = (sum_n (n+rho)^(4m+k) exp(-2 (n+rho) theta(n+rho)))^(1/2)``."""
    if not theta.floor:
        raise PreconditionError("profile must satisfy theta(t) >= c (1+t)^(-1/2)")
    if rho <= 0 or k < 0 or m < 0:
        raise ParameterError("need rho > 0, k >= 0, m >= 0")
    return ScaledValue.from_log(0.5 * _log_a_sq(theta, rho, k, m))


@dataclass(frozen=True, eq=False)
class GrowthBoundReport:
    m: np.ndarray
    log2_a: np.ndarray
    log2_bound: np.ndarray
    carleman_partial: np.ndarray
    C: float
    calibration: tuple[int, int]
    ratios: np.ndarray

    @property
    def violations(self) -> int:
        slack = 1e-9 * np.maximum(1.0, np.abs(self.log2_bound))
        return int(np.sum(2 * self.log2_a > self.log2_bound + slack))

    @property
    def holds(self) -> bool:
        return self.violations == 0

    def rows(self):
        for i in range(self.m.size):
            yield int(self.m[i]), float(self.log2_a[i]), float(self.log2_bound[i]), float(self.carleman_partial[i])


def growth_bound_check(theta: DecayProfile, rho: float, k: int, m_range, calibration=None) -> GrowthBoundReport:
    """Fit ``C`` and test ``a_m^2 <= (4 C m / theta(2 m^4))^(4m)`` on ``m_range``.

    ``C`` is the maximum of ``a_m^(1/2m) theta(2m^4) / (4m)`` over the
    calibration sub-range (default: the first half of ``m_range``); the bound
    is then checked on every ``m``, so later indices are a genuine test.
    """
    ms = np.array(sorted(int(m) for m in m_range))
    if ms.size == 0 or ms[0] < 1:
        raise ParameterError("m_range must be nonempty with m >= 1")
    if calibration is None:
        calibration = (int(ms[0]), int(ms[max(0, (ms.size - 1) // 2)]))
    log_a = np.array([0.5 * _log_a_sq(theta, rho, k, int(m)) for m in ms]) if theta.floor else None
    if log_a is None:
        raise PreconditionError("profile must satisfy theta(t) >= c (1+t)^(-1/2)")
    th = np.array([float(theta(2.0 * float(m) ** 4)) for m in ms])
    log_ratio = log_a / (2 * ms) + np.log(th) - np.log(4.0 * ms)
    cal = (ms >= calibration[0]) & (ms <= calibration[1])
    log_C = float(np.max(log_ratio[cal]))
    log_bound_sq = 4 * ms * (np.log(4.0 * ms) + log_C - np.log(th))
    carleman = np.cumsum(np.exp(-log_a / (2 * ms)))
    return GrowthBoundReport(ms, log_a / LN2, log_bound_sq / LN2, carleman, math.exp(log_C),
                        calibration, np.exp(log_ratio))
