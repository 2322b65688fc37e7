"""Overflow-safe evaluation of Hermite, Laguerre and Jacobi eigenfunctions.

Every family is produced by an upward three-term recurrence on an already
normalised sequence, so the coefficients stay O(1).  The Gaussian/exponential
factor is carried as a separate power of two (see :mod:`specdecay.scaled`)
and only folded in at the end.

Table functions take a 1-D array of points and return an array of shape
``(K + 1, len(points))``; the ``*_scaled`` variants return the mantissa and
exponent tables instead of plain floats.
"""

from __future__ import annotations

import math

import numpy as np

from .errors import DegreeBoundsError, ParameterError
from .scaled import ScaledValue, exp_neg_split, join, split, two_square

DEFAULT_MAX_DEGREE = 512

_BIG = 2.0 ** 300
_SMALL = 2.0 ** -300
_QUARTER_ROOT_PI = math.pi ** -0.25


def _check_degree(K, max_degree):
    cap = DEFAULT_MAX_DEGREE if max_degree is None else int(max_degree)
    if K < 0:
        raise DegreeBoundsError(f"degree must be nonnegative, got {K}")
    if K > cap:
        raise DegreeBoundsError(f"degree {K} exceeds cap {cap}")


def _points(x):
    arr = np.atleast_1d(np.asarray(x, dtype=float))
    if arr.ndim != 1:
        raise ParameterError("points must be a scalar or a 1-D array")
    return arr


def _recurrence(K, y1, step, npts):
    """Run ``y[k+1] = step(k, y[k], y[k-1])`` from ``y0 = 1`` with rescaling.

    Returns the mantissa-like table and the integer exponent table
    accumulated by the rescaling (the true value is ``table * 2**exp``).
    """
    vals = np.empty((K + 1, npts))
    exps = np.zeros((K + 1, npts), dtype=np.int64)
    prev = np.zeros(npts)
    cur = np.ones(npts)
    e = np.zeros(npts, dtype=np.int64)
    vals[0] = cur
    if K == 0:
        return vals, exps
    prev, cur = cur, np.asarray(y1, dtype=float).copy()
    vals[1] = cur
    for k in range(1, K):
        nxt = step(k, cur, prev)
        prev, cur = cur, nxt
        big = np.maximum(np.abs(cur), np.abs(prev))
        bad = (big > _BIG) | ((big < _SMALL) & (big > 0))
        if bad.any():
            _, shift = np.frexp(big[bad])
            cur[bad] = np.ldexp(cur[bad], -shift)
            prev[bad] = np.ldexp(prev[bad], -shift)
            e[bad] += shift
        vals[k + 1] = cur
        exps[k + 1] = e
    return vals, exps


def _fold(vals, exps, pref_m, pref_e):
    """Multiply the table by ``pref_m * 2**pref_e`` and renormalise."""
    m, e = split(vals * pref_m[None, :])
    return m, e + exps + pref_e[None, :]


def _as_scalar(m, e, k):
    return ScaledValue.from_parts(float(m[k, 0]), int(e[k, 0]))


# ---------------------------------------------------------------------------
# Hermite functions h_k(x) = (2^k sqrt(pi) k!)^{-1/2} H_k(x) exp(-x^2/2)

def hermite_table_scaled(x, K, max_degree=None):
    _check_degree(K, max_degree)
    x = _points(x)
    hi, lo = two_square(x)
    f, q = exp_neg_split(0.5 * hi, 0.5 * lo)
    sq = np.sqrt(np.arange(K + 2, dtype=float))

    def step(k, cur, prev):
        return (math.sqrt(2.0) / sq[k + 1]) * x * cur - (sq[k] / sq[k + 1]) * prev

    vals, exps = _recurrence(K, math.sqrt(2.0) * x, step, x.size)
    return _fold(vals, exps, _QUARTER_ROOT_PI * f, -q)


def hermite_table(x, K, max_degree=None):
    """Normalised Hermite functions ``h_0..h_K`` at ``x``."""
    return join(*hermite_table_scaled(x, K, max_degree))


def hermite_fn(k: int, x: float, max_degree=None) -> ScaledValue:
    """``h_k(x)`` as a :class:`ScaledValue`."""
    m, e = hermite_table_scaled([x], int(k), max_degree)
    return _as_scalar(m, e, int(k))


# ---------------------------------------------------------------------------
# Laguerre families

def _check_delta(delta):
    if not delta > -1:
        raise ParameterError(f"Laguerre type must exceed -1, got {delta}")


def laguerre_normalized_table_scaled(t, K, delta, max_degree=None):
    _check_degree(K, max_degree)
    _check_delta(delta)
    t = _points(t)
    if np.any(t < 0):
        raise ParameterError("Laguerre functions are defined for t >= 0")
    ks = np.arange(K + 2, dtype=float)
    # sqrt((k+1)(k+delta+1)) n_{k+1} = (2k+delta+1-t) n_k - sqrt(k(k+delta)) n_{k-1}
    up = np.sqrt((ks + 1.0) * (ks + delta + 1.0))
    down = np.sqrt(ks * (ks + delta))

    def step(k, cur, prev):
        return ((2 * k + delta + 1.0 - t) * cur - down[k] * prev) / up[k]

    vals, exps = _recurrence(K, (delta + 1.0 - t) / up[0], step, t.size)
    f, q = exp_neg_split(0.5 * t)
    with np.errstate(divide="ignore"):
        logpow = np.where(t > 0, 0.5 * delta * np.log(np.where(t > 0, t, 1.0)), 0.0)
    l2 = logpow / math.log(2.0)
    pe = np.floor(l2).astype(np.int64)
    pm = np.exp2(l2 - pe)
    if delta != 0:
        pm = np.where(t > 0, pm, 0.0)
    pref = f * pm * math.exp(-0.5 * math.lgamma(delta + 1.0))
    return _fold(vals, exps, pref, pe - q)


def laguerre_normalized_table(t, K, delta, max_degree=None):
    """Orthonormal Laguerre functions on ``L^2(R+, dt)``.

    ``L_k^delta(t) * sqrt(k!/Gamma(k+delta+1)) * exp(-t/2) * t^(delta/2)``
    """
    return join(*laguerre_normalized_table_scaled(t, K, delta, max_degree))


def laguerre_normalized(k: int, delta: float, t: float, max_degree=None) -> ScaledValue:
    m, e = laguerre_normalized_table_scaled([t], int(k), delta, max_degree)
    return _as_scalar(m, e, int(k))


def _laguerre_unit_table(t, K, delta):
    """Raw recurrence for ``p_k = L_k^delta / L_k^delta(0)`` (so ``p_k(0) = 1``)."""
    ks = np.arange(K + 2, dtype=float)

    def step(k, cur, prev):
        return ((2 * k + delta + 1.0 - t) * cur - k * prev) / (k + delta + 1.0)

    return _recurrence(K, 1.0 - t / (delta + 1.0), step, t.size)


def laguerre_psi_table_scaled(r, K, n, max_degree=None):
    _check_degree(K, max_degree)
    if int(n) != n or n < 1:
        raise ParameterError(f"dimension n must be a positive integer, got {n}")
    r = _points(r)
    hi, lo = two_square(r)
    t = 0.5 * hi
    vals, exps = _laguerre_unit_table(t, K, float(n - 1))
    f, q = exp_neg_split(0.25 * hi, 0.25 * lo)
    return _fold(vals, exps, f, -q)


def laguerre_psi_table(r, K, n, max_degree=None):
    """``psi_k^{n-1}(r) = k!(n-1)!/(k+n-1)! L_k^{n-1}(r^2/2) exp(-r^2/4)``.

    Normalised so that ``psi_k^{n-1}(0) == 1``.
    """
    return join(*laguerre_psi_table_scaled(r, K, n, max_degree))


def laguerre_psi(k: int, n: int, r: float, max_degree=None) -> float:
    m, e = laguerre_psi_table_scaled([r], int(k), n, max_degree)
    return _as_scalar(m, e, int(k)).to_float()


def laguerre_function_table_scaled(u, K, delta, max_degree=None):
    """Unnormalised ``L_k^delta(u) * exp(-u/2)`` as scaled tables."""
    _check_degree(K, max_degree)
    _check_delta(delta)
    u = _points(u)
    vals, exps = _laguerre_unit_table(u, K, float(delta))
    f, q = exp_neg_split(0.5 * u)
    m, e = _fold(vals, exps, f, -q)
    # multiply row k by L_k^delta(0) = Gamma(k+delta+1) / (k! Gamma(delta+1))
    ks = np.arange(K + 1, dtype=float)
    logb = np.array([math.lgamma(k + delta + 1.0) - math.lgamma(k + 1.0)
                     - math.lgamma(delta + 1.0) for k in ks]) / math.log(2.0)
    be = np.floor(logb).astype(np.int64)
    bm = np.exp2(logb - be)
    m2, e2 = split(m * bm[:, None])
    return m2, e2 + e + be[:, None]


def laguerre_function_table(u, K, delta, max_degree=None):
    return join(*laguerre_function_table_scaled(u, K, delta, max_degree))


def laguerre_value_at_zero(k: int, delta: float) -> float:
    """``L_k^delta(0) = Gamma(k+delta+1) / (Gamma(k+1) Gamma(delta+1))``."""
    _check_delta(delta)
    return math.exp(math.lgamma(k + delta + 1.0) - math.lgamma(k + 1.0)
                    - math.lgamma(delta + 1.0))


def binomial_ratio(k: int, n: int) -> float:
    """``k!(n-1)!/(k+n-1)!`` computed as a running product."""
    out = 1.0
    for j in range(1, n):
        out *= j / (k + j)
    return out


# ---------------------------------------------------------------------------
# Jacobi R_m^{(alpha,beta)}(x) = P_m(x) / P_m(1)

def _check_jacobi(alpha, beta):
    if not (alpha > -1 and beta > -1):
        raise ParameterError(f"Jacobi parameters must exceed -1, got ({alpha}, {beta})")


def jacobi_r_table_scaled(x, K, alpha, beta, max_degree=None):
    _check_degree(K, max_degree)
    _check_jacobi(alpha, beta)
    x = _points(x)
    if np.any(np.abs(x) > 1.0):
        raise ParameterError("Jacobi argument must lie in [-1, 1]")
    a, b = float(alpha), float(beta)
    ab = a + b

    def step(n, cur, prev):
        s = 2 * n + ab
        lead = 2.0 * (n + ab + 1.0) * (n + a + 1.0) * s
        mid = (s + 1.0) * ((s + 2.0) * s * x + (a * a - b * b))
        back = 2.0 * n * (n + b) * (s + 2.0)
        return (mid * cur - back * prev) / lead

    y1 = 1.0 + (ab + 2.0) * (x - 1.0) / (2.0 * (a + 1.0))
    vals, exps = _recurrence(K, y1, step, x.size)
    m, e = split(vals)
    return m, e + exps


def jacobi_r_table(x, K, alpha, beta, max_degree=None):
    """``R_0..R_K`` with ``R_m(1) = 1``."""
    return join(*jacobi_r_table_scaled(x, K, alpha, beta, max_degree))


def jacobi_r(m: int, alpha: float, beta: float, x: float, max_degree=None) -> float:
    mm, e = jacobi_r_table_scaled([x], int(m), alpha, beta, max_degree)
    return _as_scalar(mm, e, int(m)).to_float()


def jacobi_log_norm_sq(m, alpha, beta) -> float:
    """``log of int_{-1}^{1} R_m(x)^2 (1-x)^alpha (1+x)^beta dx`` via log-Gamma."""
    a, b = float(alpha), float(beta)
    lg = math.lgamma
    if m == 0:
        log_h = (a + b + 1.0) * math.log(2.0) + lg(a + 1.0) + lg(b + 1.0) - lg(a + b + 2.0)
    else:
        log_h = ((a + b + 1.0) * math.log(2.0) - math.log(2 * m + a + b + 1.0)
                 + lg(m + a + 1.0) + lg(m + b + 1.0) - lg(m + a + b + 1.0) - lg(m + 1.0))
    log_p1 = lg(m + a + 1.0) - lg(a + 1.0) - lg(m + 1.0)
    return log_h - 2.0 * log_p1
