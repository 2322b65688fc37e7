"""Compactly supported functions with prescribed spectral decay and the transfer maps.

:class:`ProductBandFunction` is the iterated convolution of normalised
indicators ``1_[-a_k, a_k] / (2 a_k)``.  It is kept as an exact piecewise
polynomial (breakpoints plus local Taylor coefficients), so it vanishes
identically outside ``[-A, A]``, ``A = sum a_k``, and its Fourier transform is
the closed product ``prod sin(a_k xi) / (a_k xi)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Callable

import numpy as np

from . import orthopoly as op
from .errors import InvariantViolation, ParameterError, PreconditionError
from .expansion import CoefficientSequence, JacobiCompact, BasisDescriptor, analyze
from .kernels import norm_from_weyl, radial_weyl_coeffs, sphere_area
from .quadrature import CompactJacobi, GeneralizedLaguerreWeight, composite_legendre, gauss_rule
from .uncertainty import DecayProfile


# ---------------------------------------------------------------------------
# piecewise polynomial machinery

def _taylor_shift(coef, s):
    """Coefficients of ``p(u + s)`` given those of ``p(v)`` (rows are polynomials)."""
    c = coef.copy()
    deg = c.shape[1] - 1
    for i in range(deg):
        for j in range(deg - 1, i - 1, -1):
            c[:, j] += s * c[:, j + 1]
    return c


def _antiderivative(bp, coef):
    """Piecewise antiderivative ``G`` with ``G(bp[0]) = 0``; returns coefficients and the total."""
    deg = coef.shape[1]
    powers = np.arange(1, deg + 1, dtype=float)
    g = np.zeros((coef.shape[0], deg + 1))
    g[:, 1:] = coef / powers
    h = np.diff(bp)
    piece = np.array([math.fsum(row) for row in g * h[:, None] ** np.arange(deg + 1)])
    start = np.concatenate([[0.0], np.cumsum(piece)[:-1]])
    g[:, 0] = start
    return g, float(start[-1] + piece[-1])


def _eval_shifted(bp, gcoef, total, points, probes):
    """Coefficients (in ``u = x - point``) of ``G`` around each of ``points``.

    The piece is chosen by ``probes`` (interval midpoints), so rounding in
    ``points`` never selects a neighbouring polynomial.
    """
    deg = gcoef.shape[1]
    out = np.zeros((points.size, deg))
    idx = np.searchsorted(bp, probes, side="right") - 1
    inside = (idx >= 0) & (idx < bp.size - 1)
    out[idx >= bp.size - 1, 0] = total
    if inside.any():
        j = idx[inside]
        out[inside] = _taylor_shift(gcoef[j], points[inside] - bp[j])
    return out


def _convolve_indicator(bp, coef, a, left, right):
    """``F * 1_[-a,a] / (2a)`` as a piecewise polynomial on the merged breakpoints."""
    gcoef, total = _antiderivative(bp, coef)
    new = np.unique(np.concatenate([bp - a, bp + a]))
    new[0], new[-1] = left, right
    new = new[(new >= left) & (new <= right)]
    mid = 0.5 * (new[:-1] + new[1:])
    plus = _eval_shifted(bp, gcoef, total, new[:-1] + a, mid + a)
    minus = _eval_shifted(bp, gcoef, total, new[:-1] - a, mid - a)
    return new, (plus - minus) / (2.0 * a)


# ---------------------------------------------------------------------------
# product band functions

@dataclass(frozen=True, eq=False)
class ProductBandFunction:
    half_widths: tuple
    breakpoints: np.ndarray = field(repr=False)
    coefficients: np.ndarray = field(repr=False)
    tail_budget: float = 0.0

    @property
    def support_radius(self) -> float:
        return math.fsum(self.half_widths)

    @property
    def N(self) -> int:
        return len(self.half_widths)

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        bp, c = self.breakpoints, self.coefficients
        idx = np.searchsorted(bp, x, side="right") - 1
        inside = (idx >= 0) & (idx < bp.size - 1) & (np.abs(x) <= self.support_radius)
        out = np.zeros(x.shape)
        j = idx[inside]
        u = x[inside] - bp[j]
        acc = np.zeros(u.shape)
        for p in range(c.shape[1] - 1, -1, -1):
            acc = acc * u + c[j, p]
        out[inside] = acc
        return out

    def mass(self) -> float:
        _, total = _antiderivative(self.breakpoints, self.coefficients)
        return total

    def fourier(self, xi):
        """``prod_k sin(a_k xi) / (a_k xi)``; equals 1 at ``xi = 0``."""
        xi = np.asarray(xi, dtype=float)
        a = np.asarray(self.half_widths)
        return np.prod(np.sinc(np.multiply.outer(xi, a) / math.pi), axis=-1)

    def log_abs_fourier(self, xi):
        a = np.asarray(self.half_widths)
        s = np.abs(np.sinc(np.multiply.outer(np.asarray(xi, dtype=float), a) / math.pi))
        with np.errstate(divide="ignore"):
            return np.sum(np.log(s), axis=-1)

    def grid_spacing(self) -> float:
        return min(self.half_widths) / 8.0

    def samples(self, h: float | None = None, pad: float = 0.25):
        """Uniform samples on ``[-(A+pad), A+pad]`` with spacing ``h <= min a_k / 8``."""
        h = self.grid_spacing() if h is None else float(h)
        if h > self.grid_spacing():
            raise ParameterError("grid spacing must not exceed min(a_k)/8")
        n = int(math.ceil((self.support_radius + pad) / h))
        x = h * np.arange(-n, n + 1)
        return x, self(x)

    def grid_fourier(self, xi, h: float | None = None):
        """Trapezoid approximation of ``int f(x) exp(-i x xi) dx`` from the samples."""
        x, fx = self.samples(h)
        step = x[1] - x[0]
        xi = np.atleast_1d(np.asarray(xi, dtype=float))
        # f is even, so the transform is the cosine transform
        return np.array([step * math.fsum(fx * np.cos(x * q)) for q in xi])


def product_band(half_widths, tail_budget: float = 0.0) -> ProductBandFunction:
    """Build the exact convolution of normalised indicators with the given half widths."""
    a = [float(v) for v in half_widths]
    if not a or min(a) <= 0:
        raise ParameterError("half widths must be positive and nonempty")
    bp = np.array([-a[0], a[0]])
    coef = np.array([[1.0 / (2.0 * a[0])]])
    for i in range(1, len(a)):
        radius = math.fsum(a[: i + 1])
        bp, coef = _convolve_indicator(bp, coef, a[i], -radius, radius)
    return ProductBandFunction(tuple(a), bp, coef, tail_budget)


def ingham_product(theta: DecayProfile, N: int) -> ProductBandFunction:
    """``N`` factors with ``a_k = theta(2^k)``, ``k = 1..N``."""
    if not theta.integrable:
        raise PreconditionError(
            "theta(t)/t is not integrable: no compactly supported function has this decay")
    if N < 1:
        raise ParameterError("need at least one factor")
    k = np.arange(1, N + 1)
    a = np.asarray(theta(2.0 ** k), dtype=float)
    if np.any(a <= 0) or np.any(np.diff(a) > 0):
        raise ParameterError("theta must be positive and decreasing")
    tail = float(np.sum(theta(2.0 ** np.arange(N + 1, N + 200))))
    return product_band(a, tail)


def dilate(f: ProductBandFunction, delta: float) -> ProductBandFunction:
    """``f_delta(x) = f(x/delta)/delta``: support ``delta A``, transform ``fhat(delta xi)``."""
    if delta <= 0:
        raise ParameterError("delta must be positive")
    if delta == 1:
        return f
    p = np.arange(f.coefficients.shape[1])
    coef = f.coefficients * delta ** (-1.0 - p)
    a = tuple(delta * v for v in f.half_widths)
    return ProductBandFunction(a, f.breakpoints * delta, coef, f.tail_budget * delta)


# ---------------------------------------------------------------------------
# envelope fit

@dataclass(frozen=True, eq=False)
class InghamEnvelope:
    c0: float
    c1: float
    theta: DecayProfile
    xi: np.ndarray
    log_abs: np.ndarray

    def __call__(self, t):
        """``theta*(t) = c0 theta(c1 t)``."""
        return self.c0 * self.theta(self.c1 * np.asarray(t, dtype=float))

    @property
    def integrable(self) -> bool:
        return self.theta.integrable

    def rows(self):
        env = -self.xi * self(self.xi)
        for x, l, e in zip(self.xi, self.log_abs, env):
            yield float(x), float(l), float(e)


def default_decay_grid():
    return np.geomspace(1.0, 64.0, 2049)


def verify_ingham_decay(f: ProductBandFunction, theta: DecayProfile | None = None, grid=None,
                        c1_grid=None) -> InghamEnvelope:
    """Largest ``c0 theta(c1 t)`` with ``|fhat(xi)| <= exp(-xi c0 theta(c1 xi))`` on the grid.

    For each ``c1`` the admissible ``c0`` is ``min E(xi) / (xi theta(c1 xi))``
    with ``E = -log|fhat|``; the reported pair maximises the envelope area
    ``c0 sum xi theta(c1 xi)``.
    """
    theta = DecayProfile.inverse_sqrt() if theta is None else theta
    xi = default_decay_grid() if grid is None else np.asarray(grid, dtype=float)
    xi = xi[xi > 0]
    c1s = np.geomspace(2.0 ** -8, 2.0 ** 8, 161) if c1_grid is None else np.asarray(c1_grid)
    la = f.log_abs_fourier(xi)
    E = -la
    best = (-math.inf, 0.0, float(c1s[0]))
    for c1 in c1s:
        shape = xi * theta(c1 * xi)
        c0 = float(np.min(E / shape))
        area = c0 * float(np.sum(shape))
        if area > best[0]:
            best = (area, c0, float(c1))
    return InghamEnvelope(max(best[1], 0.0), best[2], theta, xi, la)


# ---------------------------------------------------------------------------
# Fourier-Jacobi transfer

@lru_cache(maxsize=64)
def _gram_norming(alpha: float, beta: float, M: int) -> np.ndarray:
    """``c_m = 1 / int R_m(cos s)^2 w(s) ds`` from the quadrature Gram diagonal."""
    rule = gauss_rule(CompactJacobi(alpha, beta), 4 * M + 16)
    R = op.jacobi_r_table(np.cos(rule.nodes), M, alpha, beta)
    out = 1.0 / ((R * R) @ rule.weights)
    out.setflags(write=False)
    return out


@dataclass(frozen=True, eq=False)
class TransferredSequence:
    """``htilde(0..M)`` with the certificate ``|htilde(m)| <= C exp(-sqrt(c_m) theta*(sqrt(c_m)))``."""

    alpha: float
    beta: float
    coeffs: np.ndarray
    envelope: Callable
    C: float
    support_window: float

    def __post_init__(self):
        c = np.array(self.coeffs, dtype=float)
        c.setflags(write=False)
        object.__setattr__(self, "coeffs", c)
        bad = np.abs(c) > self.C * self.certificate() * (1 + 1e-12) + 1e-300
        if bad.any():
            m = int(np.argmax(bad))
            raise InvariantViolation(f"transfer certificate fails at m = {m}")

    @property
    def M(self) -> int:
        return self.coeffs.size - 1

    @property
    def basis(self) -> BasisDescriptor:
        return BasisDescriptor(JacobiCompact(self.alpha, self.beta), self.M)

    def eigenvalues(self) -> np.ndarray:
        m = np.arange(self.M + 1, dtype=float)
        return m * (m + self.alpha + self.beta + 1.0)

    def certificate(self) -> np.ndarray:
        r = np.sqrt(self.eigenvalues())
        return np.exp(-r * np.asarray(self.envelope(r), dtype=float))

    def rows(self):
        cert = self.C * self.certificate()
        for m in range(self.M + 1):
            yield m, float(self.coeffs[m]), float(cert[m])


def jacobi_transfer(f: ProductBandFunction, alpha: float, beta: float, M: int,
                    envelope: Callable | None = None) -> TransferredSequence:
    """``htilde(m) = fhat(m + (alpha+beta+1)/2)`` for ``m = 0..M``.

    Requires ``alpha >= beta > -1/2`` and support radius ``< pi``.
    """
    if not (alpha >= beta > -0.5):
        raise PreconditionError(f"need alpha >= beta > -1/2, got ({alpha}, {beta})")
    if f.support_radius >= math.pi:
        raise PreconditionError(
            f"support radius {f.support_radius} is not below pi (Paley-Wiener obstruction)")
    if envelope is None:
        envelope = verify_ingham_decay(f)
    m = np.arange(M + 1, dtype=float)
    h = f.fourier(m + 0.5 * (alpha + beta + 1.0))
    r = np.sqrt(m * (m + alpha + beta + 1.0))
    cert = np.exp(-r * np.asarray(envelope(r), dtype=float))
    C = float(np.max(np.abs(h) / cert))
    return TransferredSequence(float(alpha), float(beta), h, envelope, C, f.support_radius)


@dataclass(frozen=True, eq=False)
class JacobiSynthesis:
    s: np.ndarray
    values: np.ndarray
    window: float
    peak: float
    outside_max: float

    @property
    def outside_relative(self) -> float:
        return self.outside_max / self.peak if self.peak > 0 else 0.0


def jacobi_series(seq: TransferredSequence) -> Callable:
    """``h(s) = sum_m Gamma(alpha+1) c_m htilde(m) R_m(cos s)`` as a callable."""
    c = _gram_norming(seq.alpha, seq.beta, seq.M)
    w = math.gamma(seq.alpha + 1.0) * c * seq.coeffs

    def h(s):
        s = np.asarray(s, dtype=float)
        R = op.jacobi_r_table(np.cos(s.ravel()), seq.M, seq.alpha, seq.beta)
        return (w @ R).reshape(s.shape)

    return h


def jacobi_synthesize(seq: TransferredSequence, s_grid) -> JacobiSynthesis:
    """Sample ``h`` and measure ``max |h|`` outside ``[0, A]``."""
    s = np.asarray(s_grid, dtype=float)
    if np.any((s < 0) | (s > math.pi)):
        raise ParameterError("s grid must lie in [0, pi]")
    vals = jacobi_series(seq)(s)
    out = s > seq.support_window
    peak = float(np.max(np.abs(vals)))
    outside = float(np.max(np.abs(vals[out]))) if out.any() else 0.0
    return JacobiSynthesis(s, vals, seq.support_window, peak, outside)


def jacobi_coefficients(h: Callable, alpha: float, beta: float, M: int, n_nodes=None) -> np.ndarray:
    """``htilde(m) = Gamma(alpha+1)^{-1} int h(s) R_m(cos s) w(s) ds``."""
    basis = BasisDescriptor(JacobiCompact(alpha, beta), M)
    seq = analyze(h, basis, n_nodes=n_nodes)
    return np.asarray(seq.coeffs) / math.gamma(alpha + 1.0)


# ---------------------------------------------------------------------------
# t-periodisation and the special-Hermite pipeline

@dataclass(frozen=True, eq=False)
class RadialProfile:
    """A radial function on ``C^n`` given by a callable of ``|z|`` with compact support."""

    func: Callable
    support: float
    breakpoints: tuple = ()

    def __call__(self, r):
        r = np.asarray(r, dtype=float)
        out = np.asarray(self.func(r))
        return np.where(r <= self.support, out, 0.0)

    def radial_breakpoints(self, panels: int = 16) -> np.ndarray:
        extra = [b for b in self.breakpoints if 0 < b < self.support]
        return np.unique(np.concatenate([np.linspace(0.0, self.support, panels + 1), extra]))


def smooth_bump(radius: float, power: int = 4) -> Callable:
    """``(1 - (x/radius)^2)^power`` on ``|x| < radius``, else 0."""
    def bump(x):
        x = np.asarray(x, dtype=float)
        u = x / radius
        return np.where(np.abs(u) < 1, (1.0 - u * u) ** power, 0.0)
    return bump


def periodize_t(F: Callable, z_support: float, t_support: tuple[float, float],
                t_nodes: int = 64, t_panels: int = 8) -> RadialProfile:
    """``g(z) = int F(|z|, t) e^{it} dt`` by composite Gauss-Legendre in ``t``.

    ``F(r, t)`` must vanish for ``r > z_support`` and for ``t`` outside ``t_support``.
    When ``t_support`` lies inside ``(-pi, pi)`` the periodisation over
    ``t + 2 pi j`` has a single nonzero term, which is this integral.
    """
    lo, hi = map(float, t_support)
    if not lo < hi:
        raise ParameterError("empty t support")
    tn, tw = composite_legendre(np.linspace(lo, hi, t_panels + 1), t_nodes)
    phase = tw * np.exp(1j * tn)

    def g(r):
        r = np.atleast_1d(np.asarray(r, dtype=float))
        vals = np.asarray(F(r[:, None], tn[None, :]))
        out = vals @ phase
        return out.real if np.all(np.abs(out.imag) <= 1e-14 * np.maximum(1.0, np.abs(out.real))) else out

    return RadialProfile(g, float(z_support))


@dataclass(frozen=True, eq=False)
class SplHermiteReport:
    k: np.ndarray
    R: np.ndarray
    norms: np.ndarray
    c0: float
    c1: float
    floor: float
    degenerate: bool
    monotone: bool

    @property
    def anchor(self) -> int:
        return int(np.argmax(self.norms))

    def envelope(self, n: int) -> np.ndarray:
        t = np.sqrt(2.0 * self.k + n)
        return self.c0 / np.sqrt(1.0 + self.c1 * t)

    @property
    def integrable(self) -> bool:
        return True  # c0 (1 + c1 t)^(-1/2) is integrable against dt/t


def splhermite_norms(g: RadialProfile, n: int, K: int, panel_nodes: int = 40, panels: int = 16):
    """``R_k(g)`` and ``||g x phi_k^{n-1}||`` for ``k = 0..K``."""
    R = radial_weyl_coeffs(g, K, n, breakpoints=g.radial_breakpoints(panels), panel_nodes=panel_nodes)
    return R, norm_from_weyl(R, np.arange(K + 1), n)


def splhermite_decay_report(g: RadialProfile, n: int, K: int, c1_grid=None) -> SplHermiteReport:
    """Fit ``theta*(t) = c0 (1 + c1 t)^(-1/2)`` to the twisted-convolution norms.

    The envelope is anchored at the largest norm, index ``p`` (``p = 0`` when
    the norms decrease): ``norm_k / norm_p <= exp(-(s_k - s_p))`` for
    ``k > p``, with ``s_k = t_k theta*(t_k)`` and ``t_k = sqrt(2k+n)``.
    The floor ``a = c0 min(1, c1^{-1/2})`` satisfies ``theta* >= a (1+t)^{-1/2}``,
    and ``c1`` is chosen to maximise it.
    """
    R, norms = splhermite_norms(g, n, K)
    k = np.arange(K + 1)
    monotone = bool(np.all(np.diff(norms) <= 0))
    if not np.any(norms > 0):
        return SplHermiteReport(k, R, norms, 0.0, 0.0, 0.0, True, monotone)
    p = int(np.argmax(norms))
    if p == K:
        return SplHermiteReport(k, R, norms, 0.0, 0.0, 0.0, False, monotone)
    t = np.sqrt(2.0 * k + n)
    with np.errstate(divide="ignore"):
        drop = np.log(norms[p]) - np.log(norms[p + 1:])
    c1s = np.geomspace(2.0 ** -10, 2.0 ** 6, 161) if c1_grid is None else np.asarray(c1_grid)
    best = (-math.inf, 0.0, float(c1s[0]))
    for c1 in c1s:
        s = t / np.sqrt(1.0 + c1 * t)
        c0 = float(np.min(drop / (s[p + 1:] - s[p])))
        a = c0 * min(1.0, c1 ** -0.5)
        if a > best[0]:
            best = (a, c0, float(c1))
    return SplHermiteReport(k, R, norms, best[1], best[2], best[0], False, monotone)


def splhermite_norms_via_expansion(g: RadialProfile, n: int, K: int, panels: int = 16,
                                   panel_nodes: int = 40) -> np.ndarray:
    """Independent route: ``||g x phi_k||^2 = (2 pi)^{2n} |S^{2n-1}| c_k |ghat(k)|^2``.

    ``ghat`` are the psi-basis coefficients of the expansion module.
    """
    from .expansion import laguerre_radial
    seq = analyze(g, laguerre_radial(n, K), breakpoints=g.radial_breakpoints(panels),
                  panel_nodes=panel_nodes)
    return np.sqrt((2 * math.pi) ** (2 * n) * sphere_area(2 * n) * seq.energies())


# ---------------------------------------------------------------------------
# Hermite transfers on R^{2m} and R^{n+1}

def even_transfer_constant(m: int) -> float:
    """``c'`` in ``||P_{2k} f||^2 = c' binom(k+m-1, k) |R_k(g)|^2`` for ``f(zeta) = g(sqrt2 zeta)``.

    Calibrated at ``k = 0`` with ``g = phi_0``: then ``f = exp(-|zeta|^2/2)`` is its own
    projection, so ``c' = ||f||^2 / R_0(phi_0)^2``, both sides by quadrature.
    """
    rule = gauss_rule(GeneralizedLaguerreWeight(m - 1.0), 8)
    # ||f||^2 = |S^{2m-1}| int e^{-r^2} r^{2m-1} dr = |S| / 2 int t^{m-1} e^{-t} dt
    norm_sq = 0.5 * sphere_area(2 * m) * float(np.sum(rule.weights))
    R0 = radial_weyl_coeffs(lambda r: np.exp(-0.25 * r * r), 0, m)[0]
    return norm_sq / R0 ** 2


@dataclass(frozen=True, eq=False)
class EvenTransfer:
    m: int
    norms_sq: np.ndarray  # ||P_j f||^2 for j = 0..2K (odd entries exactly 0)
    R: np.ndarray

    def level(self, j: int) -> float:
        return float(self.norms_sq[j])


def hermite_even_transfer(g: RadialProfile, m: int, K: int) -> EvenTransfer:
    """Hermite projection norms of ``f(zeta) = g(sqrt2 zeta)`` on ``R^{2m}`` up to level ``2K``."""
    R = radial_weyl_coeffs(g, K, m, breakpoints=g.radial_breakpoints())
    k = np.arange(K + 1, dtype=float)
    log_binom = np.array([math.lgamma(v + m) - math.lgamma(v + 1.0) - math.lgamma(m) for v in k])
    even = even_transfer_constant(m) * np.exp(log_binom) * np.abs(R) ** 2
    out = np.zeros(2 * K + 1)
    out[0::2] = even
    return EvenTransfer(m, out, R)


def reindex_even(theta: Callable) -> Callable:
    """``Theta(t) = sqrt2 theta(sqrt2 t)``: turns a ``sqrt(2k+m)`` envelope into a ``sqrt(4k+2m)`` one."""
    return lambda t: math.sqrt(2.0) * theta(math.sqrt(2.0) * np.asarray(t, dtype=float))


def reindex_odd(Theta: Callable) -> Callable:
    """``theta(t) = Theta(sqrt(1 + t^2))``."""
    return lambda t: Theta(np.sqrt(1.0 + np.asarray(t, dtype=float) ** 2))


@dataclass(frozen=True, eq=False)
class OddTransfer:
    n: int
    slice_norms: np.ndarray
    full_norms: np.ndarray

    @property
    def dominated(self) -> bool:
        return bool(np.all(self.slice_norms <= self.full_norms * (1 + 1e-14)))


def hermite_odd_transfer(table, K: int | None = None) -> OddTransfer:
    """Slice ``j = 0`` of an ``(alpha, j)`` coefficient table on ``R^{n+1}``.

    ``table`` has ``n + 1`` axes of equal length; entry ``[alpha..., j]`` is
    ``(F, Phi_(alpha, j))``.  Returns level norms of the slice and of ``F``.
    """
    T = np.asarray(table)
    if T.ndim < 2 or len(set(T.shape)) != 1:
        raise ParameterError("coefficient table must be a hypercube with at least 2 axes")
    n = T.ndim - 1
    K = T.shape[0] - 1 if K is None else int(K)
    idx = np.indices(T.shape)
    level_full = idx.sum(axis=0)
    sl = T[..., 0]
    level_slice = np.indices(sl.shape).sum(axis=0)
    full = np.array([math.sqrt(math.fsum(np.abs(T[level_full == k]) ** 2)) for k in range(K + 1)])
    part = np.array([math.sqrt(math.fsum(np.abs(sl[level_slice == k]) ** 2)) for k in range(K + 1)])
    return OddTransfer(n, part, full)


def tensor_hermite_level_norms(f: Callable, support: float, K: int, angles: int = 128,
                               panels: int = 16, panel_nodes: int = 40) -> np.ndarray:
    """``||P_j f||^2`` for a radial ``f(rho)`` on ``R^2``, ``j = 0..K``, from tensor coefficients.

    ``(f, h_a x h_b)`` is computed in polar coordinates: composite Gauss-Legendre
    in ``rho`` and the trapezoid rule in the angle, which is exact for the
    trigonometric polynomials of degree ``a + b < angles`` that appear.
    """
    if K >= angles:
        raise ParameterError("need more angles than the top level")
    rho, wr = composite_legendre(np.linspace(0.0, support, panels + 1), panel_nodes)
    phi = 2.0 * math.pi * np.arange(angles) / angles
    x = np.multiply.outer(rho, np.cos(phi)).ravel()
    y = np.multiply.outer(rho, np.sin(phi)).ravel()
    w = np.repeat(wr * rho * np.asarray(f(rho), dtype=float), angles) * (2.0 * math.pi / angles)
    Hx = op.hermite_table(x, K)
    Hy = op.hermite_table(y, K)
    C = (Hx * w) @ Hy.T
    a, b = np.indices(C.shape)
    lvl = a + b
    return np.array([math.fsum(C[lvl == j].ravel() ** 2) for j in range(K + 1)])
