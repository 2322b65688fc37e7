"""Gaussian quadrature for the Hermite, Laguerre and Jacobi weight families.

Nodes come from the symmetric tridiagonal (Jacobi) matrix of recurrence
coefficients, are polished by Newton steps on the orthonormal recurrence, and
weights use the Christoffel formula ``w_i = mu_0 / sum_k p_k(x_i)^2`` kept in
log form so that Hermite/Laguerre weights never underflow silently.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from scipy.linalg import LinAlgError, eigh_tridiagonal

from .errors import NumericalError, ParameterError, QuadratureEvaluationError

_LOG2 = math.log(2.0)
_BIG = 2.0 ** 250


# ---------------------------------------------------------------------------
# weight families

@dataclass(frozen=True)
class HermiteWeight:
    """``exp(-x^2)`` on the real line."""

    def coefficients(self, N):
        k = np.arange(N + 1, dtype=float)
        return np.zeros(N + 1), np.sqrt(k / 2.0), 0.5 * math.log(math.pi)

    def exp_factor(self, nodes):
        return nodes * nodes


@dataclass(frozen=True)
class GeneralizedLaguerreWeight:
    """``t^delta exp(-t)`` on ``(0, inf)``."""

    delta: float = 0.0

    def __post_init__(self):
        if not self.delta > -1:
            raise ParameterError(f"Laguerre type must exceed -1, got {self.delta}")

    def coefficients(self, N):
        k = np.arange(N + 1, dtype=float)
        d = self.delta
        return 2 * k + d + 1.0, np.sqrt(k * (k + d)), math.lgamma(d + 1.0)

    def exp_factor(self, nodes):
        return nodes


@dataclass(frozen=True)
class JacobiWeight:
    """``(1-x)^alpha (1+x)^beta`` on ``(-1, 1)``."""

    alpha: float = 0.0
    beta: float = 0.0

    def __post_init__(self):
        if not (self.alpha > -1 and self.beta > -1):
            raise ParameterError(
                f"Jacobi parameters must exceed -1, got ({self.alpha}, {self.beta})")

    def coefficients(self, N):
        return _jacobi_coefficients(self.alpha, self.beta, N)

    def exp_factor(self, nodes):
        return np.zeros_like(nodes)


@dataclass(frozen=True)
class RadialLaguerre:
    """``r^(2n-1) exp(-r^2/2)`` on ``(0, inf)``, via ``t = r^2/2``."""

    n: int = 1

    def __post_init__(self):
        if int(self.n) != self.n or self.n < 1:
            raise ParameterError(f"dimension n must be a positive integer, got {self.n}")

    def exp_factor(self, nodes):
        return 0.5 * nodes * nodes


@dataclass(frozen=True)
class CompactJacobi:
    """``sin(s/2)^(2 alpha+1) cos(s/2)^(2 beta+1)`` on ``(0, pi)``, via ``x = cos s``."""

    alpha: float = 0.0
    beta: float = 0.0

    def __post_init__(self):
        JacobiWeight(self.alpha, self.beta)

    def exp_factor(self, nodes):
        return np.zeros_like(nodes)


WeightFamily = HermiteWeight | GeneralizedLaguerreWeight | JacobiWeight | RadialLaguerre | CompactJacobi


def _jacobi_coefficients(alpha, beta, N):
    a, b = float(alpha), float(beta)
    ab = a + b
    k = np.arange(N + 1, dtype=float)
    s = 2 * k + ab
    with np.errstate(divide="ignore", invalid="ignore"):
        diag = (b * b - a * a) / (s * (s + 2.0))
        off2 = 4 * k * (k + a) * (k + b) * (k + ab) / (s * s * (s + 1.0) * (s - 1.0))
    diag[0] = (b - a) / (ab + 2.0)
    off2[0] = 0.0
    if N >= 1:
        off2[1] = 4 * (1 + a) * (1 + b) / ((2 + ab) ** 2 * (3 + ab))
    log_mu0 = ((ab + 1.0) * _LOG2 + math.lgamma(a + 1.0) + math.lgamma(b + 1.0)
               - math.lgamma(ab + 2.0))
    return diag, np.sqrt(off2), log_mu0


# ---------------------------------------------------------------------------
# rules

@dataclass(frozen=True, eq=False)
class QuadratureRule:
    """Immutable Gauss rule.  ``weights`` may underflow; ``log_weights`` never does."""

    family: object
    nodes: np.ndarray
    log_weights: np.ndarray
    exactness_degree: int
    _log_exp: np.ndarray = field(repr=False, default=None)

    def __post_init__(self):
        for name in ("nodes", "log_weights", "_log_exp"):
            arr = getattr(self, name)
            if arr is not None:
                arr = np.array(arr, dtype=float)
                arr.setflags(write=False)
                object.__setattr__(self, name, arr)

    @property
    def size(self) -> int:
        return self.nodes.size

    @property
    def weights(self) -> np.ndarray:
        with np.errstate(under="ignore"):
            return np.exp(self.log_weights)

    @property
    def transformed_weights(self) -> np.ndarray:
        """Weights with the exponential factor of the weight divided out.

        ``sum(tw * g(nodes))`` approximates ``int g * (polynomial part of w)``,
        which is how integrands that already carry Gaussian factors (Hermite
        functions, Laguerre functions) are integrated without underflow.
        """
        return np.exp(self.log_weights + self._log_exp)


def default_node_count(max_degree: int) -> int:
    """``4 K + 16`` nodes for integrands built from degree-``K`` functions."""
    return 4 * int(max_degree) + 16


def _eval_orthonormal(lin, diag, off, N, npts):
    """Orthonormal recurrence up to ``p_N`` with derivative and log sum of squares.

    ``lin(k)`` returns ``x - diag[k]`` at every point; ``p_0 = 1``.
    Returns ``(p_N, p_N', log(sum_{k<N} p_k^2))`` with ``p_N, p_N'`` sharing an
    arbitrary common scale (only their ratio is meaningful).
    """
    prev = np.zeros(npts)
    dprev = np.zeros(npts)
    cur = np.ones(npts)
    dcur = np.zeros(npts)
    acc = np.zeros(npts)
    scale = np.zeros(npts)  # log of the factor removed from cur
    for k in range(N):
        acc += cur * cur
        lk = lin(k)
        nxt = (lk * cur - off[k] * prev) / off[k + 1]
        dnxt = (cur + lk * dcur - off[k] * dprev) / off[k + 1]
        prev, cur, dprev, dcur = cur, nxt, dcur, dnxt
        big = np.maximum(np.abs(cur), np.abs(prev))
        bad = big > _BIG
        if bad.any():
            f = big[bad]
            prev[bad] /= f
            cur[bad] /= f
            dprev[bad] /= f
            dcur[bad] /= f
            acc[bad] /= f * f
            scale[bad] += np.log(f)
    return cur, dcur, np.log(acc) + 2.0 * scale


def _eig_nodes(diag, off, N):
    if N == 1:
        return np.array([diag[0]])
    try:
        return eigh_tridiagonal(diag[:N], off[1:N], eigvals_only=True, lapack_driver="stemr")
    except (LinAlgError, ValueError) as exc:  # pragma: no cover - LAPACK failure
        raise NumericalError(f"tridiagonal eigenvalue iteration failed for N={N}: {exc}") from exc


def _polish(x, diag, off, N, steps=2):
    spacing = np.min(np.diff(x)) if x.size > 1 else 1.0
    for _ in range(steps):
        p, dp, _ = _eval_orthonormal(lambda k: x - diag[k], diag, off, N, x.size)
        step = p / dp
        ok = np.isfinite(step) & (np.abs(step) < 0.1 * spacing)
        x = np.where(ok, x - step, x)
    return x


def _standard_rule(diag, off, log_mu0, N):
    x = _polish(np.sort(_eig_nodes(diag, off, N)), diag, off, N)
    _, _, logs = _eval_orthonormal(lambda k: x - diag[k], diag, off, N, x.size)
    return x, log_mu0 - logs


def gauss_rule(family, N: int) -> QuadratureRule:
    """``N``-point Gauss rule for ``family``; exact for degree ``2N - 1``."""
    N = int(N)
    if N < 1:
        raise ParameterError(f"node count must be positive, got {N}")
    if isinstance(family, (HermiteWeight, GeneralizedLaguerreWeight, JacobiWeight)):
        diag, off, log_mu0 = family.coefficients(N)
        nodes, logw = _standard_rule(diag, off, log_mu0, N)
        if isinstance(family, HermiteWeight) and N > 1:
            # enforce exact symmetry
            nodes = 0.5 * (nodes - nodes[::-1])
            logw = 0.5 * (logw + logw[::-1])
    elif isinstance(family, RadialLaguerre):
        base = gauss_rule(GeneralizedLaguerreWeight(family.n - 1.0), N)
        nodes = np.sqrt(2.0 * base.nodes)
        logw = base.log_weights + (family.n - 1) * _LOG2
    elif isinstance(family, CompactJacobi):
        nodes, logw = _compact_jacobi(family.alpha, family.beta, N)
    else:
        raise ParameterError(f"unknown weight family {family!r}")
    if not np.all(np.isfinite(logw)) or not np.all(np.diff(nodes) > 0):
        raise NumericalError(f"rule construction for {family!r}, N={N} produced invalid nodes/weights")
    return QuadratureRule(family, nodes, logw, 2 * N - 1, family.exp_factor(nodes))


def _compact_jacobi(alpha, beta, N):
    diag, off, log_mu0 = _jacobi_coefficients(alpha, beta, N)
    x = np.sort(_eig_nodes(diag, off, N))[::-1]
    s = np.arccos(np.clip(x, -1.0, 1.0))

    def lin_for(s):
        # x - diag[k] formed around the nearer endpoint to keep relative accuracy
        half = s < 0.5 * math.pi
        u = 2.0 * np.sin(0.5 * s) ** 2
        v = 2.0 * np.cos(0.5 * s) ** 2
        return lambda k: np.where(half, (1.0 - diag[k]) - u, (-1.0 - diag[k]) + v)

    spacing = np.min(np.diff(s)) if N > 1 else 1.0
    for _ in range(3):
        p, dp, _ = _eval_orthonormal(lin_for(s), diag, off, N, N)
        step = p / (-np.sin(s) * dp)
        ok = np.isfinite(step) & (np.abs(step) < 0.1 * spacing)
        s = np.where(ok, s - step, s)
    _, _, logs = _eval_orthonormal(lin_for(s), diag, off, N, N)
    logw = log_mu0 - logs - (alpha + beta + 1.0) * _LOG2
    return s, logw


# ---------------------------------------------------------------------------
# summation and integration

def _tree(v):
    n = v.shape[0]
    size = 1 << max(0, (n - 1).bit_length())
    if size != n:
        pad = np.zeros((size - n,) + v.shape[1:], dtype=v.dtype)
        v = np.concatenate([v, pad])
    while v.shape[0] > 1:
        v = v[0::2] + v[1::2]
    return v[0]


def pairwise_sum(values, chunk_size: int | None = None, workers: int | None = None):
    """Pairwise (binary-tree) sum along axis 0.

    The tree is fixed by zero-padding to a power of two, so splitting the input
    into aligned power-of-two chunks (optionally summed in parallel) yields
    bitwise the same result as the unchunked sum.
    """
    v = np.asarray(values)
    if v.dtype.kind not in "fc":
        v = v.astype(float)
    if v.shape[0] == 0:
        return np.zeros(v.shape[1:], dtype=v.dtype)[()]
    if chunk_size is None or chunk_size >= v.shape[0]:
        return _tree(v)[()]
    if chunk_size & (chunk_size - 1):
        raise ParameterError("chunk_size must be a power of two")
    n = v.shape[0]
    total = 1 << (n - 1).bit_length()
    pieces = [v[i:i + chunk_size] for i in range(0, n, chunk_size)]

    def leaf(p):
        if p.shape[0] < chunk_size:
            pad = np.zeros((chunk_size - p.shape[0],) + p.shape[1:], dtype=p.dtype)
            p = np.concatenate([p, pad])
        return _tree(p)

    if workers and workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            partial = list(pool.map(leaf, pieces))
    else:
        partial = [leaf(p) for p in pieces]
    n_chunks = total // chunk_size
    partial += [np.zeros_like(partial[0])] * (n_chunks - len(partial))
    return _tree(np.stack(partial))[()]


def integrate(rule: QuadratureRule, f: Callable, transformed: bool = False):
    """``sum(w_i f(x_i))`` by pairwise summation.

    With ``transformed=True`` the exponential factor of the weight is assumed
    to be part of ``f`` (see :attr:`QuadratureRule.transformed_weights`).
    """
    vals = np.asarray(f(rule.nodes))
    if vals.ndim == 0:
        vals = np.broadcast_to(vals, rule.nodes.shape)
    bad = ~np.isfinite(vals)
    if bad.any():
        idx = int(np.argwhere(bad)[0][0])
        raise QuadratureEvaluationError(
            f"integrand is not finite at node {idx} (x = {rule.nodes[idx]!r})")
    w = rule.transformed_weights if transformed else rule.weights
    w = w.reshape(w.shape + (1,) * (vals.ndim - 1))
    return pairwise_sum(w * vals)


def legendre_rule(N: int):
    """Gauss-Legendre nodes and weights on ``[-1, 1]``."""
    r = gauss_rule(JacobiWeight(0.0, 0.0), N)
    return r.nodes, r.weights


def composite_legendre(breakpoints, N: int):
    """Gauss-Legendre with ``N`` nodes on every interval between sorted breakpoints."""
    bp = np.asarray(breakpoints, dtype=float)
    if bp.ndim != 1 or bp.size < 2 or np.any(np.diff(bp) <= 0):
        raise ParameterError("breakpoints must be strictly increasing with at least two entries")
    x, w = legendre_rule(N)
    half = 0.5 * np.diff(bp)
    mid = 0.5 * (bp[1:] + bp[:-1])
    nodes = (mid[:, None] + half[:, None] * x[None, :]).ravel()
    weights = (half[:, None] * w[None, :]).ravel()
    return nodes, weights
