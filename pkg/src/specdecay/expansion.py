"""Coefficients, reconstruction, Parseval and operator-power norms.

Convention for the radial families (``psi_k(0) = 1``)::

    fhat(k) = int f(r) psi_k(r) w(r) dr
    f(r)    = sum_k c_k fhat(k) psi_k(r)
    ||P^m f||^2 = sum_k lambda_k^(2m) c_k |fhat(k)|^2

with ``c_k = 1 / int psi_k^2 w``.  The Hermite line uses the orthonormal
``h_k`` (so ``c_k = 1``).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from . import orthopoly as op
from .errors import ParameterError, QuadratureEvaluationError
from .quadrature import (
    CompactJacobi,
    GeneralizedLaguerreWeight,
    HermiteWeight,
    QuadratureRule,
    RadialLaguerre,
    composite_legendre,
    default_node_count,
    gauss_rule,
    pairwise_sum,
)
from .scaled import ScaledValue, log_sum_exp

_LOG2 = math.log(2.0)


# ---------------------------------------------------------------------------
# basis families

@dataclass(frozen=True)
class HermiteLine:
    """Orthonormal Hermite functions on the line; eigenvalues ``2k+1``."""

    orthonormal = True
    support = (-math.inf, math.inf)

    def eigenvalues(self, K):
        return 2.0 * np.arange(K + 1) + 1.0

    def log_norming(self, K):
        return np.zeros(K + 1)

    def weight(self, r):
        return np.ones_like(np.asarray(r, dtype=float))

    def table(self, r, K):
        return op.hermite_table(r, K)

    def rule(self, N):
        return gauss_rule(HermiteWeight(), N), True


@dataclass(frozen=True)
class LaguerreRadial:
    """``psi_k^{n-1}(r)`` on ``(0, inf)`` with weight ``r^(2n-1)``; eigenvalues ``2k+n``."""

    n: int = 1
    orthonormal = False
    support = (0.0, math.inf)

    def __post_init__(self):
        if int(self.n) != self.n or self.n < 1:
            raise ParameterError(f"dimension n must be a positive integer, got {self.n}")

    @property
    def delta(self) -> int:
        return self.n - 1

    def eigenvalues(self, K):
        return 2.0 * np.arange(K + 1) + self.n

    def log_norming(self, K):
        # 1 / (2^{n-1} (n-1)! k!(n-1)!/(k+n-1)!)
        n = self.n
        k = np.arange(K + 1, dtype=float)
        log_ratio = np.array([math.lgamma(kk + 1) + math.lgamma(n) - math.lgamma(kk + n) for kk in k])
        return -((n - 1) * _LOG2 + math.lgamma(n) + log_ratio)

    def weight(self, r):
        r = np.asarray(r, dtype=float)
        return r ** (2 * self.n - 1)

    def table(self, r, K):
        return op.laguerre_psi_table(r, K, self.n)

    def rule(self, N):
        return gauss_rule(RadialLaguerre(self.n), N), True


@dataclass(frozen=True)
class JacobiCompact:
    """``R_d^{(alpha,beta)}(cos s)`` on ``(0, pi)`` with ``d = step * k``.

    Weight ``sin(s/2)^(2 alpha+1) cos(s/2)^(2 beta+1)``; eigenvalues
    ``d (d + alpha + beta + 1)``.  ``step=2`` keeps even degrees only.
    """

    alpha: float = 0.0
    beta: float = 0.0
    step: int = 1
    orthonormal = False
    support = (0.0, math.pi)

    def __post_init__(self):
        CompactJacobi(self.alpha, self.beta)
        if self.step not in (1, 2):
            raise ParameterError("step must be 1 or 2")

    def degrees(self, K):
        return self.step * np.arange(K + 1)

    def eigenvalues(self, K):
        d = self.degrees(K).astype(float)
        return d * (d + self.alpha + self.beta + 1.0)

    def log_norming(self, K):
        shift = (self.alpha + self.beta + 1.0) * _LOG2
        return np.array([shift - op.jacobi_log_norm_sq(int(d), self.alpha, self.beta)
                         for d in self.degrees(K)])

    def weight(self, s):
        s = np.asarray(s, dtype=float)
        return np.sin(0.5 * s) ** (2 * self.alpha + 1) * np.cos(0.5 * s) ** (2 * self.beta + 1)

    def table(self, s, K):
        full = op.jacobi_r_table(np.cos(np.asarray(s, dtype=float)), self.step * K,
                                 self.alpha, self.beta, max_degree=max(op.DEFAULT_MAX_DEGREE, self.step * K))
        return full[:: self.step]

    def rule(self, N):
        return gauss_rule(CompactJacobi(self.alpha, self.beta), N), False


@dataclass(frozen=True)
class BasisDescriptor:
    """An eigenfunction family truncated at degree ``K``."""

    family: HermiteLine | LaguerreRadial | JacobiCompact
    K: int

    def __post_init__(self):
        if self.K < 0:
            raise ParameterError("K must be nonnegative")
        cap = op.DEFAULT_MAX_DEGREE * (2 if isinstance(self.family, JacobiCompact) and self.family.step == 2 else 1)
        if self.K > cap:
            raise op.DegreeBoundsError(f"K = {self.K} exceeds the degree cap {cap}")

    @property
    def orthonormal(self) -> bool:
        return self.family.orthonormal

    @property
    def eigenvalues(self) -> np.ndarray:
        return self.family.eigenvalues(self.K)

    @property
    def log_norming(self) -> np.ndarray:
        return self.family.log_norming(self.K)

    @property
    def norming(self) -> np.ndarray:
        return np.exp(self.log_norming)

    def weight(self, r):
        return self.family.weight(r)

    def table(self, r, K=None):
        """``psi_0..psi_K`` at the points ``r``; shape ``(K+1, len(r))``."""
        return self.family.table(np.atleast_1d(np.asarray(r, dtype=float)), self.K if K is None else K)


def hermite_line(K: int) -> BasisDescriptor:
    return BasisDescriptor(HermiteLine(), K)


def laguerre_radial(n: int, K: int) -> BasisDescriptor:
    return BasisDescriptor(LaguerreRadial(n), K)


def jacobi_compact(alpha: float, beta: float, K: int, step: int = 1) -> BasisDescriptor:
    return BasisDescriptor(JacobiCompact(alpha, beta, step), K)


# ---------------------------------------------------------------------------
# sequences

@dataclass(frozen=True, eq=False)
class CoefficientSequence:
    basis: BasisDescriptor
    coeffs: np.ndarray

    def __post_init__(self):
        c = np.array(self.coeffs)
        if c.dtype.kind not in "fc":
            c = c.astype(float)
        if c.ndim != 1 or c.size == 0:
            raise ParameterError("coefficients must be a nonempty 1-D sequence")
        if c.size > self.basis.K + 1:
            raise ParameterError(f"{c.size} coefficients exceed basis degree {self.basis.K}")
        if not np.all(np.isfinite(c)):
            raise ParameterError("coefficients must be finite")
        c.setflags(write=False)
        object.__setattr__(self, "coeffs", c)

    @property
    def K(self) -> int:
        return self.coeffs.size - 1

    @property
    def eigenvalues(self):
        return self.basis.family.eigenvalues(self.K)

    @property
    def log_norming(self):
        return self.basis.family.log_norming(self.K)

    def energies(self) -> np.ndarray:
        """``c_k |fhat(k)|^2``."""
        return np.exp(self.log_norming) * np.abs(self.coeffs) ** 2

    def parseval_norm(self) -> float:
        return parseval_norm(self)

    def operator_norms(self, M: int) -> "OperatorPowerNorms":
        return operator_norms(self, M)

    def tail_indicator(self) -> float:
        """``c_K |fhat(K)|^2 / sum_k c_k |fhat(k)|^2`` (0 for the zero sequence)."""
        e = self.energies()
        total = math.fsum(e)
        return float(e[-1] / total) if total > 0 else 0.0


@dataclass(frozen=True, eq=False)
class OperatorPowerNorms:
    """``||P^m f||`` for ``m = 0..M``, stored as natural logs."""

    log_values: np.ndarray

    def __post_init__(self):
        v = np.array(self.log_values, dtype=float)
        v.setflags(write=False)
        object.__setattr__(self, "log_values", v)

    @classmethod
    def from_log(cls, logs) -> "OperatorPowerNorms":
        return cls(np.asarray(logs, dtype=float))

    @property
    def M(self) -> int:
        return self.log_values.size - 1

    @property
    def values(self) -> tuple[ScaledValue, ...]:
        return tuple(ScaledValue.from_log(v) for v in self.log_values)

    def as_floats(self) -> np.ndarray:
        with np.errstate(over="ignore", under="ignore"):
            return np.exp(self.log_values)


@dataclass(frozen=True, eq=False)
class CarlemanSums:
    terms: np.ndarray
    partial_sums: np.ndarray
    divergent: bool


# ---------------------------------------------------------------------------
# operations

def _nodes_and_weights(basis, K, rule, n_nodes, breakpoints, panel_nodes):
    fam = basis.family
    if breakpoints is not None:
        x, w = composite_legendre(breakpoints, panel_nodes)
        lo, hi = fam.support
        if x.min() < lo or x.max() > hi:
            raise ParameterError("breakpoints leave the basis support")
        return x, w * fam.weight(x)
    if rule is None:
        rule, transformed = fam.rule(n_nodes or default_node_count(K * getattr(fam, "step", 1)))
    else:
        transformed = isinstance(rule.family, (HermiteWeight, RadialLaguerre))
    if not isinstance(rule, QuadratureRule):
        raise ParameterError("rule must be a QuadratureRule")
    w = rule.transformed_weights if transformed else rule.weights
    return rule.nodes, w


def analyze(f: Callable, basis: BasisDescriptor, K: int | None = None, *, rule=None,
            n_nodes: int | None = None, breakpoints=None, panel_nodes: int = 32,
            chunk_size: int | None = None) -> CoefficientSequence:
    """Coefficients ``fhat(0..K)`` of ``f`` by quadrature.

    By default a Gauss rule of the basis weight with ``4K+16`` nodes is used.
    For compactly supported or piecewise-smooth ``f`` pass ``breakpoints``
    (interval ends plus kinks) to switch to composite Gauss-Legendre.
    """
    K = basis.K if K is None else int(K)
    if K > basis.K:
        raise ParameterError(f"cutoff {K} exceeds basis degree {basis.K}")
    x, w = _nodes_and_weights(basis, K, rule, n_nodes, breakpoints, panel_nodes)
    fx = np.asarray(f(x))
    if fx.ndim == 0:
        fx = np.broadcast_to(fx, x.shape)
    if not np.all(np.isfinite(fx)):
        idx = int(np.argmin(np.isfinite(fx)))
        raise QuadratureEvaluationError(f"integrand is not finite at node {idx} (x = {x[idx]!r})")
    table = basis.table(x, K)
    return CoefficientSequence(basis, pairwise_sum((w * fx)[:, None] * table.T, chunk_size))


def synthesize(seq: CoefficientSequence, r):
    """``sum_k c_k fhat(k) psi_k(r)`` (vectorised in ``r``)."""
    r_arr = np.atleast_1d(np.asarray(r, dtype=float))
    table = seq.basis.table(r_arr, seq.K)
    weighted = np.exp(seq.log_norming) * seq.coeffs
    out = pairwise_sum(weighted[:, None] * table)
    return out[0] if np.ndim(r) == 0 else out


def parseval_norm(seq: CoefficientSequence) -> float:
    """``sqrt(sum_k c_k |fhat(k)|^2)``."""
    return math.sqrt(math.fsum(seq.energies()))


def _log_energy_terms(seq):
    a = np.abs(seq.coeffs)
    with np.errstate(divide="ignore"):
        return seq.log_norming + 2.0 * np.log(a), np.log(seq.eigenvalues)


def operator_norms(seq: CoefficientSequence, M: int) -> OperatorPowerNorms:
    """``||P^m f||`` for ``m = 0..M`` accumulated in log space."""
    if M < 0:
        raise ParameterError("M must be nonnegative")
    base, loglam = _log_energy_terms(seq)
    out = np.empty(M + 1)
    for m in range(M + 1):
        if m == 0:
            terms = base
        else:
            terms = np.where(np.isfinite(loglam), base + 2 * m * loglam, -math.inf)
        out[m] = 0.5 * log_sum_exp(terms)
    return OperatorPowerNorms(out)


def carleman_partial_sums(norms: OperatorPowerNorms) -> CarlemanSums:
    """``S_M = sum_{m=1}^M ||P^m f||^(-1/2m)`` computed as ``exp(-log||.||/2m)``.

    A zero norm makes the corresponding term infinite; the result is then
    flagged divergent directly.
    """
    logs = norms.log_values[1:]
    m = np.arange(1, logs.size + 1, dtype=float)
    with np.errstate(over="ignore"):
        terms = np.exp(-logs / (2.0 * m))
    divergent = bool(np.any(logs == -math.inf))
    return CarlemanSums(terms, np.cumsum(terms), divergent)


def gram_matrix(basis: BasisDescriptor, n_nodes: int | None = None, normalized: bool = True) -> np.ndarray:
    """``int psi_j psi_k w`` by the basis Gauss rule; scaled by ``sqrt(c_j c_k)`` when ``normalized``."""
    x, w = _nodes_and_weights(basis, basis.K, None, n_nodes, None, None)
    T = basis.table(x, basis.K)
    G = (T * w) @ T.T
    if normalized:
        s = np.exp(0.5 * basis.log_norming)
        G = G * np.outer(s, s)
    return G


def laguerre_function_gram(delta: float, K: int, n_nodes: int | None = None) -> np.ndarray:
    """Gram matrix of the orthonormal Laguerre functions ``L_k^delta`` on ``L^2(R+, dt)``."""
    rule = gauss_rule(GeneralizedLaguerreWeight(delta), n_nodes or default_node_count(K))
    t = rule.nodes
    w = np.exp(rule.log_weights + t - delta * np.log(t))
    T = op.laguerre_normalized_table(t, K, delta)
    return (T * w) @ T.T
