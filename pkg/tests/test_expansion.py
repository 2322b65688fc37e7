import math

import mpmath as mp
import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from specdecay import orthopoly as op
from specdecay.errors import ParameterError, QuadratureEvaluationError
from specdecay.expansion import (
    CoefficientSequence,
    OperatorPowerNorms,
    analyze,
    carleman_partial_sums,
    gram_matrix,
    hermite_line,
    jacobi_compact,
    laguerre_function_gram,
    laguerre_radial,
    operator_norms,
    parseval_norm,
    synthesize,
)


def test_single_hermite_function_has_unit_coefficient():
    seq = analyze(lambda x: op.hermite_table(x, 3)[3], hermite_line(10))
    expected = np.zeros(11)
    expected[3] = 1.0
    np.testing.assert_allclose(seq.coeffs, expected, atol=1e-14)


@pytest.mark.parametrize("n", [1, 2, 3])
def test_psi_coefficient_is_reciprocal_norming(n):
    seq = analyze(lambda r: op.laguerre_psi_table(r, 2, n)[2], laguerre_radial(n, 8))
    c2 = math.exp(seq.log_norming[2])
    assert seq.coeffs[2] * c2 == pytest.approx(1.0, rel=1e-13)
    assert np.max(np.abs(np.delete(seq.coeffs, 2))) < 1e-13


def test_norming_matches_closed_form():
    for n in (1, 2, 3):
        lc = laguerre_radial(n, 64).log_norming
        for k in (0, 10, 64):
            c = 1.0 / (2 ** (n - 1) * math.factorial(n - 1) * op.binomial_ratio(k, n))
            assert math.exp(lc[k]) == pytest.approx(c, rel=1e-12)


@pytest.mark.parametrize("basis", [hermite_line(60), laguerre_radial(2, 60), jacobi_compact(1.0, 0.0, 40)])
def test_round_trip(basis):
    fam = basis.family
    f = {
        "HermiteLine": lambda x: np.exp(-0.4 * x * x) * (1 + x),
        "LaguerreRadial": lambda r: np.exp(-0.3 * r * r) * (1 + r * r),
        "JacobiCompact": lambda s: np.cos(s) ** 5 - 0.25 * np.cos(s),
    }[type(fam).__name__]
    seq = analyze(f, basis)
    pts = np.linspace(0.05, 3.0, 17)
    np.testing.assert_allclose(synthesize(seq, pts), f(pts), atol=1e-10)


def test_parseval_matches_direct_norm():
    f = lambda x: np.exp(-0.25 * x * x)
    seq = analyze(f, hermite_line(90))
    assert parseval_norm(seq) == pytest.approx(math.sqrt(math.sqrt(2 * math.pi)), rel=1e-12)
    assert seq.tail_indicator() < 1e-20


def test_breakpoints_for_compact_support():
    bump = lambda r: np.where(r < 1, (1 - r * r) ** 3, 0.0)
    basis = laguerre_radial(1, 20)
    seq = analyze(bump, basis, breakpoints=np.linspace(0, 1, 9))
    ref = float(mp.quad(lambda r: (1 - r * r) ** 3 * mp.laguerre(5, 0, r * r / 2) * mp.exp(-r * r / 4) * r, [0, 1]))
    assert seq.coeffs[5] == pytest.approx(ref, rel=1e-12)


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 2 ** 32 - 1), st.integers(0, 8))
def test_operator_norms_against_direct_sum(seed, M):
    rng = np.random.default_rng(seed)
    basis = laguerre_radial(2, 30)
    seq = CoefficientSequence(basis, rng.standard_normal(31) * np.exp(-0.5 * np.arange(31)))
    norms = operator_norms(seq, M).as_floats()
    lam = seq.eigenvalues
    c = np.exp(seq.log_norming)
    for m in range(M + 1):
        direct = math.sqrt(math.fsum(lam ** (2 * m) * c * seq.coeffs ** 2))
        assert norms[m] == pytest.approx(direct, rel=1e-12)


def test_operator_norms_far_beyond_double_range():
    seq = CoefficientSequence(hermite_line(400), np.ones(401))
    norms = operator_norms(seq, 200)
    # dominated by lambda_K^m = 801^200
    assert norms.log_values[-1] == pytest.approx(200 * math.log(801.0), rel=1e-3)
    assert norms.values[-1].log() == pytest.approx(norms.log_values[-1])


def test_carleman_gaussian_and_fast_growth():
    seq = CoefficientSequence(hermite_line(0), np.array([1.0]))
    s = carleman_partial_sums(operator_norms(seq, 25))
    np.testing.assert_array_equal(s.partial_sums, np.arange(1, 26, dtype=float))
    fast = carleman_partial_sums(OperatorPowerNorms.from_log(np.arange(50.0) ** 2))
    assert fast.partial_sums[-1] - fast.partial_sums[39] < 1e-6


def test_zero_norm_flags_divergence():
    s = carleman_partial_sums(OperatorPowerNorms.from_log([0.0, -math.inf, -math.inf]))
    assert s.divergent


def test_validation():
    with pytest.raises(ParameterError):
        CoefficientSequence(hermite_line(3), np.ones(5))
    with pytest.raises(ParameterError):
        CoefficientSequence(hermite_line(3), np.array([1.0, np.inf]))
    with pytest.raises(ParameterError):
        analyze(np.cos, hermite_line(3), K=4)
    with pytest.raises(QuadratureEvaluationError):
        analyze(lambda x: np.full_like(x, np.nan), hermite_line(3))


def test_sequences_are_immutable():
    seq = CoefficientSequence(hermite_line(2), np.ones(3))
    with pytest.raises(ValueError):
        seq.coeffs[0] = 2.0


def test_gram_helpers():
    assert np.abs(gram_matrix(jacobi_compact(7.0, 3.0, 30)) - np.eye(31)).max() < 1e-12
    assert np.abs(laguerre_function_gram(0.5, 50) - np.eye(51)).max() < 1e-12


def test_carleman_factorial_threshold_grows_like_log():
    C, M = 3.0, 4000
    m = np.arange(M + 1, dtype=float)
    logs = np.array([math.lgamma(2 * k + 1) for k in range(M + 1)]) + m * math.log(C)
    sums = carleman_partial_sums(OperatorPowerNorms.from_log(logs)).partial_sums
    slope = math.e / (2 * math.sqrt(C))
    assert M * (sums[-1] - sums[-2]) == pytest.approx(slope, rel=1e-3)
    # S_M - slope log M settles to a constant
    drift = [sums[n - 1] - slope * math.log(n) for n in (1000, 2000, 4000)]
    assert abs(drift[2] - drift[1]) < 0.5 * abs(drift[1] - drift[0]) + 1e-4
    assert abs(drift[2] - drift[1]) < 1e-3
