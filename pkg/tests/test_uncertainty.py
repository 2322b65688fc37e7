import math

import mpmath as mp
import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from specdecay import uncertainty as unc
from specdecay.errors import ParameterError, PreconditionError, TruncationError
from specdecay.expansion import CoefficientSequence, hermite_line, laguerre_radial, operator_norms


def random_sequence(seed, K=30):
    rng = np.random.default_rng(seed)
    rate = rng.uniform(0.2, 3.0)
    return CoefficientSequence(laguerre_radial(1, K), rng.standard_normal(K + 1) * np.exp(-rate * np.arange(K + 1)))


def test_moments_against_direct_sum():
    seq = random_sequence(3)
    ms = unc.moments(seq, 6)
    lam, c = seq.eigenvalues, np.exp(seq.log_norming)
    for m in range(7):
        direct = math.fsum(lam ** m * c * np.abs(seq.coeffs))
        assert ms.moment(2 * m).to_float() == pytest.approx(direct, rel=1e-12)
    assert ms.moment(3).to_float() == 0.0


def test_single_eigenline_gap_is_exact():
    coeffs = np.zeros(6)
    coeffs[4] = 0.7
    seq = CoefficientSequence(hermite_line(5), coeffs)
    lam = seq.eigenvalues
    # only the C_j factor is lossy: rhs - lhs = log(C_j / (c_4 lam_4^{-2j})) / 2
    gap = 0.5 * math.log(math.fsum(lam ** -4) / lam[4] ** -4)
    for m in (1, 5, 20):
        b = unc.moment_cs_bound(seq, m, 2)
        assert b.holds
        assert b.log_rhs - b.log_lhs == pytest.approx(gap, rel=1e-12)


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 2 ** 32 - 1))
def test_log_convex_and_cauchy_schwarz(seed):
    seq = random_sequence(seed)
    assert unc.moments(seq, 20).is_log_convex()
    for m in range(1, 21):
        assert unc.moment_cs_bound(seq, m, 2).holds


def test_cs_bound_rhs_uses_operator_norm():
    seq = random_sequence(11)
    b = unc.moment_cs_bound(seq, 3, 2)
    norm = operator_norms(seq, 5).log_values[5]
    lam, c = seq.eigenvalues, np.exp(seq.log_norming)
    assert np.all(lam > 0)
    log_cj = math.log(math.fsum(lam ** -4 * c))
    assert b.log_rhs == pytest.approx(0.5 * log_cj + norm, rel=1e-12)


def test_bound_needs_positive_m():
    with pytest.raises(ParameterError):
        unc.moment_cs_bound(random_sequence(0), 0, 2)


def test_shifted_sum_diagnostic():
    a = 1.0 / np.arange(1, 11)
    plain, shifted = unc.shifted_sum_diagnostic(a, 2)
    assert plain[-1] == pytest.approx(math.fsum(a))
    m = np.arange(1, 11)
    assert shifted[-1] == pytest.approx(math.fsum(a ** (1 + 2 / m)))
    with pytest.raises(ParameterError):
        unc.shifted_sum_diagnostic([1.0, -1.0], 1)


def mp_growth(theta, rho, k, m):
    f = lambda n: (n + rho) ** (4 * m + k) * mp.exp(-2 * (n + rho) * theta(n + rho))
    return mp.sqrt(mp.nsum(f, [0, mp.inf]))


@pytest.mark.parametrize("m", [1, 3, 6])
def test_growth_sequence_against_mpmath(m):
    theta = unc.DecayProfile.inverse_sqrt()
    ref = mp_growth(lambda t: (1 + t) ** -0.5, 0.5, 1, m)
    got = unc.growth_sequence(theta, 0.5, 1, m)
    assert got.log() == pytest.approx(float(mp.log(ref)), rel=1e-10)


def test_growth_sequence_constant_theta_closed_form():
    # theta = tau, rho = 1: sum (n+1)^p e^{-2 tau (n+1)} = polylog(-p, e^{-2 tau})
    tau, m, k = 0.7, 4, 0
    ref = mp.sqrt(mp.polylog(-(4 * m + k), mp.exp(-2 * tau)))
    got = unc.growth_sequence(unc.DecayProfile.constant(tau), 1.0, k, m)
    assert got.log() == pytest.approx(float(mp.log(ref)), rel=1e-12)


def test_constant_theta_terms_decay_like_one_over_m():
    tau = 1.0
    theta = unc.DecayProfile.constant(tau)
    terms = [math.exp(-unc.growth_sequence(theta, 0.5, 1, m).log() / (2 * m)) for m in (40, 80)]
    # a_m^{-1/2m} ~ e tau / (2m), so the partial sums diverge like log M
    assert 40 * terms[0] == pytest.approx(math.e * tau / 2, rel=0.05)
    assert 80 * terms[1] == pytest.approx(math.e * tau / 2, rel=0.03)


def test_growth_bound_check_inverse_sqrt():
    rep = unc.growth_bound_check(unc.DecayProfile.inverse_sqrt(), 0.5, 1, range(5, 21))
    assert rep.holds and rep.C > 0
    assert rep.calibration == (5, 12)
    assert np.all(np.diff(rep.carleman_partial) > 0)
    assert len(list(rep.rows())) == 16


def test_floor_precondition():
    steep = unc.DecayProfile.power(1.0)
    assert not steep.floor
    with pytest.raises(PreconditionError):
        unc.growth_sequence(steep, 0.5, 1, 3)
    with pytest.raises(PreconditionError):
        unc.growth_bound_check(steep, 0.5, 1, range(5, 8))


def test_truncation_cap(monkeypatch):
    monkeypatch.setattr(unc, "_N_CAP", 2048)
    with pytest.raises(TruncationError):
        unc.growth_sequence(unc.DecayProfile.inverse_log(), 0.5, 1, 400)


def test_profiles():
    assert unc.DecayProfile.inverse_sqrt().integrable
    assert not unc.DecayProfile.inverse_log().integrable
    assert not unc.DecayProfile.constant(2.0).integrable
    assert unc.DecayProfile.inverse_sqrt().check_monotone(np.linspace(0, 100, 50))
    assert unc.DecayProfile.inverse_sqrt().vanishing_report(1e4)
    assert not unc.DecayProfile.constant(1.0).vanishing_report(1e4)
    with pytest.raises(ParameterError):
        unc.DecayProfile.constant(0.0)
