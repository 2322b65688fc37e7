import math

import mpmath as mp
import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy import special

from specdecay import orthopoly as op
from specdecay.errors import DegreeBoundsError, ParameterError

mp.mp.dps = 40


def mp_hermite(k, x):
    x = mp.mpf(x)
    return mp.hermite(k, x) * mp.exp(-x * x / 2) / mp.sqrt(2 ** k * mp.sqrt(mp.pi) * mp.factorial(k))


def mp_laguerre_normalized(k, d, t):
    t = mp.mpf(t)
    c = mp.sqrt(mp.factorial(k) / mp.gamma(k + d + 1))
    return c * mp.laguerre(k, d, t) * mp.exp(-t / 2) * t ** (mp.mpf(d) / 2)


def mp_psi(k, n, r):
    r = mp.mpf(r)
    ratio = mp.factorial(k) * mp.factorial(n - 1) / mp.factorial(k + n - 1)
    return ratio * mp.laguerre(k, n - 1, r * r / 2) * mp.exp(-r * r / 4)


def mp_jacobi_r(m, a, b, x):
    return mp.jacobi(m, a, b, x, zeroprec=400) / mp.jacobi(m, a, b, 1)


@pytest.mark.parametrize("k", [0, 1, 5, 40, 200, 500])
@pytest.mark.parametrize("x", [0.0, 0.3, -2.5, 10.0, 31.0, 45.0])
def test_hermite_against_mpmath(k, x):
    ref = mp_hermite(k, x)
    got = op.hermite_fn(k, x)
    if ref == 0:
        assert got.to_float() == 0.0
    else:
        assert float(mp.log(abs(ref))) == pytest.approx(got.log(), abs=1e-11)
        assert got.sign == (1 if ref > 0 else -1)


def test_hermite_far_tail_is_scaled_not_zero():
    # h_10(60) ~ exp(-1800): below double range, still carried exactly
    v = op.hermite_fn(10, 60.0)
    assert v.to_float() == 0.0
    assert v.log() == pytest.approx(float(mp.log(abs(mp_hermite(10, 60)))), rel=1e-13)


@pytest.mark.parametrize("delta", [0.0, 0.5, 1.0, 2.5])
@pytest.mark.parametrize("k", [0, 3, 64, 300])
@pytest.mark.parametrize("t", [0.01, 1.0, 50.0, 900.0])
def test_laguerre_normalized_against_mpmath(delta, k, t):
    ref = mp_laguerre_normalized(k, delta, t)
    got = op.laguerre_normalized(k, delta, t)
    if abs(ref) < mp.mpf(10) ** -300 and got.to_float() == 0:
        assert got.log() == pytest.approx(float(mp.log(abs(ref))), rel=1e-10)
    else:
        assert got.to_float() == pytest.approx(float(ref), rel=1e-10, abs=1e-14)


@pytest.mark.parametrize("n", [1, 2, 3])
@pytest.mark.parametrize("k", [0, 7, 128])
def test_psi_against_mpmath(n, k):
    r = np.array([0.0, 0.4, 2.0, 9.0, 25.0])
    got = op.laguerre_psi_table(r, k, n)[k]
    ref = np.array([float(mp_psi(k, n, v)) for v in r])
    np.testing.assert_allclose(got, ref, rtol=1e-10, atol=1e-15)
    assert got[0] == 1.0


@pytest.mark.parametrize("a,b", [(0.0, 0.0), (0.5, 0.5), (1.0, 0.0), (3.0, 1.0), (7.0, 3.0), (-0.5, -0.5)])
def test_jacobi_r_against_mpmath(a, b):
    x = np.array([-1.0, -0.7, 0.0, 0.33, 0.999, 1.0])
    T = op.jacobi_r_table(x, 64, a, b)
    for m in (0, 1, 9, 64):
        ref = np.array([float(mp_jacobi_r(m, a, b, v)) for v in x])
        np.testing.assert_allclose(T[m], ref, rtol=1e-10, atol=1e-13)
    assert np.all(T[:, -1] == 1.0)


@pytest.mark.parametrize("a,b,m", [(0.0, 0.0, 5), (1.0, 0.0, 17), (7.0, 3.0, 40)])
def test_jacobi_norm_against_quad(a, b, m):
    ref = mp.quad(lambda x: mp_jacobi_r(m, a, b, x) ** 2 * (1 - x) ** a * (1 + x) ** b, [-1, 0, 1])
    assert op.jacobi_log_norm_sq(m, a, b) == pytest.approx(float(mp.log(ref)), abs=1e-12)


def test_unnormalized_laguerre_function_matches_scipy():
    u = np.linspace(0, 30, 41)
    T = op.laguerre_function_table(u, 20, 1.5)
    for k in (0, 4, 20):
        np.testing.assert_allclose(T[k], special.eval_genlaguerre(k, 1.5, u) * np.exp(-u / 2),
                                   rtol=1e-10, atol=1e-12)


def test_degree_cap_and_domain_errors():
    with pytest.raises(DegreeBoundsError):
        op.hermite_table([0.0], op.DEFAULT_MAX_DEGREE + 1)
    with pytest.raises(DegreeBoundsError):
        op.hermite_table([0.0], -1)
    op.hermite_table([0.0], 600, max_degree=600)
    with pytest.raises(ParameterError):
        op.laguerre_normalized_table([-1.0], 3, 0.0)
    with pytest.raises(ParameterError):
        op.jacobi_r_table([1.5], 3, 0.0, 0.0)
    with pytest.raises(ParameterError):
        op.jacobi_r_table([0.5], 3, -1.0, 0.0)
    with pytest.raises(ParameterError):
        op.laguerre_psi_table([0.5], 3, 0)


def test_binomial_ratio_exact():
    for n in (1, 2, 3, 5):
        for k in (0, 1, 10, 64):
            exact = math.factorial(k) * math.factorial(n - 1) / math.factorial(k + n - 1)
            assert op.binomial_ratio(k, n) == pytest.approx(exact, rel=1e-15)


@settings(max_examples=60, deadline=None)
@given(st.floats(-40, 40), st.integers(0, 200))
def test_hermite_bounded_by_one(x, k):
    # |h_k(x)| <= pi^{-1/4}
    assert abs(op.hermite_table([x], k)[k, 0]) <= math.pi ** -0.25 + 1e-12


@settings(max_examples=60, deadline=None)
@given(st.floats(0, 60), st.integers(1, 4), st.integers(0, 100))
def test_psi_bounded_by_value_at_origin(r, n, k):
    assert abs(op.laguerre_psi(k, n, r)) <= 1.0 + 1e-12


@settings(max_examples=40, deadline=None)
@given(st.floats(-1, 1), st.floats(-0.5, 8), st.floats(-0.5, 8))
def test_jacobi_bounded_for_alpha_dominant(x, a, b):
    # |R_m| <= 1 when alpha >= beta and alpha >= -1/2
    a, b = max(a, b), min(a, b)
    T = op.jacobi_r_table([x], 60, a, b)
    assert np.all(np.abs(T) <= 1.0 + 1e-10)
