import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from haarint import montecarlo as mc
from haarint import reduction as red
from haarint.errors import DimensionError, QuadratureError
from haarint.montecarlo import IntegrandSpec
from haarint.saddle import exp_linear_example


def q2_formula(N):
    p = N - 4
    return math.pi**4 * math.factorial(p + 1) * math.factorial(p) / (math.factorial(p + 3) * math.factorial(p + 2))


def test_normalization_examples():
    assert red.normalization_constant(10, 1).value() == pytest.approx(math.pi / 9, rel=1e-14)
    assert red.normalization_constant(6, 2).value() == pytest.approx(math.pi**4 / 240, rel=1e-14)
    assert red.normalization_constant(4, 2).value() == pytest.approx(math.pi**4 / 12, rel=1e-14)
    with pytest.raises(DimensionError, match="N >= 2q"):
        red.normalization_constant(5, 3)


@given(st.integers(1, 5).flatmap(lambda q: st.tuples(st.just(q), st.integers(2 * q, 20))))
def test_exact_ratio(qn):
    q, N = qn
    expected = Fraction(1)
    for k in range(1, q + 1):
        expected *= Fraction(math.factorial(N - q - k), math.factorial(N - k))
    assert red.normalization_ratio(N, q) == expected
    assert red.normalization_constant(N, q).value() == pytest.approx(math.pi ** (q * q) * float(expected), rel=1e-13)


def test_lgamma_branch_continuous():
    # N = 20 uses exact integers, N = 21 log-gamma; the recursion K(N+1,1)/K(N,1) = (N-1)/N must hold across
    r = red.normalization_constant(21, 1) / red.normalization_constant(20, 1)
    assert r.value() == pytest.approx(19 / 20, rel=1e-14)


def test_leading_prefactor_rate():
    ns = [50, 100, 200, 400]
    errs = [abs(math.expm1(red.leading_log_prefactor(N, 2))) for N in ns]
    slope = np.polyfit(np.log(ns), np.log(errs), 1)[0]
    assert abs(slope + 1) <= 0.15


def test_det_power_moment_identity():
    assert red.det_power_moment(10, 1, 0) == 1.0
    # q = 1: E (1-|u|^2)^m = (N-1)! m! ... ratio  (N-1)/(N+m-1) * ... check against quadrature
    val = red.reduced_integral_q1(lambda u: (1 - u) ** 3, 10, radial=True)
    assert red.det_power_moment(10, 1, 3) == pytest.approx(val, rel=1e-10)
    assert red.det_power_moment(30, 2, 2.5) > 0


def test_q1_examples():
    assert red.reduced_integral_q1(lambda u: 1.0, 10, radial=True) == pytest.approx(1.0, rel=1e-10)
    assert red.reduced_integral_q1(lambda a: 1.0, 10) == pytest.approx(1.0, rel=1e-9)
    assert red.reduced_integral_q1(math.exp, 2, radial=True) == pytest.approx(math.e - 1, rel=1e-10)
    series = exp_linear_example(0.5, 500)
    quad = red.reduced_integral_q1(lambda u: 0.5 * u, 500, radial=True, log_f=True)
    assert quad == pytest.approx(series, rel=1e-8)
    assert series == pytest.approx(1 + 0.5 / 500, abs=1e-5)


def test_radial_and_planar_agree():
    a = red.reduced_integral_q1(lambda u: u * u, 7, radial=True)
    b = red.reduced_integral_q1(lambda z: abs(z) ** 4, 7)
    assert a == pytest.approx(b, rel=1e-8)


def test_leading_mode_ratio():
    exact = red.reduced_integral_q1(lambda u: u, 12, radial=True)
    lead = red.reduced_integral_q1(lambda u: u, 12, radial=True, mode="leading")
    assert lead / exact == pytest.approx(12 / 11, rel=1e-10)
    with pytest.raises(ValueError):
        red.reduced_integral_q1(lambda u: u, 12, radial=True, mode="other")


def test_quadrature_error_reports_abscissa():
    with pytest.raises(QuadratureError) as info:
        red.reduced_integral_q1(lambda u: 1.0 / u if u > 0 else 1e300, 5, radial=True)
    assert info.value.abscissa is not None and info.value.abscissa < 0.1


def test_negative_integrand_rejected():
    with pytest.raises(ValueError):
        red.reduced_integral_q1(lambda u: -1.0, 5, radial=True)


@pytest.mark.parametrize("N", [4, 7])
def test_detpower_examples(N):
    assert red.detpower_integral_q2(N) == pytest.approx(q2_formula(N), rel=1e-5)


def test_detpower_matches_constant_range():
    for N in range(4, 13):
        ratio = red.detpower_integral_q2(N) / red.normalization_constant(N, 2).value()
        assert abs(ratio - 1) <= 1e-5


def test_quartic_double_small_beta():
    # beta -> 0 limit is 1; first order is beta N E|u|^2 E|v|^2 = beta / N
    val = red.quartic_double_q1(1e-4, 10).value()
    assert val == pytest.approx(1 + 1e-5, rel=1e-8)


def test_reduced_expectation_examples():
    one = red.reduced_expectation(IntegrandSpec.constant(), 12, 2, 100, 0)
    assert one.mean == 1.0 and one.std_error == 0.0
    tr = IntegrandSpec.callback(lambda A: np.sum(np.abs(A) ** 2, axis=(1, 2)), vectorized=True)
    est = red.reduced_expectation(tr, 20, 3, 50_000, 1)
    assert abs(est.mean - 9 / 20) < 4 * est.std_error
    det2 = IntegrandSpec.callback(lambda A: np.abs(np.linalg.det(A)) ** 2, vectorized=True)
    a = red.reduced_expectation(det2, 12, 2, 50_000, 2)
    b = mc.integrate_single(det2, 12, 2, 50_000, 3)
    assert abs(a.mean - b.mean) < 4 * math.hypot(a.std_error, b.std_error)
    with pytest.raises(DimensionError):
        red.reduced_expectation(det2, 5, 3, 10, 0)


def test_leading_examples():
    r = red.leading_reduced_integral(None, 100, 1)
    # N/(N-1) = 1 + 1/N + ..., so the value sits just outside a symmetric 1/N window
    assert r.value == pytest.approx(100 / 99, rel=1e-13) and r.method == "closed-form"
    assert "1 + O(1/N)" in r.caveat
    r = red.leading_reduced_integral(lambda a: 1.0, 10, 1)
    assert r.value == pytest.approx(10 / 9, rel=1e-9)
    r = red.leading_reduced_integral(lambda a: abs(a) ** 2, 100, 1)
    assert r.value == pytest.approx(0.01, rel=0.02)
    r = red.leading_reduced_integral(None, 6, 2)
    assert r.value == pytest.approx((6 / math.pi) ** 4 * math.pi**4 / 240, rel=1e-6)


def test_leading_fallback_warns():
    spec = IntegrandSpec.callback(lambda A: np.sum(np.abs(A) ** 2, axis=(1, 2)), vectorized=True)
    with pytest.warns(RuntimeWarning):
        r = red.leading_reduced_integral(spec, 40, 3, n_samples=20_000, rng=1)
    assert r.fallback and r.method == "monte-carlo"
    # the O(1/N) correction is large here: (N/pi)^9 K(40, 3) is about 2
    assert r.value == pytest.approx(9 / 40 * math.exp(red.leading_log_prefactor(40, 3)), rel=0.05)
