import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from haarint import montecarlo as mc
from haarint.errors import DimensionError, IntegrandOverflowError, NonFiniteIntegrandError
from haarint.haar import RngStream
from haarint.montecarlo import IntegrandSpec, MonomialPattern
from haarint.reduction import det_power_moment, quartic_double_q1


def test_constant_integrand_exact():
    est = mc.integrate_single(IntegrandSpec.constant(), 6, 2, 1000, 1)
    assert est.mean == 1.0 and est.std_error == 0.0 and est.n_samples == 1000


def test_second_moment_of_entry():
    est = mc.integrate_single(IntegrandSpec.monomial([(1, 1, 1, 1)]), 10, 1, 100_000, 2)
    assert abs(est.mean - 0.1) < 4 * est.std_error


def test_det_power_against_closed_form():
    est = mc.integrate_single(IntegrandSpec.det_power(3), 10, 2, 50_000, 3)
    assert abs(est.mean - det_power_moment(10, 2, 3)) < 4 * est.std_error


def test_same_seed_same_estimate_any_worker_count():
    spec = IntegrandSpec.monomial([(1, 2, 1, 2)])
    n = 3 * mc.CHUNK_SIZE + 17
    a = mc.integrate_single(spec, 7, 2, n, 11, workers=1)
    b = mc.integrate_single(spec, 7, 2, n, 11, workers=3)
    assert a == b
    c = mc.integrate_single(spec, 7, 2, n, 12, workers=1)
    assert c.mean != a.mean


def test_env_worker_default(monkeypatch):
    monkeypatch.setenv("HAARINT_WORKERS", "4")
    assert mc.default_workers() == 4
    monkeypatch.delenv("HAARINT_WORKERS")
    assert mc.default_workers() == 1


def test_non_finite_reports_index():
    def bad(A):
        out = np.abs(A[:, 0, 0])
        out[5] = np.nan
        return out

    with pytest.raises(NonFiniteIntegrandError) as info:
        mc.integrate_single(IntegrandSpec.callback(bad, vectorized=True), 5, 1, 100, 0)
    assert info.value.index == 5


def test_overflow_needs_shift():
    spec = IntegrandSpec.exp_quartic(6.0, 2000)
    with pytest.raises(IntegrandOverflowError):
        mc.integrate_double(spec, 20, 1, 20_000, 1)
    est = mc.integrate_double(spec, 20, 1, 20_000, 1, shift="auto")
    assert est.shift > 709 and est.mean > 0
    fixed = mc.integrate_double(spec, 20, 1, 20_000, 1, shift=est.shift)
    assert fixed == est
    assert est.log_value.log_magnitude == pytest.approx(math.log(est.mean) + est.shift)


def test_double_integral_small_beta_matches_quadrature():
    N, beta = 10, 2.0
    est = mc.integrate_double(IntegrandSpec.exp_quartic(beta, N), N, 1, 200_000, 4)
    ref = quartic_double_q1(beta, N).value()
    assert abs(est.mean - ref) < 4 * est.std_error


def test_arity_checks():
    with pytest.raises(DimensionError):
        mc.integrate_single(IntegrandSpec.exp_quartic(5.0, 10), 10, 1, 10, 0)
    with pytest.raises(ValueError):
        IntegrandSpec("nonsense")
    with pytest.raises(ValueError):
        mc.integrate_single(IntegrandSpec.constant(), 5, 1, 1, 0)


def test_exp_linear_log_form():
    Y = np.array([[0.5]])
    spec = IntegrandSpec.exp_linear(Y, 4.0)
    A = np.array([[[0.2 + 0.1j]]])
    assert spec.log_values(A)[0] == pytest.approx(4.0 * 0.5 * 0.2)
    assert spec.describe()["kind"] == "exp-linear"


def test_scalar_callback():
    est = mc.integrate_single(lambda A: abs(A[0, 0]) ** 2, 8, 1, 2000, 5)
    assert est.mean == pytest.approx(1 / 8, rel=0.1)


def test_pattern_parse_and_str():
    p = MonomialPattern.parse("1:1 2:2 ~1:1 ~2:2")
    assert p.unconj == ((1, 1), (2, 2)) and p.conj == ((1, 1), (2, 2))
    assert MonomialPattern.parse(str(p)) == p
    assert p.self_conjugate
    for bad in ("", "1-1", "~a:1"):
        with pytest.raises(ValueError):
            MonomialPattern.parse(bad)
    assert MonomialPattern.from_quadruples([(1, 2, 3, 4)]) == MonomialPattern(((1, 2),), ((3, 4),))


def test_unbalanced_moment_is_exact_zero():
    est = mc.moment_monomial(MonomialPattern.parse("1:1 ~1:1 ~2:2"), 10)
    assert est.exact and est.mean == 0.0 and est.n_samples == 0


def test_moment_index_range():
    with pytest.raises(DimensionError):
        mc.moment_monomial(MonomialPattern.parse("11:1 ~11:1"), 10, 100, 0)


@given(st.permutations(range(1, 6)))
def test_moment_column_relabelling(perm):
    # exchangeable columns: relabelling gives identical draws for equal column-order pattern
    a = mc.moment_monomial(MonomialPattern(((1, perm[0]),), ((1, perm[0]),)), 6, 200, 9)
    b = mc.moment_monomial(MonomialPattern(((1, 1),), ((1, 1),)), 6, 200, 9)
    assert a.mean == b.mean


def test_complex_moment():
    est = mc.moment_monomial(MonomialPattern.parse("1:1 ~2:2"), 6, 20_000, 3)
    assert isinstance(est.mean, complex)
    assert abs(est.mean) < 4 * est.std_error + 1e-3


def test_estimate_serialization():
    est = mc.integrate_single(IntegrandSpec.monomial([(1, 1, 1, 1)]), 4, 1, 100, RngStream(2, 3))
    d = est.to_dict()
    assert d["seed"] == {"seed": 2, "stream_id": 3}
    assert d["mean_re"] == est.mean
