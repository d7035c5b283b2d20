import itertools
import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from haarint import asymptotics as asy
from haarint import montecarlo as mc
from haarint.asymptotics import PairingPattern
from haarint.errors import DimensionError, EnumerationCapError, HomogeneityError
from haarint.montecarlo import IntegrandSpec, MonomialPattern


def brute_pairing(pat):
    p = pat.p
    return sum(
        all(pat.i[m] == pat.l[s[m]] and pat.k[s[m]] == pat.j[m] for m in range(p))
        for s in itertools.permutations(range(p))
    )


def test_weingarten_examples():
    assert asy.weingarten_leading(PairingPattern((1,), (1,), (1,), (1,)), 10) == pytest.approx(0.1)
    assert asy.weingarten_leading(PairingPattern((1, 2), (1, 2), (1, 2), (1, 2)), 9) == pytest.approx(1 / 81)
    assert asy.weingarten_leading(PairingPattern((1, 1), (1, 1), (1, 1), (1, 1)), 9) == pytest.approx(2 / 81)


def test_cap_and_index_errors():
    with pytest.raises(EnumerationCapError, match="enumeration cap exceeded"):
        asy.weingarten_leading(PairingPattern(*(tuple([1] * 9),) * 4), 10)
    with pytest.raises(DimensionError):
        asy.weingarten_leading(PairingPattern((11,), (1,), (1,), (1,)), 10)
    with pytest.raises(DimensionError):
        PairingPattern((1, 2), (1,), (1,), (1,))


indices = st.integers(1, 3)


@st.composite
def patterns(draw):
    p = draw(st.integers(1, 5))
    lists = [tuple(draw(st.lists(indices, min_size=p, max_size=p))) for _ in range(4)]
    return PairingPattern(*lists)


@given(patterns(), st.randoms())
def test_pairing_matches_brute_force_and_relabelling(pat, rnd):
    assert asy.pairing_count(pat) == brute_pairing(pat)
    perm = list(range(pat.p))
    rnd.shuffle(perm)
    shuffled = PairingPattern(*(tuple(getattr(pat, n)[m] for m in perm) for n in "ijkl"))
    assert asy.weingarten_leading(shuffled, 5) == asy.weingarten_leading(pat, 5)


@given(patterns())
def test_unmatched_row_index_vanishes(pat):
    # force i_0 to a value that no l carries
    i = (4,) + pat.i[1:]
    assert asy.weingarten_leading(PairingPattern(i, pat.j, pat.k, pat.l), 5) == 0


def test_monomial_conversion_roundtrip():
    m = MonomialPattern.parse("1:2 3:4 ~1:2 ~3:4")
    pat = PairingPattern.from_monomial(m)
    assert pat.to_monomial() == m
    assert asy.weingarten_leading(m, 8) == pytest.approx(1 / 64)


def abs_power(k):
    return IntegrandSpec.callback(lambda X: np.abs(X[:, 0, 0]) ** k, vectorized=True)


def test_gaussian_examples():
    one = asy.gaussian_expectation(IntegrandSpec.constant(), 0, 2, 1000, 0)
    assert one.mean == 1.0
    e2 = asy.gaussian_expectation(abs_power(2), 2, 1, 100_000, 1)
    assert abs(e2.mean - 1) < 4 * e2.std_error
    e4 = asy.gaussian_expectation(abs_power(4), 4, 1, 100_000, 2)
    assert abs(e4.mean - 2) < 4 * e4.std_error


def test_homogeneity_violation():
    with pytest.raises(HomogeneityError, match="homogeneity violation"):
        asy.gaussian_expectation(abs_power(2), 3, 1, 100, 0)
    with pytest.raises(HomogeneityError):
        asy.gaussian_expectation(IntegrandSpec.exp_linear([[1.0]], 1.0), 1, 1, 100, 0)


@pytest.mark.parametrize("N", [32, 64])
def test_gaussian_limit_matches_haar_moment(N):
    g = asy.gaussian_expectation(abs_power(4), 4, 1, 200_000, 3)
    h = mc.moment_monomial(MonomialPattern.parse("1:1 1:1 ~1:1 ~1:1"), N, 200_000, 4)
    gap = abs(g.mean / N**2 - h.mean)
    assert gap <= max(4 * math.hypot(g.std_error / N**2, h.std_error), 5 / N**3)


def test_factorized_constant_g_reduces_to_f():
    f = abs_power(2)
    prod = asy.factorized_expectation(f, IntegrandSpec.constant(), 0, 16, 1, 1, "product", 50_000, 5)
    single = mc.integrate_single(f, 16, 1, 50_000, 5)
    assert prod.value == pytest.approx(single.mean, rel=1e-12)


def test_factorized_product_moment():
    g = abs_power(2)
    prod = asy.factorized_expectation(IntegrandSpec.constant(), g, 2, 32, 1, 1, "product", 100_000, 6)
    joint = mc.moment_monomial(MonomialPattern.parse("2:2 ~2:2"), 32, 100_000, 7)
    assert prod.value == pytest.approx(1 / 32, rel=0.02)
    assert abs(prod.value - joint.mean) < 4 * math.hypot(prod.std_error, joint.std_error)


def test_factorized_saddle_route_vs_joint_mc():
    N = 64
    f = IntegrandSpec.exp_linear([[0.5]], N)
    g = abs_power(2)
    prod = asy.factorized_expectation(f, g, 2, N, 1, 1, "product", 200_000, 8, f_route="saddle")
    coupled = asy.factorized_expectation(f, g, 2, N, 1, 1, "coupled", 200_000, 9)
    joint = coupled.parts["joint_haar"]
    assert abs(prod.value - joint["mean_re"]) < 4 * math.hypot(prod.std_error, joint["std_error"])


def test_coupled_vs_product_small_blocks():
    # both functionals concentrated near zero: the modes agree to O(1/N)
    N = 40
    f = IntegrandSpec.callback(lambda A: np.exp(-N * np.abs(A[:, 0, 0]) ** 2), vectorized=True)
    g = abs_power(2)
    prod = asy.factorized_expectation(f, g, 2, N, 1, 1, "product", 100_000, 10)
    coup = asy.factorized_expectation(f, g, 2, N, 1, 1, "coupled", 100_000, 11)
    assert abs(coup.value / prod.value - 1) < 4 / N + 4 * (coup.std_error / coup.value + prod.std_error / prod.value)
    assert coup.parts["mean_reweight"] >= 1.0


def test_factorized_errors():
    c = IntegrandSpec.constant()
    with pytest.raises(DimensionError):
        asy.factorized_expectation(c, c, 0, 7, 2, 2)
    with pytest.raises(ValueError):
        asy.factorized_expectation(c, c, 0, 10, 1, 1, mode="other")
    with pytest.raises(ValueError):
        asy.factorized_expectation(c, c, 0, 10, 1, 1, f_route="saddle")
