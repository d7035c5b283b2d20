"""Acceptance criteria 1-10, one test each, at the stated tolerances."""

import math
import time

import numpy as np

from conftest import ACCEPTANCE_LINES
from haarint import cli, linalg, montecarlo, reduction, saddle
from haarint.haar import RngStream, sample_blocks
from haarint.montecarlo import IntegrandSpec, MonomialPattern
from haarint.suites import (
    linear_saddle_errors,
    loglog_slope,
    quartic_gradient_deviation,
    quartic_saddle_errors,
    random_hermitian,
)
from haarint.asymptotics import weingarten_leading


def verdict(n, ok, detail):
    line = f"criterion {n}: {'PASS' if ok else 'FAIL'} {detail}"
    print(line)
    ACCEPTANCE_LINES.append(line)
    assert ok, line


def test_criterion_1_normalization():
    t0 = time.perf_counter()
    worst_closed = worst_quad = 0.0
    for N in range(4, 8):
        p = N - 4
        exact = math.pi**4 * math.factorial(p + 1) * math.factorial(p) / (
            math.factorial(p + 3) * math.factorial(p + 2)
        )
        worst_closed = max(worst_closed, abs(reduction.normalization_constant(N, 2).value() / exact - 1))
        worst_quad = max(worst_quad, abs(reduction.detpower_integral_q2(N) / exact - 1))
    dt = time.perf_counter() - t0
    ok = worst_closed <= 1e-12 and worst_quad <= 1e-5 and dt < 60
    verdict(1, ok, f"closed-form rel {worst_closed:.2e} (<=1e-12), quadrature rel {worst_quad:.2e} (<=1e-5), {dt:.1f}s")


def test_criterion_2_moments():
    t0 = time.perf_counter()
    pat = MonomialPattern.parse("1:1 ~1:1")
    e1 = montecarlo.moment_monomial(pat, 10, 100_000, RngStream(2, 0))
    z1 = abs(e1.mean - 0.1) / e1.std_error
    N = 64
    pat2 = MonomialPattern.parse("1:1 2:2 ~1:1 ~2:2")
    e2 = montecarlo.moment_monomial(pat2, N, 1_000_000, RngStream(2, 1))
    gap = abs(e2.mean - weingarten_leading(pat2, N))
    bound = max(4 * e2.std_error, 5 / N**3)
    dt = time.perf_counter() - t0
    ok = z1 <= 4 and gap <= bound and dt < 120
    verdict(2, ok, f"E|U11|^2 z={z1:.2f} (<=4); p=2 gap {gap:.2e} <= {bound:.2e}; {dt:.1f}s")


def test_criterion_3_exponential():
    t0 = time.perf_counter()
    series = saddle.exp_linear_example(1.0, 2)
    quad = reduction.reduced_integral_q1(lambda u: u, 2, radial=True, log_f=True)
    scaled = saddle.exp_linear_example(0.5, 1000, scaled=True)
    dt = time.perf_counter() - t0
    gap = abs(series - quad)
    rel = abs(scaled / 2 - 1)
    ok = gap <= 1e-10 and abs(series - (math.e - 1)) <= 1e-10 and rel <= 5e-3 and dt < 10
    verdict(3, ok, f"series-quadrature {gap:.1e} (<=1e-10); scaled {scaled:.6f} rel {rel:.2e} (<=5e-3); {dt:.1f}s")


def test_criterion_4_linear_saddle():
    t0 = time.perf_counter()
    ns = (100, 200, 400)
    errs = linear_saddle_errors(0.8, ns)
    slope = loglog_slope(ns, errs)
    res = saddle.linear_saddle([[0.8]], 200).gradient_residual
    gen = RngStream(4).generator()
    exps = []
    for _ in range(50):
        Y = random_hermitian(gen, int(gen.integers(1, 5)), 10 ** gen.uniform(-3, 1))
        exps.append(saddle.linear_saddle(Y, 100).exponent_per_N)
    dt = time.perf_counter() - t0
    ok = abs(errs[1]) <= 0.03 and abs(slope + 1) <= 0.3 and res <= 1e-10 and min(exps) > 0 and dt < 120
    verdict(
        4, ok,
        f"N=200 rel {errs[1]:.2e} (<=3%); slope {slope:.3f} (-1+-0.3); residual {res:.1e}; "
        f"min exponent {min(exps):.2e} > 0; {dt:.1f}s",
    )


def test_criterion_5_quartic_saddle():
    t0 = time.perf_counter()
    errs = quartic_saddle_errors(8.0, (100, 200))
    saddle_ok = abs(errs[0]) <= 0.05 and abs(errs[1]) < abs(errs[0])
    N, beta = 20, 6.0
    est = montecarlo.integrate_double(IntegrandSpec.exp_quartic(beta, N), N, 1, 1_000_000, RngStream(5),
                                      shift="auto")
    quad = reduction.quartic_double_q1(beta, N)
    z = abs(est.value - quad.value()) / est.scaled_std_error
    mc_ok = z <= 4
    dt = time.perf_counter() - t0
    ok = saddle_ok and mc_ok and dt < 600
    verdict(
        5, ok,
        f"saddle rel N=100 {errs[0]:.2e} (<=5%), N=200 {errs[1]:.2e}; double MC {est.value:.4g} vs quadrature "
        f"{quad.value():.4g}, z={z:.3g} (<=4); {dt:.1f}s",
    )


def test_criterion_6_threshold():
    t0 = time.perf_counter()
    b = saddle.quartic_threshold()
    below = saddle.quartic_saddle(saddle.QuarticConfig(b - 1e-10, 1, 100)).exponent_per_N
    above = saddle.quartic_saddle(saddle.QuarticConfig(b + 1e-10, 1, 100)).exponent_per_N
    dt = time.perf_counter() - t0
    ok = 4.910 <= b <= 4.912 and below < 0 < above and dt < 10
    verdict(6, ok, f"beta* = {b:.12f}; exponent {below:.2e} / {above:.2e} at beta* -+ 1e-10; {dt:.2f}s")


def test_criterion_7_h_function():
    t0 = time.perf_counter()
    q_min = 10.0
    d = saddle.h_derivative(q_min, q_min)
    grid = np.linspace(q_min, 50 * q_min, 200)
    h = np.array([saddle.h_of_q(x, q_min) for x in grid])
    monotone = bool(np.all(np.diff(h) > 0))
    q_bar = 10.5
    wgrid = np.union1d(np.linspace(q_min, 3 * q_bar, 200), [q_bar])
    argmax = float(wgrid[np.argmax([saddle.h_weighted(x, q_min, q_bar) for x in wgrid])])
    dt = time.perf_counter() - t0
    ok = abs(d - (4 - 2 * math.log(2))) <= 1e-4 and monotone and argmax == q_bar and dt < 10
    verdict(7, ok, f"h'(q_min) = {d:.8f}; monotone {monotone}; weighted argmax {argmax} (q_bar {q_bar}); {dt:.2f}s")


def test_criterion_8_determinants():
    t0 = time.perf_counter()
    gen = RngStream(8).generator()
    worst_r = worst_c = 0.0
    for _ in range(1000):
        m = int(gen.integers(1, 7))
        X = gen.standard_normal((m, m)) + 1j * gen.standard_normal((m, m))
        worst_r = max(worst_r, abs(linalg.det_realified(X) / abs(np.linalg.det(X)) ** 2 - 1))
    for _ in range(1000):
        q, p = int(gen.integers(1, 4)), int(gen.integers(1, 4))
        A, D = (b[0] for b in sample_blocks(2 * (p + q) + 2, q, 1, gen, p=p))
        explicit = np.linalg.det(np.eye(p * q) - np.kron(A.conj().T @ A, D.conj().T @ D)).real
        worst_c = max(worst_c, abs(linalg.coupling_det(A, D) / explicit - 1))
    dt = time.perf_counter() - t0
    ok = worst_r <= 1e-10 and worst_c <= 1e-10 and dt < 30
    verdict(8, ok, f"det_realified rel {worst_r:.1e}; coupling_det rel {worst_c:.1e} (<=1e-10); {dt:.1f}s")


def test_criterion_9_gradient():
    t0 = time.perf_counter()
    gen = RngStream(9).generator()
    worst = 0.0
    for _ in range(100):
        A, B = (0.9 * sample_blocks(6, 2, 1, gen)[0] for _ in range(2))
        worst = max(worst, quartic_gradient_deviation(A, B, float(gen.uniform(4.5, 10))))
    dt = time.perf_counter() - t0
    ok = worst <= 1e-6 and dt < 30
    verdict(9, ok, f"max |analytic - central difference| = {worst:.2e} (<=1e-6) over 100 points; {dt:.1f}s")


def test_criterion_10_reproducibility(tmp_path):
    t0 = time.perf_counter()
    outs = []
    for i, workers in enumerate(("1", "1", "3")):
        path = tmp_path / f"run{i}.json"
        code = cli.main(["compare", "--suite", "moments", "--seed", "123", "--samples", "50000",
                         "--workers", workers, "--out", str(path)])
        assert code == 0
        outs.append(path.read_bytes())
    dt = time.perf_counter() - t0
    ok = outs[0] == outs[1] == outs[2]
    verdict(10, ok, f"compare JSON identical across 2 runs and workers 1 vs 3 ({len(outs[0])} bytes); {dt:.1f}s")
