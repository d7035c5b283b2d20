"""Named cross-validation scenarios run by ``haarint compare``.

Each suite evaluates one quantity by several independent routes and gates
the agreement. Suites are deterministic given the seed and sample counts.
"""

import math
from dataclasses import dataclass, field

import numpy as np

from . import asymptotics, linalg, montecarlo, reduction, saddle
from .haar import RngStream, sample_blocks

DEFAULT_SEED = 20240611


@dataclass
class Gate:
    name: str
    passed: bool
    detail: dict = field(default_factory=dict)

    def to_dict(self):
        return {"name": self.name, "passed": bool(self.passed), **self.detail}


@dataclass
class CompareReport:
    quantity: str
    config: dict = field(default_factory=dict)
    routes: dict = field(default_factory=dict)
    gates: list = field(default_factory=list)
    notes: list = field(default_factory=list)

    @property
    def passed(self):
        return all(g.passed for g in self.gates)

    def gate(self, name, passed, **detail):
        self.gates.append(Gate(name, bool(passed), detail))
        return bool(passed)

    def to_dict(self):
        return {
            "quantity": self.quantity,
            "config": self.config,
            "routes": self.routes,
            "gates": [g.to_dict() for g in self.gates],
            "notes": self.notes,
            "passed": self.passed,
        }


def rel(a, b):
    return abs(a / b - 1.0)


def loglog_slope(ns, errs):
    return float(np.polyfit(np.log(ns), np.log(np.abs(errs)), 1)[0])


# ---------------------------------------------------------------------------


def suite_normalization(seed, samples, workers):
    rep = CompareReport("normalization constant K(N,2) and its quadrature")
    for N in range(4, 8):
        p = N - 4
        exact = math.pi**4 * math.factorial(p + 1) * math.factorial(p) / (
            math.factorial(p + 3) * math.factorial(p + 2)
        )
        closed = reduction.normalization_constant(N, 2).value()
        quad = reduction.detpower_integral_q2(N)
        rep.routes[f"N={N}"] = {"factorial_formula": exact, "closed_form": closed, "quadrature_q2": quad}
        rep.gate(f"closed form N={N}", rel(closed, exact) <= 1e-12, rel_gap=rel(closed, exact), tol=1e-12)
        rep.gate(f"quadrature N={N}", rel(quad, exact) <= 1e-5, rel_gap=rel(quad, exact), tol=1e-5)
    return rep


def suite_moments(seed, samples, workers):
    n1 = samples or 100_000
    n2 = samples or 1_000_000
    rep = CompareReport("low-order moments of Haar matrix entries", {"samples_p1": n1, "samples_p2": n2})
    for idx, (i, j) in enumerate([(1, 1), (3, 7)]):
        pat = montecarlo.MonomialPattern(((i, j),), ((i, j),))
        est = montecarlo.moment_monomial(pat, 10, n1, RngStream(seed, idx), workers=workers)
        target = asymptotics.weingarten_leading(pat, 10)
        z = abs(est.mean - target) / est.std_error
        rep.routes[str(pat)] = {"N": 10, "mc": est.to_dict(), "pairing": target}
        rep.gate(f"E|U[{i},{j}]|^2 = 1/N", z <= 4, z=z)
    N = 64
    for idx, text in enumerate(["1:1 2:2 ~1:1 ~2:2", "1:1 1:1 ~1:1 ~1:1"], start=2):
        pat = montecarlo.MonomialPattern.parse(text)
        est = montecarlo.moment_monomial(pat, N, n2, RngStream(seed, idx), workers=workers)
        target = asymptotics.weingarten_leading(pat, N)
        gap = abs(est.mean - target)
        bound = max(4 * est.std_error, 5 / N**3)
        rep.routes[text] = {"N": N, "mc": est.to_dict(), "pairing": target}
        rep.gate(f"pairing vs MC {text}", gap <= bound, gap=gap, bound=bound)
    return rep


def suite_q1_exponential(seed, samples, workers):
    rep = CompareReport("radial exponential integrand at q = 1")
    series = saddle.exp_linear_example(1.0, 2)
    quad = reduction.reduced_integral_q1(lambda u: u, 2, radial=True, log_f=True)
    rep.routes["unscaled beta=1 N=2"] = {"series": series, "quadrature": quad, "closed_form": math.e - 1}
    rep.gate("series vs quadrature", abs(series - quad) <= 1e-10, gap=abs(series - quad), tol=1e-10)
    series = saddle.exp_linear_example(0.5, 500)
    quad = reduction.reduced_integral_q1(lambda u: 0.5 * u, 500, radial=True, log_f=True)
    rep.routes["unscaled beta=0.5 N=500"] = {"series": series, "quadrature": quad}
    rep.gate("series vs quadrature N=500", rel(series, quad) <= 1e-8, rel_gap=rel(series, quad), tol=1e-8)
    scaled = saddle.exp_linear_example(0.5, 1000, scaled=True)
    limit = saddle.exp_linear_limit(0.5)
    rep.routes["scaled beta=0.5 N=1000"] = {"quadrature": scaled, "limit": limit}
    rep.gate("scaled within 0.5% of 1/(1-beta)", rel(scaled, limit) <= 5e-3, rel_gap=rel(scaled, limit), tol=5e-3)
    return rep


def linear_saddle_errors(y=0.8, ns=(100, 200, 400)):
    errs = []
    for N in ns:
        s = saddle.linear_saddle([[y]], N).log_asymptotic_value
        q = reduction.reduced_log_integral_q1(lambda a, N=N: N * y * a.real, N, log_f=True)
        errs.append(math.expm1(s.log_magnitude - q.log_magnitude))
    return errs


def random_hermitian(gen, q, norm):
    X = gen.standard_normal((q, q)) + 1j * gen.standard_normal((q, q))
    H = X + X.conj().T
    return H * (norm / np.linalg.norm(H, 2))


def suite_linear_saddle(seed, samples, workers):
    y, ns = 0.8, (100, 200, 400)
    rep = CompareReport("linear saddle versus q = 1 quadrature", {"y": y, "N": list(ns)})
    errs = linear_saddle_errors(y, ns)
    for N, e in zip(ns, errs):
        rep.routes[f"N={N}"] = {"relative_error": e}
    e200 = errs[ns.index(200)]
    rep.gate("N=200 within 3%", abs(e200) <= 0.03, rel_gap=e200, tol=0.03)
    slope = loglog_slope(ns, errs)
    rep.gate("convergence slope -1 +- 0.3", abs(slope + 1) <= 0.3, slope=slope)
    res = saddle.linear_saddle([[y]], 200)
    rep.gate("stationarity residual", res.gradient_residual <= 1e-10, residual=res.gradient_residual)
    gen = RngStream(seed).generator()
    worst, worst_res = math.inf, 0.0
    for _ in range(50):
        q = int(gen.integers(1, 5))
        Y = random_hermitian(gen, q, 10 ** gen.uniform(-3, 1))
        r = saddle.linear_saddle(Y, 100)
        worst = min(worst, r.exponent_per_N)
        worst_res = max(worst_res, r.extra["maximizer_residual"])
    rep.gate("positive exponent for 50 random Y != 0", worst > 0, min_exponent=worst)
    rep.gate("maximizer residual for 50 random Y", worst_res <= 1e-10, max_residual=worst_res)
    return rep


def quartic_saddle_errors(beta=8.0, ns=(100, 200)):
    errs = []
    for N in ns:
        s = saddle.quartic_saddle(saddle.QuarticConfig(beta, 1, N)).log_asymptotic_value
        q = reduction.quartic_double_q1(beta, N)
        errs.append(math.expm1(s.log_magnitude - q.log_magnitude))
    return errs


def suite_quartic_saddle(seed, samples, workers):
    beta, ns = 8.0, (100, 200)
    rep = CompareReport("quartic saddle versus q = 1 double quadrature", {"beta": beta, "N": list(ns)})
    errs = quartic_saddle_errors(beta, ns)
    for N, e in zip(ns, errs):
        rep.routes[f"N={N}"] = {"relative_error": e}
    rep.gate("N=100 within 5%", abs(errs[0]) <= 0.05, rel_gap=errs[0], tol=0.05)
    rep.gate("N=200 improves on N=100", abs(errs[1]) < abs(errs[0]), rel_gaps=errs)
    for q in (1, 2, 3):
        r = saddle.quartic_saddle(saddle.QuarticConfig(beta, q, 100))
        rep.gate(f"zero modes q={q}", r.zero_modes == 2 * q, zero_modes=r.zero_modes)
        rep.gate(f"stationarity q={q}", r.gradient_residual <= 1e-10, residual=r.gradient_residual)
        rep.gate(f"negative definite off gauge q={q}", r.extra["hessian_max_nonzero_eigen"] < 0,
                 max_eigen=r.extra["hessian_max_nonzero_eigen"])
    return rep


def quartic_mc_report(seed, samples, workers, N=20, beta=6.0):
    n = samples or 1_000_000
    rep = CompareReport("double Haar MC of exp(beta N T) versus quadrature", {"N": N, "beta": beta, "samples": n})
    stream = RngStream(seed)
    est = montecarlo.integrate_double(montecarlo.IntegrandSpec.exp_quartic(beta, N), N, 1, n, stream,
                                      shift="auto", workers=workers)
    quad = reduction.quartic_double_q1(beta, N)
    ratio = math.exp(est.log_value.log_magnitude - quad.log_magnitude) if est.mean > 0 else 0.0
    z = abs(est.value - quad.value()) / est.scaled_std_error if est.std_error > 0 else math.inf
    rep.routes["mc"] = {**est.to_dict(), "log_value": est.log_value.to_dict()}
    rep.routes["quadrature"] = {"log_value": quad.to_dict(), "tolerance": reduction.Q1_RTOL}
    rep.gate("MC within 4 sigma of quadrature", z <= 4, z=z, ratio=ratio)
    rep.notes.append(
        "plain Haar sampling almost never reaches the saddle region, whose probability is about 1e-13 here; "
        "the sample mean reflects the bulk near the origin"
    )
    return rep


def suite_quartic_threshold(seed, samples, workers):
    rep = CompareReport("positivity threshold of the quartic exponent")
    b = saddle.quartic_threshold()
    rep.routes["brentq"] = {"beta_star": b}
    rep.gate("beta* in [4.910, 4.912]", 4.910 <= b <= 4.912, beta_star=b)
    g_root = saddle._G(saddle.quartic_c2(b))
    rep.gate("exponent vanishes at beta*", abs(g_root) <= 1e-10, exponent=g_root)
    d = 1e-10
    lo = saddle.quartic_saddle(saddle.QuarticConfig(b - d, 1, 100)).exponent_per_N
    hi = saddle.quartic_saddle(saddle.QuarticConfig(b + d, 1, 100)).exponent_per_N
    rep.gate("sign change within 1e-10 of beta*", lo < 0 < hi, below=lo, above=hi)
    up = saddle.quartic_saddle(saddle.QuarticConfig(b + 0.1, 1, 100)).exponent_per_N
    rep.gate("positive at beta* + 0.1", up > 0, exponent=up)
    return rep


def suite_h_function(seed, samples, workers):
    q_min = 10.0
    rep = CompareReport("subsystem exponent h(q)", {"q_min": q_min})
    d = saddle.h_derivative(q_min, q_min)
    target = 4 - 2 * math.log(2)
    rep.gate("h'(q_min) = 4 - 2 log 2", abs(d - target) <= 1e-4, derivative=d, target=target)
    grid = np.linspace(q_min, 50 * q_min, 200)
    h = np.array([saddle.h_of_q(x, q_min) for x in grid])
    rep.gate("strictly increasing on 200 points", bool(np.all(np.diff(h) > 0)), min_step=float(np.min(np.diff(h))))
    second = np.diff(h, 2)
    rep.gate("convex on the grid", bool(np.all(second > 0)), min_second_difference=float(np.min(second)))
    q_bar = 10.5
    slope = saddle.h_weighted_slope(q_min, q_bar)
    wgrid = np.union1d(np.linspace(q_min, 3 * q_bar, 200), [q_bar])
    hw = np.array([saddle.h_weighted(x, q_min, q_bar) for x in wgrid])
    argmax = float(wgrid[np.argmax(hw)])
    rep.routes["weighted"] = {"q_bar": q_bar, "slope": slope, "argmax": argmax}
    rep.gate("weighted slope negative", slope < 0, slope=slope)
    rep.gate("weighted argmax at q_bar", argmax == q_bar, argmax=argmax)
    fd = (saddle.h_weighted(q_bar + 1.0, q_min, q_bar) - saddle.h_weighted(q_bar + 0.5, q_min, q_bar)) / 0.5
    rep.gate("slope beyond q_bar matches closed form", abs(fd - slope) <= 1e-8, gap=abs(fd - slope))
    return rep


def suite_determinants(seed, samples, workers):
    n = samples or 1000
    rep = CompareReport("determinant identities", {"instances": n})
    gen = RngStream(seed).generator()
    worst_real = 0.0
    for _ in range(n):
        m = int(gen.integers(1, 7))
        X = gen.standard_normal((m, m)) + 1j * gen.standard_normal((m, m))
        worst_real = max(worst_real, rel(linalg.det_realified(X), abs(np.linalg.det(X)) ** 2))
    rep.gate("det_realified = |det|^2", worst_real <= 1e-10, max_rel_gap=worst_real)
    worst_coup = 0.0
    for _ in range(n):
        q, p = int(gen.integers(1, 4)), int(gen.integers(1, 4))
        A, D = sample_blocks(2 * (p + q) + 2, q, 1, gen, p=p)
        A, D = A[0], D[0]
        kron = np.kron(A.conj().T @ A, D.conj().T @ D)
        explicit = float(np.linalg.det(np.eye(p * q) - kron).real)
        worst_coup = max(worst_coup, rel(linalg.coupling_det(A, D), explicit))
    rep.gate("coupling_det vs Kronecker assembly", worst_coup <= 1e-10, max_rel_gap=worst_coup)
    return rep


def quartic_gradient_deviation(A_lt, A_gt, beta, h=1e-6):
    """Max deviation between analytic and central-difference real gradients."""
    _, g = saddle.g_quartic(A_lt, A_gt, beta)
    worst = 0.0
    for b, base in enumerate((A_lt, A_gt)):
        for idx in np.ndindex(base.shape):
            for unit, part in ((1.0, "re"), (1j, "im")):
                def at(t):
                    M = base.copy()
                    M[idx] += t * unit
                    args = (M, A_gt) if b == 0 else (A_lt, M)
                    return saddle.g_quartic(*args, beta)[0]

                fd = (at(h) - at(-h)) / (2 * h)
                dz = g[b, 0][idx]
                an = 2 * dz.real if part == "re" else -2 * dz.imag
                worst = max(worst, abs(fd - an))
    return worst


def suite_gradient(seed, samples, workers):
    n = samples or 100
    rep = CompareReport("quartic exponent gradient versus finite differences", {"points": n})
    gen = RngStream(seed).generator()
    worst = 0.0
    for _ in range(n):
        A_lt, A_gt = (0.9 * b[0] for b in (sample_blocks(6, 2, 1, gen), sample_blocks(6, 2, 1, gen)))
        beta = float(gen.uniform(4.5, 10))
        worst = max(worst, quartic_gradient_deviation(A_lt, A_gt, beta))
    rep.gate("max deviation <= 1e-6", worst <= 1e-6, max_deviation=worst)
    c = saddle.quartic_c(8.0)
    _, g = saddle.g_quartic(c * np.eye(2), c * np.eye(2), 8.0)
    rep.gate("gradient vanishes at c(beta) 1", float(np.max(np.abs(g))) <= 1e-10, norm=float(np.max(np.abs(g))))
    return rep


SUITES = {
    "normalization": suite_normalization,
    "moments": suite_moments,
    "q1-exponential": suite_q1_exponential,
    "linear-saddle": suite_linear_saddle,
    "quartic-saddle": suite_quartic_saddle,
    "quartic-mc": quartic_mc_report,
    "quartic-threshold": suite_quartic_threshold,
    "h-function": suite_h_function,
    "determinants": suite_determinants,
    "gradient": suite_gradient,
}


def run_suite(name, seed=None, samples=None, workers=None):
    if name not in SUITES:
        raise KeyError(name)
    seed = DEFAULT_SEED if seed is None else seed
    rep = SUITES[name](seed, samples, workers)
    rep.config.update({"suite": name, "seed": seed, "samples_override": samples})
    return rep
