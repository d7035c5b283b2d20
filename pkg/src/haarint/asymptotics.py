"""Large-N formulas: leading pairing sums, the Gaussian limit of ``sqrt(N) A``
and the factorization of integrals over two disjoint blocks."""

import math
from dataclasses import dataclass, field

import numpy as np

from . import kernels
from .errors import DimensionError, EnumerationCapError, HomogeneityError
from .haar import complex_gaussian, sample_ball_blocks, sample_blocks
from .montecarlo import (
    DEFAULT_SINGLE_SAMPLES,
    MCEstimate,
    MonomialPattern,
    _gather,
    as_integrand,
    as_stream,
    integrate_single,
    run_chunked,
    summarize,
)
from .reduction import normalization_constant

ENUMERATION_CAP = 8
HOMOGENEITY_RTOL = 1e-8


@dataclass(frozen=True)
class PairingPattern:
    """Index lists of ``prod_m U^{i_m}_{j_m} (U^{-1})^{k_m}_{l_m}`` (1-based).

    Since ``(U^{-1})^k_l = conj(U^l_k)`` this is the monomial with
    unconjugated factors ``(i_m, j_m)`` and conjugated factors ``(l_m, k_m)``.
    """

    i: tuple
    j: tuple
    k: tuple
    l: tuple

    def __post_init__(self):
        for name in "ijkl":
            object.__setattr__(self, name, tuple(int(x) for x in getattr(self, name)))
        p = len(self.i)
        if p < 1 or any(len(getattr(self, n)) != p for n in "jkl"):
            raise DimensionError("index lists must be non-empty and of equal length")
        if min(min(getattr(self, n)) for n in "ijkl") < 1:
            raise DimensionError("indices are 1-based")

    @property
    def p(self):
        return len(self.i)

    @classmethod
    def from_monomial(cls, pattern):
        if not pattern.balanced:
            raise DimensionError("pairing needs as many conjugated as unconjugated factors")
        i, j = zip(*pattern.unconj)
        l, k = zip(*pattern.conj)
        return cls(i, j, k, l)

    def to_monomial(self):
        return MonomialPattern(tuple(zip(self.i, self.j)), tuple(zip(self.l, self.k)))

    def delta_matrix(self):
        """``M[m, n] = [i_m == l_n] [k_n == j_m]``; the pairing sum is its permanent."""
        i, j, k, l = (np.array(getattr(self, n)) for n in "ijkl")
        return ((i[:, None] == l[None, :]) & (k[None, :] == j[:, None])).astype(np.int64)


def pairing_count(pattern):
    """Number of permutations ``sigma`` satisfying all the deltas."""
    if pattern.p > ENUMERATION_CAP:
        raise EnumerationCapError(f"enumeration cap exceeded: p={pattern.p} > {ENUMERATION_CAP}")
    return int(kernels.permanent(pattern.delta_matrix()))


def weingarten_leading(pattern, N):
    """Leading-order moment ``N^{-p} sum_sigma prod_m delta delta``."""
    if isinstance(pattern, MonomialPattern):
        pattern = PairingPattern.from_monomial(pattern)
    if max(max(getattr(pattern, n)) for n in "ijkl") > N:
        raise DimensionError(f"indices must lie in 1..{N}")
    return pairing_count(pattern) / float(N) ** pattern.p


def check_homogeneous(f, degree, q, gen, n_probes=4):
    """Raise :class:`HomogeneityError` unless ``f(2X) = 2^degree f(X)`` on random probes."""
    X = complex_gaussian(gen, (n_probes, q, q))
    lhs = np.asarray(f.values(2.0 * X))
    rhs = 2.0**degree * np.asarray(f.values(X))
    scale = np.maximum(np.abs(rhs), 1e-300)
    worst = float(np.max(np.abs(lhs - rhs) / scale))
    if worst > HOMOGENEITY_RTOL:
        raise HomogeneityError(f"homogeneity violation: f(2X) vs 2^{degree} f(X) relative gap {worst:.3g}")


def gaussian_expectation(f, degree, q, n_samples=DEFAULT_SINGLE_SAMPLES, rng=None, *, workers=None):
    """Expectation of ``f(X)`` for ``X`` a ``q x q`` standard complex Gaussian.

    ``f`` must be homogeneous of the declared degree (checked on probes);
    dividing by ``N^(degree/2)`` gives the leading Haar asymptotic.
    """
    f = as_integrand(f)
    if f.has_log:
        raise HomogeneityError(f"homogeneity violation: {f.kind} integrands are not homogeneous")
    stream = as_stream(rng)
    check_homogeneous(f, degree, q, stream.generator(0, sub=7))

    def task(c, size):
        return complex_gaussian(stream.generator(c, sub=3), (size, q, q))

    X = _gather(task, n_samples, workers, q)
    return summarize(f, (X,), stream)


@dataclass(frozen=True)
class FactorizedResult:
    mode: str
    value: float
    std_error: float
    parts: dict = field(default_factory=dict)

    def to_dict(self):
        return {"mode": self.mode, "value": self.value, "std_error": self.std_error, **self.parts}


def _coupling_logdet(A, D):
    a2 = np.linalg.svd(A, compute_uv=False) ** 2
    d2 = np.linalg.svd(D, compute_uv=False) ** 2
    return np.sum(np.log1p(-a2[:, :, None] * d2[:, None, :]), axis=(1, 2))


def factorized_expectation(
    f, g, degree, N, q, p, mode="product", n_samples=DEFAULT_SINGLE_SAMPLES, rng=None, *, f_route="mc",
    workers=None,
):
    """Haar integral of ``f(A) g(D)`` for disjoint diagonal blocks ``A`` (q x q) and ``D`` (p x p).

    ``mode="product"``: the Haar integral of ``f`` times
    ``gaussian_expectation(g) / N^(degree/2)``. ``f_route`` selects how the
    first factor is computed: ``"mc"`` samples it, ``"saddle"`` (only for
    an ``exp-linear`` spec with ``scale == N``) uses the linear saddle.

    ``mode="coupled"``: the two-block formula with the coupling determinant,
    ``(N/pi)^(q^2+p^2) K(N,q) K(N,p) E[f(A) g(D) / det(1 - A^*A (x) D^*D)]``
    with ``A`` and ``D`` drawn independently from their block laws. The
    record also carries a direct joint Haar estimate and the mean reweighting
    factor as diagnostics.
    """
    if 2 * (p + q) > N:
        raise DimensionError(f"need 2(p+q) <= N, got p={p}, q={q}, N={N}")
    f = as_integrand(f)
    g = as_integrand(g)
    stream = as_stream(rng)

    if mode == "product":
        if f_route == "saddle":
            from .saddle import linear_saddle

            if f.kind != "exp-linear" or f.params["scale"] != N:
                raise ValueError("the saddle route needs an exp-linear integrand with scale N")
            rep = linear_saddle(f.params["Y"], N)
            f_val, f_err, f_part = rep.log_asymptotic_value.value(), 0.0, {"f_route": "saddle"}
        elif f_route == "mc":
            est = integrate_single(f, N, q, n_samples, stream, workers=workers)
            f_val, f_err = float(np.real(est.value)), est.scaled_std_error
            f_part = {"f_route": "mc", "f_estimate": est.to_dict()}
        else:
            raise ValueError(f"f_route must be 'mc' or 'saddle', got {f_route!r}")
        ge = gaussian_expectation(g, degree, p, n_samples, stream, workers=workers)
        scale = float(N) ** (-degree / 2)
        g_val, g_err = float(np.real(ge.mean)) * scale, ge.std_error * scale
        value = f_val * g_val
        err = math.hypot(f_err * g_val, f_val * g_err)
        return FactorizedResult("product", value, err, {**f_part, "f_value": f_val, "g_value": g_val})

    if mode != "coupled":
        raise ValueError(f"mode must be 'product' or 'coupled', got {mode!r}")

    def pair_task(c, size):
        A = sample_ball_blocks(N, q, size, stream.generator(c, sub=4))
        D = sample_ball_blocks(N, p, size, stream.generator(c, sub=5))
        return np.concatenate([A.reshape(size, -1), D.reshape(size, -1)], axis=1)

    both = run_chunked(pair_task, n_samples, workers)
    A = both[:, : q * q].reshape(-1, q, q)
    D = both[:, q * q:].reshape(-1, p, p)
    fg = np.asarray(f.values(A)) * np.asarray(g.values(D))
    weight = np.exp(-_coupling_logdet(A, D))
    log_pre = (q * q + p * p) * math.log(N / math.pi) + (
        normalization_constant(N, q) * normalization_constant(N, p)
    ).log_magnitude
    pre = math.exp(log_pre)
    vals = np.real(fg * weight) * pre
    value = float(np.mean(vals))
    err = float(np.std(vals, ddof=1) / math.sqrt(vals.size))

    def joint_task(c, size):
        A, D = sample_blocks(N, q, size, stream.generator(c, sub=6), p=p)
        return np.concatenate([A.reshape(size, -1), D.reshape(size, -1)], axis=1)

    jb = run_chunked(joint_task, n_samples, workers)
    joint = np.real(
        np.asarray(f.values(jb[:, : q * q].reshape(-1, q, q))) * np.asarray(g.values(jb[:, q * q:].reshape(-1, p, p)))
    )
    joint_est = MCEstimate(float(np.mean(joint)), float(np.std(joint, ddof=1) / math.sqrt(joint.size)), joint.size,
                           stream)
    return FactorizedResult(
        "coupled",
        value,
        err,
        {
            "prefactor": pre,
            "mean_reweight": float(np.mean(weight)),
            "max_reweight": float(np.max(weight)),
            "joint_haar": joint_est.to_dict(),
        },
    )

