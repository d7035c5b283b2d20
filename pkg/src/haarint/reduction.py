"""Haar integrals over the leading block as weighted integrals over the ball.

The leading ``q x q`` block ``A`` of a Haar unitary on U(N), ``N >= 2q``, has
density ``det(1 - A^*A)^(N - 2q) / K(N, q)`` with respect to Lebesgue measure
on the ball of contractions, where

    K(N, q) = pi^(q^2) prod_{k=1..q} (N - q - k)! / (N - k)!.

This module evaluates ``K`` exactly, does deterministic quadrature for
``q = 1`` and for the determinant power at ``q = 2``, and samples the block
for everything else.
"""

import math
import warnings
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np
from scipy import integrate

from . import kernels
from .errors import DimensionError, QuadratureError
from .haar import sample_ball_blocks
from .linalg import LogValue
from .montecarlo import (
    DEFAULT_SINGLE_SAMPLES,
    IntegrandSpec,
    _gather,
    as_integrand,
    as_stream,
    summarize,
)

EXACT_FACTORIAL_MAX = 20
Q1_RTOL = 1e-8
Q2_RTOL = 1e-8


def _check_reduction(N, q):
    if q < 1:
        raise DimensionError(f"q must be >= 1, got {q}")
    if N < 2 * q:
        raise DimensionError(f"reduction requires N >= 2q, got N={N}, q={q}")


def normalization_ratio(N, q):
    """``prod_k (N-q-k)!/(N-k)!`` as an exact fraction."""
    _check_reduction(N, q)
    out = Fraction(1)
    for k in range(1, q + 1):
        out *= Fraction(math.factorial(N - q - k), math.factorial(N - k))
    return out


def normalization_constant(N, q):
    """``K(N, q)``, the ball volume of the weight ``det(1 - A^*A)^(N-2q)``."""
    _check_reduction(N, q)
    if N <= EXACT_FACTORIAL_MAX:
        r = normalization_ratio(N, q)
        log_ratio = math.log(r.numerator) - math.log(r.denominator)
    else:
        log_ratio = sum(math.lgamma(N - q - k + 1) - math.lgamma(N - k + 1) for k in range(1, q + 1))
    return LogValue(q * q * math.log(math.pi) + log_ratio)


def det_power_moment(N, q, m):
    """Haar expectation of ``det(1 - A^*A)^m`` for the leading block.

    Equals ``K(N + m, q) / K(N, q)`` because raising the weight's power by
    ``m`` is the same as enlarging ``N`` by ``m``.
    """
    _check_reduction(N, q)
    if m < 0:
        raise ValueError("m must be >= 0")
    if float(m).is_integer():
        m = int(m)
        if N + m <= EXACT_FACTORIAL_MAX:
            return float(normalization_ratio(N + m, q) / normalization_ratio(N, q))
    log = sum(
        math.lgamma(N + m - q - k + 1)
        - math.lgamma(N + m - k + 1)
        - math.lgamma(N - q - k + 1)
        + math.lgamma(N - k + 1)
        for k in range(1, q + 1)
    )
    return math.exp(log)


# ---------------------------------------------------------------------------
# quadrature helpers


def _quad(fn, a, b, rtol, points=None, limit=400):
    pts = None
    if points is not None:
        pts = [p for p in np.atleast_1d(points) if a < p < b] or None
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", integrate.IntegrationWarning)
        val, err, info, *rest = integrate.quad(
            fn, a, b, epsabs=0.0, epsrel=rtol, limit=limit, points=pts, full_output=True
        )
    if rest or not np.isfinite(val) or err > max(rtol * abs(val), 1e-300) * 10:
        last = info.get("last", 0)
        abscissa = None
        if last:
            worst = int(np.argmax(info["elist"][:last]))
            abscissa = 0.5 * (info["alist"][worst] + info["blist"][worst])
        msg = rest[0] if rest else "quadrature did not reach the requested tolerance"
        raise QuadratureError(str(msg).splitlines()[0], abscissa)
    return val, err


def _safe_log(v):
    v = float(v)
    if v < 0 or math.isnan(v):
        raise ValueError(f"quadrature routes need a non-negative integrand, got {v!r}")
    return math.log(v) if v > 0 else -math.inf


def _prefactor(N, mode):
    if mode == "exact":
        return (N - 1) / math.pi
    if mode == "leading":
        return N / math.pi
    raise ValueError(f"mode must be 'exact' or 'leading', got {mode!r}")


def reduced_log_integral_q1(f, N, *, radial=False, log_f=False, mode="exact", rtol=Q1_RTOL):
    """``c_N * integral over the unit disc of f(a) (1 - |a|^2)^(N-2)`` as a LogValue.

    ``c_N`` is ``(N-1)/pi`` in ``"exact"`` mode, which makes the result the
    Haar expectation of ``f(U_11)``, and ``N/pi`` in ``"leading"`` mode.

    Parameters
    ----------
    f : callable
        ``f(u)`` with ``u = |a|^2`` when ``radial``, else ``f(a)`` for complex
        ``a``. Must return a positive number when ``log_f`` is false, or the
        logarithm of the integrand when ``log_f`` is true.
    """
    if N < 2:
        raise DimensionError(f"need N >= 2, got {N}")
    logf = f if log_f else (lambda x: _safe_log(f(x)))
    log_pre = math.log(_prefactor(N, mode))

    if radial:
        def expo(u):
            return logf(u) + (N - 2) * math.log1p(-u) if u < 1.0 else -math.inf

        grid = np.linspace(0.0, 1.0, 2001)[:-1]
        ev = np.array([expo(u) for u in grid])
        shift = float(np.max(ev))
        peak = float(grid[np.argmax(ev)])
        val, _ = _quad(lambda u: math.exp(expo(u) - shift), 0.0, 1.0, rtol, points=[peak])
        return LogValue(log_pre + math.log(math.pi) + shift + math.log(val))

    def expo2(r, phi):
        if r >= 1.0:
            return -math.inf
        return logf(r * complex(math.cos(phi), math.sin(phi))) + (N - 2) * math.log1p(-r * r)

    rs = np.linspace(0.0, 1.0, 201)[:-1]
    phis = np.linspace(-math.pi, math.pi, 257)
    ev = np.array([[expo2(r, p) for p in phis] for r in rs])
    shift = float(np.max(ev))
    ir, ip = np.unravel_index(np.argmax(ev), ev.shape)
    r_peak, phi_peak = float(rs[ir]), float(phis[ip])

    def inner(r):
        v, _ = _quad(lambda p: math.exp(expo2(r, p) - shift), -math.pi, math.pi, rtol * 0.1, points=[phi_peak])
        return r * v

    val, _ = _quad(inner, 0.0, 1.0, rtol, points=[r_peak])
    if val <= 0:
        raise QuadratureError("integral of a positive integrand came out non-positive")
    return LogValue(log_pre + shift + math.log(val))


def reduced_integral_q1(f, N, *, radial=False, log_f=False, mode="exact", rtol=Q1_RTOL):
    """Float version of :func:`reduced_log_integral_q1`."""
    return reduced_log_integral_q1(f, N, radial=radial, log_f=log_f, mode=mode, rtol=rtol).value()


def detpower_integral_q2(N, rtol=Q2_RTOL):
    """Lebesgue integral of ``det(1 - A^*A)^(N-4)`` over the 2x2 ball.

    Uses the rotation-reduced coordinates ``(r, R, R_hat, cos t)`` with
    measure ``256 pi^3 r R^2 R_hat^2``. The innermost ``R`` integral is a
    polynomial and is done exactly by Gauss-Legendre; the outer three are
    mapped to a cube (``r = sin(th)``, ``R_hat = cos(th) s``) and handed to an
    adaptive cubature.
    """
    if N < 4:
        raise DimensionError(f"need N >= 4, got {N}")
    power = N - 4
    nodes, weights = np.polynomial.legendre.leggauss(2 * power + 4)

    def integrand(X):
        th, s, ct = X[:, 0], X[:, 1], X[:, 2]
        r = np.sin(th)
        cth = np.cos(th)
        rh = cth * s
        inner = kernels.q2_inner(r, rh, ct, power, nodes, weights)
        # cos(t) in [-1, 1] folded onto [0, 1]
        return 2.0 * cth * cth * r * rh * rh * inner

    res = integrate.cubature(
        integrand, [0.0, 0.0, 0.0], [math.pi / 2, 1.0, 1.0], rtol=rtol, atol=0.0, max_subdivisions=200_000
    )
    if res.status != "converged":
        raise QuadratureError(f"cubature did not converge (estimate {res.estimate!r}, error {res.error!r})")
    return 256.0 * math.pi**3 * float(res.estimate)


def quartic_double_q1(beta, N, rtol=Q1_RTOL):
    """Double Haar integral of ``exp(beta N |u_11|^2 |v_11|^2)`` for q = 1.

    Computed as ``(N-1)^2 * integral over [0,1]^2 of
    exp(beta N x y) (1-x)^(N-2) (1-y)^(N-2)``, nested and log-shifted.
    """
    if N < 2:
        raise DimensionError(f"need N >= 2, got {N}")
    m = N - 2

    def inner_log(x):
        # log of integral over y; the y-exponent is concave with peak y*
        b = beta * N * x
        ystar = 1.0 - m / b if b > m else 0.0
        s = b * ystar + m * math.log1p(-ystar) if ystar > 0 else 0.0
        v, _ = _quad(lambda y: math.exp(b * y + m * math.log1p(-y) - s) if y < 1 else 0.0, 0.0, 1.0, rtol * 0.1,
                     points=[ystar])
        return s + math.log(v)

    def outer_expo(x):
        return inner_log(x) + m * math.log1p(-x) if x < 1 else -math.inf

    grid = np.linspace(0.0, 1.0, 401)[:-1]
    ev = np.array([outer_expo(x) for x in grid])
    shift = float(np.max(ev))
    peak = float(grid[np.argmax(ev)])
    val, _ = _quad(lambda x: math.exp(outer_expo(x) - shift), 0.0, 1.0, rtol, points=[peak])
    return LogValue(2 * math.log(N - 1) + shift + math.log(val))


# ---------------------------------------------------------------------------
# sampling and leading-order routes


def reduced_expectation(f, N, q, n_samples=DEFAULT_SINGLE_SAMPLES, rng=None, *, shift=None, workers=None):
    """Haar expectation of ``f(A)`` by sampling the block density on the ball.

    Draws come from :func:`haarint.haar.sample_ball_blocks`, which is exact in
    distribution and independent of the frame sampler used by
    :func:`haarint.montecarlo.integrate_single`.
    """
    _check_reduction(N, q)
    f = as_integrand(f)
    if n_samples < 2:
        raise ValueError("n_samples must be >= 2")
    stream = as_stream(rng)

    def task(c, size):
        return sample_ball_blocks(N, q, size, stream.generator(c, sub=2))

    A = _gather(task, n_samples, workers, q)
    return summarize(f, (A,), stream, shift)


LEADING_CAVEAT = "leading order in N: equals the Haar expectation times (N/pi)^(q^2) K(N,q) = 1 + O(1/N)"


@dataclass(frozen=True)
class LeadingIntegral:
    """Result of :func:`leading_reduced_integral`."""

    value: float
    uncertainty: float
    method: str
    fallback: bool = False
    caveat: str = LEADING_CAVEAT
    details: dict = field(default_factory=dict)

    def to_dict(self):
        return {
            "value": self.value,
            "uncertainty": self.uncertainty,
            "method": self.method,
            "fallback": self.fallback,
            "caveat": self.caveat,
            **self.details,
        }


def leading_log_prefactor(N, q):
    """``log((N/pi)^(q^2) K(N, q))``."""
    return q * q * math.log(N / math.pi) + normalization_constant(N, q).log_magnitude


def leading_reduced_integral(f, N, q, *, radial=False, n_samples=DEFAULT_SINGLE_SAMPLES, rng=None):
    """``(N/pi)^(q^2)`` times the ball integral of ``f det(1-A^*A)^(N-2q)``.

    ``f=None`` means the constant 1 and is evaluated in closed form. A plain
    callable at ``q = 1`` is integrated by quadrature. Anything else (an
    :class:`IntegrandSpec`, or ``q >= 2`` with non-constant ``f``) falls back
    to sampling and sets ``fallback=True``.
    """
    _check_reduction(N, q)
    log_pre = leading_log_prefactor(N, q)
    if f is None:
        if q == 2:
            value = (N / math.pi) ** 4 * detpower_integral_q2(N)
            return LeadingIntegral(value, value * Q2_RTOL, "quadrature-q2")
        return LeadingIntegral(math.exp(log_pre), 0.0, "closed-form")
    if q == 1 and callable(f) and not isinstance(f, IntegrandSpec):
        value = reduced_integral_q1(f, N, radial=radial, mode="leading")
        return LeadingIntegral(value, abs(value) * Q1_RTOL, "quadrature-q1")
    warnings.warn(f"no deterministic quadrature for this integrand at q={q}; sampling instead", RuntimeWarning,
                  stacklevel=2)
    est = reduced_expectation(f, N, q, n_samples, rng)
    scale = math.exp(log_pre)
    return LeadingIntegral(
        float(np.real(est.value)) * scale,
        est.scaled_std_error * scale,
        "monte-carlo",
        fallback=True,
        details={"seed": est.seed.to_dict(), "n_samples": est.n_samples},
    )
