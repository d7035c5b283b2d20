"""Laplace asymptotics of exponential block integrals.

Two model exponents are covered:

* linear, ``g(A) = Re Tr(A Y) + log det(1 - A^*A)`` with Hermitian ``Y``;
* quartic, ``g(A_<, A_>) = beta T(A_<, A_>) + log det(1 - A_<^*A_<)
  + log det(1 - A_>^*A_>)`` with ``T`` the diagonal quartic functional.

The quartic saddle sits at ``A_< = A_> = c 1`` with
``c^2 = 1/2 + 1/2 sqrt(1 - 4/beta)``; writing ``G(s) = s/(1-s) + 2 log(1-s)``
the exponent per unit ``N`` there is ``q G(c^2)``.
"""

import math
from dataclasses import dataclass, field

import numpy as np
from scipy import optimize

from . import kernels
from .errors import DimensionError, DomainError, GeometricRegimeError, NoInteriorSaddleError, NotHermitianError
from .linalg import LogValue, as_matrix, check_ball, eigh_sorted, log_coupling_det
from .reduction import reduced_integral_q1

HERMITIAN_TOL = 1e-12
UNRELIABLE_GAP = 1e-8
_FD_STEP = 1e-6

INTERIOR = "interior-saddle"
NO_INTERIOR = "no-interior-saddle"
BOUNDARY = "boundary-dominated"


@dataclass(frozen=True)
class SaddleReport:
    saddle_location: np.ndarray
    exponent_per_N: float
    log_asymptotic_value: LogValue | None
    prefactor_log: float | None
    hessian_min_abs_eigen: float | None
    status: str
    gradient_residual: float | None = None
    zero_modes: int = 0
    unreliable: bool = False
    extra: dict = field(default_factory=dict)

    def to_dict(self):
        loc = np.asarray(self.saddle_location)
        return {
            "saddle_location_re": loc.real.tolist(),
            "saddle_location_im": loc.imag.tolist(),
            "exponent_per_N": self.exponent_per_N,
            "log_value": None if self.log_asymptotic_value is None else self.log_asymptotic_value.to_dict(),
            "prefactor_log": self.prefactor_log,
            "hessian_min_abs_eigen": self.hessian_min_abs_eigen,
            "status": self.status,
            "gradient_residual": self.gradient_residual,
            "zero_modes": self.zero_modes,
            "unreliable": self.unreliable,
            **self.extra,
        }


def _G(s):
    return s / (1.0 - s) + 2.0 * math.log1p(-s)


def _hermitian(Y):
    Y = as_matrix(Y, square=True)
    dev = float(np.max(np.abs(Y - Y.conj().T)))
    if dev > HERMITIAN_TOL:
        raise NotHermitianError(f"Y must be Hermitian, max |Y - Y^*| = {dev:.3g}")
    return 0.5 * (Y + Y.conj().T)


def _logdet_grad(A):
    """Wirtinger derivative d/dA of log det(1 - A^*A)."""
    M = np.eye(A.shape[1]) - A.conj().T @ A
    return -np.linalg.solve(M, A.conj().T).T


def _real_grad(dz):
    # for real-valued g: dg/dx = 2 Re dg/dz, dg/dy = -2 Im dg/dz
    return np.concatenate([2.0 * dz.real.ravel(), -2.0 * dz.imag.ravel()])


def _numerical_hessian(real_grad, x0, step=_FD_STEP):
    n = x0.size
    H = np.empty((n, n))
    for k in range(n):
        e = np.zeros(n)
        e[k] = step
        H[:, k] = (real_grad(x0 + e) - real_grad(x0 - e)) / (2 * step)
    return 0.5 * (H + H.T)


def _split(x, shape):
    n = x.size // 2
    return (x[:n] + 1j * x[n:]).reshape(shape)


# ---------------------------------------------------------------------------
# linear exponent


def linear_g(A, Y):
    """Value and Wirtinger gradient d/dA of the linear exponent."""
    A = as_matrix(A, square=True)
    Y = as_matrix(Y, square=True)
    check_ball(A, "A")
    value = float(np.trace(A @ Y).real) + float(kernels.numpy_impl.logdet_one_minus_gram(A[None])[0])
    return value, 0.5 * Y.T + _logdet_grad(A)


def linear_maximizer_residual(Y, A0):
    """``max |2 A0 (1 - A0^* A0)^{-1} - Y|``, zero exactly at the maximizer."""
    Y = as_matrix(Y, square=True)
    A0 = as_matrix(A0, square=True)
    check_ball(A0, "A0")
    M = np.eye(A0.shape[0]) - A0.conj().T @ A0
    return float(np.max(np.abs(2.0 * np.linalg.solve(M.T, A0.T).T - Y)))


def linear_saddle(Y, N):
    """Saddle report for the Haar integral of ``exp(N Re Tr(A Y))``."""
    Y = _hermitian(Y)
    q = Y.shape[0]
    w, V = eigh_sorted(Y)
    # y / (sqrt(y^2+1)+1) maps 0 to 0 and acts eigenvalue-wise, so degenerate
    # eigenspaces are handled automatically
    a = w / (np.sqrt(w * w + 1.0) + 1.0)
    A0 = (V * a) @ V.conj().T
    exponent = float(np.sum(a * w) + np.sum(np.log1p(-a * a)))
    prefactor = -0.5 * log_coupling_det(A0, A0)

    def rgrad(x):
        return _real_grad(linear_g(_split(x, (q, q)), Y)[1])

    x0 = np.concatenate([A0.real.ravel(), A0.imag.ravel()])
    eig = np.linalg.eigvalsh(_numerical_hessian(rgrad, x0))
    return SaddleReport(
        saddle_location=A0,
        exponent_per_N=exponent,
        log_asymptotic_value=LogValue(N * exponent + prefactor),
        prefactor_log=prefactor,
        hessian_min_abs_eigen=float(np.min(np.abs(eig))),
        status=INTERIOR,
        gradient_residual=float(np.max(np.abs(rgrad(x0)))),
        extra={"maximizer_residual": linear_maximizer_residual(Y, A0), "hessian_max_eigen": float(eig[-1])},
    )


# ---------------------------------------------------------------------------
# quartic exponent


def quartic_c2(beta):
    if beta < 4:
        raise NoInteriorSaddleError(f"no interior saddle for beta={beta} < 4")
    return 0.5 + 0.5 * math.sqrt(1.0 - 4.0 / beta)


def quartic_c(beta):
    """Saddle radius ``c(beta)``; ``beta = 4`` gives the degenerate ``c^2 = 1/2``."""
    return math.sqrt(quartic_c2(beta))


def beta_of_c(c):
    c2 = c * c
    if not 0.5 - 1e-15 <= c2 < 1.0:
        raise DomainError(f"need 1/sqrt(2) <= c < 1, got c={c}")
    return 1.0 / (c2 * (1.0 - c2))


def quartic_threshold():
    """``beta*`` above which the quartic saddle has a positive exponent."""
    s = optimize.brentq(_G, 0.5, 0.99, xtol=1e-15, rtol=4 * np.finfo(float).eps)
    return 1.0 / (s * (1.0 - s))


def T_functional(A_lt, A_gt):
    A_lt = as_matrix(A_lt, square=True)
    A_gt = as_matrix(A_gt, square=True)
    if A_lt.shape != A_gt.shape:
        raise DimensionError(f"block shapes differ: {A_lt.shape} vs {A_gt.shape}")
    return float(kernels.numpy_impl.t_functional(A_lt[None], A_gt[None])[0])


def g_quartic(A_lt, A_gt, beta):
    """Value of the quartic exponent and its Wirtinger gradient.

    The gradient has shape ``(2, 2, q, q)``: index 0 selects the block
    (``A_<`` then ``A_>``), index 1 the derivative (``d/dA`` then
    ``d/d conj(A)``).
    """
    A_lt = as_matrix(A_lt, square=True)
    A_gt = as_matrix(A_gt, square=True)
    if A_lt.shape != A_gt.shape:
        raise DimensionError(f"block shapes differ: {A_lt.shape} vs {A_gt.shape}")
    check_ball(A_lt, "A_<")
    check_ball(A_gt, "A_>")
    ld = kernels.numpy_impl.logdet_one_minus_gram(np.stack([A_lt, A_gt]))
    value = beta * T_functional(A_lt, A_gt) + float(ld[0] + ld[1])
    a = np.diagonal(A_lt)
    b = np.diagonal(A_gt)
    d_lt = _logdet_grad(A_lt) + beta * np.diag(np.conj(a) * np.abs(b) ** 2)
    d_gt = _logdet_grad(A_gt) + beta * np.diag(np.conj(b) * np.abs(a) ** 2)
    grad = np.stack([np.stack([d_lt, d_lt.conj()]), np.stack([d_gt, d_gt.conj()])])
    return value, grad


def _quartic_real_grad(beta, q):
    def rgrad(x):
        n = 2 * q * q
        A_lt = x[:q * q].reshape(q, q) + 1j * x[n:n + q * q].reshape(q, q)
        A_gt = x[q * q:n].reshape(q, q) + 1j * x[n + q * q:].reshape(q, q)
        _, g = g_quartic(A_lt, A_gt, beta)
        dz = np.concatenate([g[0, 0].ravel(), g[1, 0].ravel()])
        return _real_grad(dz)

    return rgrad


def _quartic_point(c, q):
    A = c * np.eye(q)
    return np.concatenate([A.ravel(), A.ravel(), np.zeros(2 * q * q)]).real


def quartic_hessian_spectrum(beta, q):
    """Eigenvalues of the real Hessian of the quartic exponent at ``c 1``."""
    c = quartic_c(beta)
    rgrad = _quartic_real_grad(beta, q)
    return np.linalg.eigvalsh(_numerical_hessian(rgrad, _quartic_point(c, q)))


def _count_zero_modes(eig, tol=1e-6):
    scale = max(1.0, float(np.max(np.abs(eig))))
    return int(np.sum(np.abs(eig) < tol * scale))


@dataclass(frozen=True)
class HessianBlocks:
    c2: float
    E: np.ndarray
    F: np.ndarray
    det_E: float
    det_F: float
    zero_modes: int
    min_abs_nonzero: float
    max_nonzero: float

    def prefactors(self, N):
        """``pi/N (1-c^2)^2 / sqrt(8c^2-4)`` and ``pi/N (1-c^2)^2 / sqrt(1-c^4)``."""
        s = (1.0 - self.c2) ** 2 * math.pi / N
        return s / math.sqrt(8 * self.c2 - 4), s / math.sqrt(1 - self.c2**2)


def quartic_hessian_blocks(beta, q=1):
    """Per-site covariance blocks of the quartic expansion and a zero-mode count.

    ``E`` couples the real diagonal fluctuations of the two blocks and ``F``
    the off-diagonal ones. The zero-mode count comes from the full numerical
    Hessian at ``A_< = A_> = c 1``.
    """
    if beta <= 4:
        raise NoInteriorSaddleError(f"Hessian blocks need beta > 4, got {beta}")
    c2 = quartic_c2(beta)
    u = 1.0 - c2
    E = 2.0 / u**2 * np.array([[c2, -u], [-u, c2]])
    F = 1.0 / u**2 * np.array([[1.0, c2], [c2, 1.0]])
    eig = quartic_hessian_spectrum(beta, q)
    zm = _count_zero_modes(eig)
    rest = np.sort(np.abs(eig))[zm:]
    return HessianBlocks(
        c2=c2,
        E=E,
        F=F,
        det_E=float(np.linalg.det(E)),
        det_F=float(np.linalg.det(F)),
        zero_modes=zm,
        min_abs_nonzero=float(rest[0]) if rest.size else math.nan,
        max_nonzero=float(np.max(np.sort(eig)[np.argsort(np.abs(eig))[zm:]])) if rest.size else math.nan,
    )


@dataclass(frozen=True)
class QuarticConfig:
    beta: float
    q: int
    N: int
    q_min: float | None = None

    def __post_init__(self):
        if not self.beta > 0:
            raise DomainError(f"beta must be positive, got {self.beta}")
        if self.q < 1:
            raise DimensionError(f"q must be >= 1, got {self.q}")
        if self.N < 2 * self.q:
            raise DimensionError(f"need N >= 2q, got N={self.N}, q={self.q}")

    @classmethod
    def from_q_min(cls, q, q_min, N, block=1):
        """Configuration with ``beta = 4 q^3 / q_min^3``."""
        return cls(4.0 * q**3 / q_min**3, block, N, q_min)


def quartic_saddle(cfg):
    """Saddle report for the double Haar integral of ``exp(beta N T)``."""
    beta, q, N = cfg.beta, cfg.q, cfg.N
    if beta <= 4:
        return SaddleReport(
            saddle_location=np.zeros((q, q), dtype=complex),
            exponent_per_N=0.0,
            log_asymptotic_value=None,
            prefactor_log=None,
            hessian_min_abs_eigen=None,
            status=NO_INTERIOR,
            unreliable=beta == 4,
            extra={"beta": beta, "c2": 0.5 if beta == 4 else None},
        )
    c2 = quartic_c2(beta)
    gap = 2 * c2 - 1
    exponent = q * _G(c2)
    prefactor = (
        q * math.log(2 * math.pi * N)
        - q * q * math.log1p(-c2 * c2)
        + q * math.log((1 + c2) / (1 - c2) * c2 / math.sqrt(gap))
    )
    c = math.sqrt(c2)
    rgrad = _quartic_real_grad(beta, q)
    x0 = _quartic_point(c, q)
    eig = np.linalg.eigvalsh(_numerical_hessian(rgrad, x0))
    zm = _count_zero_modes(eig)
    return SaddleReport(
        saddle_location=c * np.eye(q, dtype=complex),
        exponent_per_N=exponent,
        log_asymptotic_value=LogValue(prefactor + N * exponent),
        prefactor_log=prefactor,
        hessian_min_abs_eigen=float(np.sort(np.abs(eig))[zm]),
        status=INTERIOR if exponent > 0 else BOUNDARY,
        gradient_residual=float(np.max(np.abs(rgrad(x0)))),
        zero_modes=zm,
        unreliable=gap < UNRELIABLE_GAP,
        extra={"beta": beta, "c2": c2, "hessian_max_nonzero_eigen": float(eig[np.argsort(np.abs(eig))[zm:]].max())},
    )


# ---------------------------------------------------------------------------
# subsystem-size exponent


def _s_of_q(q, q_min):
    if q_min <= 0:
        raise DomainError(f"q_min must be positive, got {q_min}")
    if q < q_min:
        raise DomainError(f"need q >= q_min, got q={q}, q_min={q_min}")
    return 0.5 + 0.5 * math.sqrt(max(0.0, 1.0 - (q_min / q) ** 3))


def c_of_q(q, q_min):
    return math.sqrt(_s_of_q(q, q_min))


def h_of_q(q, q_min):
    """``h(q) = q G(c(q)^2)`` with ``c(q)^2 = 1/2 + 1/2 sqrt(1 - q_min^3/q^3)``."""
    return q * _G(_s_of_q(q, q_min))


def h_derivative(q, q_min, method="analytic"):
    """``h'(q)``.

    ``"analytic"`` uses ``h' = G(s) + 3 q_min^3 / (4 q^3 (1-s)^2)``, valid on
    the closed half-line. ``"central"`` uses central differences with step
    ``1e-5 q`` and needs the left point to stay in the domain.
    """
    if method == "analytic":
        s = _s_of_q(q, q_min)
        return _G(s) + 3.0 * q_min**3 / (4.0 * q**3 * (1.0 - s) ** 2)
    if method == "central":
        h = 1e-5 * q
        if q - h < q_min:
            raise DomainError("central differences leave the domain at this q; use method='analytic'")
        return (h_of_q(q + h, q_min) - h_of_q(q - h, q_min)) / (2 * h)
    raise ValueError(f"method must be 'analytic' or 'central', got {method!r}")


def h_weighted_slope(q_min, q_bar):
    """Slope of :func:`h_weighted` beyond ``q_bar``."""
    return _G(_s_of_q(q_bar, q_min))


def h_weighted(q, q_min, q_bar):
    """``h`` with ``c(q)`` frozen at ``c(q_bar)`` for ``q > q_bar``."""
    if q_bar < q_min:
        raise DomainError(f"need q_bar >= q_min, got q_bar={q_bar}, q_min={q_min}")
    if q <= q_bar:
        return h_of_q(q, q_min)
    return q * h_weighted_slope(q_min, q_bar)


def alpha_from_scales(ell, T, eps, q_min):
    """``alpha = ell^9 / (T eps^4) * 4 / q_min^3`` (dimension length^4)."""
    for name, v in (("ell", ell), ("T", T), ("eps", eps), ("q_min", q_min)):
        if not v > 0:
            raise DomainError(f"{name} must be positive, got {v}")
    return ell**9 / (T * eps**4) * 4.0 / q_min**3


# ---------------------------------------------------------------------------
# radial exponential example


def exp_linear_example(beta, N, scaled=False):
    """Haar expectation of ``exp(b |U_11|^2)``.

    Unscaled (``b = beta``): the series ``sum_p beta^p (N-1)!/(N+p-1)!``.
    Scaled (``b = beta N``): quadrature, requires ``beta < 1``; the large-N
    limit is :func:`exp_linear_limit`.
    """
    if N < 2:
        raise DimensionError(f"need N >= 2, got {N}")
    if scaled:
        if beta >= 1:
            raise GeometricRegimeError(
                f"geometric regime violated: scaled mode needs beta < 1, got {beta}; "
                "for beta > 1 the maximum moves into the interior"
            )
        return reduced_integral_q1(lambda u: beta * N * u, N, radial=True, log_f=True)
    total, term, p = 1.0, 1.0, 0
    while True:
        term *= beta / (N + p)
        p += 1
        total += term
        if abs(term) <= 1e-17 * abs(total) and p > abs(beta):
            return total


def exp_linear_limit(beta):
    if beta >= 1:
        raise GeometricRegimeError(f"geometric regime violated: need beta < 1, got {beta}")
    return 1.0 / (1.0 - beta)
