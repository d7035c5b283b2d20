"""Dense complex linear algebra and the determinant identities used by the
reduction and saddle-point routes.

Matrices are plain complex ``ndarray`` values. Quantities whose magnitude
scales like ``exp(const * N)`` are carried as :class:`LogValue`.
"""

import math
from dataclasses import dataclass

import numpy as np

from .errors import BallDomainError, DecompositionError, DimensionError, SingularMatrixError

#: Largest singular value accepted as "inside the ball".
BALL_TOL = 1e-14


@dataclass(frozen=True)
class LogValue:
    """Phase times ``exp(log_magnitude)``, or an explicit zero.

    ``phase`` is a unit-modulus complex number (``1`` or ``-1`` for reals).
    """

    log_magnitude: float
    phase: complex = 1.0 + 0.0j
    is_zero: bool = False

    def __post_init__(self):
        object.__setattr__(self, "phase", complex(self.phase))
        if self.is_zero:
            object.__setattr__(self, "log_magnitude", -math.inf)
            return
        if not math.isfinite(self.log_magnitude):
            raise ValueError(f"log_magnitude must be finite, got {self.log_magnitude!r}")
        if abs(abs(self.phase) - 1.0) > 1e-12:
            raise ValueError(f"phase must have unit modulus, got {self.phase!r}")

    @classmethod
    def zero(cls):
        return cls(-math.inf, 1.0, is_zero=True)

    @classmethod
    def from_value(cls, x):
        x = complex(x)
        if x == 0:
            return cls.zero()
        return cls(math.log(abs(x)), x / abs(x))

    @classmethod
    def from_log(cls, log_magnitude, sign=1.0):
        if log_magnitude == -math.inf:
            return cls.zero()
        return cls(float(log_magnitude), sign)

    @property
    def is_real(self):
        return self.phase.imag == 0.0

    def value(self):
        """Ordinary float (or complex) value; may overflow to inf."""
        if self.is_zero:
            return 0.0
        try:
            mag = math.exp(self.log_magnitude)
        except OverflowError:
            mag = math.inf
        if self.is_real:
            return math.copysign(mag, self.phase.real)
        return mag * self.phase

    def __mul__(self, other):
        if not isinstance(other, LogValue):
            other = LogValue.from_value(other)
        if self.is_zero or other.is_zero:
            return LogValue.zero()
        return LogValue(self.log_magnitude + other.log_magnitude, _unit(self.phase * other.phase))

    __rmul__ = __mul__

    def __truediv__(self, other):
        if not isinstance(other, LogValue):
            other = LogValue.from_value(other)
        if other.is_zero:
            raise ZeroDivisionError("division by a zero LogValue")
        if self.is_zero:
            return LogValue.zero()
        return LogValue(self.log_magnitude - other.log_magnitude, _unit(self.phase / other.phase))

    def __pow__(self, power):
        if self.is_zero:
            return LogValue.zero()
        if self.phase == 1:
            return LogValue(self.log_magnitude * power)
        if float(power) != int(power):
            raise ValueError("non-integer power of a LogValue with non-trivial phase")
        return LogValue(self.log_magnitude * power, _unit(self.phase ** int(power)))

    def to_dict(self):
        return {
            "log_magnitude": None if self.is_zero else self.log_magnitude,
            "phase_re": self.phase.real,
            "phase_im": self.phase.imag,
        }

    @classmethod
    def from_dict(cls, d):
        if d["log_magnitude"] is None:
            return cls.zero()
        return cls(d["log_magnitude"], complex(d["phase_re"], d["phase_im"]))


def _unit(z):
    z = complex(z)
    if z.imag == 0.0:
        return complex(math.copysign(1.0, z.real), 0.0)
    return z / abs(z)


def as_matrix(X, square=False):
    """Coerce to a 2-d complex array (scalars become 1x1)."""
    X = np.atleast_2d(np.asarray(X, dtype=np.complex128))
    if X.ndim != 2:
        raise DimensionError(f"expected a matrix, got shape {X.shape}")
    if X.size == 0:
        raise DimensionError("empty matrix")
    if square and X.shape[0] != X.shape[1]:
        raise DimensionError(f"expected a square matrix, got shape {X.shape}")
    return X


def is_unitary(U, tol=None):
    U = as_matrix(U, square=True)
    n = U.shape[0]
    if tol is None:
        tol = 1e-12 * n
    return float(np.max(np.abs(U.conj().T @ U - np.eye(n)))) <= tol


def singular_values(X):
    """Singular values in ascending order."""
    X = as_matrix(X)
    try:
        s = np.linalg.svd(X, compute_uv=False)
    except np.linalg.LinAlgError as exc:
        raise DecompositionError(f"SVD did not converge: {exc}") from exc
    return s[::-1].copy()


def check_ball(X, name="matrix"):
    """Raise :class:`BallDomainError` unless every singular value is < 1 - BALL_TOL."""
    smax = singular_values(X)[-1]
    if not smax < 1.0 - BALL_TOL:
        raise BallDomainError(f"{name} is outside ball domain: largest singular value {smax!r}")
    return smax


def in_ball(X):
    return singular_values(X)[-1] < 1.0 - BALL_TOL


def eigh_sorted(H):
    """Eigen-decomposition of a Hermitian matrix.

    Eigenvalues are ascending; ties keep the order LAPACK reported them in,
    which is stable for repeated calls on the same input.

    Returns
    -------
    w : ndarray
        Eigenvalues.
    V : ndarray
        Matching eigenvectors as columns.
    """
    H = as_matrix(H, square=True)
    try:
        w, V = np.linalg.eigh(H)
    except np.linalg.LinAlgError as exc:
        raise DecompositionError(f"eigh did not converge: {exc}") from exc
    order = np.argsort(w, kind="stable")
    return w[order], V[:, order]


def svd_sorted(X):
    """SVD ``X = U diag(s) Vh`` with singular values ascending."""
    X = as_matrix(X)
    try:
        U, s, Vh = np.linalg.svd(X, full_matrices=False)
    except np.linalg.LinAlgError as exc:
        raise DecompositionError(f"SVD did not converge: {exc}") from exc
    order = np.argsort(s, kind="stable")
    return U[:, order], s[order], Vh[order, :]


def polar(X):
    """Polar decomposition ``X = W P`` with ``W`` unitary and ``P >= 0``."""
    U, s, Vh = svd_sorted(as_matrix(X, square=True))
    W = U @ Vh
    P = Vh.conj().T @ np.diag(s) @ Vh
    return W, P


def det_realified(X):
    """Determinant of the real ``2n x 2n`` form ``[[Re X, -Im X], [Im X, Re X]]``.

    Equals ``|det X|^2``.
    """
    X = as_matrix(X, square=True)
    sign, _ = np.linalg.slogdet(X)
    if sign == 0:
        raise SingularMatrixError("singular input")
    re, im = X.real, X.imag
    big = np.block([[re, -im], [im, re]])
    return float(np.linalg.det(big))


def coupling_det(A, D):
    """``det(1 - A^*A (x) D^*D) = prod_ij (1 - a_i^2 d_j^2)``.

    ``a_i`` and ``d_j`` are the singular values of ``A`` and ``D``.
    """
    a = singular_values(A)
    d = singular_values(D)
    if not (a[-1] < 1.0 - BALL_TOL and d[-1] < 1.0 - BALL_TOL):
        raise BallDomainError("outside ball domain")
    return float(np.prod(1.0 - np.outer(a**2, d**2)))


def log_coupling_det(A, D):
    a = singular_values(A)
    d = singular_values(D)
    if not (a[-1] < 1.0 - BALL_TOL and d[-1] < 1.0 - BALL_TOL):
        raise BallDomainError("outside ball domain")
    return float(np.sum(np.log1p(-np.outer(a**2, d**2))))


def log_det_one_minus_gram(A, power=1.0):
    """``power * log det(1 - A^*A)`` as a :class:`LogValue` with phase +1."""
    s = singular_values(A)
    if not s[-1] < 1.0 - BALL_TOL:
        raise BallDomainError(f"outside ball domain: largest singular value {s[-1]!r}")
    return LogValue(float(power) * float(np.sum(np.log1p(-(s**2)))))

