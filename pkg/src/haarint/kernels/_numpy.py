"""Pure-numpy implementations of the hot kernels.

Every function here has a twin with the same signature in ``_numba``.
"""

import numpy as np


def orthonormal_frames(G):
    """Orthonormalize the columns of each matrix in a stack.

    Parameters
    ----------
    G : ndarray, shape (n, N, k), complex
        Stack of full-column-rank matrices.

    Returns
    -------
    Q : ndarray, shape (n, N, k)
        The Q factor of ``G = Q R`` with the diagonal of ``R`` real positive.
    """
    Q, R = np.linalg.qr(G)
    d = np.diagonal(R, axis1=-2, axis2=-1)
    return Q * (d / np.abs(d))[..., None, :]


def logdet_one_minus_gram(A):
    """``log det(1 - A^* A)`` for a stack of square matrices.

    Entries outside the open unit ball come back as ``-inf``.
    """
    lam = np.linalg.eigvalsh(np.conj(np.swapaxes(A, -1, -2)) @ A)
    out = np.full(A.shape[0], -np.inf)
    inside = lam[:, -1] < 1.0
    out[inside] = np.sum(np.log1p(-lam[inside]), axis=-1)
    return out


def t_functional(A, B):
    """``sum_x |A_xx|^2 |B_xx|^2`` for stacks of square matrices."""
    a = np.diagonal(A, axis1=-2, axis2=-1)
    b = np.diagonal(B, axis1=-2, axis2=-1)
    return np.sum((a.real**2 + a.imag**2) * (b.real**2 + b.imag**2), axis=-1)


def permanent(M):
    """Permanent of a square integer matrix by Ryser's formula."""
    M = np.asarray(M, dtype=np.int64)
    n = M.shape[0]
    if n == 0:
        return 1
    total = 0
    row_sums = np.zeros(n, dtype=np.int64)
    # Gray-code walk over column subsets
    prev = 0
    for k in range(1, 1 << n):
        gray = k ^ (k >> 1)
        changed = gray ^ prev
        col = changed.bit_length() - 1
        if gray & changed:
            row_sums += M[:, col]
        else:
            row_sums -= M[:, col]
        prev = gray
        sign = -1 if bin(gray).count("1") % 2 else 1
        total += sign * int(np.prod(row_sums))
    return (-1) ** n * total


def q2_inner(r, rh, ct, power, nodes, weights):
    """Inner radial integral of the q = 2 determinant-power reduction.

    For each outer point ``(r, R_hat, cos(theta))`` integrates
    ``R^2 det(1 - A^* A)^power`` over ``0 <= R <= R_max`` with the supplied
    Gauss-Legendre rule on [-1, 1]. The integrand is a polynomial in ``R`` so
    the rule is exact once it has ``power * 2 + 2`` nodes.
    """
    st2 = 1.0 - ct * ct
    w2 = r * r + rh * rh * st2
    rmax = np.sqrt(1.0 - rh * rh * ct * ct) - np.sqrt(w2)
    rmax = np.maximum(rmax, 0.0)
    R = 0.5 * rmax[:, None] * (nodes[None, :] + 1.0)
    s = R * R + (r * r + rh * rh)[:, None]
    D = np.maximum((1.0 - s) ** 2 - 4.0 * R * R * w2[:, None], 0.0)
    return 0.5 * rmax * np.sum(weights[None, :] * R * R * D**power, axis=1)
