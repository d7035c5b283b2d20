"""Exact Haar sampling on U(N) and extraction of leading diagonal blocks.

Subspace ``I`` is spanned by the first ``q`` standard basis vectors and ``J``
(when present) by the next ``p``. Because the Haar measure is invariant under
permutations of the basis, nothing is lost by fixing this convention.
"""

from dataclasses import dataclass

import numpy as np

from . import kernels
from .errors import DimensionError
from .linalg import as_matrix

_MASK64 = (1 << 64) - 1


@dataclass(frozen=True)
class RngStream:
    """Seed plus stream id; the pair fully determines every draw.

    Draws for chunk ``c`` of sub-stream ``sub`` come from a PCG64 generator
    seeded by ``SeedSequence(seed, spawn_key=(stream_id, sub, c))``, so a
    fixed chunk layout gives identical numbers however the chunks are
    scheduled.
    """

    seed: int
    stream_id: int = 0

    def __post_init__(self):
        for name in ("seed", "stream_id"):
            v = getattr(self, name)
            if not isinstance(v, (int, np.integer)) or not 0 <= int(v) <= _MASK64:
                raise ValueError(f"{name} must be an unsigned 64-bit integer, got {v!r}")

    def generator(self, chunk=0, sub=0):
        ss = np.random.SeedSequence(int(self.seed), spawn_key=(int(self.stream_id), int(sub), int(chunk)))
        return np.random.Generator(np.random.PCG64(ss))

    def to_dict(self):
        return {"seed": int(self.seed), "stream_id": int(self.stream_id)}


def as_generator(rng):
    """Accept an RngStream, a Generator, an int seed or None."""
    if isinstance(rng, np.random.Generator):
        return rng
    if isinstance(rng, RngStream):
        return rng.generator()
    return np.random.default_rng(rng)


@dataclass(frozen=True)
class BlockSpec:
    """Dimensions of subspace ``I`` (``q``) and optionally of ``J`` (``p``)."""

    q: int
    p: int | None = None

    def __post_init__(self):
        if self.q < 1:
            raise DimensionError(f"q must be >= 1, got {self.q}")
        if self.p is not None and self.p < 1:
            raise DimensionError(f"p must be >= 1, got {self.p}")

    @property
    def width(self):
        return self.q + (self.p or 0)

    def validate(self, N):
        if self.p is None:
            if self.q > N:
                raise DimensionError(f"q={self.q} exceeds N={N}")
        elif 2 * (self.p + self.q) > N:
            raise DimensionError(f"need 2(p+q) <= N, got p={self.p}, q={self.q}, N={N}")


def complex_gaussian(gen, shape):
    """Independent standard complex normals with E|z|^2 = 1."""
    z = gen.standard_normal(shape + (2,))
    return (z[..., 0] + 1j * z[..., 1]) * np.sqrt(0.5)


def sample_unitary(N, rng=None):
    """Draw ``U`` from the normalized Haar measure on U(N).

    QR of a complex Ginibre matrix, with the columns of Q rescaled by the
    phases of diag(R) so that R has a positive diagonal.
    """
    if N < 1:
        raise DimensionError("empty dimension")
    gen = as_generator(rng)
    G = complex_gaussian(gen, (N, N))
    Q, R = np.linalg.qr(G)
    d = np.diag(R)
    return Q * (d / np.abs(d))


def block(U, spec):
    """Leading ``q x q`` block of ``U`` and, if ``spec.p`` is set, the next
    ``p x p`` diagonal block."""
    U = as_matrix(U, square=True)
    if isinstance(spec, int):
        spec = BlockSpec(spec)
    N = U.shape[0]
    if spec.width > N:
        raise DimensionError(f"block of width {spec.width} does not fit in N={N}")
    q = spec.q
    A = U[:q, :q].copy()
    if spec.p is None:
        return A
    D = U[q : q + spec.p, q : q + spec.p].copy()
    return A, D


def sample_frames(N, k, n, gen):
    """First ``k`` columns of ``n`` independent Haar unitaries, shape (n, N, k).

    Only an ``N x k`` Gaussian is orthonormalized per draw; the resulting
    frame has exactly the distribution of the first ``k`` columns of a Haar
    unitary.
    """
    if not 1 <= k <= N:
        raise DimensionError(f"need 1 <= k <= N, got k={k}, N={N}")
    G = complex_gaussian(gen, (n, N, k))
    return kernels.orthonormal_frames(G)


def sample_blocks(N, q, n, gen, p=None):
    """Leading ``q x q`` blocks (and optional ``p x p`` second blocks) of ``n``
    Haar unitaries."""
    spec = BlockSpec(q, p)
    if p is None:
        spec.validate(N)
    elif spec.width > N:
        raise DimensionError(f"block of width {spec.width} does not fit in N={N}")
    F = sample_frames(N, spec.width, n, gen)
    A = np.ascontiguousarray(F[:, :q, :q])
    if p is None:
        return A
    return A, np.ascontiguousarray(F[:, q : q + p, q : q + p])


def complex_wishart(gen, dof, q, n):
    """``n`` draws of ``W = L L^*`` with ``W ~ CWishart(dof, 1_q)`` by Bartlett.

    ``L`` is lower triangular, ``|L_ii|^2 ~ Gamma(dof - i, 1)`` (0-based ``i``)
    and the strictly lower entries are standard complex normals.
    """
    if dof < q:
        raise DimensionError(f"Wishart needs dof >= q, got dof={dof}, q={q}")
    L = np.tril(complex_gaussian(gen, (n, q, q)), k=-1)
    shapes = dof - np.arange(q)
    diag = np.sqrt(gen.gamma(shapes, size=(n, q)))
    idx = np.arange(q)
    L[:, idx, idx] = diag
    return L @ np.conj(np.swapaxes(L, -1, -2))


def sample_ball_blocks(N, q, n, gen):
    """Leading ``q x q`` blocks drawn without forming any ``N``-dimensional frame.

    A Haar frame is ``F (F^*F)^{-1/2}`` for an ``N x q`` Gaussian ``F``; splitting
    ``F`` into its top ``q`` rows ``X`` and the rest gives
    ``A = X (X^*X + W)^{-1/2}`` with ``W`` complex Wishart with ``N - q``
    degrees of freedom. Cost does not grow with ``N``.
    """
    if not 1 <= q <= N - q:
        raise DimensionError(f"need 1 <= q <= N/2, got q={q}, N={N}")
    X = complex_gaussian(gen, (n, q, q))
    S = np.conj(np.swapaxes(X, -1, -2)) @ X + complex_wishart(gen, N - q, q, n)
    w, V = np.linalg.eigh(S)
    inv_sqrt = (V / np.sqrt(w)[:, None, :]) @ np.conj(np.swapaxes(V, -1, -2))
    return X @ inv_sqrt
