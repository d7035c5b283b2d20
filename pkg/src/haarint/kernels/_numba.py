"""numba-compiled twins of the kernels in ``_numpy``."""

import numpy as np
from numba import njit

_opts = dict(cache=True, nogil=True)


@njit(**_opts)
def orthonormal_frames(G):
    n, N, k = G.shape
    Q = np.empty_like(G)
    v = np.empty(N, dtype=G.dtype)
    for s in range(n):
        for j in range(k):
            for m in range(N):
                v[m] = G[s, m, j]
            # modified Gram-Schmidt, two passes
            for _ in range(2):
                for i in range(j):
                    dot = 0j
                    for m in range(N):
                        dot += np.conj(Q[s, m, i]) * v[m]
                    for m in range(N):
                        v[m] -= dot * Q[s, m, i]
            nrm = 0.0
            for m in range(N):
                nrm += v[m].real * v[m].real + v[m].imag * v[m].imag
            nrm = np.sqrt(nrm)
            for m in range(N):
                Q[s, m, j] = v[m] / nrm
    return Q


@njit(**_opts)
def logdet_one_minus_gram(A):
    n, q, _ = A.shape
    out = np.empty(n)
    M = np.empty((q, q), dtype=np.complex128)
    for s in range(n):
        for i in range(q):
            for j in range(q):
                acc = 0j
                for m in range(q):
                    acc += np.conj(A[s, m, i]) * A[s, m, j]
                M[i, j] = -acc
            M[i, i] += 1.0
        # in-place Cholesky; failure means outside the ball
        ld = 0.0
        ok = True
        for j in range(q):
            d = M[j, j].real
            for m in range(j):
                d -= M[j, m].real * M[j, m].real + M[j, m].imag * M[j, m].imag
            if d <= 0.0:
                ok = False
                break
            d = np.sqrt(d)
            M[j, j] = d
            ld += 2.0 * np.log(d)
            for i in range(j + 1, q):
                acc = M[i, j]
                for m in range(j):
                    acc -= M[i, m] * np.conj(M[j, m])
                M[i, j] = acc / d
        out[s] = ld if ok else -np.inf
    return out


@njit(**_opts)
def t_functional(A, B):
    n, q, _ = A.shape
    out = np.empty(n)
    for s in range(n):
        acc = 0.0
        for x in range(q):
            a = A[s, x, x]
            b = B[s, x, x]
            acc += (a.real * a.real + a.imag * a.imag) * (b.real * b.real + b.imag * b.imag)
        out[s] = acc
    return out


@njit(**_opts)
def _permanent(M):
    n = M.shape[0]
    if n == 0:
        return 1
    total = 0
    row_sums = np.zeros(n, dtype=np.int64)
    prev = 0
    for k in range(1, 1 << n):
        gray = k ^ (k >> 1)
        changed = gray ^ prev
        col = 0
        while (changed >> col) != 1:
            col += 1
        if gray & changed:
            for i in range(n):
                row_sums[i] += M[i, col]
        else:
            for i in range(n):
                row_sums[i] -= M[i, col]
        prev = gray
        bits = 0
        g = gray
        while g:
            bits += g & 1
            g >>= 1
        prod = 1
        for i in range(n):
            prod *= row_sums[i]
        if bits % 2:
            total -= prod
        else:
            total += prod
    return -total if n % 2 else total


def permanent(M):
    return int(_permanent(np.ascontiguousarray(M, dtype=np.int64)))


@njit(**_opts)
def q2_inner(r, rh, ct, power, nodes, weights):
    n = r.shape[0]
    m = nodes.shape[0]
    out = np.empty(n)
    for s in range(n):
        w2 = r[s] * r[s] + rh[s] * rh[s] * (1.0 - ct[s] * ct[s])
        rmax = np.sqrt(1.0 - rh[s] * rh[s] * ct[s] * ct[s]) - np.sqrt(w2)
        if rmax <= 0.0:
            out[s] = 0.0
            continue
        rho2 = r[s] * r[s] + rh[s] * rh[s]
        acc = 0.0
        for t in range(m):
            R = 0.5 * rmax * (nodes[t] + 1.0)
            u = 1.0 - R * R - rho2
            D = u * u - 4.0 * R * R * w2
            if D < 0.0:
                D = 0.0
            acc += weights[t] * R * R * D**power
        out[s] = 0.5 * rmax * acc
    return out
