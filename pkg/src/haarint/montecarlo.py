"""Monte Carlo estimates of Haar integrals of block functionals.

Samples are drawn in fixed-size chunks. Chunk ``c`` always uses the same
sub-stream of the caller's :class:`~haarint.haar.RngStream`, and chunk results
are concatenated in chunk order before any reduction, so estimates are
bit-identical for a fixed seed whatever the number of worker threads.
"""

import math
import os
import re
import secrets
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Any, Callable

import numpy as np

from . import kernels
from .errors import DimensionError, IntegrandOverflowError, NonFiniteIntegrandError
from .haar import RngStream, sample_blocks, sample_frames
from .linalg import LogValue, as_matrix

CHUNK_SIZE = 8192
DEFAULT_SINGLE_SAMPLES = 100_000
DEFAULT_DOUBLE_SAMPLES = 1_000_000

# exp() overflows a double just above this
_EXP_MAX = 709.0


def default_workers():
    """Worker threads for chunked sampling (env ``HAARINT_WORKERS``, default 1)."""
    raw = os.environ.get("HAARINT_WORKERS", "").strip()
    if not raw:
        return 1
    return max(1, int(raw))


def as_stream(rng):
    if isinstance(rng, RngStream):
        return rng
    if rng is None:
        return RngStream(secrets.randbits(63))
    return RngStream(int(rng))


@dataclass(frozen=True)
class MCEstimate:
    """Sample mean with its standard error.

    For exponential integrands the mean is of ``exp(log f - shift)``; the
    integral itself is ``mean * exp(shift)``, see :attr:`log_value`.
    ``exact`` marks results obtained without sampling.
    """

    mean: Any
    std_error: float
    n_samples: int
    seed: RngStream
    shift: float = 0.0
    exact: bool = False

    @property
    def value(self):
        return self.mean * math.exp(self.shift) if self.shift else self.mean

    @property
    def scaled_std_error(self):
        return self.std_error * math.exp(self.shift) if self.shift else self.std_error

    @property
    def log_value(self):
        return LogValue.from_value(self.mean) * LogValue(self.shift)

    def to_dict(self):
        mean = self.mean
        d = {
            "mean_re": float(np.real(mean)),
            "mean_im": float(np.imag(mean)),
            "std_error": float(self.std_error),
            "n_samples": int(self.n_samples),
            "shift": float(self.shift),
            "exact": bool(self.exact),
            "seed": self.seed.to_dict(),
        }
        return d


# ---------------------------------------------------------------------------
# monomial patterns


_FACTOR = re.compile(r"^(~?)(\d+):(\d+)$")


@dataclass(frozen=True)
class MonomialPattern:
    """Product of matrix entries ``U^i_j`` and conjugated entries ``conj(U^k_l)``.

    Indices are 1-based, row first.
    """

    unconj: tuple = ()
    conj: tuple = ()

    def __post_init__(self):
        object.__setattr__(self, "unconj", tuple(tuple(map(int, f)) for f in self.unconj))
        object.__setattr__(self, "conj", tuple(tuple(map(int, f)) for f in self.conj))

    @classmethod
    def from_quadruples(cls, quads):
        """Each quadruple ``(i, j, k, l)`` contributes ``U^i_j conj(U^k_l)``."""
        quads = [tuple(q) for q in quads]
        return cls(tuple((i, j) for i, j, _, _ in quads), tuple((k, l) for _, _, k, l in quads))

    @classmethod
    def parse(cls, text):
        """Parse ``"1:1 2:2 ~1:1 ~2:2"`` (``~`` marks a conjugated factor)."""
        unconj, conj = [], []
        for tok in text.replace(",", " ").split():
            m = _FACTOR.match(tok)
            if not m:
                raise ValueError(f"bad monomial factor {tok!r}; expected i:j or ~i:j")
            (conj if m.group(1) else unconj).append((int(m.group(2)), int(m.group(3))))
        if not unconj and not conj:
            raise ValueError("empty monomial pattern")
        return cls(tuple(unconj), tuple(conj))

    def __str__(self):
        return " ".join([f"{i}:{j}" for i, j in self.unconj] + [f"~{k}:{l}" for k, l in self.conj])

    @property
    def balanced(self):
        return len(self.unconj) == len(self.conj)

    @property
    def self_conjugate(self):
        return sorted(self.unconj) == sorted(self.conj)

    def max_index(self):
        return max(max(f) for f in self.unconj + self.conj)

    def evaluate(self, U):
        """Evaluate on a stack of matrices, shape (n, rows, cols)."""
        out = np.ones(U.shape[0], dtype=np.complex128)
        for i, j in self.unconj:
            out *= U[:, i - 1, j - 1]
        for k, l in self.conj:
            out *= np.conj(U[:, k - 1, l - 1])
        if self.self_conjugate:
            return out.real.copy()
        return out


# ---------------------------------------------------------------------------
# integrands


KINDS = ("constant", "monomial", "exp-linear", "exp-quartic", "det-power", "callback")


@dataclass(frozen=True)
class IntegrandSpec:
    """Declarative description of a test functional of one or two blocks.

    Build instances with the class methods. ``kind`` is one of :data:`KINDS`.
    """

    kind: str
    params: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown integrand kind {self.kind!r}; expected one of {KINDS}")
        if self.kind == "exp-quartic" and not self.params["beta"] > 0:
            raise ValueError("exp-quartic needs beta > 0")

    @classmethod
    def constant(cls, value=1.0):
        return cls("constant", {"value": float(value)})

    @classmethod
    def monomial(cls, pattern):
        if not isinstance(pattern, MonomialPattern):
            pattern = MonomialPattern.from_quadruples(pattern)
        return cls("monomial", {"pattern": pattern})

    @classmethod
    def exp_linear(cls, Y, scale):
        """``exp(scale * Re Tr(A Y))``."""
        return cls("exp-linear", {"Y": as_matrix(Y, square=True), "scale": float(scale)})

    @classmethod
    def exp_quartic(cls, beta, scale):
        """``exp(beta * scale * T(A_<, A_>))`` with ``T`` the diagonal quartic functional."""
        return cls("exp-quartic", {"beta": float(beta), "scale": float(scale)})

    @classmethod
    def det_power(cls, power):
        """``det(1 - A^* A) ** power``."""
        return cls("det-power", {"power": float(power)})

    @classmethod
    def callback(cls, fn, arity=1, vectorized=False, log=False):
        """Wrap a user function.

        ``fn`` takes ``arity`` matrices (or, when ``vectorized``, ``arity``
        stacks of matrices) and returns a value (or array of values). With
        ``log=True`` it returns the logarithm of a positive integrand.
        """
        return cls("callback", {"fn": fn, "arity": int(arity), "vectorized": bool(vectorized), "log": bool(log)})

    @property
    def arity(self):
        if self.kind == "exp-quartic":
            return 2
        if self.kind == "callback":
            return self.params["arity"]
        if self.kind == "constant":
            return 0
        return 1

    @property
    def has_log(self):
        """True when the integrand is evaluated through its logarithm."""
        if self.kind == "callback":
            return self.params["log"]
        return self.kind in ("exp-linear", "exp-quartic", "det-power")

    def describe(self):
        """JSON-friendly description (callbacks by name only)."""
        d = {"kind": self.kind}
        for k, v in self.params.items():
            if k == "fn":
                d["fn"] = getattr(v, "__name__", repr(v))
            elif isinstance(v, np.ndarray):
                d[k] = [[[float(z.real), float(z.imag)] for z in row] for row in v]
            elif isinstance(v, MonomialPattern):
                d[k] = str(v)
            else:
                d[k] = v
        return d

    def _check_arity(self, blocks):
        if self.arity not in (0, len(blocks)):
            raise DimensionError(f"{self.kind} integrand takes {self.arity} block(s), got {len(blocks)}")

    def log_values(self, *blocks):
        self._check_arity(blocks)
        k, p = self.kind, self.params
        if k == "exp-linear":
            A = blocks[0]
            Y = p["Y"]
            if A.shape[-1] != Y.shape[0]:
                raise DimensionError(f"Y is {Y.shape}, block is {A.shape[1:]}")
            return p["scale"] * np.einsum("nij,ji->n", A, Y).real
        if k == "exp-quartic":
            return p["beta"] * p["scale"] * kernels.t_functional(*blocks)
        if k == "det-power":
            ld = kernels.logdet_one_minus_gram(blocks[0])
            return np.where(np.isneginf(ld), -np.inf, p["power"] * ld) if p["power"] else np.zeros_like(ld)
        if k == "callback" and p["log"]:
            return np.asarray(self._call(blocks), dtype=float)
        raise TypeError(f"{k} integrand has no log form")

    def values(self, *blocks):
        self._check_arity(blocks)
        k, p = self.kind, self.params
        n = blocks[0].shape[0] if blocks else 1
        if k == "constant":
            return np.full(n, p["value"])
        if k == "monomial":
            return p["pattern"].evaluate(blocks[0])
        if k == "callback":
            vals = np.asarray(self._call(blocks))
            return np.exp(vals) if p["log"] else vals
        return np.exp(self.log_values(*blocks))

    def _call(self, blocks):
        fn = self.params["fn"]
        if self.params["vectorized"]:
            return fn(*blocks)
        n = blocks[0].shape[0]
        return np.array([fn(*(b[s] for b in blocks)) for s in range(n)])


def as_integrand(f, arity=1):
    if isinstance(f, IntegrandSpec):
        return f
    if callable(f):
        return IntegrandSpec.callback(f, arity=arity)
    raise TypeError(f"expected IntegrandSpec or callable, got {type(f).__name__}")


# ---------------------------------------------------------------------------
# chunked engine


def run_chunked(task, n_samples, workers=None):
    """Evaluate ``task(chunk_index, size)`` over fixed chunks; concatenate in order."""
    n_samples = int(n_samples)
    sizes = [CHUNK_SIZE] * (n_samples // CHUNK_SIZE)
    if n_samples % CHUNK_SIZE:
        sizes.append(n_samples % CHUNK_SIZE)
    workers = default_workers() if workers is None else max(1, int(workers))
    if workers == 1 or len(sizes) == 1:
        parts = [task(c, s) for c, s in enumerate(sizes)]
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(task, range(len(sizes)), sizes))
    return np.concatenate(parts)


def _first_bad(arr, allow_neginf=False):
    bad = np.isnan(arr) | np.isposinf(arr)
    if not allow_neginf:
        bad |= np.isneginf(arr)
    idx = np.flatnonzero(bad)
    return int(idx[0]) if idx.size else None


def summarize(f, draws, stream, shift=None):
    """Reduce per-sample blocks to an :class:`MCEstimate`.

    ``draws`` is a tuple of block stacks (possibly empty for constants).
    ``shift`` applies to log-form integrands: ``None`` means no shift (and an
    error on overflow), ``"auto"`` uses the largest sampled exponent, a float
    is used as given.
    """
    n = draws[0].shape[0]
    used_shift = 0.0
    if f.has_log:
        lv = np.asarray(f.log_values(*draws), dtype=float)
        bad = _first_bad(lv, allow_neginf=True)
        if bad is not None:
            raise NonFiniteIntegrandError(bad, lv[bad])
        if shift == "auto":
            finite = lv[np.isfinite(lv)]
            used_shift = float(finite.max()) if finite.size else 0.0
        elif shift is not None:
            used_shift = float(shift)
        elif lv.max() > _EXP_MAX:
            raise IntegrandOverflowError(
                f"exponent reaches {lv.max():.4g}; rerun in log-shifted mode (shift='auto' or a float)"
            )
        vals = np.exp(lv - used_shift)
    else:
        vals = f.values(*draws) if draws else np.full(n, f.params["value"])
        bad = _first_bad(np.abs(vals))
        if bad is not None:
            raise NonFiniteIntegrandError(bad, vals[bad])
    mean = np.mean(vals)
    std = float(np.std(vals, ddof=1)) if n > 1 else 0.0
    if np.iscomplexobj(vals):
        mean = complex(mean)
    else:
        mean = float(mean)
    return MCEstimate(mean, std / math.sqrt(n), n, stream, used_shift)


def _check_counts(N, q, n_samples):
    if n_samples < 2:
        raise ValueError("n_samples must be >= 2")
    if not 1 <= q <= N:
        raise DimensionError(f"need 1 <= q <= N, got q={q}, N={N}")


def integrate_single(f, N, q, n_samples=DEFAULT_SINGLE_SAMPLES, rng=None, *, shift=None, workers=None):
    """Haar expectation of ``f(A)`` with ``A`` the leading ``q x q`` block of ``U``.

    Parameters
    ----------
    f : IntegrandSpec or callable
    N, q : int
        Group dimension and block size.
    n_samples : int
    rng : RngStream, int or None
    shift : None, "auto" or float
        Exponent shift for log-form integrands; see :func:`summarize`.
    workers : int, optional
        Threads for chunked sampling.

    Returns
    -------
    MCEstimate
    """
    f = as_integrand(f)
    _check_counts(N, q, n_samples)
    stream = as_stream(rng)

    def task(c, size):
        return sample_blocks(N, q, size, stream.generator(c))

    A = _gather(task, n_samples, workers, q)
    return summarize(f, (A,), stream, shift)


def integrate_double(g, N, q, n_samples=DEFAULT_DOUBLE_SAMPLES, rng=None, *, shift=None, workers=None):
    """Double Haar integral of ``g(A_<, A_>)`` over two independent unitaries.

    ``A_<`` and ``A_>`` come from disjoint sub-streams of ``rng``. For the
    exponential-of-quartic integrand pass ``shift="auto"`` (or a float) to
    average ``exp(beta N T - shift)``; the shift is returned in the estimate.
    """
    g = as_integrand(g, arity=2)
    _check_counts(N, q, n_samples)
    stream = as_stream(rng)

    def task(c, size):
        lt = sample_blocks(N, q, size, stream.generator(c, sub=0))
        gt = sample_blocks(N, q, size, stream.generator(c, sub=1))
        return np.concatenate([lt, gt], axis=1)

    both = _gather(task, n_samples, workers, 2 * q)
    return summarize(g, (both[:, :q], both[:, q:]), stream, shift)


def _gather(task, n_samples, workers, rows):
    # run_chunked concatenates along axis 0, so stacks come back whole
    return run_chunked(task, n_samples, workers).reshape(int(n_samples), rows, -1)


def moment_monomial(pattern, N, n_samples=DEFAULT_SINGLE_SAMPLES, rng=None, *, workers=None):
    """Mixed moment of Haar matrix entries.

    Returns an exact zero, without sampling, when the numbers of conjugated
    and unconjugated factors differ.
    """
    if not isinstance(pattern, MonomialPattern):
        pattern = MonomialPattern.from_quadruples(pattern)
    stream = as_stream(rng)
    if pattern.max_index() > N or min(min(f) for f in pattern.unconj + pattern.conj) < 1:
        raise DimensionError(f"pattern indices must lie in 1..{N}")
    if not pattern.balanced:
        return MCEstimate(0.0, 0.0, 0, stream, exact=True)
    if n_samples < 2:
        raise ValueError("n_samples must be >= 2")
    # columns of a Haar unitary are exchangeable: relabel used columns 1..k
    cols = sorted({j for _, j in pattern.unconj + pattern.conj})
    relabel = {c: n + 1 for n, c in enumerate(cols)}
    local = MonomialPattern(
        tuple((i, relabel[j]) for i, j in pattern.unconj),
        tuple((k, relabel[l]) for k, l in pattern.conj),
    )
    k = len(cols)

    def task(c, size):
        return sample_frames(N, k, size, stream.generator(c))

    F = _gather(task, n_samples, workers, N)
    return summarize(IntegrandSpec.monomial(local), (F,), stream)
