"""Dense vector helpers, Householder-factored SPD operators and seeded RNG.

Vectors are plain one-dimensional ``numpy.float64`` arrays. Random streams
come from numpy's PCG64 bit generator (128-bit LCG state with XSL-RR output,
published multiplier ``0x2360ed051fc65da44385df649fccf645``) seeded through
``SeedSequence``, so the same seed tuple reproduces the same stream on any
platform.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

Rng = np.random.Generator

RNG_ALGORITHM = "PCG64"


class DimensionError(ValueError):
    """Operands have incompatible lengths."""


def make_rng(seed: int, *stream: int) -> Rng:
    """Return a generator for ``seed``, optionally split into a sub-stream.

    ``make_rng(master, run_index)`` gives independent per-run generators that
    are still fully determined by the master seed.
    """
    entropy = [int(seed), *(int(s) for s in stream)]
    if any(e < 0 for e in entropy):
        raise ValueError("seeds must be non-negative integers")
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence(entropy)))


def as_vector(x) -> np.ndarray:
    v = np.asarray(x, dtype=np.float64)
    if v.ndim != 1 or v.size == 0:
        raise DimensionError(f"expected a non-empty 1-D vector, got shape {v.shape}")
    return v


def _check_same(a: np.ndarray, b: np.ndarray) -> None:
    if a.shape != b.shape:
        raise DimensionError(f"length mismatch: {a.shape[0]} vs {b.shape[0]}")


def dot(a, b) -> float:
    a, b = as_vector(a), as_vector(b)
    _check_same(a, b)
    return float(a @ b)


def norm2(a) -> float:
    return float(np.linalg.norm(as_vector(a)))


def axpy(alpha: float, a, b) -> np.ndarray:
    """Return ``alpha * a + b``."""
    a, b = as_vector(a), as_vector(b)
    _check_same(a, b)
    return alpha * a + b


def unit_random_vector(rng: Rng, n: int) -> np.ndarray:
    """Uniformly distributed direction on the unit sphere in R^n."""
    if n < 1:
        raise ValueError("n must be >= 1")
    while True:
        v = rng.standard_normal(n)
        nrm = np.linalg.norm(v)
        if nrm > 0.0:
            return v / nrm


@dataclass(frozen=True)
class HouseholderChain:
    """SPD operator ``Q diag(d) Q^T`` with ``Q = H_r ... H_2 H_1``.

    ``H_i = I - 2 w_i w_i^T``. The dense matrix is never formed, and the
    eigenvalues are exactly ``diag``.
    """

    diag: np.ndarray
    reflectors: tuple[np.ndarray, ...] = field(default=())

    def __post_init__(self):
        d = as_vector(self.diag).copy()
        if not np.all(np.isfinite(d)) or np.any(d <= 0.0):
            raise ValueError("diagonal entries must be finite and strictly positive")
        refl = []
        for w in self.reflectors:
            w = as_vector(w).copy()
            _check_same(w, d)
            if abs(np.linalg.norm(w) - 1.0) > 1e-12:
                raise ValueError("reflectors must have unit 2-norm")
            w.setflags(write=False)
            refl.append(w)
        d.setflags(write=False)
        object.__setattr__(self, "diag", d)
        object.__setattr__(self, "reflectors", tuple(refl))

    @property
    def n(self) -> int:
        return self.diag.shape[0]

    @classmethod
    def random(cls, rng: Rng, diag, n_reflectors: int = 3) -> "HouseholderChain":
        diag = as_vector(diag)
        ws = tuple(unit_random_vector(rng, diag.shape[0]) for _ in range(n_reflectors))
        return cls(diag, ws)

    def q(self, v: np.ndarray) -> np.ndarray:
        for w in self.reflectors:
            v = v - 2.0 * (w @ v) * w
        return v

    def qt(self, v: np.ndarray) -> np.ndarray:
        for w in reversed(self.reflectors):
            v = v - 2.0 * (w @ v) * w
        return v

    def apply(self, v) -> np.ndarray:
        v = as_vector(v)
        if v.shape[0] != self.n:
            raise DimensionError(f"operator has size {self.n}, vector has {v.shape[0]}")
        return self.q(self.diag * self.qt(v))

    def eigenvalues(self) -> np.ndarray:
        return np.sort(self.diag)

    def to_dense(self) -> np.ndarray:
        """Assemble the matrix; only meant for small test sizes."""
        return np.column_stack([self.apply(e) for e in np.eye(self.n)])


@dataclass(frozen=True)
class Tridiagonal:
    """Symmetric tridiagonal operator with constant diagonal and off-diagonal."""

    n: int
    diagonal: float
    offdiagonal: float

    def apply(self, v) -> np.ndarray:
        v = as_vector(v)
        if v.shape[0] != self.n:
            raise DimensionError(f"operator has size {self.n}, vector has {v.shape[0]}")
        out = self.diagonal * v
        out[1:] += self.offdiagonal * v[:-1]
        out[:-1] += self.offdiagonal * v[1:]
        return out

    def eigenvalues(self) -> np.ndarray:
        k = np.arange(1, self.n + 1)
        # closed form for Toeplitz tridiagonal matrices
        return np.sort(self.diagonal + 2.0 * self.offdiagonal * np.cos(k * np.pi / (self.n + 1)))

    def to_dense(self) -> np.ndarray:
        a = np.diag(np.full(self.n, self.diagonal))
        idx = np.arange(self.n - 1)
        a[idx, idx + 1] = self.offdiagonal
        a[idx + 1, idx] = self.offdiagonal
        return a


def apply_operator(chain: HouseholderChain, v) -> np.ndarray:
    """``A v`` for ``A = Q diag Q^T`` using three reflections on each side."""
    return chain.apply(v)
