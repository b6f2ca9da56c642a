"""Benchmark problems: random spectral quadratics, the BVP quadratic, Rosenbrock.

Quadratics have the form ``f(x) = 1/2 (x - x*)^T A (x - x*)`` with a
matrix-free SPD operator ``A``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional, Union

import numpy as np

from .numerics import (
    HouseholderChain,
    Rng,
    Tridiagonal,
    as_vector,
    make_rng,
    unit_random_vector,
)


class EvaluationError(ArithmeticError):
    """The objective is not finite where it had to be evaluated."""


@dataclass(frozen=True)
class ObjectiveFunction:
    name: str
    dimension: int
    value: Callable[[np.ndarray], float]
    gradient: Callable[[np.ndarray], np.ndarray]
    suggested_start: np.ndarray
    known_minimum_value: Optional[float] = None
    known_minimizer: Optional[np.ndarray] = None
    # optional: value over the last axis of a stack of points
    batch_value: Optional[Callable[[np.ndarray], np.ndarray]] = None


Operator = Union[HouseholderChain, Tridiagonal]


@dataclass(frozen=True)
class QuadraticProblem:
    name: str
    operator: Operator
    minimizer: np.ndarray
    start: np.ndarray
    metadata: dict = field(default_factory=dict)

    @property
    def dimension(self) -> int:
        return self.minimizer.shape[0]

    @property
    def eigenvalues(self) -> np.ndarray:
        return self.operator.eigenvalues()

    @property
    def condition_estimate(self) -> float:
        ev = self.eigenvalues
        return float(ev[-1] / ev[0])

    def apply(self, v) -> np.ndarray:
        return self.operator.apply(v)

    def value(self, x) -> float:
        r = as_vector(x) - self.minimizer
        return 0.5 * float(r @ self.operator.apply(r))

    def gradient(self, x) -> np.ndarray:
        return self.operator.apply(as_vector(x) - self.minimizer)

    def as_objective(self) -> ObjectiveFunction:
        return ObjectiveFunction(
            name=self.name,
            dimension=self.dimension,
            value=self.value,
            gradient=self.gradient,
            suggested_start=self.start,
            known_minimum_value=0.0,
            known_minimizer=self.minimizer,
        )


# Eigenvalue layouts. Each block is (first, last, low, high) with 1-based
# inclusive indices into v_1..v_n.
_LOW = 100.0


def _blocks(dist: int, n: int, kappa: float) -> list[tuple[int, int, float, float]]:
    n5, n2, n45 = n // 5, n // 2, 4 * n // 5
    half = kappa / 2.0
    table = {
        1: [(2, n - 1, 1.0, kappa)],
        2: [(2, n5, 1.0, _LOW), (n5 + 1, n - 1, half, kappa)],
        3: [(2, n2, 1.0, _LOW), (n2 + 1, n - 1, half, kappa)],
        4: [(2, n45, 1.0, _LOW), (n45 + 1, n - 1, half, kappa)],
        5: [(2, n5, 1.0, _LOW), (n5 + 1, n45, _LOW, half), (n45 + 1, n - 1, half, kappa)],
        6: [(2, 10, 1.0, _LOW), (11, n - 1, half, kappa)],
        7: [(2, n - 10, 1.0, _LOW), (n - 9, n - 1, half, kappa)],
    }
    if dist not in table:
        raise ValueError(f"distribution_id must be in 1..7, got {dist!r}")
    return table[dist]


@dataclass(frozen=True)
class SpectrumSpec:
    distribution_id: int
    kappa: float
    n: int

    def __post_init__(self):
        if self.n < 3:
            raise ValueError("n must be >= 3")
        if not self.kappa > 1.0:
            raise ValueError("kappa must exceed 1")
        for first, last, lo, hi in _blocks(self.distribution_id, self.n, self.kappa):
            if last < first:
                raise ValueError(
                    f"distribution {self.distribution_id} needs a larger n than {self.n}"
                )
            if not lo < hi:
                raise ValueError(
                    f"distribution {self.distribution_id} has an empty interval "
                    f"({lo}, {hi}) for kappa={self.kappa}"
                )

    def blocks(self):
        return _blocks(self.distribution_id, self.n, self.kappa)

    def sample(self, rng: Rng) -> np.ndarray:
        """Eigenvalues ``v_1..v_n``: ``v_1 = 1``, ``v_n = kappa``, uniform inside blocks."""
        v = np.empty(self.n)
        v[0], v[-1] = 1.0, self.kappa
        for first, last, lo, hi in self.blocks():
            # open interval: shift the closed lower end by one ulp
            v[first - 1:last] = rng.uniform(np.nextafter(lo, hi), hi, size=last - first + 1)
        return v


def make_random_quadratic(spec: SpectrumSpec, rng: Rng) -> QuadraticProblem:
    """Random quadratic with ``A = Q diag(v) Q^T``, ``x* ~ U[-10, 10]^n``, start at 0.

    Draw order (fixed for reproducibility): reflectors w1, w2, w3, then the
    eigenvalues, then x*.
    """
    n = spec.n
    ws = tuple(unit_random_vector(rng, n) for _ in range(3))
    chain = HouseholderChain(spec.sample(rng), ws)
    xstar = rng.uniform(-10.0, 10.0, size=n)
    return QuadraticProblem(
        name=f"quad-d{spec.distribution_id}-n{n}-k{spec.kappa:g}",
        operator=chain,
        minimizer=xstar,
        start=np.zeros(n),
        metadata={
            "distribution_id": spec.distribution_id,
            "kappa": spec.kappa,
            "eigenvalue_sampling": "uniform within each block",
        },
    )


def make_bvp_quadratic(n: int, rng: Optional[Rng] = None, seed: int = 0) -> QuadraticProblem:
    """Finite-difference two-point BVP matrix, ``h = 11/n``, start at the ones vector."""
    if n < 2:
        raise ValueError("n must be >= 2")
    if rng is None:
        rng = make_rng(seed)
    h = 11.0 / n
    op = Tridiagonal(n, 2.0 / h**2, -1.0 / h**2)
    xstar = rng.uniform(-10.0, 10.0, size=n)
    return QuadraticProblem(
        name=f"bvp-n{n}", operator=op, minimizer=xstar, start=np.ones(n),
        metadata={"h": h},
    )


def rosenbrock(c: float = 100.0) -> ObjectiveFunction:
    if not c > 0:
        raise ValueError("c must be positive")

    def value(x):
        x = as_vector(x)
        return c * (x[1] - x[0] ** 2) ** 2 + (1.0 - x[0]) ** 2

    def gradient(x):
        x = as_vector(x)
        t = x[1] - x[0] ** 2
        return np.array([-4.0 * c * x[0] * t - 2.0 * (1.0 - x[0]), 2.0 * c * t])

    return ObjectiveFunction(
        name=f"rosenbrock-c{c:g}",
        dimension=2,
        value=value,
        gradient=gradient,
        suggested_start=np.array([-1.2, 1.0]),
        known_minimum_value=0.0,
        known_minimizer=np.array([1.0, 1.0]),
    )


def _central_differences(f: ObjectiveFunction, x: np.ndarray, h: np.ndarray) -> np.ndarray:
    n = x.shape[0]
    xp = x + h
    xm = x - h
    width = (xp - x) + (x - xm)  # exactly representable steps
    if f.batch_value is not None:
        fp = np.empty(n)
        fm = np.empty(n)
        chunk = max(1, 2**20 // n)
        for lo in range(0, n, chunk):
            hi = min(n, lo + chunk)
            rows = np.arange(lo, hi)
            pts = np.broadcast_to(x, (hi - lo, n)).copy()
            pts[rows - lo, rows] = xp[rows]
            fp[lo:hi] = f.batch_value(pts)
            pts[rows - lo, rows] = xm[rows]
            fm[lo:hi] = f.batch_value(pts)
    else:
        fp = np.empty(n)
        fm = np.empty(n)
        for i in range(n):
            y = x.copy()
            y[i] = xp[i]
            fp[i] = f.value(y)
            y[i] = xm[i]
            fm[i] = f.value(y)
    if not (np.all(np.isfinite(fp)) and np.all(np.isfinite(fm))):
        raise EvaluationError("non-finite objective in the difference stencil")
    roundoff = np.finfo(np.float64).eps * (np.abs(fp) + np.abs(fm)) / width
    return (fp - fm) / width, roundoff


def check_gradient(f: ObjectiveFunction, x, h: float = 1e-6, ladder: int = 10) -> float:
    """Max relative error between the analytic and a central-difference gradient.

    The base step is ``h * max(1, |x_i|)`` per coordinate. Steps are grown by
    factors of 4 up to ``ladder`` times, and per coordinate the quotient with
    the smallest estimated total error is kept: truncation is estimated by the
    change to the next larger step, roundoff by ``eps (|f+| + |f-|) / 2h``.
    The choice never looks at the analytic gradient; it only keeps
    cancellation in large objective values (POWER with n = 2000) from
    swamping the comparison. Error per coordinate is
    ``|analytic - fd| / max(1, |analytic|)``.
    """
    if not h > 0:
        raise ValueError("h must be positive")
    x = as_vector(x)
    f0 = f.value(x)
    if not math.isfinite(f0):
        raise EvaluationError("objective is not finite at x")
    g = as_vector(f.gradient(x))
    base = h * np.maximum(1.0, np.abs(x))
    steps = [_central_differences(f, x, base * 4.0**j) for j in range(ladder + 1)]
    q = np.array([d for d, _ in steps])
    if ladder == 0:
        fd = q[0]
    else:
        noise = np.array([r for _, r in steps])
        total = np.abs(np.diff(q, axis=0)) + noise[:-1]
        best = np.argmin(total, axis=0)
        fd = q[best, np.arange(x.shape[0])]
    return float(np.max(np.abs(g - fd) / np.maximum(1.0, np.abs(g))))


# ---- plain-text problem specs -------------------------------------------

_SPEC_KEYS = ("kind", "n", "kappa", "distribution_id", "seed", "c", "name")


def format_problem_spec(spec: dict) -> str:
    """Serialize a problem spec as ``key=value`` lines in a fixed key order."""
    unknown = set(spec) - set(_SPEC_KEYS)
    if unknown:
        raise ValueError(f"unknown spec keys: {sorted(unknown)}")
    lines = []
    for key in _SPEC_KEYS:
        if key in spec and spec[key] is not None:
            val = spec[key]
            lines.append(f"{key}={val!r}" if isinstance(val, float) else f"{key}={val}")
    return "\n".join(lines) + "\n"


def parse_problem_spec(text: str) -> dict:
    out: dict = {}
    for raw in text.splitlines():
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        key, sep, val = line.partition("=")
        key, val = key.strip(), val.strip()
        if not sep or key not in _SPEC_KEYS:
            raise ValueError(f"bad spec line: {raw!r}")
        if key in ("n", "distribution_id", "seed"):
            out[key] = int(val)
        elif key in ("kappa", "c"):
            out[key] = float(val)
        else:
            out[key] = val
    return out


def build_problem(spec: dict):
    """Regenerate a problem bit-exactly from its spec."""
    kind = spec.get("kind")
    if kind == "random_quadratic":
        s = SpectrumSpec(spec["distribution_id"], spec["kappa"], spec["n"])
        return make_random_quadratic(s, make_rng(spec["seed"]))
    if kind == "bvp":
        return make_bvp_quadratic(spec["n"], seed=spec["seed"])
    if kind == "rosenbrock":
        return rosenbrock(spec.get("c", 100.0))
    if kind == "function":
        from .testfunctions import registry_lookup

        return registry_lookup(spec["name"], spec.get("n"))
    raise ValueError(f"unknown problem kind {kind!r}")
