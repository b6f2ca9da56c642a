"""Gradient iteration drivers.

``solve_quadratic`` runs the plain iteration ``x <- x - g / alpha`` on a
:class:`~spectral_bb.problems.QuadraticProblem` with no line search.
``solve_nonquadratic`` globalises the same step rules with the
Grippo-Lampariello-Lucidi nonmonotone backtracking search.
"""

from __future__ import annotations

import csv
import enum
import io
import math
from collections import deque
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from .problems import ObjectiveFunction, QuadraticProblem
from .stepsize import RuleConfig, StepPair, StepRule


class Status(str, enum.Enum):
    CONVERGED = "Converged"
    MAX_ITER = "MaxIter"
    MAX_FEVAL = "MaxFeval"
    LINE_SEARCH_FAILURE = "LineSearchFailure"
    NUMERICAL_BREAKDOWN = "NumericalBreakdown"

    def __str__(self) -> str:
        return self.value


@dataclass
class SolverConfig:
    epsilon: float = 1e-6
    max_iter: int = 20000
    max_feval: int = 100_000
    alpha_min: float = 1e-30
    alpha_max: float = 1e30
    M: int = 10
    sigma: float = 1e-4
    delta: float = 0.5
    max_backtracks: int = 100
    q: int = 8
    record: bool = True

    def __post_init__(self):
        if not 0.0 < self.alpha_min < self.alpha_max:
            raise ValueError("need 0 < alpha_min < alpha_max")
        if not (0.0 < self.sigma < 1.0 and 0.0 < self.delta < 1.0):
            raise ValueError("sigma and delta must lie in (0, 1)")
        if self.M < 1 or self.max_iter < 1 or self.max_backtracks < 0:
            raise ValueError("M >= 1, max_iter >= 1, max_backtracks >= 0 required")
        if not self.epsilon > 0.0:
            raise ValueError("epsilon must be positive")

    def clamp(self, alpha: float) -> float:
        return min(max(alpha, self.alpha_min), self.alpha_max)


TRACE_COLUMNS = ("k", "alpha", "m_k", "grad_norm", "f", "cos2", "fevals", "backtracks")


@dataclass
class Trace:
    """Per-iteration history of one run plus its outcome.

    Row ``k`` describes iterate ``x_k``: its gradient norm and objective, the
    step size ``alpha_k`` about to be used from it (NaN on the final row) and
    the line-search work spent reaching it.
    """

    rule: str
    rows: list = field(default_factory=list)
    status: Status = Status.MAX_ITER
    iterations: int = 0
    fevals: int = 0
    gevals: int = 0
    grad_norm0: float = math.nan
    grad_norm: float = math.nan
    x: Optional[np.ndarray] = None

    @property
    def grad_ratio(self) -> float:
        return self.grad_norm / self.grad_norm0 if self.grad_norm0 > 0 else 0.0

    @property
    def converged(self) -> bool:
        return self.status is Status.CONVERGED

    def column(self, name: str) -> np.ndarray:
        j = TRACE_COLUMNS.index(name)
        return np.array([r[j] for r in self.rows], dtype=np.float64)

    def to_csv(self, fh=None) -> str:
        out = fh if fh is not None else io.StringIO()
        w = csv.writer(out, lineterminator="\n")
        w.writerow(TRACE_COLUMNS)
        for r in self.rows:
            w.writerow([r[0], *(f"{v:.17g}" for v in r[1:6]), r[6], r[7]])
        w.writerow(["status", str(self.status), "iterations", self.iterations,
                    "fevals", self.fevals, "grad_ratio", f"{self.grad_ratio:.17g}"])
        return out.getvalue() if fh is None else ""


def _rule(rule, config: SolverConfig) -> StepRule:
    if isinstance(rule, StepRule):
        return rule
    if isinstance(rule, str):
        return StepRule(RuleConfig.parse(rule, q=config.q))
    return StepRule(rule)


def solve_quadratic(
    problem: QuadraticProblem,
    rule="pbb",
    config: Optional[SolverConfig] = None,
    x1: Optional[np.ndarray] = None,
    callback: Optional[Callable[[int, np.ndarray, np.ndarray], None]] = None,
) -> Trace:
    """Unsafeguarded gradient iteration on a strictly convex quadratic.

    The first step is the exact Cauchy step ``alpha_1 = g^T A g / g^T g``.
    The gradient is advanced by ``g <- g - A g / alpha`` so each iteration
    costs one operator application. Stops when
    ``||g_k|| <= epsilon ||g_1||`` or after ``max_iter`` steps.

    ``callback(k, x_k, g_k)``, if given, sees every iterate (read-only).
    """
    config = config or SolverConfig()
    stepper = _rule(rule, config)
    x = np.array(problem.start if x1 is None else x1, dtype=np.float64)
    r = x - problem.minimizer
    g = problem.apply(r)
    ag = problem.apply(g)
    gg = float(g @ g)
    trace = Trace(rule=stepper.name, fevals=1, gevals=1)
    g1 = math.sqrt(gg)
    trace.grad_norm0 = g1
    target = config.epsilon * g1

    if g1 == 0.0:
        trace.status, trace.grad_norm, trace.x = Status.CONVERGED, 0.0, x
        if config.record:
            trace.rows.append((1, math.nan, math.nan, 0.0, 0.0, math.nan, 1, 0))
        return trace

    gag = float(g @ ag)
    alpha = config.clamp(gag / gg)
    stepper.start(alpha)
    m_val, cos2 = math.nan, math.nan
    k = 1
    while True:
        gnorm = math.sqrt(gg)
        if not (math.isfinite(gnorm) and math.isfinite(alpha)):
            trace.status = Status.NUMERICAL_BREAKDOWN
            break
        done = gnorm <= target
        if callback is not None:
            callback(k, x, g)
        if config.record:
            f = 0.5 * float(r @ g)
            trace.rows.append(
                (k, math.nan if done else alpha, m_val, gnorm, f, cos2, k, 0)
            )
        if done:
            trace.status = Status.CONVERGED
            break
        if k > config.max_iter:
            trace.status = Status.MAX_ITER
            break
        inv = 1.0 / alpha
        s = -inv * g
        y = -inv * ag
        x = x + s
        r = r + s
        g = g + y
        pair = StepPair(float(s @ s), float(s @ y), float(y @ y))
        ag = problem.apply(g)
        gg = float(g @ g)
        k += 1
        trace.fevals += 1
        trace.gevals += 1
        if not pair.sy > 0.0:
            trace.status = Status.NUMERICAL_BREAKDOWN
            break
        alpha = config.clamp(stepper.next(pair, k))
        stepper.record(alpha)
        m_val = math.nan if stepper.last_m is None else stepper.last_m
        cos2 = pair.cos2
    trace.iterations = k - 1
    trace.grad_norm = math.sqrt(gg)
    trace.x = x
    return trace


def gll_accept(f_trial: float, history, sigma: float, gamma: float, alpha: float,
               gsq: float) -> bool:
    """Nonmonotone sufficient-decrease test.

    Accept when ``f_trial <= max(history) - sigma * gamma * gsq / alpha``.
    """
    return f_trial <= max(history) - sigma * gamma * (1.0 / alpha) * gsq


def fallback_alpha(gnorm: float) -> float:
    """Step size substituted when ``s^T y <= 0``: step length in ``[1, 1e5]``."""
    inv = 1.0 / gnorm if gnorm > 0.0 else math.inf
    return 1.0 / max(min(inv, 1e5), 1.0)


def solve_nonquadratic(
    f: ObjectiveFunction,
    rule="pbb",
    config: Optional[SolverConfig] = None,
    x1: Optional[np.ndarray] = None,
    target_point: Optional[np.ndarray] = None,
    alpha1: float = 1.0,
) -> Trace:
    """Spectral gradient method with GLL nonmonotone line search.

    Each outer iteration backtracks from ``gamma = 1`` by ``delta`` until the
    trial beats the maximum of the last ``M`` accepted values by the
    sufficient-decrease margin. Non-finite trial values are rejected like any
    other failed trial.

    By default the run stops when ``||g_k|| < epsilon ||g_1||``. If
    ``target_point`` is given, it stops instead when
    ``||x_k - target_point|| < epsilon``.
    """
    config = config or SolverConfig()
    stepper = _rule(rule, config)
    x = np.array(f.suggested_start if x1 is None else x1, dtype=np.float64)
    fx = f.value(x)
    if not math.isfinite(fx):
        raise ValueError("objective is not finite at the starting point")
    g = np.asarray(f.gradient(x), dtype=np.float64)
    trace = Trace(rule=stepper.name, fevals=1, gevals=1)
    gnorm = float(np.linalg.norm(g))
    trace.grad_norm0 = gnorm
    history = deque([fx], maxlen=config.M)
    alpha = config.clamp(alpha1)
    stepper.start(alpha)
    m_val, cos2, backtracks = math.nan, math.nan, 0
    k = 1

    def stop() -> bool:
        if target_point is not None:
            return float(np.linalg.norm(x - target_point)) < config.epsilon
        return gnorm < config.epsilon * trace.grad_norm0 or gnorm == 0.0

    while True:
        if not (math.isfinite(gnorm) and math.isfinite(fx)):
            trace.status = Status.NUMERICAL_BREAKDOWN
            break
        done = stop()
        if config.record:
            trace.rows.append(
                (k, math.nan if done else alpha, m_val, gnorm, fx, cos2, trace.fevals, backtracks)
            )
        if done:
            trace.status = Status.CONVERGED
            break
        if k >= config.max_iter:
            trace.status = Status.MAX_ITER
            break
        if trace.fevals >= config.max_feval:
            trace.status = Status.MAX_FEVAL
            break

        gsq = gnorm * gnorm
        gamma = 1.0
        backtracks = 0
        accepted = False
        while True:
            x_new = x - (gamma / alpha) * g
            f_new = f.value(x_new)
            trace.fevals += 1
            if math.isfinite(f_new) and gll_accept(f_new, history, config.sigma, gamma,
                                                   alpha, gsq):
                accepted = True
                break
            if trace.fevals >= config.max_feval or backtracks >= config.max_backtracks:
                break
            gamma *= config.delta
            backtracks += 1
        if not accepted:
            trace.status = (
                Status.MAX_FEVAL if trace.fevals >= config.max_feval
                else Status.LINE_SEARCH_FAILURE
            )
            break

        g_new = np.asarray(f.gradient(x_new), dtype=np.float64)
        trace.gevals += 1
        s = x_new - x
        y = g_new - g
        x, g, fx = x_new, g_new, f_new
        gnorm = float(np.linalg.norm(g))
        history.append(fx)
        k += 1
        pair = StepPair.from_vectors(s, y) if np.any(s) else None
        if pair is None or not pair.sy > 0.0:
            alpha = fallback_alpha(gnorm)
            m_val, cos2 = math.nan, math.nan
        else:
            alpha = config.clamp(stepper.next(pair, k))
            m_val = math.nan if stepper.last_m is None else stepper.last_m
            cos2 = pair.cos2
        stepper.record(alpha)
    trace.iterations = k - 1
    trace.grad_norm = gnorm
    trace.x = x
    return trace
