"""Two-dimensional dynamics of the parameterized BB iteration.

For ``f = 1/2 x^T diag(lam, 1) x - b^T x`` write ``eps_k`` for the ratio of
the squared gradient components of ``g_{k-1}``. The PBB step and the next
ratios are then closed-form functions of ``eps``:

    eps_{k+2} = e(eps_k)^2 * eps_{k+1}

These functions serve as oracles for the solver and as empirical checks of
the convergence argument (every orbit eventually dips to ``eps <= 1``).
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass
from typing import Optional, Union

import numpy as np

from .stepsize import M_TRUNCATION, m_k, zeta

DEFAULT_HORIZON = 200


class NoRealRootsError(ValueError):
    pass


def _check(eps: float, lam: float, m: float) -> None:
    if not eps > 0.0:
        raise ValueError("eps must be positive")
    if not lam > 1.0:
        raise ValueError("lambda must exceed 1")
    if not 0.0 <= m <= 1.0:
        raise ValueError("m must lie in [0, 1]")


def bb1_eps(eps: float, lam: float) -> float:
    return (lam * eps + 1.0) / (eps + 1.0)


def bb2_eps(eps: float, lam: float) -> float:
    return (lam * lam * eps + 1.0) / (lam * eps + 1.0)


def _radicand(eps, lam, m):
    u = lam * eps + 1.0
    return u * u + 4.0 * m * (1.0 - m) * (lam - 1.0) ** 2 * eps


def alpha_pbb_eps(eps: float, lam: float, m: float) -> float:
    """PBB step size on ``diag(lam, 1)`` expressed through ``eps``.

    Lies in ``[bb1_eps, bb2_eps] subset [1, lam]``; ``m = 0`` returns BB2.
    """
    _check(eps, lam, m)
    if m == 0.0:
        return bb2_eps(eps, lam)
    u = lam * eps + 1.0
    w = eps + 1.0
    r = math.sqrt(_radicand(eps, lam, m))
    b = (2.0 * m - 1.0) * u
    if b >= 0.0:
        return (b + r) / (2.0 * m * w)
    return 2.0 * (1.0 - m) * (u * u + (lam - 1.0) ** 2 * eps) / (w * (r - b))


def _t_factor(eps, lam, m):
    u = lam * eps + 1.0
    r = math.sqrt(_radicand(eps, lam, m))
    return 2.0 * (1.0 - m) * (lam - 1.0) / (r + u)


def e_factor_denominator(eps: float, lam: float, m: float) -> float:
    """Denominator of ``e(eps)``; bounded below by ``2 m (lam - 1) eps``.

    Evaluated as ``2 m (lam - 1) eps (1 + T)`` with ``T >= 0``, which equals
    the textbook expression without its cancellation.
    """
    _check(eps, lam, m)
    return 2.0 * m * (lam - 1.0) * eps * (1.0 + _t_factor(eps, lam, m))


def e_factor_denominator_direct(eps: float, lam: float, m: float) -> float:
    """Same quantity computed literally, for cross-checks."""
    _check(eps, lam, m)
    u = lam * eps + 1.0
    return (2.0 * m - 1.0) * u + math.sqrt(_radicand(eps, lam, m)) - 2.0 * m * (eps + 1.0)


def e_factor(eps: float, lam: float, m: float) -> float:
    """Growth factor ``(alpha - lam) / (alpha - 1)`` of the PBB step, as a function of eps.

    Uses the factored form ``(T eps - 1) / (eps (T + 1))``; at ``m = 1`` this
    is exactly ``-1 / eps``.
    """
    _check(eps, lam, m)
    t = _t_factor(eps, lam, m)
    if m > 0.0:
        den = e_factor_denominator(eps, lam, m)
        assert den >= 2.0 * m * (lam - 1.0) * eps > 0.0
    return (t * eps - 1.0) / (eps * (t + 1.0))


def abb_ratio(eps: float, lam: float) -> float:
    """``BB1 / BB2 = cos^2(theta)`` on the 2-D model."""
    if not eps > 0.0 or not lam > 1.0:
        raise ValueError("need eps > 0 and lambda > 1")
    u = lam * eps + 1.0
    return (u / (eps + 1.0)) * (u / (lam * lam * eps + 1.0))


@dataclass(frozen=True)
class AdaptiveM:
    """Adaptive interpolation parameter from consecutive cos^2 values."""

    q: int = 8

    def __str__(self) -> str:
        return f"adaptive(q={self.q})"


MPolicy = Union[float, AdaptiveM]


def adaptive_m(eps: float, lam: float, cos2_prev: float, q: int = 8) -> tuple[float, float]:
    """Return ``(m, cos2)`` for the adaptive policy at ratio ``eps``; truncated to 0."""
    c2 = abb_ratio(eps, lam)
    m = m_k(zeta(c2, cos2_prev), bb1_eps(eps, lam), q)
    return (0.0 if m < M_TRUNCATION else m), c2


def step_dynamics(eps_k: float, eps_k1: float, lam: float, m: float) -> float:
    """``eps_{k+2} = e(eps_k)^2 eps_{k+1}`` for a fixed ``m``."""
    e = e_factor(eps_k, lam, m)
    return e * e * eps_k1


@dataclass
class EpsState:
    eps_k: float
    eps_k1: float
    lam: float
    m_policy: MPolicy = 1.0

    def __post_init__(self):
        self.eps_k, self.eps_k1, self.lam = float(self.eps_k), float(self.eps_k1), float(self.lam)
        if not (self.eps_k > 0.0 and self.eps_k1 > 0.0):
            raise ValueError("eps values must be positive")
        if not self.lam > 1.0:
            raise ValueError("lambda must exceed 1")
        if not isinstance(self.m_policy, AdaptiveM) and not 0.0 < self.m_policy <= 1.0:
            raise ValueError("fixed m must lie in (0, 1]")


@dataclass
class DynamicsResult:
    eps: list[float]  # eps[j] is the ratio after j steps; eps[0] = the later start value
    first_le_one: Optional[int]
    diverged_at: Optional[int] = None


def simulate_dynamics(state: EpsState, steps: int = DEFAULT_HORIZON) -> DynamicsResult:
    """Iterate the ratio recurrence ``steps`` times from ``(eps_k, eps_k1)``.

    ``first_le_one`` is the first index ``j`` with ``eps[j] <= 1`` (``None``
    when the horizon is exhausted first).
    """
    if steps < 1:
        raise ValueError("steps must be >= 1")
    lam = state.lam
    a, b = state.eps_k, state.eps_k1
    seq = [b]
    adaptive = isinstance(state.m_policy, AdaptiveM)
    cos2_prev = 1.0
    diverged = None
    for j in range(1, steps + 1):
        if adaptive:
            m, cos2_prev = adaptive_m(a, lam, cos2_prev, state.m_policy.q)
        else:
            m = state.m_policy
        nxt = step_dynamics(a, b, lam, m)
        if not math.isfinite(nxt) or nxt == 0.0:
            diverged = j
            break
        seq.append(nxt)
        a, b = b, nxt
    first = next((i for i, v in enumerate(seq) if v <= 1.0), None)
    return DynamicsResult(seq, first, diverged)


# ---- ABB threshold algebra --------------------------------------------------


def abb_phi(eps: float, lam: float, eta: float) -> float:
    """``Phi(eps)``; negative exactly where ``BB1/BB2 < eta``."""
    return lam * lam * (1.0 - eta) * eps * eps + (2.0 * lam - eta * (1.0 + lam * lam)) * eps + (
        1.0 - eta
    )


def abb_phi_scale(eps: float, lam: float, eta: float) -> float:
    """Sum of the magnitudes of the terms of ``Phi`` (for relative residuals)."""
    return (
        lam * lam * (1.0 - eta) * eps * eps
        + abs(2.0 * lam) * eps
        + eta * (1.0 + lam * lam) * eps
        + (1.0 - eta)
    )


@dataclass(frozen=True)
class ThresholdRoots:
    eps1: float
    eps2: float
    lam: float
    eta: float


def abb_condition(lam: float, eta: float) -> bool:
    return eta > 4.0 * lam / (1.0 + lam) ** 2


def abb_threshold_roots(lam: float, eta: float) -> ThresholdRoots:
    """Both roots of ``Phi``; ``BB1/BB2 < eta`` exactly for eps between them.

    The larger root comes from the closed form; the smaller one from the
    product ``eps1 * eps2 = 1 / lam^2``, which avoids cancellation.
    """
    if not 0.0 < eta < 1.0:
        raise ValueError("eta must lie in (0, 1)")
    if not lam > 1.0:
        raise ValueError("lambda must exceed 1")
    if not abb_condition(lam, eta):
        raise NoRealRootsError(
            f"eta={eta} does not exceed 4 lam / (1 + lam)^2 = {4 * lam / (1 + lam) ** 2}"
        )
    disc = math.sqrt(eta * (eta - 4.0 * lam / (1.0 + lam) ** 2))
    eps2 = (eta * (1.0 + lam * lam) - 2.0 * lam + (lam * lam - 1.0) * disc) / (
        2.0 * lam * lam * (1.0 - eta)
    )
    eps1 = 1.0 / (lam * lam * eps2)
    return ThresholdRoots(eps1, eps2, lam, eta)


def abb_threshold_limits(lam: float, eta: float) -> dict:
    """Large-lambda limits of the roots and of BB1/BB2 at the roots."""
    return {
        "eps1": (1.0 - eta) / (eta * lam * lam),
        "eps2": eta / (1.0 - eta),
        "bb1_at_eps2": eta * (lam - 1.0) + 1.0,
        "bb2_at_eps2": lam,
        "bb1_at_eps1": 1.0,
        "bb2_at_eps1": 1.0 / eta,
    }


# ---- extraction from solver runs and CSV -----------------------------------

GRAD_FLOOR = 1e-12


def eps_from_gradients(grads) -> np.ndarray:
    """Ratios ``g1^2 / g2^2`` for a sequence of 2-D gradients (NaN below the floor).

    For an n-D gradient, the first ``n - 1`` components are pooled.
    """
    out = []
    for g in grads:
        g = np.asarray(g, dtype=np.float64)
        head, tail = g[:-1], g[-1]
        if np.linalg.norm(head) < GRAD_FLOOR or abs(tail) < GRAD_FLOOR:
            out.append(math.nan)
        else:
            out.append(float(head @ head) / (tail * tail))
    return np.array(out)


def dynamics_csv(result: DynamicsResult) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["step", "eps"])
    for j, v in enumerate(result.eps):
        w.writerow([j, f"{v:.17g}"])
    return buf.getvalue()


SWEEP_COLUMNS = ("lambda", "m_or_policy", "eps0", "eps1", "first_index_le_1", "steps")


def sweep(lams, policies, starts, steps: int = DEFAULT_HORIZON) -> list[tuple]:
    """Run ``simulate_dynamics`` over a grid; rows follow ``SWEEP_COLUMNS``."""
    rows = []
    for lam in lams:
        for pol in policies:
            for e0, e1 in starts:
                res = simulate_dynamics(EpsState(e0, e1, lam, pol), steps)
                rows.append((lam, str(pol), e0, e1, res.first_le_one, steps))
    return rows


def sweep_csv(rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(SWEEP_COLUMNS)
    for lam, pol, e0, e1, idx, steps in rows:
        w.writerow([f"{lam:.17g}", pol, f"{e0:.17g}", f"{e1:.17g}",
                    "" if idx is None else idx, steps])
    return buf.getvalue()
