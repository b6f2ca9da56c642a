"""Barzilai-Borwein style step-size rules.

Every rule returns the scalar ``alpha`` (an inverse step length: the iterate
moves by ``-g / alpha``). Rules are pure functions of a :class:`StepPair`
plus, for the history-dependent ones, a :class:`RuleState` owned by one run.
"""

from __future__ import annotations

import math
from collections import deque
from dataclasses import dataclass, field, fields, replace
from typing import Optional

import numpy as np

RULE_NAMES = ("bb1", "bb2", "pbb", "abb", "abbmin", "abbbon", "atc", "tbb")

M_TRUNCATION = 1e-8
COS2_FLOOR = 1e-16
XI_CLAMP = (1e-8, 1.0 - 1e-8)


class DegeneratePairError(ValueError):
    """The (s, y) pair does not define the requested quotient."""


class CurvatureError(ValueError):
    """``s^T y <= 0``; the caller must substitute a safeguarded step."""


@dataclass(frozen=True)
class StepPair:
    """Inner products of ``s = x_k - x_{k-1}`` and ``y = g_k - g_{k-1}``."""

    ss: float
    sy: float
    yy: float

    def __post_init__(self):
        if not self.ss > 0.0:
            raise DegeneratePairError("s^T s must be positive")
        if self.yy < 0.0:
            raise DegeneratePairError("y^T y must be non-negative")

    @classmethod
    def from_vectors(cls, s, y) -> "StepPair":
        s = np.asarray(s, dtype=np.float64)
        y = np.asarray(y, dtype=np.float64)
        return cls(float(s @ s), float(s @ y), float(y @ y))

    @property
    def cos2(self) -> float:
        """Squared cosine of the angle between s and y (0 when undefined)."""
        if self.sy == 0.0 or self.yy == 0.0:
            return 0.0
        return min(1.0, (self.sy / self.ss) * (self.sy / self.yy))


def bb1(p: StepPair) -> float:
    return p.sy / p.ss


def bb2(p: StepPair) -> float:
    if p.sy == 0.0:
        raise DegeneratePairError("BB2 undefined for s^T y = 0")
    return p.yy / p.sy


def _require_curvature(p: StepPair) -> None:
    if not p.sy > 0.0:
        raise CurvatureError(f"rule needs s^T y > 0, got {p.sy!r}")


def pbb_discriminant(p: StepPair, m: float) -> float:
    # ((2m-1) sy)^2 - 4m(m-1) ss yy, written as a sum of non-negative terms
    return ((2.0 * m - 1.0) * p.sy) ** 2 + 4.0 * m * (1.0 - m) * p.ss * p.yy


def pbb(p: StepPair, m: float) -> float:
    """Positive root of ``m ss a^2 - (2m-1) sy a + (m-1) yy = 0``.

    ``m = 1`` gives BB1, ``m = 1/2`` the geometric mean of BB1 and BB2, and
    any ``m < 1e-8`` is truncated to BB2.
    """
    _require_curvature(p)
    if not 0.0 <= m <= 1.0:
        raise ValueError(f"m must lie in [0, 1], got {m!r}")
    if m < M_TRUNCATION:
        return bb2(p)
    b = (2.0 * m - 1.0) * p.sy
    root = math.sqrt(pbb_discriminant(p, m))
    if b >= 0.0:
        return (b + root) / (2.0 * m * p.ss)
    # rationalised form avoids cancellation between b < 0 and the root
    return 2.0 * (1.0 - m) * p.yy / (root - b)


def zeta(cos2_k: float, cos2_prev: float) -> float:
    cos2_prev = max(cos2_prev, COS2_FLOOR)
    return cos2_k * (cos2_k / cos2_prev)


def m_k(zeta_val: float, bb1_val: float, q: int = 8) -> float:
    """Interpolation parameter ``zeta^q / (bb1 + zeta^q)``."""
    if zeta_val <= 0.0:
        return 0.0
    log_z = math.log(zeta_val)
    if q * abs(log_z) <= 300.0:
        zq = zeta_val**q
        return zq / (bb1_val + zq)
    # log space: m = 1 / (1 + exp(log bb1 - q log zeta))
    t = math.log(bb1_val) - q * log_z
    if t > 700.0:
        return 0.0
    if t < -700.0:
        return 1.0
    return 1.0 / (1.0 + math.exp(t))


def abb(p: StepPair, eta: float = 0.5) -> float:
    _require_curvature(p)
    a1, a2 = bb1(p), bb2(p)
    return a2 if a1 / a2 < eta else a1


@dataclass
class RuleConfig:
    rule_name: str = "pbb"
    eta: float = 0.5
    xi: float = 0.8
    window: int = 5
    cycle: int = 4
    q: int = 8
    m: Optional[float] = None  # fixed interpolation parameter for pbb; None = adaptive

    def __post_init__(self):
        if self.rule_name not in RULE_NAMES:
            raise ValueError(f"unknown rule {self.rule_name!r}; choose from {RULE_NAMES}")
        if not 0.0 < self.eta < 1.0 or not 0.0 < self.xi < 1.0:
            raise ValueError("eta and xi must lie in (0, 1)")
        if self.window < 0 or self.cycle < 1 or self.q < 1:
            raise ValueError("window >= 0, cycle >= 1 and q >= 1 required")
        if self.m is not None and not 0.0 <= self.m <= 1.0:
            raise ValueError("m must lie in [0, 1]")

    def as_dict(self) -> dict:
        return {f.name: getattr(self, f.name) for f in fields(self)}

    def label(self) -> str:
        if self.rule_name == "pbb" and self.m is not None:
            return f"pbb:m={self.m:g}"
        return self.rule_name

    @classmethod
    def parse(cls, text: str, **defaults) -> "RuleConfig":
        """Parse ``name[:key=value...]``, e.g. ``pbb:m=0.5`` or ``atc:cycle=8``."""
        name, *opts = text.strip().split(":")
        kw = dict(defaults)
        types = {f.name: f.type for f in fields(cls)}
        for opt in opts:
            key, sep, val = opt.partition("=")
            if not sep or key not in types or key == "rule_name":
                raise ValueError(f"bad rule option {opt!r} in {text!r}")
            kw[key] = int(val) if key in ("window", "cycle", "q") else float(val)
        return cls(rule_name=name.strip().lower(), **kw)


@dataclass
class RuleState:
    """Per-run history used by the adaptive rules."""

    config: RuleConfig = field(default_factory=RuleConfig)
    k: int = 1
    prev_alpha: Optional[float] = None
    cos2_prev: float = 1.0  # neutral prior before the first pair
    bb2_window: deque = field(default_factory=deque)
    xi: float = 0.5

    def __post_init__(self):
        self.bb2_window = deque(self.bb2_window, maxlen=self.config.window + 1)


def abbmin(p: StepPair, state: RuleState, xi: float) -> float:
    """Largest recent BB2 value (the shortest step) when cos^2 < xi, else BB1.

    Pushes the current BB2 into the state's window first.
    """
    _require_curvature(p)
    state.bb2_window.append(bb2(p))
    if p.cos2 < xi:
        return max(state.bb2_window)
    return bb1(p)


def abbbon(p: StepPair, state: RuleState) -> float:
    xi = state.xi
    alpha = abbmin(p, state, xi)
    xi = 0.9 * xi if p.cos2 < xi else 1.1 * xi
    state.xi = min(max(xi, XI_CLAMP[0]), XI_CLAMP[1])
    return alpha


def atc(p: StepPair, prev_alpha: float, k: int, cycle_m: int) -> float:
    _require_curvature(p)
    a1 = bb1(p)
    if k % cycle_m == 0:
        return a1
    a2 = bb2(p)
    if prev_alpha <= a1:
        return a1
    if prev_alpha >= a2:
        return a2
    return prev_alpha


def tbb(p: StepPair, tau: Optional[float] = None) -> float:
    """Harmonic-framework step ``y^T (y - tau s) / s^T (y - tau s)``.

    With ``tau=None`` the target ``tau = -cot(theta)`` is used.
    """
    _require_curvature(p)
    if tau is None:
        c2 = p.cos2
        if c2 >= 1.0:
            return bb1(p)
        tau = -math.sqrt(c2 / (1.0 - c2))
    if math.isinf(tau):
        return bb1(p)
    den = p.sy - tau * p.ss
    if abs(den) < 1e-300:
        return bb2(p)
    return (p.yy - tau * p.sy) / den


class StepRule:
    """Stateful driver that turns successive pairs into step sizes."""

    def __init__(self, config: RuleConfig | str = "pbb", **overrides):
        if isinstance(config, str):
            config = RuleConfig(rule_name=config, **overrides)
        elif overrides:
            config = replace(config, **overrides)
        self.config = config
        self.state = RuleState(config=config, xi=0.5)
        self.last_m: Optional[float] = None

    @property
    def name(self) -> str:
        return self.config.label()

    def start(self, alpha1: float) -> None:
        """Record the initial step size (used as ATC's previous alpha)."""
        self.state.prev_alpha = alpha1

    def record(self, alpha: float) -> None:
        """Record the alpha actually used (after safeguards)."""
        self.state.prev_alpha = alpha

    def next(self, p: StepPair, k: int) -> float:
        """Step size ``alpha_k`` from the pair ``(s_{k-1}, y_{k-1})``."""
        cfg, st = self.config, self.state
        st.k = k
        self.last_m = None
        name = cfg.rule_name
        if name == "bb1":
            return bb1(p)
        if name == "bb2":
            return bb2(p)
        if name == "abb":
            return abb(p, cfg.eta)
        if name == "abbmin":
            return abbmin(p, st, cfg.xi)
        if name == "abbbon":
            return abbbon(p, st)
        if name == "atc":
            prev = st.prev_alpha if st.prev_alpha is not None else bb1(p)
            return atc(p, prev, k, cfg.cycle)
        if name == "tbb":
            return tbb(p)
        # pbb
        _require_curvature(p)
        c2 = p.cos2
        if cfg.m is not None:
            m = cfg.m
        else:
            m = m_k(zeta(c2, st.cos2_prev), bb1(p), cfg.q)
        st.cos2_prev = c2
        self.last_m = m
        return pbb(p, m)
