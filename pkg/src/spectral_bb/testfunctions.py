"""Nonquadratic test functions with analytic gradients.

Formulas and start points are the standard ones for these classical
unconstrained problems. Value functions broadcast over leading axes
(``x[..., i]``) so many points can be evaluated at once.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .problems import ObjectiveFunction


class UnknownFunctionError(KeyError):
    pass


@dataclass(frozen=True)
class _Entry:
    name: str
    default_n: int
    value: Callable[[np.ndarray], np.ndarray]
    gradient: Callable[[np.ndarray], np.ndarray]
    start: Callable[[int], np.ndarray]
    minimum: float | None = None
    even: bool = False  # dimension must be even
    source: str = ""


def _idx(x):
    return np.arange(1, x.shape[-1] + 1, dtype=np.float64)


def _alternating(n, a, b):
    x = np.empty(n)
    x[0::2], x[1::2] = a, b
    return x


# -- Almost Perturbed Quadratic: sum i x_i^2 + (x_1 + x_n)^2 / 100
def apq_f(x):
    return np.sum(_idx(x) * x**2, axis=-1) + 0.01 * (x[..., 0] + x[..., -1]) ** 2


def apq_g(x):
    g = 2.0 * _idx(x) * x
    t = 0.02 * (x[0] + x[-1])
    g[0] += t
    g[-1] += t
    return g


# -- Diagonal 4: sum_{i<=n/2} 1/2 (x_{2i-1}^2 + 100 x_{2i}^2)
def diag4_f(x):
    return 0.5 * np.sum(x[..., 0::2] ** 2 + 100.0 * x[..., 1::2] ** 2, axis=-1)


def diag4_g(x):
    g = np.empty_like(x)
    g[0::2] = x[0::2]
    g[1::2] = 100.0 * x[1::2]
    return g


# -- Dixon & Price: (x_1 - 1)^2 + sum_{i>=2} i (2 x_i^2 - x_{i-1})^2
def dixon_price_f(x):
    i = _idx(x)[1:]
    return (x[..., 0] - 1.0) ** 2 + np.sum(i * (2.0 * x[..., 1:] ** 2 - x[..., :-1]) ** 2, axis=-1)


def dixon_price_g(x):
    i = _idx(x)[1:]
    r = 2.0 * x[1:] ** 2 - x[:-1]
    g = np.zeros_like(x)
    g[0] = 2.0 * (x[0] - 1.0)
    g[1:] += 8.0 * i * r * x[1:]
    g[:-1] -= 2.0 * i * r
    return g


# -- DIXON3DQ: (x_1 - 1)^2 + sum_{j=2}^{n-1} (x_j - x_{j+1})^2 + (x_n - 1)^2
def dixon3dq_f(x):
    d = x[..., 1:-1] - x[..., 2:]
    return (x[..., 0] - 1.0) ** 2 + np.sum(d**2, axis=-1) + (x[..., -1] - 1.0) ** 2


def dixon3dq_g(x):
    g = np.zeros_like(x)
    d = 2.0 * (x[1:-1] - x[2:])
    g[1:-1] += d
    g[2:] -= d
    g[0] += 2.0 * (x[0] - 1.0)
    g[-1] += 2.0 * (x[-1] - 1.0)
    return g


# -- DQDRTIC: sum_{i<=n-2} (x_i^2 + 100 x_{i+1}^2 + 100 x_{i+2}^2)
def dqdrtic_f(x):
    return np.sum(x[..., :-2] ** 2 + 100.0 * x[..., 1:-1] ** 2 + 100.0 * x[..., 2:] ** 2, axis=-1)


def dqdrtic_g(x):
    g = np.zeros_like(x)
    g[:-2] += 2.0 * x[:-2]
    g[1:-1] += 200.0 * x[1:-1]
    g[2:] += 200.0 * x[2:]
    return g


# -- Extended Rosenbrock: sum_{i<=n/2} 100 (x_{2i} - x_{2i-1}^2)^2 + (1 - x_{2i-1})^2
def ext_rosen_f(x):
    u, v = x[..., 0::2], x[..., 1::2]
    return np.sum(100.0 * (v - u**2) ** 2 + (1.0 - u) ** 2, axis=-1)


def ext_rosen_g(x):
    u, v = x[0::2], x[1::2]
    t = v - u**2
    g = np.empty_like(x)
    g[0::2] = -400.0 * u * t - 2.0 * (1.0 - u)
    g[1::2] = 200.0 * t
    return g


# -- Extended Beale
_BEALE_C = (1.5, 2.25, 2.625)


def ext_beale_f(x):
    u, v = x[..., 0::2], x[..., 1::2]
    s = sum((c - u * (1.0 - v**k)) ** 2 for k, c in enumerate(_BEALE_C, start=1))
    return np.sum(s, axis=-1)


def ext_beale_g(x):
    u, v = x[0::2], x[1::2]
    gu = np.zeros_like(u)
    gv = np.zeros_like(v)
    for k, c in enumerate(_BEALE_C, start=1):
        r = c - u * (1.0 - v**k)
        gu += -2.0 * r * (1.0 - v**k)
        gv += 2.0 * r * u * k * v ** (k - 1)
    g = np.empty_like(x)
    g[0::2], g[1::2] = gu, gv
    return g


# -- Extended Himmelblau: sum (x_{2i-1}^2 + x_{2i} - 11)^2 + (x_{2i-1} + x_{2i}^2 - 7)^2
def ext_himmelblau_f(x):
    u, v = x[..., 0::2], x[..., 1::2]
    return np.sum((u**2 + v - 11.0) ** 2 + (u + v**2 - 7.0) ** 2, axis=-1)


def ext_himmelblau_g(x):
    u, v = x[0::2], x[1::2]
    a = u**2 + v - 11.0
    b = u + v**2 - 7.0
    g = np.empty_like(x)
    g[0::2] = 4.0 * a * u + 2.0 * b
    g[1::2] = 2.0 * a + 4.0 * b * v
    return g


# -- Generalized Rosenbrock: sum_{i<=n-1} 100 (x_{i+1} - x_i^2)^2 + (1 - x_i)^2
def gen_rosen_f(x):
    u, v = x[..., :-1], x[..., 1:]
    return np.sum(100.0 * (v - u**2) ** 2 + (1.0 - u) ** 2, axis=-1)


def gen_rosen_g(x):
    u, v = x[:-1], x[1:]
    t = v - u**2
    g = np.zeros_like(x)
    g[:-1] += -400.0 * u * t - 2.0 * (1.0 - u)
    g[1:] += 200.0 * t
    return g


# -- LIARWHD: sum 4 (x_i^2 - x_1)^2 + sum (x_i - 1)^2
def liarwhd_f(x):
    return np.sum(4.0 * (x**2 - x[..., :1]) ** 2 + (x - 1.0) ** 2, axis=-1)


def liarwhd_g(x):
    r = x**2 - x[0]
    g = 16.0 * r * x + 2.0 * (x - 1.0)
    g[0] -= 8.0 * np.sum(r)
    return g


# -- NONDIA: (x_1 - 1)^2 + sum_{i>=2} 100 (x_1 - x_{i-1}^2)^2
def nondia_f(x):
    return (x[..., 0] - 1.0) ** 2 + np.sum(100.0 * (x[..., :1] - x[..., :-1] ** 2) ** 2, axis=-1)


def nondia_g(x):
    r = x[0] - x[:-1] ** 2
    g = np.zeros_like(x)
    g[0] = 2.0 * (x[0] - 1.0) + 200.0 * np.sum(r)
    g[:-1] += -400.0 * r * x[:-1]
    return g


# -- POWER: sum (i x_i)^2
def power_f(x):
    return np.sum((_idx(x) * x) ** 2, axis=-1)


def power_g(x):
    i = _idx(x)
    return 2.0 * i**2 * x


# ---- optional members of the table ---------------------------------------


# -- BIGGSB1: (x_1 - 1)^2 + sum_{i<=n-1} (x_{i+1} - x_i)^2 + (1 - x_n)^2
def biggsb1_f(x):
    return (
        (x[..., 0] - 1.0) ** 2
        + np.sum((x[..., 1:] - x[..., :-1]) ** 2, axis=-1)
        + (1.0 - x[..., -1]) ** 2
    )


def biggsb1_g(x):
    d = 2.0 * (x[1:] - x[:-1])
    g = np.zeros_like(x)
    g[1:] += d
    g[:-1] -= d
    g[0] += 2.0 * (x[0] - 1.0)
    g[-1] -= 2.0 * (1.0 - x[-1])
    return g


# -- CUBE (n = 2): 100 (x_2 - x_1^3)^2 + (1 - x_1)^2
# -- Extended White & Holst: the CUBE term summed over consecutive pairs
def white_holst_f(x):
    u, v = x[..., 0::2], x[..., 1::2]
    return np.sum(100.0 * (v - u**3) ** 2 + (1.0 - u) ** 2, axis=-1)


def white_holst_g(x):
    u, v = x[0::2], x[1::2]
    t = v - u**3
    g = np.empty_like(x)
    g[0::2] = -600.0 * t * u**2 - 2.0 * (1.0 - u)
    g[1::2] = 200.0 * t
    return g


# -- Extended Powell singular
def ext_powell_f(x):
    a, b, c, d = (x[..., k::4] for k in range(4))
    return np.sum(
        (a + 10.0 * b) ** 2 + 5.0 * (c - d) ** 2 + (b - 2.0 * c) ** 4 + 10.0 * (a - d) ** 4,
        axis=-1,
    )


def ext_powell_g(x):
    a, b, c, d = (x[k::4] for k in range(4))
    t1 = 2.0 * (a + 10.0 * b)
    t2 = 10.0 * (c - d)
    t3 = 4.0 * (b - 2.0 * c) ** 3
    t4 = 40.0 * (a - d) ** 3
    g = np.empty_like(x)
    g[0::4] = t1 + t4
    g[1::4] = 10.0 * t1 + t3
    g[2::4] = t2 - 2.0 * t3
    g[3::4] = -t2 - t4
    return g


# -- Extended quadratic penalty QP2: sum_{i<=n-1} (x_i^2 - sin x_i)^2 + (sum x_i^2 - 100)^2
def qp2_f(x):
    head = x[..., :-1]
    return np.sum((head**2 - np.sin(head)) ** 2, axis=-1) + (np.sum(x**2, axis=-1) - 100.0) ** 2


def qp2_g(x):
    head = x[:-1]
    g = 4.0 * (np.sum(x**2) - 100.0) * x
    g[:-1] += 2.0 * (head**2 - np.sin(head)) * (2.0 * head - np.cos(head))
    return g


# -- Extended DENSCHNF
def denschnf_f(x):
    u, v = x[..., 0::2], x[..., 1::2]
    a = 2.0 * (u + v) ** 2 + (u - v) ** 2 - 8.0
    b = 5.0 * u**2 + (v - 3.0) ** 2 - 9.0
    return np.sum(a**2 + b**2, axis=-1)


def denschnf_g(x):
    u, v = x[0::2], x[1::2]
    a = 2.0 * (u + v) ** 2 + (u - v) ** 2 - 8.0
    b = 5.0 * u**2 + (v - 3.0) ** 2 - 9.0
    g = np.empty_like(x)
    g[0::2] = 2.0 * a * (4.0 * (u + v) + 2.0 * (u - v)) + 2.0 * b * 10.0 * u
    g[1::2] = 2.0 * a * (4.0 * (u + v) - 2.0 * (u - v)) + 2.0 * b * 2.0 * (v - 3.0)
    return g


# -- FLETCHCR: sum_{i<=n-1} 100 (x_{i+1} - x_i + 1 - x_i^2)^2
def fletchcr_f(x):
    u, v = x[..., :-1], x[..., 1:]
    return np.sum(100.0 * (v - u + 1.0 - u**2) ** 2, axis=-1)


def fletchcr_g(x):
    u, v = x[:-1], x[1:]
    r = 200.0 * (v - u + 1.0 - u**2)
    g = np.zeros_like(x)
    g[1:] += r
    g[:-1] += r * (-1.0 - 2.0 * u)
    return g


# -- HIMMELBG: sum (2 x_{2i-1}^2 + 3 x_{2i}^2) exp(-x_{2i-1} - x_{2i})
def himmelbg_f(x):
    u, v = x[..., 0::2], x[..., 1::2]
    return np.sum((2.0 * u**2 + 3.0 * v**2) * np.exp(-u - v), axis=-1)


def himmelbg_g(x):
    u, v = x[0::2], x[1::2]
    e = np.exp(-u - v)
    q = 2.0 * u**2 + 3.0 * v**2
    g = np.empty_like(x)
    g[0::2] = (4.0 * u - q) * e
    g[1::2] = (6.0 * v - q) * e
    return g


# -- MCCORMCK: sum_{i<=n-1} -1.5 x_i + 2.5 x_{i+1} + 1 + (x_i - x_{i+1})^2 + sin(x_i + x_{i+1})
def mccormck_f(x):
    u, v = x[..., :-1], x[..., 1:]
    return np.sum(-1.5 * u + 2.5 * v + 1.0 + (u - v) ** 2 + np.sin(u + v), axis=-1)


def mccormck_g(x):
    u, v = x[:-1], x[1:]
    d = 2.0 * (u - v)
    c = np.cos(u + v)
    g = np.zeros_like(x)
    g[:-1] += -1.5 + d + c
    g[1:] += 2.5 - d + c
    return g


# -- NONSCOMP: (x_1 - 1)^2 + sum_{i>=2} 4 (x_i - x_{i-1}^2)^2
def nonscomp_f(x):
    return (x[..., 0] - 1.0) ** 2 + np.sum(4.0 * (x[..., 1:] - x[..., :-1] ** 2) ** 2, axis=-1)


def nonscomp_g(x):
    r = 8.0 * (x[1:] - x[:-1] ** 2)
    g = np.zeros_like(x)
    g[0] = 2.0 * (x[0] - 1.0)
    g[1:] += r
    g[:-1] -= 2.0 * r * x[:-1]
    return g


# -- Perturbed Quadratic: sum i x_i^2 + (sum x_i)^2 / 100
def pq_f(x):
    return np.sum(_idx(x) * x**2, axis=-1) + 0.01 * np.sum(x, axis=-1) ** 2


def pq_g(x):
    return 2.0 * _idx(x) * x + 0.02 * np.sum(x)


# -- Perturbed Quadratic Diagonal: (sum x_i)^2 + sum (i / 100) x_i^2
def pqd_f(x):
    return np.sum(x, axis=-1) ** 2 + np.sum(_idx(x) / 100.0 * x**2, axis=-1)


def pqd_g(x):
    return 2.0 * np.sum(x) + 2.0 * _idx(x) / 100.0 * x


def _const(v):
    return lambda n: np.full(n, float(v))


_ENTRIES = [
    _Entry("Almost Perturbed Quadratic", 100, apq_f, apq_g, _const(0.5), 0.0),
    _Entry("Diagonal4", 100, diag4_f, diag4_g, _const(1.0), 0.0, even=True),
    _Entry("Dixon Price", 100, dixon_price_f, dixon_price_g, _const(1.0), 0.0),
    _Entry("DIXON3DQ", 100, dixon3dq_f, dixon3dq_g, _const(-1.0), 0.0),
    _Entry("DQDRTIC", 100, dqdrtic_f, dqdrtic_g, _const(3.0), 0.0),
    _Entry("Extended Rosenbrock", 50, ext_rosen_f, ext_rosen_g,
           lambda n: _alternating(n, -1.2, 1.0), 0.0, even=True),
    _Entry("Extended Beale", 100, ext_beale_f, ext_beale_g,
           lambda n: _alternating(n, 1.0, 0.8), 0.0, even=True),
    _Entry("Extended Himmelblau", 100, ext_himmelblau_f, ext_himmelblau_g, _const(1.0), 0.0,
           even=True),
    _Entry("Generalized Rosenbrock", 10, gen_rosen_f, gen_rosen_g,
           lambda n: _alternating(n, -1.2, 1.0), 0.0),
    _Entry("LIARWHD", 100, liarwhd_f, liarwhd_g, _const(4.0), 0.0),
    _Entry("NONDIA", 100, nondia_f, nondia_g, _const(-1.0), 0.0),
    _Entry("POWER", 2000, power_f, power_g, _const(1.0), 0.0),
    # optional part of the table
    _Entry("BIGGSB1", 100, biggsb1_f, biggsb1_g, _const(0.0), 0.0),
    _Entry("CUBE", 2, white_holst_f, white_holst_g,
           lambda n: _alternating(n, -1.2, 1.0), 0.0, even=True),
    _Entry("Extended White Holst", 100, white_holst_f, white_holst_g,
           lambda n: _alternating(n, -1.2, 1.0), 0.0, even=True),
    _Entry("Extended Powell", 100, ext_powell_f, ext_powell_g,
           lambda n: np.resize([3.0, -1.0, 0.0, 1.0], n), 0.0),
    _Entry("Extended quadratic penalty QP2", 100, qp2_f, qp2_g, _const(1.0)),
    _Entry("Extended DENSCHNF", 100, denschnf_f, denschnf_g,
           lambda n: _alternating(n, 2.0, 0.0), 0.0, even=True),
    _Entry("FLETCHCR", 50, fletchcr_f, fletchcr_g, _const(0.0), 0.0),
    _Entry("HIMMELBG", 100, himmelbg_f, himmelbg_g, _const(1.5), 0.0, even=True),
    _Entry("MCCORMCK", 100, mccormck_f, mccormck_g, _const(1.0)),
    _Entry("NONSCOMP", 100, nonscomp_f, nonscomp_g, _const(3.0), 0.0),
    _Entry("Perturbed Quadratic", 100, pq_f, pq_g, _const(0.5), 0.0),
    _Entry("Perturbed QuadraticDiagonal", 100, pqd_f, pqd_g, _const(0.5), 0.0),
]

CORE_FUNCTIONS = tuple(e.name for e in _ENTRIES[:12])


def _key(name: str) -> str:
    return re.sub(r"[^a-z0-9]", "", name.lower())


_REGISTRY = {_key(e.name): e for e in _ENTRIES}


def available_functions() -> list[str]:
    return [e.name for e in _ENTRIES]


def registry_lookup(name: str, n: int | None = None) -> ObjectiveFunction:
    """Look up a test function by name (case, spaces and dashes ignored).

    ``n`` defaults to the dimension used in the benchmark table.
    """
    try:
        entry = _REGISTRY[_key(name)]
    except KeyError:
        raise UnknownFunctionError(
            f"unknown test function {name!r}; available: {', '.join(available_functions())}"
        ) from None
    n = entry.default_n if n is None else int(n)
    if n < 2 or (entry.even and n % 2):
        raise ValueError(f"{entry.name} needs an even dimension >= 2, got {n}")
    if entry.name == "Extended Powell" and n % 4:
        raise ValueError("Extended Powell needs a dimension divisible by 4")

    def value(x):
        return float(entry.value(np.asarray(x, dtype=np.float64)))

    def gradient(x):
        return entry.gradient(np.asarray(x, dtype=np.float64))

    return ObjectiveFunction(
        name=entry.name,
        dimension=n,
        value=value,
        gradient=gradient,
        suggested_start=entry.start(n),
        known_minimum_value=entry.minimum,
        batch_value=entry.value,
    )
