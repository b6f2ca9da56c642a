"""Acceptance criteria 1-10, one test each, at their stated tolerances and time limits."""

import math
import time

import numpy as np

from spectral_bb.analysis import (
    AdaptiveM,
    EpsState,
    abb_phi,
    abb_phi_scale,
    abb_condition,
    abb_threshold_roots,
    bb1_eps,
    bb2_eps,
    e_factor_denominator,
    eps_from_gradients,
    simulate_dynamics,
    step_dynamics,
)
from spectral_bb.bench import RunRecord, performance_profile
from spectral_bb.numerics import HouseholderChain, make_rng
from spectral_bb.problems import (
    QuadraticProblem,
    SpectrumSpec,
    check_gradient,
    make_random_quadratic,
    rosenbrock,
)
from spectral_bb.solver import SolverConfig, Status, solve_nonquadratic, solve_quadratic
from spectral_bb.stepsize import StepPair, bb1, bb2, pbb
from spectral_bb.testfunctions import CORE_FUNCTIONS, registry_lookup


def _log_uniform(rng, lo, hi, size):
    return np.exp(rng.uniform(math.log(lo), math.log(hi), size))


def test_interpolation_identities(criterion):
    rng = make_rng(2024, 1)
    t0 = time.perf_counter()
    grid = np.linspace(0.0, 1.0, 100)
    worst_mid, worst_bracket, monotone_breaks, exact_bb1 = 0.0, 0.0, 0, 0
    for _ in range(1000):
        n = int(rng.integers(2, 8))
        s = rng.standard_normal(n) * _log_uniform(rng, 1e-3, 1e3, 1)
        y = rng.standard_normal(n) * _log_uniform(rng, 1e-3, 1e3, 1)
        if s @ y < 0:
            y = -y
        p = StepPair.from_vectors(s, y)
        a1, a2 = bb1(p), bb2(p)
        exact_bb1 += pbb(p, 1.0) == a1
        worst_mid = max(worst_mid, abs(pbb(p, 0.5) - math.sqrt(a1 * a2)) / a2)
        vals = np.array([pbb(p, m) for m in grid])
        monotone_breaks += int(np.sum(np.diff(vals) > 0))
        worst_bracket = max(worst_bracket, (a1 - vals.min()) / a1, (vals.max() - a2) / a2)
    dt = time.perf_counter() - t0
    ok = (exact_bb1 == 1000 and worst_mid <= 1e-12 and monotone_breaks == 0
          and worst_bracket <= 0.0 and dt < 1.0)
    criterion(1, ok, f"pbb(1)==bb1 {exact_bb1}/1000, max |pbb(.5)-gm|/bb2={worst_mid:.1e}, "
                     f"monotone violations={monotone_breaks}, bracket excess={worst_bracket:.1e}, "
                     f"{dt:.2f}s")
    assert ok


def test_bb1_dynamics_oracle(criterion):
    rng = make_rng(2024, 2)
    t0 = time.perf_counter()
    a = _log_uniform(rng, 1e-4, 1e4, 10_000)
    b = _log_uniform(rng, 1e-4, 1e4, 10_000)
    lam = 1.0 + _log_uniform(rng, 1e-3, 1e6, 10_000)
    worst = max(abs(step_dynamics(x, y, l, 1.0) - y / x**2) / (y / x**2)
                for x, y, l in zip(a, b, lam))
    dt = time.perf_counter() - t0
    ok = worst <= 1e-12 and dt < 1.0
    criterion(2, ok, f"max rel err {worst:.1e} over 10^4 triples, {dt:.2f}s")
    assert ok


def test_denominator_lower_bound(criterion):
    rng = make_rng(2024, 3)
    t0 = time.perf_counter()
    eps = _log_uniform(rng, 1e-8, 1e8, 10_000)
    lam = 1.0 + _log_uniform(rng, 1e-3, 1e8, 10_000)
    m = rng.uniform(0.0, 1.0, 10_000)
    m[:10] = 1.0
    violations = sum(e_factor_denominator(e, l, mm) < 2.0 * mm * (l - 1.0) * e
                     for e, l, mm in zip(eps, lam, m))
    dt = time.perf_counter() - t0
    ok = violations == 0 and dt < 1.0
    criterion(3, ok, f"{violations} violations over 10^4 samples, {dt:.2f}s")
    assert ok


def test_empirical_dip_below_one(criterion):
    rng = make_rng(2024, 4)
    starts = rng.uniform(1.0, 100.0, size=(1000, 2))
    starts[starts == 1.0] = np.nextafter(1.0, 2.0)
    t0 = time.perf_counter()
    failures, worst = [], 0
    for lam in (10.0, 1e2, 1e3):
        for pol in (0.25, 0.5, 0.75, 1.0, AdaptiveM(8)):
            for e0, e1 in starts:
                res = simulate_dynamics(EpsState(e0, e1, lam, pol), steps=50)
                if res.first_le_one is None:
                    failures.append((lam, str(pol), e0, e1))
                else:
                    worst = max(worst, res.first_le_one)
    dt = time.perf_counter() - t0
    ok = not failures and dt < 5.0
    criterion(4, ok, f"{15000 - len(failures)}/15000 orbits reach eps<=1, "
                     f"latest first index {worst}, {dt:.2f}s")
    assert ok


def test_abb_threshold_algebra(criterion):
    t0 = time.perf_counter()
    worst_phi, worst_prod, cases = 0.0, 0.0, 0
    for lam in np.geomspace(1.5, 1e8, 40):
        for eta in np.linspace(0.02, 0.98, 49):
            if not abb_condition(lam, eta):
                continue
            r = abb_threshold_roots(lam, eta)
            for e in (r.eps1, r.eps2):
                worst_phi = max(worst_phi, abs(abb_phi(e, lam, eta)) / abb_phi_scale(e, lam, eta))
            worst_prod = max(worst_prod, abs(r.eps1 * r.eps2 * lam * lam - 1.0))
            cases += 1
    lam, eta = 1e6, 0.4
    r = abb_threshold_roots(lam, eta)
    checks = {
        "eps1": (r.eps1, (1 - eta) / (eta * lam**2)),
        "eps2": (r.eps2, eta / (1 - eta)),
        "bb1@eps2": (bb1_eps(r.eps2, lam), eta * (lam - 1) + 1),
        "bb2@eps2": (bb2_eps(r.eps2, lam), lam),
        "bb1@eps1": (bb1_eps(r.eps1, lam), 1.0),
        "bb2@eps1": (bb2_eps(r.eps1, lam), 1 / eta),
    }
    worst_lim = max(abs(v - ref) / abs(ref) for v, ref in checks.values())
    dt = time.perf_counter() - t0
    ok = worst_phi <= 1e-8 and worst_prod <= 1e-10 and worst_lim <= 0.01 and dt < 1.0
    criterion(5, ok, f"{cases} (lam, eta) cases: max rel Phi={worst_phi:.1e}, "
                     f"max |eps1 eps2 lam^2 - 1|={worst_prod:.1e}; "
                     f"lam=1e6 eta=0.4 max limit dev={worst_lim:.1e}, {dt:.2f}s")
    assert ok


def _solver_vs_dynamics(lam, m, xstar):
    prob = QuadraticProblem("diag", HouseholderChain(np.array([lam, 1.0])), xstar, np.zeros(2))
    grads = []
    solve_quadratic(prob, f"pbb:m={m}", SolverConfig(epsilon=1e-300, max_iter=60),
                    callback=lambda k, x, g: grads.append(g.copy()))
    n = next((i for i, g in enumerate(grads) if np.any(np.abs(g) <= 1e-12)), len(grads))
    if n < 3:
        return 0.0, n
    eps = eps_from_gradients(grads[:n])
    res = simulate_dynamics(EpsState(eps[0], eps[1], lam, m), steps=n - 2)
    sim = np.array(res.eps)
    k = min(len(sim), n - 1)
    return float(np.max(np.abs(sim[:k] - eps[1:1 + k]) / eps[1:1 + k])), n


def test_solver_theory_consistency(criterion):
    rng = make_rng(2024, 6)
    t0 = time.perf_counter()
    results = []
    for lam in (10.0, 1e3):
        for m in (0.25, 0.5, 0.75, 1.0):
            for _ in range(10):
                xstar = rng.uniform(-10.0, 10.0, 2)
                err, n = _solver_vs_dynamics(lam, m, xstar)
                results.append((err, lam, m, n))
    dt = time.perf_counter() - t0
    worst = max(results)
    passing = sum(err <= 1e-8 for err, *_ in results)
    ok = passing == len(results) and dt < 1.0
    criterion(6, ok, f"{passing}/{len(results)} runs within 1e-8; worst rel err {worst[0]:.1e} "
                     f"(lam={worst[1]:g}, m={worst[2]}); {dt:.2f}s")
    assert ok


def test_quadratic_convergence(criterion):
    t0 = time.perf_counter()
    spec = SpectrumSpec(1, 1e4, 100)
    rules = ("pbb", "bb1", "bb2", "abb")
    solved = {r: 0 for r in rules}
    iters = {r: [] for r in rules}
    for seed in range(10):
        prob = make_random_quadratic(spec, make_rng(seed))
        for rule in rules:
            tr = solve_quadratic(prob, rule, SolverConfig(epsilon=1e-6, max_iter=20000, q=8,
                                                          record=False))
            solved[rule] += tr.status is Status.CONVERGED
            iters[rule].append(tr.iterations)
    dt = time.perf_counter() - t0
    ok = all(v == 10 for v in solved.values()) and dt < 30.0
    summary = ", ".join(f"{r} {solved[r]}/10 (median {int(np.median(iters[r]))} it)" for r in rules)
    criterion(7, ok, f"{summary}, {dt:.2f}s")
    assert ok


def test_rosenbrock_table(criterion):
    t0 = time.perf_counter()
    ref = {"pbb": (67, 73, 79, 85), "bb1": (92, 100, 107, 115)}
    f = rosenbrock(100.0)
    got, ok = {}, True
    for rule, expected in ref.items():
        got[rule] = []
        for eps, want in zip((1e-1, 1e-2, 1e-4, 1e-8), expected):
            tr = solve_nonquadratic(f, rule, SolverConfig(epsilon=eps, record=False),
                                    target_point=np.ones(2))
            got[rule].append(tr.fevals)
            ok &= tr.converged and abs(tr.fevals - want) <= 0.25 * want
    dt = time.perf_counter() - t0
    ok &= dt < 1.0
    criterion(8, ok, f"fevals pbb {got['pbb']} vs {ref['pbb']}, "
                     f"bb1 {got['bb1']} vs {ref['bb1']}, {dt:.2f}s")
    assert ok


def test_core_gradients(criterion):
    rng = make_rng(2024, 9)
    t0 = time.perf_counter()
    worst, bad = 0.0, []
    for name in CORE_FUNCTIONS:
        f = registry_lookup(name)
        x0 = f.suggested_start
        points = [x0] + [x0 + 0.1 * np.maximum(1.0, np.abs(x0)) * rng.standard_normal(x0.shape)
                         for _ in range(5)]
        for x in points:
            err = check_gradient(f, x)
            worst = max(worst, err)
            if err > 1e-6:
                bad.append(name)
    dt = time.perf_counter() - t0
    ok = not bad and dt < 5.0
    criterion(9, ok, f"{len(CORE_FUNCTIONS)} functions x 6 points, max err {worst:.1e}, "
                     f"failures {sorted(set(bad))}, {dt:.2f}s")
    assert ok


def test_profile_sanity(criterion):
    rng = make_rng(2024, 10)
    t0 = time.perf_counter()
    records = []
    for p in range(60):
        base = int(rng.integers(10, 500))
        records.append(RunRecord(f"p{p}", "best", 1e-6, 0, base, base, 1e-7, "Converged"))
        for rule in ("r1", "r2", "r3"):
            cost = base + int(rng.integers(1, 3 * base))
            status = "Converged" if rng.random() > 0.2 else "MaxIter"
            records.append(RunRecord(f"p{p}", rule, 1e-6, 0, cost, cost, 1e-7, status))
    curves = {c.rule_name: c for c in performance_profile(records, "iterations")}
    omegas = sorted({w for c in curves.values() for w, _ in c.points})
    dominates = all(curves["best"].rho(w) >= c.rho(w) for c in curves.values() for w in omegas)
    monotone = all(all(a <= b for a, b in zip(r, r[1:]))
                   for r in ([rho for _, rho in c.points] for c in curves.values()))
    dt = time.perf_counter() - t0
    ok = curves["best"].rho(0.0) == 1.0 and dominates and monotone and dt < 1.0
    criterion(10, ok, f"dominant rho(0)={curves['best'].rho(0.0)}, weakly dominates={dominates}, "
                      f"nondecreasing={monotone}, {dt:.2f}s")
    assert ok
