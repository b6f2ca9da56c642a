import io
import math
from dataclasses import replace

import pytest
from hypothesis import given
from hypothesis import strategies as st

from spectral_bb.bench import (
    ConfigError,
    RunRecord,
    SuiteSpec,
    default_metric,
    performance_profile,
    problem_specs,
    read_records,
    run_suite,
    write_profile,
    write_records,
)


def rec(pid, rule, iters, status="Converged", eps=1e-6, seed=0):
    return RunRecord(pid, rule, eps, seed, iters, iters + 1, 1e-7, status, 1.0)


def small_quad(**kw):
    base = dict(kind="quad", rules=["pbb", "bb1"], tolerances=[1e-6], n=[30], kappa=[1e2])
    base.update(kw)
    return SuiteSpec(**base)


def test_suite_cardinality():
    assert len(run_suite(small_quad())) == 2
    big = SuiteSpec("quad", ["bb1", "bb2", "abb", "atc", "tbb", "pbb"], [1e-6], reps=10,
                    n=[100], kappa=[1e3, 1e4], dists=list(range(1, 8)))
    assert len(problem_specs(big, 0)) * 6 == 840


def test_suite_is_deterministic_and_sorted():
    suite = small_quad(reps=3, rules=["pbb", "bb2", "abb"], tolerances=[1e-3, 1e-6])
    a = [replace(r, wall_time_ms=0) for r in run_suite(suite, 11)]
    b = [replace(r, wall_time_ms=0) for r in run_suite(suite, 11, jobs=2)]
    assert a == b
    assert a == sorted(a, key=RunRecord.key)
    c = [replace(r, wall_time_ms=0) for r in run_suite(suite, 12)]
    assert a != c


def test_converged_records_meet_tolerance():
    recs = run_suite(small_quad(reps=2, tolerances=[1e-4, 1e-8]), 3)
    recs += run_suite(SuiteSpec("bvp", ["pbb", "atc"], [1e-6], n=[50]), 3)
    recs += run_suite(SuiteSpec("nonquad", ["pbb"], [1e-5], functions=["DQDRTIC"]), 3)
    for r in recs:
        if r.solved:
            assert r.grad_ratio_final <= r.epsilon


@pytest.mark.parametrize(
    "suite",
    [
        small_quad(rules=["pbb", "nope"]),
        small_quad(rules=[]),
        small_quad(dists=[9]),
        small_quad(tolerances=[0.0]),
        SuiteSpec("nonquad", ["pbb"], [1e-6], functions=["Missing"]),
        SuiteSpec("cubic", ["pbb"], [1e-6]),
    ],
)
def test_config_errors_before_running(suite, monkeypatch):
    import spectral_bb.bench as bench

    monkeypatch.setattr(bench, "_run_one", lambda *a: pytest.fail("ran despite bad config"))
    with pytest.raises(ConfigError):
        run_suite(suite)


def test_failed_runs_are_recorded():
    recs = run_suite(small_quad(kappa=[1e6], n=[100], max_iter=3))
    assert all(r.status == "MaxIter" and not r.solved for r in recs)
    assert all(math.isinf(r.cost("iterations")) for r in recs)


def test_bvp_suite_defaults_atc_cycle_to_eight():
    from spectral_bb.stepsize import RuleConfig

    rules = SuiteSpec("bvp", ["atc"], [1e-6]).validate()
    assert rules[0].cycle == 8
    assert small_quad(rules=["atc"]).validate()[0].cycle == 4
    assert SuiteSpec("bvp", ["atc:cycle=3"], [1e-6]).validate()[0] == RuleConfig("atc", cycle=3)


def test_records_csv_round_trip():
    recs = run_suite(small_quad(), 0)
    text = write_records(recs)
    assert text.splitlines()[0] == "problem_id,rule,eps,seed,iters,fevals,grad_ratio,status,ms"
    back = read_records(io.StringIO(text))
    for a, b in zip(recs, back):
        assert replace(a, wall_time_ms=0) == replace(b, wall_time_ms=0)
    with pytest.raises(ConfigError):
        read_records(io.StringIO("a,b\n1,2\n"))


def test_profile_two_rule_example():
    curves = {c.rule_name: c for c in performance_profile([rec("p", "a", 10), rec("p", "b", 20)])}
    assert curves["a"].rho(0) == 1.0
    assert curves["b"].rho(0) == 0.0
    assert curves["b"].rho(1.0) == 1.0
    assert [w for w, _ in curves["b"].points] == [0.0, 1.0]


def test_profile_ties_and_failures():
    recs = [rec("p", "a", 5), rec("p", "b", 5), rec("q", "a", 3), rec("q", "b", 9, "MaxIter")]
    curves = {c.rule_name: c for c in performance_profile(recs)}
    assert curves["a"].rho(0) == 1.0 and curves["b"].rho(0) == 0.5
    assert curves["b"].rho_inf == 0.5


def test_profile_missing_run_counts_as_failure():
    curves = {c.rule_name: c for c in performance_profile([rec("p", "a", 5), rec("q", "b", 5)])}
    assert curves["a"].rho_inf == 0.5


def test_profile_rejects_empty_and_bad_metric():
    with pytest.raises(ValueError):
        performance_profile([])
    with pytest.raises(ValueError):
        performance_profile([rec("p", "a", 1)], metric="time")


@given(st.lists(st.tuples(st.integers(0, 5), st.sampled_from("abc"), st.integers(1, 50),
                          st.booleans()), min_size=1, max_size=40))
def test_profile_curves_are_monotone_cdfs(rows):
    recs = {}
    for p, r, cost, ok in rows:
        recs[(p, r)] = rec(f"p{p}", r, cost, "Converged" if ok else "MaxIter")
    curves = performance_profile(recs.values())
    for c in curves:
        rhos = [r for _, r in c.points]
        omegas = [w for w, _ in c.points]
        assert omegas == sorted(omegas) and omegas[0] == 0.0
        assert all(0.0 <= r <= 1.0 for r in rhos)
        assert all(x <= y for x, y in zip(rhos, rhos[1:]))


def test_profile_csv_is_idempotent():
    recs = [rec("p", "a", 10), rec("p", "b", 20), rec("q", "a", 7), rec("q", "b", 7)]
    assert write_profile(performance_profile(recs)) == write_profile(performance_profile(recs))
    assert write_profile(performance_profile(recs)).splitlines()[0] == "rule,omega,rho"


def test_default_metric():
    assert default_metric([rec("quad-d1-n100-k1e4-r0", "a", 1)]) == "iterations"
    assert default_metric([rec("rosenbrock-c100", "a", 1)]) == "fevals"
