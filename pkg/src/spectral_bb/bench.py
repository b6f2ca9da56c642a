"""Benchmark suites, run records and log2 performance profiles."""

from __future__ import annotations

import csv
import io
import logging
import math
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Iterable, Optional

import numpy as np

from .problems import SpectrumSpec, build_problem
from .solver import SolverConfig, Status, solve_nonquadratic, solve_quadratic
from .stepsize import RuleConfig
from .testfunctions import UnknownFunctionError, available_functions, registry_lookup

log = logging.getLogger(__name__)

SUITE_KINDS = ("quad", "bvp", "rosenbrock", "nonquad")
RECORD_COLUMNS = ("problem_id", "rule", "eps", "seed", "iters", "fevals", "grad_ratio",
                  "status", "ms")
PROFILE_COLUMNS = ("rule", "omega", "rho")


class ConfigError(ValueError):
    """Suite or command-line configuration is invalid."""


@dataclass(frozen=True)
class RunRecord:
    problem_id: str
    rule_name: str
    epsilon: float
    seed: int
    iterations: int
    fevals: int
    grad_ratio_final: float
    status: str
    wall_time_ms: float = 0.0

    @property
    def solved(self) -> bool:
        return self.status == Status.CONVERGED.value

    def cost(self, metric: str) -> float:
        if not self.solved:
            return math.inf
        return float(self.iterations if metric == "iterations" else self.fevals)

    def key(self):
        return (self.problem_id, self.rule_name, self.seed, self.epsilon)


@dataclass
class SuiteSpec:
    kind: str
    rules: list
    tolerances: list
    reps: int = 1
    n: list = field(default_factory=lambda: [100])
    kappa: list = field(default_factory=lambda: [1e4])
    dists: list = field(default_factory=lambda: [1])
    c: list = field(default_factory=lambda: [100.0])
    functions: Optional[list] = None
    max_iter: int = 20000
    max_feval: int = 100_000

    def validate(self) -> list[RuleConfig]:
        if self.kind not in SUITE_KINDS:
            raise ConfigError(f"unknown suite kind {self.kind!r}; choose from {SUITE_KINDS}")
        if not self.rules:
            raise ConfigError("no rules given")
        if not self.tolerances or any(not e > 0 for e in self.tolerances):
            raise ConfigError("tolerances must be positive")
        if self.reps < 1:
            raise ConfigError("reps must be >= 1")
        defaults = {"cycle": 8} if self.kind == "bvp" else {}
        try:
            rules = [r if isinstance(r, RuleConfig) else RuleConfig.parse(r, **defaults)
                     for r in self.rules]
        except ValueError as exc:
            raise ConfigError(str(exc)) from None
        if self.kind == "quad":
            try:
                for d in self.dists:
                    for kappa in self.kappa:
                        for n in self.n:
                            SpectrumSpec(int(d), float(kappa), int(n))
            except ValueError as exc:
                raise ConfigError(str(exc)) from None
        if self.kind == "nonquad":
            for name in self.functions or []:
                try:
                    registry_lookup(name)
                except UnknownFunctionError as exc:
                    raise ConfigError(exc.args[0]) from None
        return rules


def instance_seed(master_seed: int, rep: int, *cell: int) -> int:
    """32-bit seed for one problem instance, fixed by (master seed, rep, cell)."""
    ss = np.random.SeedSequence([int(master_seed), int(rep), *(int(c) for c in cell)])
    return int(ss.generate_state(1)[0])


def problem_specs(suite: SuiteSpec, master_seed: int) -> list[tuple[str, dict]]:
    """(problem_id, problem spec) for every instance in the suite."""
    out = []
    if suite.kind == "quad":
        for d in suite.dists:
            for kappa in suite.kappa:
                for n in suite.n:
                    for rep in range(suite.reps):
                        seed = instance_seed(master_seed, rep, d, n, round(math.log10(kappa) * 1000))
                        spec = {"kind": "random_quadratic", "n": int(n), "kappa": float(kappa),
                                "distribution_id": int(d), "seed": seed}
                        out.append((f"quad-d{d}-n{n}-k{kappa:g}-r{rep}", spec))
    elif suite.kind == "bvp":
        for n in suite.n:
            for rep in range(suite.reps):
                seed = instance_seed(master_seed, rep, n)
                out.append((f"bvp-n{n}-r{rep}", {"kind": "bvp", "n": int(n), "seed": seed}))
    elif suite.kind == "rosenbrock":
        for c in suite.c:
            out.append((f"rosenbrock-c{c:g}", {"kind": "rosenbrock", "c": float(c), "seed": 0}))
    else:
        for name in suite.functions or available_functions():
            f = registry_lookup(name)
            out.append((f.name, {"kind": "function", "name": f.name, "seed": 0}))
    return out


def _run_one(args) -> RunRecord:
    pid, spec, rule, eps, max_iter, max_feval = args
    problem = build_problem(spec)
    cfg = SolverConfig(epsilon=eps, max_iter=max_iter, max_feval=max_feval, record=False)
    t0 = time.perf_counter()
    if spec["kind"] in ("random_quadratic", "bvp"):
        tr = solve_quadratic(problem, rule, cfg)
    elif spec["kind"] == "rosenbrock":
        tr = solve_nonquadratic(problem, rule, cfg, target_point=problem.known_minimizer)
    else:
        tr = solve_nonquadratic(problem, rule, cfg)
    ms = (time.perf_counter() - t0) * 1e3
    return RunRecord(pid, rule.label(), float(eps), int(spec.get("seed", 0)), tr.iterations,
                     tr.fevals, tr.grad_ratio, str(tr.status), ms)


def run_suite(suite: SuiteSpec, master_seed: int = 0, jobs: int = 1) -> list[RunRecord]:
    """Run every (instance, rule, tolerance) cell; records sorted canonically.

    Configuration errors are raised before any run starts.
    """
    rules = suite.validate()
    tasks = [
        (pid, spec, rule, eps, suite.max_iter, suite.max_feval)
        for pid, spec in problem_specs(suite, master_seed)
        for rule in rules
        for eps in suite.tolerances
    ]
    log.info("running %d cells", len(tasks))
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as ex:
            records = list(ex.map(_run_one, tasks, chunksize=max(1, len(tasks) // (4 * jobs))))
    else:
        records = [_run_one(t) for t in tasks]
    return sorted(records, key=RunRecord.key)


# ---- CSV -------------------------------------------------------------------


def _g(v: float) -> str:
    return f"{v:.17g}"


def write_records(records: Iterable[RunRecord], fh=None) -> str:
    out = fh if fh is not None else io.StringIO()
    w = csv.writer(out, lineterminator="\n")
    w.writerow(RECORD_COLUMNS)
    for r in records:
        w.writerow([r.problem_id, r.rule_name, _g(r.epsilon), r.seed, r.iterations, r.fevals,
                    _g(r.grad_ratio_final), r.status, f"{r.wall_time_ms:.3f}"])
    return out.getvalue() if fh is None else ""


def read_records(fh) -> list[RunRecord]:
    reader = csv.DictReader(fh)
    missing = set(RECORD_COLUMNS) - set(reader.fieldnames or ())
    if missing:
        raise ConfigError(f"records CSV lacks columns {sorted(missing)}")
    return [
        RunRecord(row["problem_id"], row["rule"], float(row["eps"]), int(row["seed"]),
                  int(row["iters"]), int(row["fevals"]), float(row["grad_ratio"]),
                  row["status"], float(row["ms"] or 0.0))
        for row in reader
    ]


# ---- performance profiles --------------------------------------------------


@dataclass
class ProfileCurve:
    rule_name: str
    points: list  # (omega, rho), omega = log2(performance ratio)

    def rho(self, omega: float) -> float:
        val = 0.0
        for w, r in self.points:
            if w <= omega:
                val = r
            else:
                break
        return val

    @property
    def rho_inf(self) -> float:
        return self.points[-1][1] if self.points else 0.0


def performance_profile(records: Iterable[RunRecord], metric: str = "iterations") -> list[ProfileCurve]:
    """Dolan-More profiles on a log2 axis.

    A cell is one (problem_id, epsilon, seed). Per cell the ratio is
    ``cost / min cost``; failures and missing runs get an infinite ratio. Ties
    at the minimum count as wins for every tied rule.
    """
    if metric not in ("iterations", "fevals"):
        raise ValueError("metric must be 'iterations' or 'fevals'")
    records = list(records)
    if not records:
        raise ValueError("no records to profile")
    rules = sorted({r.rule_name for r in records})
    cells: dict = {}
    for r in records:
        cells.setdefault((r.problem_id, r.epsilon, r.seed), {})[r.rule_name] = r.cost(metric)
    logs = {rule: [] for rule in rules}
    for key in sorted(cells):
        costs = cells[key]
        best = min(costs.values())
        if not math.isfinite(best):
            log.warning("cell %s solved by no rule", key)
        for rule in rules:
            c = costs.get(rule, math.inf)
            logs[rule].append(math.log2(c / best) if math.isfinite(c) else math.inf)
    ncell = len(cells)
    breaks = sorted({0.0, *(v for vals in logs.values() for v in vals if math.isfinite(v))})
    curves = []
    for rule in rules:
        vals = np.sort(np.array(logs[rule]))
        pts = [(w, float(np.searchsorted(vals, w, side="right")) / ncell) for w in breaks]
        curves.append(ProfileCurve(rule, pts))
    return curves


def write_profile(curves: Iterable[ProfileCurve], fh=None) -> str:
    out = fh if fh is not None else io.StringIO()
    w = csv.writer(out, lineterminator="\n")
    w.writerow(PROFILE_COLUMNS)
    for c in curves:
        for omega, rho in c.points:
            w.writerow([c.rule_name, _g(omega), _g(rho)])
    return out.getvalue() if fh is None else ""


def default_metric(records: Iterable[RunRecord]) -> str:
    """``iterations`` when every record is a quadratic run, ``fevals`` otherwise."""
    quad = all(r.problem_id.startswith(("quad-", "bvp-")) for r in records)
    return "iterations" if quad else "fevals"
