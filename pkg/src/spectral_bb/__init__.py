"""Parameterized Barzilai-Borwein spectral gradient methods and benchmarks."""

from .analysis import AdaptiveM, EpsState, e_factor, simulate_dynamics, step_dynamics
from .bench import ConfigError, RunRecord, SuiteSpec, performance_profile, run_suite
from .problems import (
    QuadraticProblem,
    SpectrumSpec,
    check_gradient,
    make_bvp_quadratic,
    make_random_quadratic,
    rosenbrock,
)
from .solver import SolverConfig, Status, Trace, solve_nonquadratic, solve_quadratic
from .stepsize import RuleConfig, StepPair, StepRule, bb1, bb2, pbb
from .testfunctions import registry_lookup

__all__ = [
    "AdaptiveM", "EpsState", "e_factor", "simulate_dynamics", "step_dynamics",
    "ConfigError", "RunRecord", "SuiteSpec", "performance_profile", "run_suite",
    "QuadraticProblem", "SpectrumSpec", "check_gradient", "make_bvp_quadratic",
    "make_random_quadratic", "rosenbrock",
    "SolverConfig", "Status", "Trace", "solve_nonquadratic", "solve_quadratic",
    "RuleConfig", "StepPair", "StepRule", "bb1", "bb2", "pbb",
    "registry_lookup",
]
