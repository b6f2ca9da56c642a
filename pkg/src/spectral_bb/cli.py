"""Command-line front end: ``spectral-bb <subcommand> [flags]``.

Every subcommand writes CSV to ``--out`` (a file path). Without ``--out`` the
CSV goes to ``$SPECTRAL_BB_OUT/<subcommand>.csv`` when that variable names a
directory, else to stdout. Flags may also come from ``--config FILE``: plain
``key = value`` lines using the long flag names; explicit flags win.

Exit codes: 0 success, 2 configuration error, 1 runtime failure.
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys
from pathlib import Path

from . import analysis, bench
from .stepsize import RuleConfig

OUT_ENV = "SPECTRAL_BB_OUT"
log = logging.getLogger("spectral_bb")


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise bench.ConfigError(f"{self.prog}: error: {message}")


def _floats(text: str) -> list[float]:
    return [float(t) for t in text.replace(",", " ").split()]


def _ints(text: str) -> list[int]:
    return [int(float(t)) for t in text.replace(",", " ").split()]


def _names(text: str) -> list[str]:
    return [t for t in text.replace(",", " ").split() if t]


def _common(p: argparse.ArgumentParser, rules: bool = True) -> None:
    p.add_argument("--out", help="output CSV path")
    p.add_argument("--config", help="key = value file with default flag values")
    if rules:
        p.add_argument("--rules", type=_names, required=True,
                       help="comma-separated rules, e.g. pbb,bb1,abb:eta=0.4,pbb:m=0.5")
        p.add_argument("--eps", type=_floats, default=[1e-6], help="tolerance list")
        p.add_argument("--jobs", type=int, default=1, help="parallel worker processes")
        p.add_argument("--max-iter", type=int, default=20000)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="spectral-bb", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("quad", help="random quadratic suite")
    _common(p)
    p.add_argument("--n", type=_ints, default=[100])
    p.add_argument("--kappa", type=_floats, default=[1e4])
    p.add_argument("--dist", type=_ints, default=[1])
    p.add_argument("--reps", type=int, default=10)
    p.add_argument("--seed", type=int, default=0)

    p = sub.add_parser("bvp", help="two-point boundary value problem suite")
    _common(p)
    p.add_argument("--n", type=_ints, default=[1000])
    p.add_argument("--reps", type=int, default=1)
    p.add_argument("--seed", type=int, default=0)

    p = sub.add_parser("rosenbrock", help="2-D Rosenbrock runs stopped near (1, 1)")
    _common(p)
    p.add_argument("--c", type=_floats, default=[100.0])

    p = sub.add_parser("nonquad", help="nonquadratic test-function suite")
    _common(p)
    p.add_argument("--functions", type=_names, default=None,
                   help="comma-separated names (default: the core set)")

    p = sub.add_parser("dynamics", help="simulate the 2-D eps recurrence")
    _common(p, rules=False)
    p.add_argument("--lambda", dest="lam", type=float, required=True)
    g = p.add_mutually_exclusive_group(required=True)
    g.add_argument("--m", type=float)
    g.add_argument("--adaptive", action="store_true")
    p.add_argument("--q", type=int, default=8)
    p.add_argument("--eps0", type=float, required=True)
    p.add_argument("--eps1", type=float, required=True)
    p.add_argument("--steps", type=int, default=analysis.DEFAULT_HORIZON)

    p = sub.add_parser("profile", help="performance profile from a records CSV")
    _common(p, rules=False)
    p.add_argument("--input", required=True)
    p.add_argument("--metric", choices=("iterations", "fevals"), default=None,
                   help="default: iterations for quadratic records, fevals otherwise")
    return parser


def read_config(path: str) -> list[str]:
    """Turn ``key = value`` lines into argv tokens (``#`` starts a comment)."""
    argv = []
    for lineno, line in enumerate(Path(path).read_text().splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        key, sep, val = line.partition("=")
        if not sep:
            raise bench.ConfigError(f"{path}:{lineno}: expected key = value")
        key = key.strip().replace("_", "-")
        val = val.strip()
        if val.lower() in ("true", "yes", "on"):
            argv.append(f"--{key}")
        elif val.lower() not in ("false", "no", "off"):
            argv += [f"--{key}", val]
    return argv


def _parse(argv: list[str]) -> argparse.Namespace:
    parser = build_parser()
    # config values go in front of the explicit flags so the latter win
    if "--config" in argv:
        i = argv.index("--config")
        if i + 1 >= len(argv):
            parser.error("--config needs a path")
        cmd_at = next((j for j, a in enumerate(argv) if not a.startswith("-")), None)
        if cmd_at is None:
            parser.error("missing subcommand")
        argv = argv[: cmd_at + 1] + read_config(argv[i + 1]) + argv[cmd_at + 1:]
    return parser.parse_args(argv)


def _open_out(args):
    if args.out:
        return open(args.out, "w", newline="")
    out_dir = os.environ.get(OUT_ENV)
    if out_dir:
        d = Path(out_dir)
        d.mkdir(parents=True, exist_ok=True)
        return open(d / f"{args.command}.csv", "w", newline="")
    return None


def _suite(args) -> bench.SuiteSpec:
    kw = dict(kind=args.command, rules=args.rules, tolerances=args.eps,
              max_iter=args.max_iter)
    if args.command == "quad":
        kw.update(n=args.n, kappa=args.kappa, dists=args.dist, reps=args.reps)
    elif args.command == "bvp":
        kw.update(n=args.n, reps=args.reps)
    elif args.command == "rosenbrock":
        kw.update(c=args.c)
    else:
        kw.update(functions=args.functions)
    return bench.SuiteSpec(**kw)


def _metadata(suite: bench.SuiteSpec, rules: list[RuleConfig], seed: int) -> dict:
    return {
        "kind": suite.kind,
        "master_seed": seed,
        "tolerances": suite.tolerances,
        "rules": [r.as_dict() for r in rules],
    }


def run(argv: list[str]) -> int:
    args = _parse(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")

    if args.command == "dynamics":
        policy = analysis.AdaptiveM(args.q) if args.adaptive else args.m
        try:
            state = analysis.EpsState(args.eps0, args.eps1, args.lam, policy)
        except ValueError as exc:
            raise bench.ConfigError(str(exc)) from None
        text = analysis.dynamics_csv(analysis.simulate_dynamics(state, args.steps))
    elif args.command == "profile":
        try:
            with open(args.input, newline="") as fh:
                records = bench.read_records(fh)
        except OSError as exc:
            raise bench.ConfigError(str(exc)) from None
        if not records:
            raise bench.ConfigError(f"{args.input}: no records")
        metric = args.metric or bench.default_metric(records)
        text = bench.write_profile(bench.performance_profile(records, metric))
    else:
        suite = _suite(args)
        rules = suite.validate()
        seed = getattr(args, "seed", 0)
        records = bench.run_suite(suite, seed, jobs=args.jobs)
        text = bench.write_records(records)
        if args.out:
            meta = Path(args.out).with_suffix(".meta.json")
            meta.write_text(json.dumps(_metadata(suite, rules, seed), indent=2) + "\n")

    fh = _open_out(args)
    if fh is None:
        sys.stdout.write(text)
    else:
        with fh:
            fh.write(text)
    return 0


def main(argv=None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    try:
        return run(argv)
    except SystemExit as exc:  # --help
        return int(exc.code or 0)
    except bench.ConfigError as exc:
        print(exc, file=sys.stderr)
        return 2
    except Exception as exc:  # noqa: BLE001 - report any runtime failure as exit 1
        print(f"spectral-bb: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
