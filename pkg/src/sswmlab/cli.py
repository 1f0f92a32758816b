"""Command-line front end: ``sswmlab {run,sweep,exact,drift,verify}``.

Every command echoes its fully resolved configuration as one JSON line on
stderr; saved to a file and passed back with ``--config`` it reproduces the
same output. Flags override config-file values.

Exit status: 0 success, 1 usage error, 2 verification failure, 3 runtime or
numerical error.
"""

from __future__ import annotations

import argparse
import contextlib
import csv
import json
import os
import sys
import warnings

import numpy as np

from .experiments import (
    BudgetError,
    SweepSpec,
    eval_expression,
    make_config,
    resolve_budget,
    run_trials,
    summarize,
    sweep,
    write_summary_json,
    write_trials_csv,
)
from .fitness import FITNESS_NAMES, ProblemError
from .markov import (
    NumericalError,
    StructuralError,
    build_chain,
    check_drift_bounds,
    check_negative_drift,
    drift_profile,
    expected_hitting_times,
    uniform_start_mean,
)
from .selection import ParameterDomainError
from .verify import SUITES, run_suites

EXIT_OK, EXIT_USAGE, EXIT_VERIFY, EXIT_RUNTIME = 0, 1, 2, 3

CHAIN_COLUMNS = ("state", "delta_plus", "delta_minus", "delta", "self_loop", "hitting_time")

_DEFAULTS = {
    "algo": "sswm",
    "fitness": "onemax",
    "n": None,
    "d": None,
    "mutation": "global",
    "beta": 1.0,
    "nbeta": "auto",
    "N": None,
    "trials": 100,
    "budget": "1000*n*ln(n)",
    "seed": None,
    "initial": None,
}


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def _add_problem_flags(p):
    p.add_argument("--config", help="JSON file with the same keys as the flags")
    p.add_argument("--algo", help="sswm or ea")
    p.add_argument("--fitness", help="onemax, cliff or balance")
    p.add_argument("--n", type=int, help="string length")
    p.add_argument("--d", type=int, help="cliff width")
    p.add_argument("--mutation", help="local or global")
    p.add_argument("--beta", help="selection strength (number or expression in n)")
    p.add_argument("--nbeta", help="N*beta (number, expression in n, or 'auto' = ln(11n)/2)")
    p.add_argument("--N", dest="N", help="population size (instead of --nbeta)")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="sswmlab", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("run", help="independent trials of one configuration")
    _add_problem_flags(p)
    p.add_argument("--trials", type=int)
    p.add_argument("--budget", help="generation budget (int or expression in n)")
    p.add_argument("--seed", type=int, help="master seed (default $EVOSIM_SEED or 0)")
    p.add_argument("--initial", help="forced initial bit string")
    p.add_argument("--workers", type=int)
    p.add_argument("--out", help="trial CSV path (default stdout)")
    p.add_argument("--summary", help="summary JSON path (default stderr)")

    p = sub.add_parser("sweep", help="parameter grid from a JSON config")
    p.add_argument("--config", required=True, help="JSON with 'grid', 'trials', 'budget', optional 'seed'")
    p.add_argument("--trials", type=int)
    p.add_argument("--budget")
    p.add_argument("--seed", type=int)
    p.add_argument("--workers", type=int)
    p.add_argument("--out", help="summary JSON path (default stdout)")

    for name, text in (("exact", "exact hitting times"), ("drift", "drift profile and drift-bound checks")):
        p = sub.add_parser(name, help=text)
        _add_problem_flags(p)
        p.add_argument("--out", help="table CSV path (default stdout)")
        if name == "drift":
            p.add_argument(
                "--negative", nargs=5, metavar=("A", "B", "EPS", "R", "DELTA"),
                help="also test negative-drift hypotheses on distance states A..B",
            )
            p.add_argument("--orientation", choices=("zeros", "ones"), default=None)
            p.add_argument("--report", help="report JSON path (default stderr)")

    p = sub.add_parser("verify", help="run property suites")
    p.add_argument("--suite", action="append", choices=("all", *SUITES), help="repeatable; default all")
    return parser


def _merged(args, keys) -> dict:
    cfg = {k: _DEFAULTS.get(k) for k in keys}
    if getattr(args, "config", None):
        try:
            with open(args.config, encoding="utf-8") as fh:
                loaded = json.load(fh)
        except (OSError, json.JSONDecodeError) as exc:
            raise UsageError(f"--config: cannot read {args.config}: {exc}") from exc
        if not isinstance(loaded, dict):
            raise UsageError("--config: expected a JSON object")
        loaded.pop("command", None)
        extra = set(loaded) - set(keys)
        if extra:
            raise UsageError(f"--config: unknown keys {sorted(extra)}")
        cfg.update(loaded)
    for k in keys:
        v = getattr(args, k, None)
        if v is not None:
            cfg[k] = v
    return cfg


def _num(v):
    # numbers stay numbers in the echoed config; expressions stay strings
    if isinstance(v, str):
        try:
            return float(v) if any(c in v for c in ".eE") else int(v)
        except ValueError:
            return v
    return v


def _config_from(c):
    if c["n"] is None:
        raise UsageError("--n is required")
    if c["algo"] not in ("sswm", "ea"):
        raise UsageError(f"--algo: unknown algorithm {c['algo']!r}")
    if c["fitness"] not in FITNESS_NAMES:
        raise UsageError(f"--fitness: unknown fitness {c['fitness']!r}; choose from {', '.join(FITNESS_NAMES)}")
    if c["mutation"] not in ("local", "global"):
        raise UsageError(f"--mutation: unknown mutation {c['mutation']!r}")
    if c["fitness"] == "cliff" and c["d"] is None:
        raise UsageError("--d is required for cliff")
    try:
        beta = eval_expression(_num(c["beta"]), c["n"])
    except BudgetError as exc:
        raise UsageError(f"--beta: {exc}") from exc
    if not beta > 0:
        raise UsageError(f"--beta: must be > 0, got {beta}")
    try:
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            return make_config(
                c["algo"], c["fitness"], c["n"], c["d"], c["mutation"],
                beta=_num(c["beta"]),
                nbeta=None if c["N"] is not None else _num(c["nbeta"]),
                N=_num(c["N"]),
            )
    except ProblemError as exc:
        flag = "--d" if "d=" in str(exc) else "--n"
        raise UsageError(f"{flag}: {exc}") from exc
    except ParameterDomainError as exc:
        flag = "--N/--nbeta" if "N " in str(exc) else "--beta"
        raise UsageError(f"{flag}: {exc}") from exc
    except BudgetError as exc:
        raise UsageError(f"--nbeta/--N: {exc}") from exc
    except (ValueError, TypeError) as exc:
        raise UsageError(f"--N/--nbeta: {exc}") from exc


def _echo(command, cfg):
    out = {"command": command, **cfg}
    print(json.dumps(out, sort_keys=True), file=sys.stderr)


@contextlib.contextmanager
def _sink(path):
    if path is None:
        yield sys.stdout
    else:
        with open(path, "w", encoding="utf-8", newline="") as fh:
            yield fh


def _seed(value):
    if value is not None:
        return int(value)
    env = os.environ.get("EVOSIM_SEED")
    if env is None:
        return 0
    try:
        return int(env)
    except ValueError:
        raise UsageError(f"EVOSIM_SEED must be an integer, got {env!r}") from None


def _cmd_run(args):
    keys = ("algo", "fitness", "n", "d", "mutation", "beta", "nbeta", "N", "trials", "budget", "seed", "initial")
    c = _merged(args, keys)
    c["seed"] = _seed(c["seed"])
    config = _config_from(c)
    try:
        budget = resolve_budget(_num(c["budget"]), config.problem.n)
    except BudgetError as exc:
        raise UsageError(f"--budget: {exc}") from exc
    if int(c["trials"]) < 1:
        raise UsageError("--trials must be >= 1")
    _echo("run", c)
    try:
        recs = run_trials(config, int(c["trials"]), budget, c["seed"], initial=c["initial"], workers=_workers(args))
    except ValueError as exc:
        raise UsageError(f"--initial: {exc}") from exc
    with _sink(args.out) as fh:
        write_trials_csv(recs, fh)
    summary = {"config": config.describe(), "budget": budget, "summary": summarize(recs).as_dict()}
    if args.summary:
        with open(args.summary, "w", encoding="utf-8") as fh:
            json.dump(summary, fh, indent=2)
            fh.write("\n")
    else:
        print(json.dumps(summary), file=sys.stderr)
    return EXIT_OK


def _workers(args):
    w = getattr(args, "workers", None)
    return w if w is not None else (os.cpu_count() or 1)


def _cmd_sweep(args):
    try:
        with open(args.config, encoding="utf-8") as fh:
            c = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise UsageError(f"--config: cannot read {args.config}: {exc}") from exc
    c.pop("command", None)
    for k in ("trials", "budget", "seed"):
        if getattr(args, k) is not None:
            c[k] = getattr(args, k)
    c["seed"] = _seed(c.get("seed"))
    extra = set(c) - {"grid", "trials", "budget", "seed"}
    if extra:
        raise UsageError(f"--config: unknown keys {sorted(extra)}")
    try:
        spec = SweepSpec(grid=c["grid"], trials=int(c.get("trials", 100)), budget=_num(c.get("budget", _DEFAULTS["budget"])))
    except (KeyError, ValueError, TypeError) as exc:
        raise UsageError(f"--config: invalid sweep: {exc}") from exc
    _echo("sweep", c)
    cells = sweep(spec, c["seed"], workers=_workers(args))
    with _sink(args.out) as fh:
        write_summary_json(cells, fh)
    return EXIT_OK


def _chain_for(args, command, extra=()):
    keys = ("algo", "fitness", "n", "d", "mutation", "beta", "nbeta", "N", *extra)
    c = _merged(args, keys)
    config = _config_from(c)
    if not config.problem.level_reducible:
        raise UsageError(f"--fitness: {config.problem.name} has no exact lattice chain (onemax or cliff only)")
    _echo(command, c)
    return c, build_chain(config)


def _write_table(path, chain, times):
    prof = drift_profile(chain)
    with _sink(path) as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(CHAIN_COLUMNS)
        for i in range(chain.n + 1):
            w.writerow([
                i, repr(float(prof.delta_plus[i])), repr(float(prof.delta_minus[i])),
                repr(float(prof.delta[i])), repr(float(prof.self_loop[i])),
                "" if times is None else repr(float(times[i])),
            ])


def _cmd_exact(args):
    _, chain = _chain_for(args, "exact")
    times = expected_hitting_times(chain)
    _write_table(args.out, chain, times)
    print(json.dumps({"uniform_start_mean": uniform_start_mean(chain, times)}), file=sys.stderr)
    return EXIT_OK


def _cmd_drift(args):
    c, chain = _chain_for(args, "drift", extra=("negative", "orientation"))
    try:
        times = expected_hitting_times(chain)
    except (NumericalError, StructuralError):
        times = None
    _write_table(args.out, chain, times)
    rep = check_drift_bounds(chain)
    report = {
        "drift_bounds": {
            "applicable": rep.applicable,
            "reason": rep.reason,
            "passed": rep.passed,
            "drift_constant": None if not rep.applicable else rep.drift_constant,
            "failed_states": [r[0] for r in rep.failures],
        }
    }
    if c["negative"] is not None:
        try:
            a, b = int(c["negative"][0]), int(c["negative"][1])
            eps, r, delta = (float(v) for v in c["negative"][2:])
            neg = check_negative_drift(chain, a, b, eps, r, delta, c["orientation"] or "zeros")
        except ValueError as exc:
            raise UsageError(f"--negative: {exc}") from exc
        report["negative_drift"] = {
            "a": a, "b": b,
            "drift_condition": neg.drift_condition,
            "jump_condition": neg.jump_condition,
            "holds": neg.holds,
            "rows": [list(map(_jsonable, row)) for row in neg.rows],
        }
    text = json.dumps(report, indent=2)
    if args.report:
        with open(args.report, "w", encoding="utf-8") as fh:
            fh.write(text + "\n")
    else:
        print(text, file=sys.stderr)
    return EXIT_OK


def _jsonable(v):
    if isinstance(v, (np.bool_, bool)):
        return bool(v)
    if isinstance(v, (np.integer, int)):
        return int(v)
    return float(v)


def _cmd_verify(args):
    suites = tuple(args.suite or ("all",))
    _echo("verify", {"suite": list(suites)})
    checks = run_suites(suites)
    for ch in checks:
        print(ch.line())
    return EXIT_OK if all(ch.passed for ch in checks) else EXIT_VERIFY


_COMMANDS = {"run": _cmd_run, "sweep": _cmd_sweep, "exact": _cmd_exact, "drift": _cmd_drift, "verify": _cmd_verify}


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        return _COMMANDS[args.command](args)
    except UsageError as exc:
        print(f"sswmlab: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (NumericalError, StructuralError, ArithmeticError, RuntimeError) as exc:
        print(f"sswmlab: runtime error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
