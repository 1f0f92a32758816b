"""Monte Carlo campaigns: trial batches, sweeps, summaries and scaling fits.

Trial ``i`` of a batch always draws from ``stream(master_seed, i)`` (or
``stream(master_seed, cell, i)`` inside a sweep), so results do not depend on
how trials are distributed over workers.
"""

from __future__ import annotations

import ast
import csv
import hashlib
import itertools
import json
import logging
import math
import operator
import warnings
from dataclasses import asdict, dataclass, field

import numpy as np
from joblib import Parallel, delayed
from scipy import stats

from .dynamics import Algorithm, AlgorithmConfig, BalanceTrajectoryStats, run, stream
from .fitness import Problem
from .mutation import MutationKind
from .selection import SelectionParams, nbeta_threshold

__all__ = [
    "BudgetError",
    "eval_expression",
    "resolve_budget",
    "TrialRecord",
    "SummaryStats",
    "SweepSpec",
    "SweepCell",
    "FitResult",
    "ScanResult",
    "make_config",
    "run_trials",
    "summarize",
    "sweep",
    "scaling_fit",
    "phase_transition_scan",
    "binomial_upper_band",
    "write_trials_csv",
    "write_summary_json",
    "TRIAL_COLUMNS",
]

log = logging.getLogger(__name__)


class BudgetError(ValueError):
    """Malformed or non-positive budget / parameter expression."""


# --------------------------------------------------------------------------
# expressions of n

_BINOPS = {
    ast.Add: operator.add,
    ast.Sub: operator.sub,
    ast.Mult: operator.mul,
    ast.Div: operator.truediv,
    ast.Pow: operator.pow,
}
_FUNCS = {"ln": math.log, "log": math.log, "sqrt": math.sqrt, "exp": math.exp}


def eval_expression(expr, n: int) -> float:
    """Evaluate an arithmetic expression in ``n``, e.g. ``"50*n*ln(n)"``.

    Supports numbers, ``n``, ``+ - * /``, ``^`` or ``**`` for powers, unary
    minus, parentheses and the functions ``ln``/``log`` (natural), ``sqrt``
    and ``exp``. Plain numbers are returned unchanged.
    """
    if isinstance(expr, (int, float)) and not isinstance(expr, bool):
        return float(expr)
    try:
        # '^' is power; rewriting before parsing gives it Python's '**' precedence
        tree = ast.parse(str(expr).strip().replace("^", "**"), mode="eval")
    except SyntaxError as exc:
        raise BudgetError(f"malformed expression {expr!r}") from exc

    def ev(node):
        if isinstance(node, ast.Expression):
            return ev(node.body)
        if isinstance(node, ast.Constant) and isinstance(node.value, (int, float)):
            return float(node.value)
        if isinstance(node, ast.Name) and node.id == "n":
            return float(n)
        if isinstance(node, ast.BinOp) and type(node.op) in _BINOPS:
            return _BINOPS[type(node.op)](ev(node.left), ev(node.right))
        if isinstance(node, ast.UnaryOp) and isinstance(node.op, (ast.USub, ast.UAdd)):
            v = ev(node.operand)
            return -v if isinstance(node.op, ast.USub) else v
        if (
            isinstance(node, ast.Call)
            and isinstance(node.func, ast.Name)
            and node.func.id in _FUNCS
            and len(node.args) == 1
            and not node.keywords
        ):
            return _FUNCS[node.func.id](ev(node.args[0]))
        raise BudgetError(f"unsupported element in expression {expr!r}")

    try:
        value = ev(tree)
    except (ValueError, ZeroDivisionError, OverflowError) as exc:
        if isinstance(exc, BudgetError):
            raise
        raise BudgetError(f"cannot evaluate {expr!r} at n={n}: {exc}") from exc
    if not math.isfinite(value):
        raise BudgetError(f"{expr!r} is not finite at n={n}")
    return value


def resolve_budget(budget, n: int) -> int:
    """Generation budget as a positive integer: ``ceil`` of the expression value."""
    value = math.ceil(eval_expression(budget, n))
    if value < 1:
        raise BudgetError(f"budget {budget!r} evaluates to {value} at n={n}")
    return int(value)


def make_config(
    algo="sswm",
    fitness="onemax",
    n=16,
    d=None,
    mutation="global",
    beta=1.0,
    nbeta=None,
    N=None,
    strict_beta=False,
) -> AlgorithmConfig:
    """Build an :class:`AlgorithmConfig` from flat, possibly symbolic values.

    ``beta`` and ``nbeta`` may be expressions in ``n``; ``nbeta='auto'`` is
    ``ln(11n)/2``. Exactly one of ``nbeta`` and ``N`` sets the population size
    for SSWM (``nbeta`` defaults to ``'auto'``).
    """
    n = int(n)
    problem = Problem(fitness, n, None if d is None else int(d))
    algo = Algorithm.parse(algo)
    sel = None
    if algo is Algorithm.SSWM:
        b = eval_expression(beta, n)
        if N is not None and nbeta is not None:
            raise ValueError("give either N or nbeta, not both")
        if N is not None:
            sel = SelectionParams(eval_expression(N, n), b, strict_beta)
        else:
            nb = nbeta_threshold(n) if nbeta in (None, "auto") else eval_expression(nbeta, n)
            sel = SelectionParams.from_nbeta(nb, b, strict_beta)
    return AlgorithmConfig(algo, MutationKind.parse(mutation), problem, sel)


def fingerprint(config: AlgorithmConfig) -> str:
    blob = json.dumps(config.describe(), sort_keys=True)
    return hashlib.sha1(blob.encode()).hexdigest()[:12]


# --------------------------------------------------------------------------
# trials


@dataclass(frozen=True)
class TrialRecord:
    trial_id: int
    config: dict
    fingerprint: str
    seed: int
    generations: int
    success: bool
    final_fitness: float
    balance_stats: BalanceTrajectoryStats | None = None

    def row(self) -> dict:
        c = self.config
        bs = self.balance_stats
        return {
            "trial_id": self.trial_id,
            "algo": c["algo"],
            "fitness": c["fitness"],
            "n": c["n"],
            "d": "" if c["d"] is None else c["d"],
            "beta": "" if c["beta"] is None else repr(c["beta"]),
            "N": "" if c["N"] is None else repr(c["N"]),
            "mutation": c["mutation"],
            "seed": self.seed,
            "generations": self.generations,
            "success": int(self.success),
            "final_fitness": repr(self.final_fitness),
            "lo_decrease_events": "" if bs is None else bs.lo_decrease_events,
            "hit_trap": "" if bs is None else int(bs.hit_trap),
        }


TRIAL_COLUMNS = (
    "trial_id", "algo", "fitness", "n", "d", "beta", "N", "mutation", "seed",
    "generations", "success", "final_fitness", "lo_decrease_events", "hit_trap",
)


def _run_chunk(config, budget, master_seed, keys, ids, initial):
    desc = config.describe()
    fp = fingerprint(config)
    out = []
    for i in ids:
        res = run(config, budget, stream(master_seed, *keys, i), initial=initial)
        out.append(
            TrialRecord(
                trial_id=i,
                config=desc,
                fingerprint=fp,
                seed=master_seed,
                generations=res.generations,
                success=res.success,
                final_fitness=res.final_fitness,
                balance_stats=res.trajectory_stats,
            )
        )
    return out


def _chunks(ids, parts):
    ids = list(ids)
    size = max(1, math.ceil(len(ids) / parts))
    return [ids[k : k + size] for k in range(0, len(ids), size)]


def run_trials(
    config: AlgorithmConfig,
    trials: int,
    budget,
    master_seed: int = 0,
    initial=None,
    workers: int = 1,
    cell: int | None = None,
) -> list[TrialRecord]:
    """Run ``trials`` independent runs; record ``i`` uses ``stream(master_seed, [cell,] i)``.

    ``budget`` may be an int or an expression in ``n``. Records come back
    ordered by ``trial_id`` whatever the number of ``workers``.
    """
    if int(trials) < 1:
        raise ValueError("trials must be >= 1")
    b = resolve_budget(budget, config.problem.n)
    keys = () if cell is None else (int(cell),)
    ids = range(int(trials))
    if workers is None or workers <= 1:
        return _run_chunk(config, b, int(master_seed), keys, ids, initial)
    parts = _chunks(ids, 4 * workers)
    res = Parallel(n_jobs=workers)(
        delayed(_run_chunk)(config, b, int(master_seed), keys, part, initial) for part in parts
    )
    return [r for chunk in res for r in chunk]


# --------------------------------------------------------------------------
# statistics


@dataclass(frozen=True)
class SummaryStats:
    """Success rate plus runtime statistics over successful runs.

    Runtime fields are NaN when no run succeeded (``runtime_defined`` False);
    the bootstrap interval is NaN with fewer than 10 successes.
    """

    trials: int
    successes: int
    success_rate: float
    mean: float
    median: float
    q10: float
    q90: float
    ci_low: float
    ci_high: float
    runtime_defined: bool

    def as_dict(self) -> dict:
        return {k: (None if isinstance(v, float) and math.isnan(v) else v) for k, v in asdict(self).items()}


def summarize(records, n_resamples: int = 10_000, seed: int = 0) -> SummaryStats:
    """Summary statistics of a list of :class:`TrialRecord`.

    The 95% interval for the mean uses a percentile bootstrap with
    ``n_resamples`` resamples (seeded, hence reproducible).
    """
    records = list(records)
    if not records:
        raise ValueError("summarize needs at least one record")
    gens = np.array([r.generations for r in records if r.success], dtype=float)
    k = gens.size
    nan = math.nan
    if k == 0:
        return SummaryStats(len(records), 0, 0.0, nan, nan, nan, nan, nan, nan, False)
    lo = hi = nan
    if k >= 10 and np.ptp(gens) > 0:
        ci = stats.bootstrap(
            (gens,), np.mean, n_resamples=n_resamples, confidence_level=0.95,
            method="percentile", random_state=np.random.default_rng(seed),
        ).confidence_interval
        lo, hi = float(ci.low), float(ci.high)
    elif k >= 10:
        lo = hi = float(gens[0])
    q10, q50, q90 = np.quantile(gens, [0.1, 0.5, 0.9])
    return SummaryStats(
        trials=len(records),
        successes=k,
        success_rate=k / len(records),
        mean=float(gens.mean()),
        median=float(q50),
        q10=float(q10),
        q90=float(q90),
        ci_low=lo,
        ci_high=hi,
        runtime_defined=True,
    )


def binomial_upper_band(trials: int, p: float, level: float = 0.99) -> int:
    """Largest success count still consistent with rate ``p`` at one-sided ``level``."""
    return int(stats.binom.ppf(level, trials, p))


# --------------------------------------------------------------------------
# sweeps

_GRID_KEYS = ("fitness", "n", "d", "algo", "mutation", "beta", "nbeta", "N")


@dataclass(frozen=True)
class SweepSpec:
    """Cartesian grid of run settings.

    ``grid`` maps keys among ``fitness, n, d, algo, mutation, beta, nbeta, N``
    to non-empty lists; ``beta``, ``nbeta`` and ``N`` entries may be
    expressions in ``n``. ``budget`` is an int or an expression in ``n``.
    """

    grid: dict
    trials: int
    budget: object

    def __post_init__(self):
        unknown = set(self.grid) - set(_GRID_KEYS)
        if unknown:
            raise ValueError(f"unknown sweep keys {sorted(unknown)}")
        for key, values in self.grid.items():
            if isinstance(values, (str, bytes)) or not hasattr(values, "__len__"):
                raise ValueError(f"grid entry {key!r} must be a list")
            if len(values) == 0:
                raise ValueError(f"grid dimension {key!r} is empty")
        if int(self.trials) < 1:
            raise ValueError("trials must be >= 1")

    def cells(self) -> list[dict]:
        keys = list(self.grid)
        return [dict(zip(keys, combo)) for combo in itertools.product(*(self.grid[k] for k in keys))]


@dataclass
class SweepCell:
    index: int
    settings: dict
    config: dict | None = None
    budget: int | None = None
    summary: SummaryStats | None = None
    error: str | None = None
    records: list = field(default_factory=list, repr=False)


def sweep(spec: SweepSpec, master_seed: int = 0, workers: int = 1, keep_records: bool = False) -> list[SweepCell]:
    """Run every cell of ``spec``; trial ``i`` of cell ``c`` uses ``stream(master_seed, c, i)``.

    Cells whose settings do not form a valid configuration are reported with
    ``error`` set and skipped.
    """
    out = []
    for idx, settings in enumerate(spec.cells()):
        cell = SweepCell(index=idx, settings=settings)
        try:
            with warnings.catch_warnings():
                warnings.simplefilter("ignore")
                cfg = make_config(**settings)
            b = resolve_budget(spec.budget, cfg.problem.n)
        except (ValueError, TypeError) as exc:
            cell.error = str(exc)
            log.warning("sweep cell %d skipped: %s", idx, exc)
            out.append(cell)
            continue
        recs = run_trials(cfg, spec.trials, b, master_seed, workers=workers, cell=idx)
        cell.config = cfg.describe()
        cell.budget = b
        cell.summary = summarize(recs)
        if keep_records:
            cell.records = recs
        out.append(cell)
    return out


# --------------------------------------------------------------------------
# scaling and phase transition

_MODELS = {
    "n": lambda n, d: n,
    "nlogn": lambda n, d: n * np.log(n),
    "n^d": lambda n, d: n ** float(d),
    "n^2.5": lambda n, d: n ** 2.5,
}


@dataclass(frozen=True)
class FitResult:
    slope: float
    intercept: float
    r2: float


def scaling_fit(points, model: str = "nlogn", d: float | None = None) -> FitResult:
    """Least-squares slope of ``log(statistic)`` against ``log(g(n))``.

    ``model`` selects ``g`` from ``'n'``, ``'nlogn'``, ``'n^d'`` (needs ``d``)
    and ``'n^2.5'``. A slope near 1 means ``statistic = Theta(g(n))``.
    """
    if model not in _MODELS:
        raise ValueError(f"unknown model {model!r}; choose from {sorted(_MODELS)}")
    if model == "n^d" and d is None:
        raise ValueError("model 'n^d' needs d")
    pts = np.asarray(points, dtype=float)
    if pts.ndim != 2 or pts.shape[1] != 2 or pts.shape[0] < 3:
        raise ValueError("need at least three (n, statistic) points")
    n, y = pts[:, 0], pts[:, 1]
    g = _MODELS[model](n, d)
    if np.any(y <= 0) or np.any(g <= 0):
        raise ValueError("scaling fit needs positive statistics and g(n)")
    lx, ly = np.log(g), np.log(y)
    slope, intercept = np.polyfit(lx, ly, 1)
    resid = ly - (slope * lx + intercept)
    ss_tot = float(np.sum((ly - ly.mean()) ** 2))
    r2 = 1.0 if ss_tot == 0 else 1.0 - float(np.sum(resid**2)) / ss_tot
    return FitResult(float(slope), float(intercept), r2)


@dataclass(frozen=True)
class ScanResult:
    """Success rate per ``N*beta`` value; ``threshold`` is the smallest with rate >= 1/2."""

    points: list
    threshold: float | None


def phase_transition_scan(
    n: int,
    beta: float,
    nbeta_grid,
    budget,
    trials: int,
    master_seed: int = 0,
    mutation="global",
    force: bool = False,
    workers: int = 1,
) -> ScanResult:
    """Success rate of SSWM on OneMax within ``budget`` across ``N*beta`` values.

    Grid values below 1 lie outside the analysed regime: they are dropped with
    a warning unless ``force`` is set.
    """
    points = []
    for idx, nb in enumerate(nbeta_grid):
        nb = eval_expression(nb, n)
        if nb < 1 and not force:
            warnings.warn(f"N*beta={nb:.4g} < 1 skipped (pass force=True to run it)", stacklevel=2)
            continue
        cfg = make_config("sswm", "onemax", n, mutation=mutation, beta=beta, nbeta=nb)
        recs = run_trials(cfg, trials, budget, master_seed, workers=workers, cell=idx)
        k = sum(r.success for r in recs)
        points.append((nb, k / trials, k, trials))
    above = [p[0] for p in points if p[1] >= 0.5]
    return ScanResult(points, min(above) if above else None)


# --------------------------------------------------------------------------
# output


def write_trials_csv(records, fh) -> None:
    """Write trial records as CSV (header + one row per trial, LF line endings)."""
    w = csv.DictWriter(fh, fieldnames=TRIAL_COLUMNS, lineterminator="\n")
    w.writeheader()
    for r in records:
        w.writerow(r.row())


def write_summary_json(cells, fh) -> None:
    """One JSON object per cell with its configuration echo and summary."""
    out = []
    for c in cells:
        out.append(
            {
                "cell": c.index,
                "settings": c.settings,
                "config": c.config,
                "budget": c.budget,
                "summary": None if c.summary is None else c.summary.as_dict(),
                "error": c.error,
            }
        )
    json.dump(out, fh, indent=2)
    fh.write("\n")
