"""SSWM and the (1+1) EA as single-individual processes, and the run loop.

A run starts from a uniform random string (or a forced one), counts one
generation per mutate-then-select step, and stops at the first generation in
which a global optimum is *accepted* as the current point.
"""

from __future__ import annotations

import enum
import functools
from dataclasses import dataclass, field

import numpy as np

from . import _kernel
from .fitness import Problem, as_bits
from .mutation import MutationKind, flip_count_cdf
from .selection import SelectionParams, p_fix, p_fix_array

__all__ = [
    "Algorithm",
    "AlgorithmConfig",
    "BalanceTrajectoryStats",
    "RunResult",
    "accept",
    "run",
    "stream",
]


class Algorithm(str, enum.Enum):
    SSWM = "sswm"
    EA = "ea"

    @classmethod
    def parse(cls, value) -> "Algorithm":
        if isinstance(value, cls):
            return value
        try:
            return cls(str(value).lower())
        except ValueError:
            raise ValueError(f"unknown algorithm {value!r}; choose 'sswm' or 'ea'") from None


@dataclass(frozen=True)
class AlgorithmConfig:
    """Algorithm, mutation operator, selection parameters and problem.

    ``selection`` is required for SSWM and ignored by the EA.
    """

    algo: Algorithm
    mutation: MutationKind
    problem: Problem
    selection: SelectionParams | None = None

    def __post_init__(self):
        object.__setattr__(self, "algo", Algorithm.parse(self.algo))
        object.__setattr__(self, "mutation", MutationKind.parse(self.mutation))
        if not isinstance(self.problem, Problem):
            raise TypeError("problem must be a Problem")
        if self.algo is Algorithm.SSWM and not isinstance(self.selection, SelectionParams):
            raise ValueError("SSWM needs SelectionParams")

    def describe(self) -> dict:
        sel = self.selection if self.algo is Algorithm.SSWM else None
        return {
            "algo": self.algo.value,
            "fitness": self.problem.name,
            "n": self.problem.n,
            "d": self.problem.d,
            "beta": sel.beta if sel else None,
            "N": sel.N if sel else None,
            "mutation": self.mutation.value,
        }


@dataclass(frozen=True)
class BalanceTrajectoryStats:
    """Per-run instrumentation of a Balance run.

    ``lo_decrease_in_window`` counts accepted steps that lowered ``LO(a)``
    while both parent and offspring had ``n/16 < |b| < 7n/16``.
    """

    lo_decrease_events: int
    lo_decrease_in_window: int
    relevant_steps: int
    max_ones_b: int
    min_ones_b: int
    hit_trap: bool
    hit_zero: bool
    initial_ones_b: int
    initial_outside_window: bool


@dataclass(frozen=True)
class RunResult:
    success: bool
    generations: int
    final_fitness: float
    final_point: np.ndarray = field(repr=False, compare=False)
    trajectory_stats: BalanceTrajectoryStats | None = None
    trace: np.ndarray | None = field(default=None, repr=False, compare=False)


def stream(master_seed: int, *keys: int) -> np.random.Generator:
    """Independent random stream for ``(master_seed, *keys)``.

    Keys are hashed into the generator state by ``numpy.random.SeedSequence``,
    so a trial's stream depends only on its indices, never on scheduling.
    """
    return np.random.default_rng(np.random.SeedSequence([int(master_seed), *map(int, keys)]))


def accept(delta: float, config: AlgorithmConfig, rng: np.random.Generator) -> bool:
    """Selection step: EA keeps ``delta >= 0``; SSWM keeps with probability ``p_fix(delta)``."""
    if config.algo is Algorithm.EA:
        return delta >= 0
    return bool(rng.random() < p_fix(delta, config.selection))


_PROB_CODE = {"onemax": _kernel.ONEMAX, "cliff": _kernel.CLIFF, "balance": _kernel.BALANCE}
_EMPTY_TRACE = np.empty(0)
_NO_TABLE = np.zeros(1)
_NO_CDF = np.array([np.inf])


@functools.lru_cache(maxsize=256)
def _acceptance_table(sel: SelectionParams, n: int) -> np.ndarray:
    # p_fix at half-integer differences -n..n
    halves = np.arange(-2 * n, 2 * n + 1) / 2.0
    return p_fix_array(halves, sel)


def run(
    config: AlgorithmConfig,
    budget: int,
    seed=None,
    initial=None,
    record_trace: bool = False,
) -> RunResult:
    """Run one process until an optimum is accepted or ``budget`` generations pass.

    Parameters
    ----------
    config : AlgorithmConfig
    budget : int
        Maximum number of generations (>= 0).
    seed : int, sequence of int, or numpy Generator
        An int or tuple is expanded by :func:`stream`; a Generator is used as is.
    initial : bit string, optional
        Forced start point; otherwise drawn uniformly at random.
    record_trace : bool
        Keep the current fitness after every generation in ``RunResult.trace``.
    """
    budget = int(budget)
    if budget < 0:
        raise ValueError("budget must be >= 0")
    if isinstance(seed, np.random.Generator):
        rng = seed
    elif isinstance(seed, (tuple, list)):
        rng = stream(*seed)
    else:
        rng = stream(0 if seed is None else seed)
    prob = config.problem
    n = prob.n
    if initial is None:
        x = rng.integers(0, 2, size=n, dtype=np.uint8)
    else:
        x = np.array(as_bits(initial))
        if x.size != n:
            raise ValueError(f"initial point has {x.size} bits, problem has n={n}")
    x0 = x.copy()
    sel = config.selection
    N, beta = (sel.N, sel.beta) if sel is not None else (1.0, 1.0)
    stats = np.zeros(_kernel.N_STATS, dtype=np.int64)
    trace = np.zeros(budget + 1) if record_trace else _EMPTY_TRACE
    gens, ok, f = _kernel.simulate(
        x,
        _PROB_CODE[prob.name],
        prob.d or 0,
        _kernel.SSWM if config.algo is Algorithm.SSWM else _kernel.EA,
        _kernel.LOCAL if config.mutation is MutationKind.LOCAL else _kernel.GLOBAL,
        float(N),
        float(beta),
        _acceptance_table(sel, n) if sel is not None else _NO_TABLE,
        np.asarray(flip_count_cdf(n)) if config.mutation is MutationKind.GLOBAL else _NO_CDF,
        budget,
        rng,
        stats,
        trace,
    )
    tstats = None
    if prob.name == "balance":
        b0 = int(x0[n // 2 :].sum())
        tstats = BalanceTrajectoryStats(
            lo_decrease_events=int(stats[_kernel.ST_LO_DEC]),
            lo_decrease_in_window=int(stats[_kernel.ST_LO_DEC_WINDOW]),
            relevant_steps=int(stats[_kernel.ST_RELEVANT]),
            max_ones_b=int(stats[_kernel.ST_MAX_B]),
            min_ones_b=int(stats[_kernel.ST_MIN_B]),
            hit_trap=bool(stats[_kernel.ST_TRAP]),
            hit_zero=bool(stats[_kernel.ST_ZERO]),
            initial_ones_b=b0,
            initial_outside_window=not (n / 16 < b0 < 7 * n / 16),
        )
    return RunResult(
        success=bool(ok),
        generations=int(gens),
        final_fitness=float(f),
        final_point=x,
        trajectory_stats=tstats,
        trace=trace[: gens + 1] if record_trace else None,
    )
