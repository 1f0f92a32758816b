"""Exact analysis on the ones-count lattice for OneMax and Cliff_d.

For a fitness that depends on ``x`` only through ``|x|`` the process
projected onto ``i = |x|`` is itself a Markov chain on ``{0, ..., n}`` with

    P[i, j] = mut(i, j) * accept(f(j) - f(i))        (j != i)

and the remaining mass on the diagonal. Expected optimisation times, drift
profiles and the hypotheses of drift theorems are evaluated on this chain.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.stats import binom

from .dynamics import Algorithm, AlgorithmConfig
from .mutation import MutationKind, jump_matrix
from .selection import p_fix, p_fix_array

__all__ = [
    "OnesLatticeChain",
    "DriftProfile",
    "DriftBoundsReport",
    "NegativeDriftReport",
    "UnsupportedProblemError",
    "StructuralError",
    "NumericalError",
    "build_chain",
    "expected_hitting_times",
    "uniform_start_mean",
    "drift_profile",
    "check_drift_bounds",
    "check_negative_drift",
]


class UnsupportedProblemError(ValueError):
    """The fitness function is not a function of the ones-count."""


class StructuralError(ValueError):
    """Some transient state cannot reach the optimum."""


class NumericalError(ArithmeticError):
    """The linear system for hitting times is singular or inaccurate."""


@dataclass(frozen=True)
class OnesLatticeChain:
    """Transition structure of the ones-count process.

    ``P`` is row-stochastic with the optimum rows set to the identity.
    ``exit_rate[i]`` is ``sum_{j != i} P[i, j]`` accumulated directly rather
    than as ``1 - P[i, i]``, which keeps tiny escape probabilities accurate.
    """

    config: AlgorithmConfig
    P: np.ndarray
    fitness: np.ndarray
    absorbing: np.ndarray
    exit_rate: np.ndarray

    @property
    def n(self) -> int:
        return self.config.problem.n


def _acceptance(config: AlgorithmConfig, df: np.ndarray) -> np.ndarray:
    if config.algo is Algorithm.EA:
        return (df >= 0).astype(float)
    return p_fix_array(df, config.selection)


def build_chain(config: AlgorithmConfig) -> OnesLatticeChain:
    """Assemble the exact lattice chain for ``config`` (OneMax or Cliff only)."""
    prob = config.problem
    if not prob.level_reducible:
        raise UnsupportedProblemError(f"{prob.name} is not level-reducible; no exact lattice chain")
    n = prob.n
    f = prob.level_profile()
    M = jump_matrix(n, config.mutation)
    P = M * _acceptance(config, f[None, :] - f[:, None])
    np.fill_diagonal(P, 0.0)
    absorbing = f == prob.optimum_value
    P[absorbing, :] = 0.0
    exit_rate = P.sum(axis=1)
    P[np.diag_indices(n + 1)] = 1.0 - exit_rate
    P.flags.writeable = False
    return OnesLatticeChain(config=config, P=P, fitness=f, absorbing=absorbing, exit_rate=exit_rate)


def _check_reachable(chain):
    # backward search from the absorbing set along positive transitions
    reach = chain.absorbing.copy()
    edges = chain.P > 0
    np.fill_diagonal(edges, False)
    frontier = reach.copy()
    while frontier.any():
        new = edges[:, frontier].any(axis=1) & ~reach
        reach |= new
        frontier = new
    if not reach.all():
        bad = np.flatnonzero(~reach).tolist()
        raise StructuralError(f"optimum unreachable from states {bad}")


def _eliminate(Q, absorb, exit_rate):
    """Solve ``(diag(exit_rate) - Q) t = 1`` by subtraction-free elimination.

    States are removed one at a time (last first). Rerouting through the
    removed state only adds non-negative terms to the remaining rates, and
    each pivot is recomputed as a sum of outgoing rates rather than updated by
    subtraction, so every intermediate quantity is accurate to a few ulps
    relative to itself even when hitting times are astronomically large.
    """
    Q = np.array(Q, dtype=float)
    np.fill_diagonal(Q, 0.0)
    a = np.array(absorb, dtype=float)
    rhs = np.ones(Q.shape[0])
    e = np.array(exit_rate, dtype=float)
    m = Q.shape[0]
    for k in range(m - 1, 0, -1):
        if not e[k] > 0:
            raise NumericalError(f"state {k} has no exit after elimination")
        w = Q[:k, k] / e[k]
        Q[:k, :k] += np.outer(w, Q[k, :k])
        a[:k] += w * a[k]
        rhs[:k] += w * rhs[k]
        Q[np.arange(k), np.arange(k)] = 0.0
        e[:k] = Q[:k, :k].sum(axis=1) + a[:k]
    t = np.empty(m)
    for k in range(m):
        if not e[k] > 0:
            raise NumericalError(f"state {k} has no exit after elimination")
        t[k] = (rhs[k] + Q[k, :k] @ t[:k]) / e[k]
    return t


def expected_hitting_times(chain: OnesLatticeChain) -> np.ndarray:
    """Expected generations until the optimum is accepted, per start state.

    Solves ``(I - Q) t = 1`` over the transient states; ``t`` is zero on the
    optimum. The residual ``max|(I - Q) t - 1|`` must not exceed
    ``1e-8 * max|t|``.
    """
    _check_reachable(chain)
    tr = ~chain.absorbing
    Q = np.array(chain.P[np.ix_(tr, tr)])
    absorb = chain.P[np.ix_(tr, chain.absorbing)].sum(axis=1)
    with np.errstate(over="raise", invalid="raise"):
        try:
            t_tr = _eliminate(Q, absorb, chain.exit_rate[tr])
        except FloatingPointError as exc:
            raise NumericalError(f"hitting-time elimination overflowed: {exc}") from exc
    A = -Q
    A[np.diag_indices_from(A)] = chain.exit_rate[tr]
    ones = np.ones(A.shape[0])
    resid = np.max(np.abs(A @ t_tr - ones))
    scale = np.max(np.abs(t_tr))
    if not np.all(np.isfinite(t_tr)) or resid > 1e-8 * scale:
        raise NumericalError(f"hitting-time residual {resid:.3g} too large (|t|={scale:.3g})")
    t = np.zeros(chain.n + 1)
    t[tr] = t_tr
    return t


def uniform_start_mean(chain: OnesLatticeChain, times: np.ndarray | None = None) -> float:
    """Expected optimisation time from a uniformly random initial string."""
    if times is None:
        times = expected_hitting_times(chain)
    n = chain.n
    return float(binom.pmf(np.arange(n + 1), n, 0.5) @ times)


@dataclass(frozen=True)
class DriftProfile:
    delta_plus: np.ndarray
    delta_minus: np.ndarray
    delta: np.ndarray
    self_loop: np.ndarray


def drift_profile(chain: OnesLatticeChain) -> DriftProfile:
    """Forward, backward and net expected change of the ones-count per state."""
    n = chain.n
    steps = np.arange(n + 1)[None, :] - np.arange(n + 1)[:, None]
    P = chain.P
    plus = np.where(steps > 0, steps * P, 0.0).sum(axis=1)
    minus = np.where(steps < 0, steps * P, 0.0).sum(axis=1)
    return DriftProfile(
        delta_plus=plus,
        delta_minus=minus,
        delta=plus + minus,
        self_loop=1.0 - chain.exit_rate,
    )


@dataclass(frozen=True)
class DriftBoundsReport:
    """Per-state comparison of the drift profile with the OneMax drift bounds.

    Rows hold ``(state, forward, forward_bound, backward_abs, backward_bound,
    passed)``; for local mutation ``forward_bound`` is the exact value.
    ``drift_constant`` is ``min_i delta(i) / (beta (n-i)/n)`` over non-optimal
    states; it is required to be positive only when ``above_threshold``.
    """

    applicable: bool
    reason: str
    rows: list
    drift_constant: float
    above_threshold: bool

    @property
    def passed(self) -> bool:
        if not self.applicable:
            return True
        ok = all(r[-1] for r in self.rows)
        if self.above_threshold:
            ok = ok and self.drift_constant > 0
        return ok

    @property
    def failures(self) -> list:
        return [r for r in self.rows if not r[-1]]


def check_drift_bounds(chain: OnesLatticeChain, rtol: float = 1e-12) -> DriftBoundsReport:
    """Check the forward/backward drift bounds of SSWM on OneMax state by state.

    Global mutation::

        D+(i) >= (n-i)/n (1-1/n)^(n-1) p_fix(1)
        |D-(i)| <= 1.14 (1-1/n)^(n-1) (p_fix(-1) + e p_fix(-2))

    Local mutation::

        D+(i) = (n-i)/n p_fix(1),    |D-(i)| <= p_fix(-1)
    """
    cfg = chain.config
    if cfg.algo is not Algorithm.SSWM:
        return DriftBoundsReport(False, "skipped: bounds concern SSWM only", [], math.nan, False)
    if cfg.problem.name != "onemax":
        return DriftBoundsReport(False, "skipped: bounds concern OneMax only", [], math.nan, False)
    sel = cfg.selection
    n = chain.n
    prof = drift_profile(chain)
    pf1, pfm1, pfm2 = p_fix(1, sel), p_fix(-1, sel), p_fix(-2, sel)
    keep = (1.0 - 1.0 / n) ** (n - 1)
    rows = []
    for i in range(n):
        fwd, back = prof.delta_plus[i], -prof.delta_minus[i]
        if cfg.mutation is MutationKind.GLOBAL:
            f_bound = (n - i) / n * keep * pf1
            b_bound = 1.14 * keep * (pfm1 + math.e * pfm2)
            ok = fwd >= f_bound * (1 - rtol) and back <= b_bound * (1 + rtol)
        else:
            f_bound = (n - i) / n * pf1
            b_bound = pfm1
            ok = abs(fwd - f_bound) <= rtol * max(f_bound, 1e-300) and back <= b_bound * (1 + rtol)
        rows.append((i, fwd, f_bound, back, b_bound, bool(ok)))
    i = np.arange(n)
    c = float(np.min(prof.delta[:n] / (sel.beta * (n - i) / n)))
    above = sel.nbeta >= 0.5 * math.log(11 * n)
    return DriftBoundsReport(True, "", rows, c, above)


@dataclass(frozen=True)
class NegativeDriftReport:
    """Hypotheses of the negative-drift theorem with self-loops on ``[a, b]``.

    Each row is ``(distance, drift_toward_zero, drift_bound, jump_ratio,
    drift_ok, jumps_ok)`` where ``jump_ratio`` is the largest
    ``p_{k,k+-d} (1+delta)^d / (r (1 - p_kk))`` over ``d >= 1`` (must be <= 1).
    """

    a: int
    b: int
    rows: list

    @property
    def drift_condition(self) -> bool:
        return all(r[4] for r in self.rows)

    @property
    def jump_condition(self) -> bool:
        return all(r[5] for r in self.rows)

    @property
    def holds(self) -> bool:
        return self.drift_condition and self.jump_condition


def check_negative_drift(
    chain: OnesLatticeChain,
    a: int,
    b: int,
    epsilon: float,
    r: float,
    delta: float,
    orientation: str = "zeros",
) -> NegativeDriftReport:
    """Evaluate both negative-drift hypotheses on distance states ``a..b``.

    ``orientation='zeros'`` measures distance as the number of zero-bits
    (distance 0 is the all-ones optimum); ``'ones'`` uses the ones-count.
    The drift condition is ``E[k - X'] < -epsilon (1 - p_kk)``; the jump
    condition is ``p_{k,k+-d} <= r (1 - p_kk) / (1 + delta)^d`` for all d.
    """
    if not epsilon > 0:
        raise ValueError("epsilon must be > 0")
    if not (r > 0 and delta > 0):
        raise ValueError("r and delta must be > 0")
    n = chain.n
    if not (0 < a < b <= n):
        raise ValueError(f"need 0 < a < b <= n, got a={a}, b={b}, n={n}")
    if orientation == "zeros":
        P = chain.P[::-1, ::-1]
        exit_rate = chain.exit_rate[::-1]
    elif orientation == "ones":
        P = chain.P
        exit_rate = chain.exit_rate
    else:
        raise ValueError("orientation must be 'zeros' or 'ones'")
    states = np.arange(n + 1)
    rows = []
    for k in range(a, b + 1):
        move = float(exit_rate[k])
        toward_zero = float(np.sum((k - states) * P[k]))
        bound = -epsilon * move
        d = np.abs(states - k)
        mask = d > 0
        pos = mask & (P[k] > 0)
        if not pos.any():
            ratio = 0.0
        elif move > 0:
            log_ratio = np.log(P[k, pos]) + d[pos] * math.log1p(delta) - math.log(r * move)
            ratio = math.exp(min(float(log_ratio.max()), 700.0))
        else:
            ratio = math.inf
        rows.append((k, toward_zero, bound, ratio, bool(toward_zero < bound), bool(ratio <= 1.0)))
    return NegativeDriftReport(a, b, rows)
