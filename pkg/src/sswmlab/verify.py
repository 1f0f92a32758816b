"""Property suites behind ``sswmlab verify``.

Each suite returns a list of :class:`Check`; a suite passes when all of its
checks pass. The suites are exhaustive over small parameter ranges.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np

from .dynamics import AlgorithmConfig
from .fitness import Problem
from .markov import build_chain, check_drift_bounds
from .mutation import jump_matrix, mut_exact
from .selection import SelectionParams, log_p_fix, p_fix, p_fix_bounds

__all__ = ["Check", "SUITES", "run_suites", "mask_enumeration"]

BETAS = (1e-4, 1e-3, 1e-2, 1e-1, 1.0)
POP_SIZES = (1.0, 2.0, 10.0, 100.0, 1e4)
DELTAS = np.round(np.arange(-1000, 1001) * 0.01, 2)


@dataclass(frozen=True)
class Check:
    name: str
    passed: bool
    detail: str = ""

    def line(self) -> str:
        return f"[{'PASS' if self.passed else 'FAIL'}] {self.name}" + (f": {self.detail}" if self.detail else "")


# --------------------------------------------------------------------------
# selection


def check_sandwich(rtol=1e-12) -> Check:
    worst = 0.0
    where = None
    for beta in BETAS:
        for N in POP_SIZES:
            sel = SelectionParams(N, beta)
            for df in DELTAS:
                p = p_fix(df, sel)
                lo, hi = p_fix_bounds(df, sel)
                viol = max(lo - p * (1 + rtol), p - hi * (1 + rtol), 0.0)
                if viol > worst:
                    worst, where = viol, (beta, N, df)
    return Check("p_fix envelope holds on grid", worst == 0.0, "" if where is None else f"worst at {where}")


def check_monotone() -> Check:
    bad = []
    for beta in BETAS:
        for N in POP_SIZES:
            sel = SelectionParams(N, beta)
            if N == 1.0:
                if any(p_fix(df, sel) != 1.0 for df in DELTAS):
                    bad.append((beta, N))
                continue
            # log scale: p_fix underflows for large negative differences
            lp = np.array([log_p_fix(df, sel) for df in DELTAS])
            if not np.all(np.diff(lp) > 0):
                bad.append((beta, N))
    return Check("p_fix strictly increasing for N > 1, constant for N = 1", not bad, f"violations {bad}" if bad else "")


def check_limits() -> Check:
    sel = SelectionParams(10, 1.0)
    lo, hi = p_fix(-1e3, sel), p_fix(1e3, sel)
    cont = [abs(p_fix(s * 1e-9, SelectionParams(N, 1.0)) - 1 / N) for N in (2, 100) for s in (-1, 1)]
    ok = lo <= 1e-12 and abs(1 - hi) <= 1e-12 and max(cont) < 1e-6
    return Check("p_fix limits and continuity at 0", ok, f"p(-1e3)={lo:.3g} p(1e3)={hi!r} cont={max(cont):.3g}")


# --------------------------------------------------------------------------
# mutation


def mask_enumeration(n: int) -> np.ndarray:
    """``mut(i, j)`` for global mutation by summing over all ``2**n`` flip masks."""
    idx = np.arange(2**n)
    masks = ((idx[:, None] >> np.arange(n)) & 1).astype(np.int64)
    flips = masks.sum(axis=1)
    prob = (1.0 / n) ** flips * (1.0 - 1.0 / n) ** (n - flips)
    out = np.zeros((n + 1, n + 1))
    for i in range(n + 1):
        x = np.zeros(n, dtype=np.int64)
        x[:i] = 1
        j = (masks ^ x).sum(axis=1)
        out[i] = np.bincount(j, weights=prob, minlength=n + 1)
    return out


def check_mask_oracle(n_max=12, atol=1e-12) -> Check:
    worst = 0.0
    for n in range(1, n_max + 1):
        ref = mask_enumeration(n)
        mat = jump_matrix(n, "global")
        scal = np.array([[mut_exact(n, i, j, "global") for j in range(n + 1)] for i in range(n + 1)])
        worst = max(worst, np.abs(ref - mat).max(), np.abs(ref - scal).max())
    return Check(f"mut_exact equals mask enumeration for n <= {n_max}", worst <= atol, f"max error {worst:.2e}")


def check_row_sums(n_max=200, atol=1e-10) -> Check:
    worst = 0.0
    for n in range(1, n_max + 1):
        for kind in ("global", "local"):
            worst = max(worst, np.abs(jump_matrix(n, kind).sum(axis=1) - 1).max())
    return Check(f"jump kernel rows sum to 1 for n <= {n_max}", worst <= atol, f"max error {worst:.2e}")


def _bound_matrix(n):
    # B[i, k]: upper bound on mut(i, i+k) for k >= 1 (upward direction)
    i = np.arange(n + 1)[:, None]
    k = np.arange(1, n + 1)[None, :]
    with np.errstate(divide="ignore"):
        logb = (
            k * np.log((n - i) / n)
            + (n - k) * math.log1p(-1.0 / n)
            + math.log(1.14)
            - np.vectorize(math.lgamma)(k + 1)
        )
    return np.exp(logb)


def check_jump_bounds(n_max=100, rtol=1e-12) -> Check:
    bad = []
    for n in range(2, n_max + 1):
        M = jump_matrix(n, "global")
        B = _bound_matrix(n)
        for i in range(n + 1):
            for k in range(1, n + 1):
                if i + k <= n and M[i, i + k] > B[i, k - 1] * (1 + rtol):
                    bad.append((n, i, k, "up"))
                # downward: mut(i, i-k) <= bound with i ones movable = mirror of n-i
                if i - k >= 0 and M[i, i - k] > B[n - i, k - 1] * (1 + rtol):
                    bad.append((n, i, k, "down"))
    return Check(f"jump probabilities below 1.14/k! bound for n <= {n_max}", not bad, f"{len(bad)} violations" if bad else "")


def check_decay(n_max=100, rtol=1e-12) -> Check:
    bad = []
    for n in range(1, n_max + 1):
        M = jump_matrix(n, "global")
        for i in range(n):
            row = M[i, i + 1 :]
            # row[k-1] = mut(i, i+k); need mut(i,i+k) >= 2 mut(i,i+k+1)
            if np.any(row[:-1] * (1 + rtol) < 2 * row[1:]):
                bad.append((n, i))
    return Check(f"upward jumps at least halve per extra bit for n <= {n_max}", not bad, f"violations {bad[:5]}" if bad else "")


def check_conditional(n_max=60, rtol=1e-12) -> Check:
    worst = math.inf
    for n in range(1, n_max + 1):
        M = jump_matrix(n, "global")
        for i in range(n):
            tail = np.cumsum(M[i, ::-1])[::-1]  # tail[j] = sum_{m >= j} M[i, m]
            ratio = M[i, i + 1 :] / tail[i + 1 :]
            worst = min(worst, float(ratio.min()))
    return Check(f"conditional jump ratio >= 1/2 for n <= {n_max}", worst >= 0.5 * (1 - rtol), f"min ratio {worst:.6f}")


# --------------------------------------------------------------------------
# drift


def check_onemax_drift(n_max=200) -> Check:
    failures = []
    count = 0
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        for n in range(2, n_max + 1):
            nbetas = (1.0, 0.5 * math.log(11 * n), math.log(n) if n > 2 else 1.0)
            for mut in ("global", "local"):
                for beta in (1e-3, 0.1, 0.5, 1.0):
                    for nb in nbetas:
                        if nb / beta < 1:
                            continue
                        cfg = AlgorithmConfig("sswm", mut, Problem("onemax", n), SelectionParams.from_nbeta(nb, beta))
                        rep = check_drift_bounds(build_chain(cfg))
                        count += 1
                        if not rep.passed:
                            failures.append((n, mut, beta, round(nb, 4)))
    return Check(
        f"OneMax drift bounds hold for n <= {n_max} ({count} chains)",
        not failures,
        f"failures {failures[:5]}" if failures else "",
    )


SUITES = {
    "selection": (check_sandwich, check_monotone, check_limits),
    "mutation": (check_mask_oracle, check_row_sums, check_jump_bounds, check_decay, check_conditional),
    "drift": (check_onemax_drift,),
}


def run_suites(names=("all",)) -> list[Check]:
    if "all" in names:
        names = tuple(SUITES)
    unknown = [s for s in names if s not in SUITES]
    if unknown:
        raise ValueError(f"unknown suite(s) {unknown}; choose from {sorted(SUITES)} or 'all'")
    return [check() for name in names for check in SUITES[name]]
