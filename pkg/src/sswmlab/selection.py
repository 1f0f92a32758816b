"""Fixation probability of a single mutant and its analytic envelope.

The acceptance rule of the SSWM process is Kimura's fixation probability

    p_fix(df) = (1 - exp(-2*beta*df)) / (1 - exp(-2*N*beta*df))

with p_fix(0) = 1/N and p_fix = 1 identically when N = 1.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np

__all__ = [
    "SelectionParams",
    "ParameterDomainError",
    "p_fix",
    "log_p_fix",
    "p_fix_array",
    "p_fix_bounds",
    "nbeta_threshold",
]

# below this |2*beta*df| the ratio of expm1 terms is used as-is; it is
# accurate there and avoids 0/0 near df = 0
SMALL_X = 1e-4
# 2*N*beta*df below this switches to the factored log-domain form
OVERFLOW_X = -700.0


class ParameterDomainError(ValueError):
    """Raised when (N, beta) or a fitness difference is outside the valid domain."""


@dataclass(frozen=True)
class SelectionParams:
    """Scaled population size ``N`` and selection strength ``beta``.

    ``N`` is real-valued; the thresholds of interest (e.g. ``N*beta = ln(11n)/2``)
    are rarely integers. ``beta > 1`` is accepted with a warning unless
    ``strict_beta`` is set.
    """

    N: float
    beta: float
    strict_beta: bool = False

    def __post_init__(self):
        N, beta = float(self.N), float(self.beta)
        if not (math.isfinite(N) and N >= 1.0):
            raise ParameterDomainError(f"N must be a finite real >= 1, got {self.N!r}")
        if not (math.isfinite(beta) and beta > 0.0):
            raise ParameterDomainError(f"beta must be a finite real > 0, got {self.beta!r}")
        if beta > 1.0:
            if self.strict_beta:
                raise ParameterDomainError(f"beta={beta} > 1 rejected (strict_beta)")
            warnings.warn(f"beta={beta} exceeds 1; outside the analysed range", stacklevel=3)
        object.__setattr__(self, "N", N)
        object.__setattr__(self, "beta", beta)

    @classmethod
    def from_nbeta(cls, nbeta: float, beta: float, strict_beta: bool = False) -> "SelectionParams":
        """Build parameters from the product ``N*beta`` and ``beta``."""
        return cls(N=nbeta / beta, beta=beta, strict_beta=strict_beta)

    @property
    def nbeta(self) -> float:
        return self.N * self.beta


def nbeta_threshold(n: int) -> float:
    """``ln(11 n) / 2``, the population-size threshold for efficient hill climbing."""
    return 0.5 * math.log(11 * n)


def _check(params):
    if not isinstance(params, SelectionParams):
        raise TypeError("params must be a SelectionParams")
    return params.N, params.beta


def _p_fix(df, N, beta):
    if N == 1.0:
        return 1.0
    x = 2.0 * beta * df
    if x == 0.0:
        # also catches differences so small that 2*beta*df underflows
        return 1.0 / N
    if N * x < OVERFLOW_X:
        # (e^y - 1)/(e^{Ny} - 1) with y = -x > 0, factored to avoid overflow
        y = -x
        return math.exp(-(N - 1.0) * y) * (-math.expm1(-y)) / (-math.expm1(-N * y))
    # expm1 covers both the |x| < SMALL_X regime and the ordinary one
    return math.expm1(-x) / math.expm1(-N * x)


def p_fix(delta: float, params: SelectionParams) -> float:
    """Probability that a mutant with fitness difference ``delta`` fixes.

    Parameters
    ----------
    delta : float
        Fitness difference ``f(y) - f(x)``; any finite real.
    params : SelectionParams

    Returns
    -------
    float
        Value in [0, 1]. Exactly 1 for ``N == 1`` and ``1/N`` for ``delta == 0``.
    """
    N, beta = _check(params)
    df = float(delta)
    if not math.isfinite(df):
        raise ParameterDomainError(f"fitness difference must be finite, got {delta!r}")
    return _p_fix(df, N, beta)


def log_p_fix(delta: float, params: SelectionParams) -> float:
    """Natural log of :func:`p_fix`, finite even where ``p_fix`` underflows."""
    N, beta = _check(params)
    df = float(delta)
    if not math.isfinite(df):
        raise ParameterDomainError(f"fitness difference must be finite, got {delta!r}")
    if N == 1.0:
        return 0.0
    x = 2.0 * beta * df
    if x == 0.0:
        return -math.log(N)
    if x < 0.0:
        y = -x
        return -(N - 1.0) * y + math.log(-math.expm1(-y)) - math.log(-math.expm1(-N * y))
    return math.log(-math.expm1(-x)) - math.log(-math.expm1(-N * x))


def p_fix_array(delta, params: SelectionParams) -> np.ndarray:
    """Vectorised :func:`p_fix` over an array of fitness differences."""
    N, beta = _check(params)
    df = np.asarray(delta, dtype=float)
    out = np.empty_like(df)
    if N == 1.0:
        out.fill(1.0)
        return out
    x = 2.0 * beta * df
    zero = x == 0.0
    big_neg = N * x < OVERFLOW_X
    normal = ~(zero | big_neg)
    out[zero] = 1.0 / N
    y = -x[big_neg]
    out[big_neg] = np.exp(-(N - 1.0) * y) * (-np.expm1(-y)) / (-np.expm1(-N * y))
    xn = x[normal]
    out[normal] = np.expm1(-xn) / np.expm1(-N * xn)
    return out


def p_fix_bounds(delta: float, params: SelectionParams) -> tuple[float, float]:
    """Lower and upper envelope of :func:`p_fix`.

    For ``delta >= 0``::

        2*b*df / (1 + 2*b*df)  <=  p_fix  <=  2*b*df / (1 - exp(-2*N*b*df))

    For ``delta < 0``::

        -2*b*df / exp(-2*N*b*df)  <=  p_fix  <=  exp(-2*b*df) / (exp(-2*N*b*df) - 1)

    The upper value is a bound, not a probability, and may exceed 1. At
    ``delta == 0`` the non-negative branch is used and the upper value is its
    limit ``1/N``. The inequalities are proven for integer ``N``; real ``N`` is
    accepted.

    Returns
    -------
    (lower, upper) : tuple of float
    """
    N, beta = _check(params)
    df = float(delta)
    if not math.isfinite(df):
        raise ParameterDomainError(f"fitness difference must be finite, got {delta!r}")
    x = 2.0 * beta * df
    if df >= 0.0:
        lower = x / (1.0 + x)
        upper = 1.0 / N if x == 0.0 else x / (-math.expm1(-N * x))
        return lower, upper
    # lower = -x * e^{N x};  upper = e^{(N-1) x} / (1 - e^{N x})
    lower = -x * math.exp(N * x)
    denom = -math.expm1(N * x)
    if denom == 0.0:
        raise ParameterDomainError("upper bound undefined: 2*N*beta*delta rounds to 0")
    upper = math.exp((N - 1.0) * x) / denom
    return lower, upper
