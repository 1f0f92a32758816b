"""Benchmark pseudo-Boolean functions: OneMax, Cliff_d and Balance.

Bit strings are 1-D ``numpy.uint8`` arrays (any 0/1 sequence or a string
such as ``"10110"`` is accepted on input).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

__all__ = [
    "as_bits",
    "onemax",
    "cliff",
    "leading_ones",
    "balance",
    "balance_branch",
    "Problem",
    "ProblemError",
    "FITNESS_NAMES",
]

FITNESS_NAMES = ("onemax", "cliff", "balance")


class ProblemError(ValueError):
    """Invalid problem binding (unknown name, bad ``d``, odd ``n`` for balance)."""


def as_bits(x) -> np.ndarray:
    """Coerce ``x`` to a read-only ``uint8`` array of 0/1 values."""
    if isinstance(x, str):
        arr = np.frombuffer(x.encode("ascii"), dtype=np.uint8) - ord("0")
    else:
        arr = np.asarray(x)
        if arr.dtype == bool:
            arr = arr.astype(np.uint8)
    if arr.ndim != 1 or arr.size == 0:
        raise ValueError("bit string must be a non-empty 1-D sequence")
    if np.any((arr != 0) & (arr != 1)):
        raise ValueError("bit string entries must be 0 or 1")
    out = np.array(arr, dtype=np.uint8)
    out.flags.writeable = False
    return out


def onemax(x) -> int:
    """Number of one-bits."""
    return int(np.count_nonzero(as_bits(x)))


def _check_cliff(n, d):
    if not (isinstance(d, (int, np.integer)) and 2 <= d <= n / 2):
        raise ProblemError(f"cliff needs an integer 2 <= d <= n/2, got d={d!r} for n={n}")


def cliff_level(ones: int, n: int, d: int) -> float:
    """Cliff_d value of any string with ``ones`` one-bits."""
    if ones <= n - d:
        return float(ones)
    return ones - d + 0.5


def cliff(x, d: int) -> float:
    """Cliff_d: ``|x|`` up to ``n - d`` ones, then ``|x| - d + 1/2``.

    The unique optimum is the all-ones string with value ``n - d + 1/2``.
    """
    bits = as_bits(x)
    n = bits.size
    _check_cliff(n, d)
    return cliff_level(int(np.count_nonzero(bits)), n, d)


def leading_ones(a) -> int:
    """Length of the longest all-ones prefix."""
    bits = as_bits(a)
    zeros = np.flatnonzero(bits == 0)
    return int(zeros[0]) if zeros.size else int(bits.size)


def _balance_parts(x):
    bits = as_bits(x)
    n = bits.size
    if n % 2:
        raise ProblemError(f"balance needs even n, got n={n}")
    h = n // 2
    a, b = bits[:h], bits[h:]
    return n, leading_ones(a), h - int(np.count_nonzero(a)), int(np.count_nonzero(b))


def balance_branch(x) -> int:
    """Index (1-4) of the Balance case that ``x`` falls into.

    1: optimum, 2: slope ``|b| + n*LO(a)``, 3: trap ``n^2*LO(a)``, 4: zero.
    """
    n, lo, zeros_a, ones_b = _balance_parts(x)
    return _branch(n, lo, zeros_a, ones_b)


def _branch(n, lo, zeros_a, ones_b):
    if lo == n // 2:
        return 1
    if n / 16 < ones_b < 7 * n / 16:
        return 2
    if zeros_a > math.sqrt(n):
        return 3
    return 4


def balance_value(n: int, lo: int, zeros_a: int, ones_b: int) -> float:
    """Balance value from the sufficient statistics of ``x = ab``."""
    br = _branch(n, lo, zeros_a, ones_b)
    if br == 1:
        return float(n) ** 3
    if br == 2:
        return float(ones_b + n * lo)
    if br == 3:
        return float(n * n * lo)
    return 0.0


def balance(x) -> float:
    """Static Balance function on ``x = ab`` with halves of length ``n/2``.

    The four cases are tested in order; a string with ``LO(a) = n/2`` scores
    ``n^3`` whatever ``b`` is. ``zeros(a) > sqrt(n)`` is a strict comparison,
    so for square ``n`` the point ``zeros(a) == sqrt(n)`` is not in the trap.
    """
    return balance_value(*_balance_parts(x))


@dataclass(frozen=True)
class Problem:
    """A fitness function bound to a length ``n`` (and ``d`` for Cliff)."""

    name: str
    n: int
    d: int | None = None

    def __post_init__(self):
        if self.name not in FITNESS_NAMES:
            raise ProblemError(f"unknown fitness {self.name!r}; choose from {FITNESS_NAMES}")
        if not (isinstance(self.n, (int, np.integer)) and self.n >= 1):
            raise ProblemError(f"n must be a positive integer, got {self.n!r}")
        if self.name == "cliff":
            _check_cliff(self.n, self.d)
        elif self.d is not None:
            raise ProblemError(f"d only applies to cliff, got d={self.d!r} for {self.name}")
        if self.name == "balance" and self.n % 2:
            raise ProblemError(f"balance needs even n, got n={self.n}")

    @property
    def level_reducible(self) -> bool:
        return self.name in ("onemax", "cliff")

    def __call__(self, x) -> float:
        bits = as_bits(x)
        if bits.size != self.n:
            raise ValueError(f"expected {self.n} bits, got {bits.size}")
        if self.name == "onemax":
            return float(onemax(bits))
        if self.name == "cliff":
            return cliff(bits, self.d)
        return balance(bits)

    def level(self, ones: int) -> float:
        """Fitness of any string with ``ones`` one-bits (level-reducible only)."""
        if self.name == "onemax":
            return float(ones)
        if self.name == "cliff":
            return cliff_level(ones, self.n, self.d)
        raise ProblemError("balance is not a function of the ones-count")

    def level_profile(self) -> np.ndarray:
        return np.array([self.level(i) for i in range(self.n + 1)])

    @property
    def optimum_value(self) -> float:
        if self.name == "onemax":
            return float(self.n)
        if self.name == "cliff":
            return self.n - self.d + 0.5
        return float(self.n) ** 3

    def is_optimal(self, x) -> bool:
        return self(x) == self.optimum_value
