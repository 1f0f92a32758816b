"""Local and global mutation, and the ones-count jump kernel ``mut(i, j)``.

Global mutation flips every bit independently with probability ``1/n``. It is
sampled as ``K ~ Binomial(n, 1/n)`` (inversion of a tabulated CDF) followed by
``K`` distinct positions drawn with Floyd's algorithm, which is
distribution-identical to per-bit Bernoulli trials and consumes only ``1 + K``
uniforms. An index below ``m`` is drawn as ``floor(m * U)``; the deviation from
exact uniformity is below ``m * 2**-53``. The simulation kernel draws in exactly
the same order, so :func:`mutate` can replay a kernel trajectory.
"""

from __future__ import annotations

import enum
import functools
import math

import numpy as np
from scipy.special import gammaln
from scipy.stats import binom

from .fitness import as_bits

__all__ = [
    "MutationKind",
    "MutationDomainError",
    "mutate",
    "flip_positions",
    "flip_count_cdf",
    "mut_exact",
    "mut_upper_bound",
    "jump_matrix",
]


class MutationKind(str, enum.Enum):
    LOCAL = "local"
    GLOBAL = "global"

    @classmethod
    def parse(cls, value) -> "MutationKind":
        if isinstance(value, cls):
            return value
        try:
            return cls(str(value).lower())
        except ValueError:
            raise ValueError(f"unknown mutation kind {value!r}; choose 'local' or 'global'") from None


class MutationDomainError(ValueError):
    pass


@functools.lru_cache(maxsize=64)
def flip_count_cdf(n: int) -> np.ndarray:
    """CDF of the number of bits flipped by a global mutation, ``Bin(n, 1/n)``."""
    cdf = binom.cdf(np.arange(n + 1), n, 1.0 / n)
    cdf[-1] = np.inf
    cdf.flags.writeable = False
    return cdf


def _floyd(rng, n, k):
    # k distinct positions out of range(n), uniformly over k-subsets
    chosen = []
    seen = set()
    for j in range(n - k, n):
        t = int(rng.random() * (j + 1))
        if t in seen:
            t = j
        seen.add(t)
        chosen.append(t)
    return chosen


def flip_positions(n: int, kind, rng: np.random.Generator) -> list[int]:
    """Positions flipped by one mutation of a length-``n`` string."""
    kind = MutationKind.parse(kind)
    if kind is MutationKind.LOCAL:
        return [int(rng.random() * n)]
    k = int(np.searchsorted(flip_count_cdf(n), rng.random(), side="right"))
    return _floyd(rng, n, k)


def mutate(x, kind, rng: np.random.Generator) -> np.ndarray:
    """Return a mutated copy of ``x``.

    Local mutation flips exactly one uniformly chosen bit. Global mutation
    flips each bit with probability ``1/n``; the offspring may equal the parent.
    """
    y = np.array(as_bits(x))
    pos = flip_positions(y.size, kind, rng)
    if pos:
        y[pos] ^= 1
    return y


def _check_counts(n, i, j):
    if not (isinstance(n, (int, np.integer)) and n >= 1):
        raise MutationDomainError(f"n must be a positive integer, got {n!r}")
    for name, v in (("i", i), ("j", j)):
        if not (0 <= v <= n):
            raise MutationDomainError(f"{name}={v} outside 0..{n}")


def _log_binom(a, b):
    return gammaln(a + 1) - gammaln(b + 1) - gammaln(a - b + 1)


def mut_exact(n: int, i: int, j: int, kind="global") -> float:
    """Probability that one mutation turns a string with ``i`` ones into one with ``j``.

    Global mutation sums over the number ``l`` of flipped one-bits::

        sum_l C(i, l) C(n-i, k+l) n^-(k+2l) (1-1/n)^(n-k-2l),   k = j - i

    evaluated term-wise in log space and summed with ``math.fsum`` after
    scaling by the largest term.
    """
    _check_counts(n, i, j)
    kind = MutationKind.parse(kind)
    i, j = int(i), int(j)
    if kind is MutationKind.LOCAL:
        if j == i + 1:
            return (n - i) / n
        if j == i - 1:
            return i / n
        return 0.0
    if n == 1:
        return 1.0 if j == 1 - i else 0.0
    k = j - i
    if k < 0:
        # mut(i, i-k) = mut(n-i, n-i+k)
        i, k = n - i, -k
    zeros = n - i
    l_max = min(i, zeros - k)
    if l_max < 0:
        return 0.0
    ls = np.arange(l_max + 1)
    logs = (
        _log_binom(i, ls)
        + _log_binom(zeros, k + ls)
        - (k + 2 * ls) * math.log(n)
        + (n - k - 2 * ls) * math.log1p(-1.0 / n)
    )
    top = float(logs.max())
    return math.exp(top) * math.fsum(np.exp(logs - top).tolist())


def mut_upper_bound(n: int, i: int, k: int, direction: str = "up") -> float:
    """Upper bound on ``mut(i, i+k)`` (``direction='up'``) or ``mut(i, i-k)``.

    ``(z/n)^k (1-1/n)^(n-k) * 1.14/k!`` with ``z = n-i`` zeros for upward
    jumps and ``z = i`` ones for downward jumps.
    """
    if not (isinstance(k, (int, np.integer)) and k >= 1):
        raise MutationDomainError(f"jump length must be a positive integer, got {k!r}")
    _check_counts(n, i, i)
    if direction == "up":
        movable = n - i
    elif direction == "down":
        movable = i
    else:
        raise ValueError("direction must be 'up' or 'down'")
    if movable == 0:
        return 0.0
    if n == 1:
        keep = 1.0 if k == n else 0.0
        return (movable / n) ** k * keep * 1.14 / math.factorial(k)
    log_b = (
        k * math.log(movable / n)
        + (n - k) * math.log1p(-1.0 / n)
        + math.log(1.14)
        - math.lgamma(k + 1)
    )
    return math.exp(log_b)


def jump_matrix(n: int, kind="global") -> np.ndarray:
    """``(n+1) x (n+1)`` matrix of ``mut(i, j)``; every row sums to one.

    The result is cached and read-only.

    Row ``i`` of the global kernel is the law of ``i - A + B`` with
    ``A ~ Bin(i, 1/n)`` and ``B ~ Bin(n-i, 1/n)``, computed as a direct
    convolution of the two probability mass functions (all terms positive).
    """
    kind = MutationKind.parse(kind)
    if not (isinstance(n, (int, np.integer)) and n >= 1):
        raise MutationDomainError(f"n must be a positive integer, got {n!r}")
    return _jump_matrix(int(n), kind)


@functools.lru_cache(maxsize=512)
def _jump_matrix(n, kind):
    M = np.zeros((n + 1, n + 1))
    if kind is MutationKind.LOCAL:
        idx = np.arange(n)
        M[idx, idx + 1] = (n - idx) / n
        M[idx + 1, idx] = (idx + 1) / n
        M.flags.writeable = False
        return M
    p = 1.0 / n
    for i in range(n + 1):
        lose = binom.pmf(np.arange(i + 1), i, p)
        gain = binom.pmf(np.arange(n - i + 1), n - i, p)
        # index (i - a) + b = j
        M[i] = np.convolve(lose[::-1], gain)
    M.flags.writeable = False
    return M
