import math
from collections import Counter

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import stats

from sswmlab.mutation import (
    MutationDomainError,
    flip_positions,
    jump_matrix,
    mut_exact,
    mut_upper_bound,
    mutate,
)
from sswmlab.verify import mask_enumeration


class TestExamples:
    def test_global_small(self):
        assert mut_exact(3, 1, 2, "global") == pytest.approx(1 / 3, rel=1e-14)

    def test_local_forward(self):
        assert mut_exact(10, 4, 5, "local") == pytest.approx(0.6, rel=1e-15)

    @pytest.mark.parametrize("i", range(6))
    def test_local_never_stays(self, i):
        assert mut_exact(5, i, i, "local") == 0.0

    def test_bound_from_zero(self):
        b = mut_upper_bound(10, 0, 1)
        assert b == pytest.approx(0.9**9 * 1.14, rel=1e-13)
        assert mut_exact(10, 0, 1) == pytest.approx(0.9**9, rel=1e-13)
        assert mut_exact(10, 0, 1) <= b

    def test_bound_long_jump(self):
        assert mut_upper_bound(10, 5, 5) == pytest.approx(0.5**5 * 0.9**5 * 1.14 / 120, rel=1e-12)

    def test_bound_at_top(self):
        assert mut_upper_bound(10, 10, 1) == 0.0
        assert mut_upper_bound(10, 0, 1, direction="down") == 0.0

    def test_bound_needs_positive_k(self):
        with pytest.raises(MutationDomainError):
            mut_upper_bound(10, 3, 0)

    @pytest.mark.parametrize("args", [(3, -1, 0), (3, 0, 4), (0, 0, 0)])
    def test_out_of_range(self, args):
        with pytest.raises(MutationDomainError):
            mut_exact(*args)


def test_mask_oracle_small():
    for n in range(1, 9):
        np.testing.assert_allclose(jump_matrix(n, "global"), mask_enumeration(n), atol=1e-14, rtol=0)


def test_large_n_rows_finite():
    M = jump_matrix(1000, "global")
    assert np.all(np.isfinite(M))
    np.testing.assert_allclose(M.sum(axis=1), 1.0, atol=1e-10)
    assert mut_exact(1000, 500, 503) == pytest.approx(M[500, 503], rel=1e-10)


def test_jump_matrix_read_only():
    with pytest.raises(ValueError):
        jump_matrix(5)[0, 0] = 1.0


@settings(max_examples=200, deadline=None)
@given(st.integers(1, 80).flatmap(lambda n: st.tuples(st.just(n), st.integers(0, n), st.integers(0, n))))
def test_scalar_matches_matrix_and_symmetry(args):
    n, i, j = args
    for kind in ("global", "local"):
        p = mut_exact(n, i, j, kind)
        assert 0.0 <= p <= 1.0
        assert p == pytest.approx(jump_matrix(n, kind)[i, j], rel=1e-10, abs=1e-300)
        # complementing every bit maps i -> j onto (n-i) -> (n-j)
        assert p == pytest.approx(mut_exact(n, n - i, n - j, kind), rel=1e-10, abs=1e-300)


def test_local_mutation_uniform():
    rng = np.random.default_rng(1)
    counts = Counter(tuple(mutate("000", "local", rng)) for _ in range(30000))
    assert set(counts) == {(1, 0, 0), (0, 1, 0), (0, 0, 1)}
    _, p = stats.chisquare(list(counts.values()))
    assert p > 1e-4


def test_global_n1_always_flips():
    rng = np.random.default_rng(2)
    assert all(mutate("0", "global", rng)[0] == 1 for _ in range(200))


def test_global_no_flip_probability():
    n, reps = 10, 40000
    rng = np.random.default_rng(3)
    x = np.zeros(n, dtype=np.uint8)
    same = sum(not mutate(x, "global", rng).any() for _ in range(reps))
    p = (1 - 1 / n) ** n
    assert abs(same - reps * p) < 4 * math.sqrt(reps * p * (1 - p))


def test_flip_set_distribution_matches_bernoulli():
    # the count-then-positions sampler must produce every flip mask with
    # the per-bit Bernoulli probability (1/n)^k (1-1/n)^(n-k)
    n, reps = 4, 160000
    rng = np.random.default_rng(4)
    counts = np.zeros(2**n)
    for _ in range(reps):
        mask = 0
        for q in flip_positions(n, "global", rng):
            mask |= 1 << q
        counts[mask] += 1
    k = np.array([bin(m).count("1") for m in range(2**n)])
    expected = reps * (1 / n) ** k * (1 - 1 / n) ** (n - k)
    _, p = stats.chisquare(counts, expected)
    assert p > 1e-4


def test_positions_distinct():
    rng = np.random.default_rng(5)
    for _ in range(2000):
        pos = flip_positions(7, "global", rng)
        assert len(set(pos)) == len(pos)
        assert all(0 <= q < 7 for q in pos)


def test_sampled_jump_histogram():
    n, i, reps = 20, 10, 10**6
    rng = np.random.default_rng(6)
    x = np.zeros(n, dtype=np.int64)
    x[:i] = 1
    hist = np.zeros(n + 1)
    for _ in range(reps):
        pos = flip_positions(n, "global", rng)
        hist[i + int(np.sum(1 - 2 * x[pos]))] += 1
    p = jump_matrix(n, "global")[i]
    sigma = np.sqrt(reps * p * (1 - p))
    dev = np.abs(hist - reps * p)
    # buckets with negligible mass must be empty or nearly so
    assert np.all(dev <= 4 * sigma + 1)
