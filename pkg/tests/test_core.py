from itertools import combinations

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from fasthsic import (
    InputError,
    KernelConfig,
    Sample,
    center_biased,
    center_unbiased,
    cumulants,
    gram,
    hsic_estimate,
    statistic,
)
from fasthsic.centering import CenteredGram
from fasthsic.core import StatisticValue

from conftest import random_symmetric


def brute_cumulants(A):
    n = A.shape[0]
    c1 = np.trace(A) / n
    c2 = 2 * sum(A[i, j] ** 2 for i, j in combinations(range(n), 2)) / (n * (n - 1))
    c3 = 6 * sum(
        A[i, j] * A[j, k] * A[k, i] for i, j, k in combinations(range(n), 3)
    ) / (n * (n - 1) * (n - 2))
    return c1, c2, c3


def unbiased(values):
    return CenteredGram(np.asarray(values, dtype=float), "unbiased")


def biased(values):
    return CenteredGram(np.asarray(values, dtype=float), "biased")



class TestStatistic:
    def test_zero_factor(self, rng):
        assert statistic(unbiased(np.zeros((4, 4))), unbiased(random_symmetric(rng, 4))).value == 0

    def test_unbiased_example(self):
        A = unbiased([[0.5, 0.0], [0.0, 0.5]])
        s = statistic(A, A)
        assert s.value == pytest.approx(0.25)
        assert s.kind == "new" and s.n == 2

    def test_biased_example(self):
        H = biased([[0.5, -0.5], [-0.5, 0.5]])
        s = statistic(H, H)
        assert s.value == pytest.approx(0.5)
        assert s.kind == "gretton"

    def test_matches_trace(self, rng):
        A, B = random_symmetric(rng, 9), random_symmetric(rng, 9)
        assert statistic(unbiased(A), unbiased(B)).value == pytest.approx(
            np.trace(A @ B) / 9, rel=1e-12
        )

    def test_mode_mismatch(self):
        with pytest.raises(InputError):
            statistic(unbiased(np.eye(3)), biased(np.eye(3)))

    def test_size_mismatch(self):
        with pytest.raises(InputError):
            statistic(unbiased(np.eye(3)), unbiased(np.eye(4)))

    @settings(max_examples=50, deadline=None)
    @given(st.integers(2, 12), st.integers(0, 2 ** 32 - 1))
    def test_symmetric_in_arguments(self, n, seed):
        r = np.random.default_rng(seed)
        A, B = unbiased(random_symmetric(r, n)), unbiased(random_symmetric(r, n))
        assert statistic(A, B).value == statistic(B, A).value

    @settings(max_examples=50, deadline=None)
    @given(st.integers(2, 12), st.integers(0, 2 ** 32 - 1))
    def test_self_pairing_nonnegative(self, n, seed):
        A = unbiased(random_symmetric(np.random.default_rng(seed), n))
        assert statistic(A, A).value >= 0

    def test_joint_permutation_invariance(self, rng):
        x, y = rng.normal(size=(15, 3)), rng.normal(size=(15, 2))
        perm = rng.permutation(15)

        def tn(x, y):
            return statistic(center_unbiased(gram(Sample.vector(x))),
                             center_unbiased(gram(Sample.vector(y)))).value

        assert tn(x[perm], y[perm]) == pytest.approx(tn(x, y), abs=1e-12)

    def test_h_centered_statistic_nonnegative(self, rng):
        for _ in range(20):
            x, y = rng.normal(size=(10, 2)), rng.normal(size=(10, 2))
            s = statistic(center_biased(gram(Sample.vector(x))), center_biased(gram(Sample.vector(y))))
            assert s.value >= -1e-10

    def test_closeness_of_statistics_improves_with_n(self):
        def gap(n, seed):
            r = np.random.default_rng(seed)
            Kg = gram(Sample.vector(r.normal(size=(n, 2))))
            Lg = gram(Sample.vector(r.normal(size=(n, 2))))
            new = statistic(center_unbiased(Kg), center_unbiased(Lg)).value
            old = statistic(center_biased(Kg), center_biased(Lg)).value
            return abs(new - old)

        meds = [np.median([gap(n, 1000 * n + s) for s in range(40)]) for n in (50, 100, 200, 400)]
        assert all(a > b for a, b in zip(meds, meds[1:]))


class TestHsicEstimate:
    @pytest.mark.parametrize("value,n,expected", [(0.25, 2, 0.125), (0.0, 7, 0.0), (0.5, 2, 0.25)])
    def test_division(self, value, n, expected):
        assert hsic_estimate(StatisticValue(value, "new", n)) == expected


class TestCumulants:
    def test_zero_matrix(self):
        c = cumulants(unbiased(np.zeros((5, 5))))
        assert (c.c1, c.c2, c.c3) == (0, 0, 0)

    def test_identity(self):
        c = cumulants(unbiased(np.eye(3)))
        assert (c.c1, c.c2, c.c3) == (1, 0, 0)

    def test_random_eight_by_eight(self, rng):
        A = random_symmetric(rng, 8)
        c = cumulants(unbiased(A))
        np.testing.assert_allclose([c.c1, c.c2, c.c3], brute_cumulants(A), rtol=1e-10)

    @settings(max_examples=60, deadline=None)
    @given(st.integers(3, 15), st.integers(0, 2 ** 32 - 1))
    def test_trace_formulas_match_sums(self, n, seed):
        A = random_symmetric(np.random.default_rng(seed), n)
        c = cumulants(unbiased(A))
        expected = brute_cumulants(A)
        # c1 and c3 can be near zero by cancellation; measure against term size
        mags = [np.abs(np.diag(A)).mean(), np.mean(A ** 2), np.abs(A).max() ** 3]
        for got, want, mag in zip([c.c1, c.c2, c.c3], expected, mags):
            assert abs(got - want) <= 1e-10 * max(abs(want), mag)

    def test_second_moment_nonnegative(self, rng):
        for n in range(3, 12):
            assert cumulants(unbiased(random_symmetric(rng, n))).c2 >= 0

    def test_needs_three_points(self):
        with pytest.raises(InputError):
            cumulants(unbiased(np.eye(2)))

    @pytest.mark.slow
    def test_second_moment_consistent(self):
        def c2(n, seed):
            x = np.random.default_rng(seed).normal(size=n)
            return cumulants(center_unbiased(gram(Sample.vector(x), KernelConfig(1.0)))).c2

        small = np.median([c2(500, s) for s in range(50)])
        large = np.median([c2(2000, 500 + s) for s in range(50)])
        assert abs(large - small) <= 0.1 * large
