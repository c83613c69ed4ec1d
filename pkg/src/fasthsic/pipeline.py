"""One-call independence tests on raw samples."""
from __future__ import annotations

from .centering import center_biased, center_unbiased
from .core import cumulants, statistic
from .errors import InputError
from .kernel import GramMatrix, KernelConfig, Sample, gram
from .nulldist import (
    TestResult,
    p_value_gamma,
    p_value_new,
    permutation_p_value,
    permutation_statistics,
)

METHODS = ("new", "gamma", "permutation")


def _method(name: str) -> str:
    name = "permutation" if name == "perm" else name
    if name not in METHODS:
        raise InputError(f"unknown method {name!r}; expected one of {METHODS}")
    return name


def test_grams(
    Kg: GramMatrix,
    Lg: GramMatrix,
    method: str = "new",
    perms: int = 200,
    seed: int = 0,
    threads: int = 1,
) -> TestResult:
    """Run one of the three tests on precomputed Gram matrices."""
    method = _method(method)
    if Kg.n != Lg.n:
        raise InputError(f"samples are not paired: {Kg.n} vs {Lg.n} observations")
    if Kg.n < 3:
        raise InputError("independence tests need n >= 3")

    Kc, Lc = center_unbiased(Kg), center_unbiased(Lg)
    if method == "gamma":
        # H-centered statistic; moments from the unbiased centering, whose
        # mean estimate does not carry the O(1/n) downward bias of H K H
        stat = statistic(center_biased(Kg), center_biased(Lg))
        result = p_value_gamma(stat, cumulants(Kc), cumulants(Lc))
    else:
        stat = statistic(Kc, Lc)
        if method == "new":
            result = p_value_new(stat, cumulants(Kc), cumulants(Lc))
        else:
            if perms < 1:
                raise InputError(f"need at least one permutation, got {perms}")
            permuted = permutation_statistics(Kc, Lc, perms, seed, threads)
            exceed = int((permuted >= stat.value).sum())
            result = TestResult(
                "permutation",
                stat.value,
                permutation_p_value(stat.value, permuted),
                stat.n,
                {"m": perms, "exceed_count": exceed, "seed": seed},
            )
    result.sigma2_x = Kg.sigma2
    result.sigma2_y = Lg.sigma2
    return result


test_grams.__test__ = False  # not a pytest test


def hsic_test(
    x: Sample,
    y: Sample,
    method: str = "new",
    kernel_x: KernelConfig = KernelConfig(),
    kernel_y: KernelConfig = KernelConfig(),
    perms: int = 200,
    seed: int = 0,
    threads: int = 1,
) -> TestResult:
    """Test independence of paired samples ``x`` and ``y``.

    ``method`` is ``"new"`` (unbiased statistic, three-cumulant chi-square
    approximation), ``"gamma"`` (H-centered statistic, Gamma law matched to
    the estimated mean and variance) or ``"permutation"`` (unbiased
    statistic, ``perms`` permutations).
    """
    _method(method)
    if x.n != y.n:
        raise InputError(f"samples are not paired: {x.n} vs {y.n} observations")
    return test_grams(gram(x, kernel_x), gram(y, kernel_y), method, perms, seed, threads)
