"""Null-distribution approximations and p-values.

Three routes from a statistic to a p-value:

* ``new``: the null law of the unbiased statistic is approximated by
  ``beta0 + beta1 * chi2_d`` with the three parameters chosen to match the
  estimated mean, variance and third central moment.
* ``gamma``: a two-moment Gamma fit to the biased (H-centered) statistic.
* ``permutation``: the y-sample is permuted ``m`` times.

Tail probabilities go through :func:`regularized_gamma_q`, a self-contained
series / continued-fraction evaluation of the regularized upper
incomplete gamma function.
"""
from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field
from typing import Any, Dict, Optional

import numpy as np

from .centering import CenteredGram, center_unbiased
from .core import CumulantEstimates, StatisticValue, statistic
from .errors import DegenerateNullError, HSICError, InputError, NumericalError
from .kernel import KernelConfig, Sample, gram
from .seeding import rng_for

__all__ = [
    "ChiSqMatch",
    "TestResult",
    "SkewFallback",
    "regularized_gamma_q",
    "chi_sq_sf",
    "gamma_sf",
    "match_three_cumulants",
    "match_two_cumulants",
    "p_value_new",
    "p_value_gamma",
    "permutation_statistics",
    "permutation_p_value",
    "p_value_permutation",
]

_EPS = 1e-15
_MAX_ITER = 500
_TINY = 1e-300


class SkewFallback(HSICError):
    """The estimated third cumulant is not positive; no chi-square match exists."""


@dataclass(frozen=True)
class ChiSqMatch:
    beta0: float
    beta1: float
    d: float

    def moments(self):
        """Mean, variance and third central moment of ``beta0 + beta1 chi2_d``."""
        b1, d = self.beta1, self.d
        return self.beta0 + b1 * d, 2 * b1 * b1 * d, 8 * b1 ** 3 * d

    @property
    def skewness(self) -> float:
        return math.sqrt(8 / self.d)


@dataclass
class TestResult:
    method: str
    statistic: float
    p_value: float
    n: int
    detail: Dict[str, Any] = field(default_factory=dict)
    sigma2_x: Optional[float] = None
    sigma2_y: Optional[float] = None

    __test__ = False  # keep pytest from collecting this class

    @property
    def hsic_estimate(self) -> float:
        return self.statistic / self.n

    def to_dict(self) -> Dict[str, Any]:
        out = asdict(self)
        out["hsic_estimate"] = self.hsic_estimate
        return out


# -- incomplete gamma -------------------------------------------------------


def _log_prefactor(a: float, x: float) -> float:
    return a * math.log(x) - x - math.lgamma(a)


def _max_iter(a: float) -> int:
    # both expansions need O(sqrt(a)) terms near x = a
    return max(_MAX_ITER, math.ceil(12 * math.sqrt(a)))


def _gamma_p_series(a: float, x: float) -> float:
    term = total = 1.0 / a
    ap = a
    for _ in range(_max_iter(a)):
        ap += 1.0
        term *= x / ap
        total += term
        if abs(term) < abs(total) * _EPS:
            return total * math.exp(_log_prefactor(a, x))
    raise NumericalError(f"incomplete gamma series did not converge (a={a}, x={x})")


def _gamma_q_contfrac(a: float, x: float) -> float:
    # modified Lentz evaluation of the Legendre continued fraction
    b = x + 1.0 - a
    c = 1.0 / _TINY
    d = 1.0 / b
    h = d
    for i in range(1, _max_iter(a) + 1):
        an = -i * (i - a)
        b += 2.0
        d = an * d + b
        if abs(d) < _TINY:
            d = _TINY
        c = b + an / c
        if abs(c) < _TINY:
            c = _TINY
        d = 1.0 / d
        delta = d * c
        h *= delta
        if abs(delta - 1.0) < _EPS:
            return h * math.exp(_log_prefactor(a, x))
    raise NumericalError(f"incomplete gamma continued fraction did not converge (a={a}, x={x})")


def regularized_gamma_q(a: float, x: float) -> float:
    """``Q(a, x) = Gamma(a, x) / Gamma(a)`` for ``a > 0``; 1 when ``x <= 0``."""
    a = float(a)
    x = float(x)
    if not (math.isfinite(a) and a > 0):
        raise InputError(f"shape must be positive and finite, got {a!r}")
    if math.isnan(x):
        raise InputError("x is NaN")
    if x <= 0:
        return 1.0
    if math.isinf(x):
        return 0.0
    if x < a + 1.0:
        q = 1.0 - _gamma_p_series(a, x)
    else:
        q = _gamma_q_contfrac(a, x)
    return min(1.0, max(0.0, q))


def chi_sq_sf(x: float, d: float) -> float:
    """``P(chi2_d >= x)``; ``d`` may be fractional."""
    d = float(d)
    if not (math.isfinite(d) and d > 0):
        raise InputError(f"degrees of freedom must be positive and finite, got {d!r}")
    return regularized_gamma_q(d / 2, float(x) / 2)


def gamma_sf(x: float, shape: float, scale: float) -> float:
    if not (math.isfinite(scale) and scale > 0):
        raise InputError(f"scale must be positive and finite, got {scale!r}")
    return regularized_gamma_q(shape, float(x) / scale)


# -- moment matching --------------------------------------------------------


def _products(M: CumulantEstimates, N: CumulantEstimates):
    return M.c1 * N.c1, M.c2 * N.c2, M.c3 * N.c3


def _check_variance(mn1: float, mn2: float) -> None:
    # Gram entries are O(1) for bounded kernels, hence the floor of 1
    eps = 1e-14 * max(1.0, mn1 * mn1)
    if not mn2 > eps:
        raise DegenerateNullError(
            f"estimated null variance {2 * mn2!r} is not positive; is a kernel constant?"
        )


def match_three_cumulants(M: CumulantEstimates, N: CumulantEstimates) -> ChiSqMatch:
    """Fit ``beta0 + beta1 chi2_d`` to the moments ``(M1N1, 2M2N2, 8M3N3)``.

    Raises :class:`SkewFallback` when ``M3 N3 <= 0``.
    """
    mn1, mn2, mn3 = _products(M, N)
    _check_variance(mn1, mn2)
    if not mn3 > 0:
        raise SkewFallback(f"third cumulant product {mn3!r} is not positive")
    beta1 = mn3 / mn2
    beta0 = mn1 - mn2 * mn2 / mn3
    d = mn2 ** 3 / (mn3 * mn3)
    if not (math.isfinite(d) and d > 0 and math.isfinite(beta0)):
        raise NumericalError(f"chi-square match broke down: beta0={beta0}, beta1={beta1}, d={d}")
    return ChiSqMatch(beta0, beta1, d)


def match_two_cumulants(mean: float, var: float):
    """Gamma ``(shape, scale)`` with the given mean and variance."""
    if not (mean > 0 and var > 0):
        raise DegenerateNullError(f"Gamma match needs positive mean and variance, got {mean!r}, {var!r}")
    return mean * mean / var, var / mean


# -- p-values ---------------------------------------------------------------


def p_value_new(Tn: StatisticValue, M: CumulantEstimates, N: CumulantEstimates) -> TestResult:
    """p-value of the unbiased statistic under the three-cumulant chi-square fit.

    When the estimated third-moment product is not positive, the mean and
    variance are matched with a Gamma law instead and ``detail["fallback"]``
    is set.
    """
    if Tn.kind != "new":
        raise InputError("p_value_new expects the unbiased statistic")
    try:
        fit = match_three_cumulants(M, N)
    except SkewFallback:
        mn1, mn2, _ = _products(M, N)
        shape, scale = match_two_cumulants(mn1, 2 * mn2)
        p = gamma_sf(Tn.value, shape, scale)
        detail = {"fallback": True, "shape": shape, "scale": scale}
    else:
        p = chi_sq_sf((Tn.value - fit.beta0) / fit.beta1, fit.d)
        detail = {"fallback": False, "beta0": fit.beta0, "beta1": fit.beta1, "d": fit.d}
    detail["cumulants_x"] = [M.c1, M.c2, M.c3]
    detail["cumulants_y"] = [N.c1, N.c2, N.c3]
    return TestResult("new", Tn.value, p, Tn.n, detail)


def p_value_gamma(TnG: StatisticValue, M_b: CumulantEstimates, N_b: CumulantEstimates) -> TestResult:
    """Gamma-approximation p-value for the H-centered statistic.

    The Gamma law has mean ``M1 N1`` and variance ``2 M2 N2``. The pipeline
    passes moments estimated from the unbiased centering; see
    :func:`fasthsic.pipeline.test_grams`.
    """
    if TnG.kind != "gretton":
        raise InputError("p_value_gamma expects the biased statistic")
    mn1, mn2, _ = _products(M_b, N_b)
    shape, scale = match_two_cumulants(mn1, 2 * mn2)
    p = gamma_sf(TnG.value, shape, scale)
    return TestResult("gamma", TnG.value, p, TnG.n, {"shape": shape, "scale": scale})


def permutation_statistics(
    Kc: CenteredGram, Lc: CenteredGram, m: int, seed: int, threads: int = 1
) -> np.ndarray:
    """Statistics after permuting the y-side rows and columns ``m`` times.

    Permutation ``b`` (1-based) is drawn from a stream that depends only on
    ``(seed, b)``, so the output does not depend on ``threads``. Centering
    commutes with simultaneous row/column permutation, so the centered
    matrix is permuted directly.
    """
    n = Kc.n
    K = Kc.values
    L = Lc.values

    def one(b: int) -> float:
        perm = rng_for(seed, b).permutation(n)
        return float(np.sum(K * L[np.ix_(perm, perm)])) / n

    runs = range(1, m + 1)
    if threads > 1:
        with ThreadPoolExecutor(threads) as pool:
            return np.array(list(pool.map(one, runs)))
    return np.array([one(b) for b in runs])


def permutation_p_value(observed: float, permuted) -> float:
    permuted = np.asarray(permuted)
    return (1 + int(np.count_nonzero(permuted >= observed))) / (permuted.size + 1)


def p_value_permutation(
    x: Sample,
    y: Sample,
    cfg_x: KernelConfig = KernelConfig(),
    cfg_y: KernelConfig = KernelConfig(),
    m: int = 200,
    seed: int = 0,
    threads: int = 1,
) -> TestResult:
    """Permutation test on the unbiased statistic with the add-one p-value."""
    if m < 1:
        raise InputError(f"need at least one permutation, got m={m}")
    if x.n != y.n:
        raise InputError(f"samples are not paired: {x.n} vs {y.n} observations")
    if x.n < 3:
        raise InputError("permutation test needs n >= 3")
    Kg, Lg = gram(x, cfg_x), gram(y, cfg_y)
    Kc, Lc = center_unbiased(Kg), center_unbiased(Lg)
    observed = statistic(Kc, Lc).value
    permuted = permutation_statistics(Kc, Lc, m, seed, threads)
    exceed = int(np.count_nonzero(permuted >= observed))
    return TestResult(
        "permutation",
        observed,
        permutation_p_value(observed, permuted),
        x.n,
        {"m": m, "exceed_count": exceed, "seed": seed},
        Kg.sigma2,
        Lg.sigma2,
    )
