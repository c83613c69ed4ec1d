"""HSIC test statistics and cumulant estimators of a centered Gram matrix."""
from __future__ import annotations

from dataclasses import dataclass
from typing import Literal

import numpy as np

from .centering import CenteredGram
from .errors import InputError, NumericalError

__all__ = [
    "StatisticValue",
    "CumulantEstimates",
    "statistic",
    "hsic_estimate",
    "cumulants",
]

_KIND_FOR_MODE = {"unbiased": "new", "biased": "gretton"}


@dataclass(frozen=True)
class StatisticValue:
    value: float
    kind: Literal["new", "gretton"]
    n: int


@dataclass(frozen=True)
class CumulantEstimates:
    """Estimated mean-, variance- and skewness-related moments of one kernel.

    ``c1`` estimates E K(x, x), ``c2`` estimates E K(x, x')^2 and ``c3``
    estimates E K(x, x') K(x', x'') K(x'', x), all for the centered kernel.
    """

    c1: float
    c2: float
    c3: float
    n: int


def statistic(Kc: CenteredGram, Lc: CenteredGram) -> StatisticValue:
    """``tr(Kc Lc) / n``, as the entrywise-product sum of symmetric matrices.

    Unbiased inputs give the new statistic; H-centered inputs give the
    classical V-statistic. Diagonal terms are kept in both cases.
    """
    if Kc.mode != Lc.mode:
        raise InputError(f"centering modes differ: {Kc.mode} vs {Lc.mode}")
    if Kc.values.shape != Lc.values.shape:
        raise InputError(f"size mismatch: {Kc.values.shape} vs {Lc.values.shape}")
    n = Kc.n
    if n < 2:
        raise InputError("statistic needs n >= 2")
    value = float(np.sum(Kc.values * Lc.values)) / n
    return StatisticValue(value, _KIND_FOR_MODE[Kc.mode], n)


def hsic_estimate(stat: StatisticValue) -> float:
    """Point estimate of HSIC, i.e. the statistic divided by ``n``."""
    return stat.value / stat.n


def cumulants(Cc: CenteredGram) -> CumulantEstimates:
    """Trace-formula estimates of the three kernel moments, O(n^3).

    With ``A`` the centered Gram matrix::

        c1 = tr(A) / n
        c2 = [tr(A^2) - tr(A o A)] / (n (n-1))
        c3 = [tr(A^3) - 3 tr(diag(A) A^2) + 2 tr(A o A o A)] / (n (n-1) (n-2))

    which equal the averages over distinct index pairs and triples.
    """
    A = Cc.values
    n = A.shape[0]
    if n < 3:
        raise InputError("cumulant estimates need n >= 3")
    d = np.diag(A)
    A2 = A @ A
    sq = A * A

    c1 = float(d.sum()) / n

    sumsq = float(sq.sum())
    c2 = (sumsq - float(d @ d)) / (n * (n - 1))
    if c2 < 0:
        if c2 < -1e-14 * max(1.0, sumsq / (n * (n - 1))):
            raise NumericalError(f"negative second moment estimate {c2!r}")
        c2 = 0.0

    tr3 = float(np.sum(A * A2.T))
    tr_diag = float(d @ np.diag(A2))
    tr_cube = float(np.sum(d ** 3))
    c3 = (tr3 - 3 * tr_diag + 2 * tr_cube) / (n * (n - 1) * (n - 2))
    return CumulantEstimates(c1, c2, c3, n)
