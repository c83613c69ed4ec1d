"""Gaussian RBF Gram matrices for vector and functional samples.

Functional observations are curves sampled on a shared, strictly
increasing time grid. Distances between curves are L2 distances with the
integral replaced by the trapezoidal rule; nothing is interpolated or
smoothed.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Literal, Optional, Union

import numpy as np
from scipy.spatial.distance import pdist, squareform

from .errors import DegenerateSampleError, InputError

__all__ = [
    "Sample",
    "KernelConfig",
    "GramMatrix",
    "trapezoid_weights",
    "functional_sq_norm",
    "pairwise_sq_dist",
    "select_width",
    "gram",
]


@dataclass(frozen=True)
class Sample:
    """A paired-test sample of ``n`` observations.

    ``data`` is ``(n, p)`` for vector observations and ``(n, k)`` curve
    values for functional ones; in the latter case ``grid`` holds the
    ``k`` time points shared by every curve.
    """

    kind: Literal["vector", "functional"]
    data: np.ndarray
    grid: Optional[np.ndarray] = None

    def __post_init__(self):
        data = np.asarray(self.data, dtype=np.float64)
        if data.ndim == 1:
            data = data[:, None]
        if data.ndim != 2:
            raise InputError(f"sample data must be 2-D, got shape {data.shape}")
        if data.shape[0] < 1 or data.shape[1] < 1:
            raise InputError(f"sample data must be non-empty, got shape {data.shape}")
        if not np.all(np.isfinite(data)):
            raise InputError("sample data contain non-finite values")
        object.__setattr__(self, "data", data)

        if self.kind == "vector":
            if self.grid is not None:
                raise InputError("vector samples take no grid")
        elif self.kind == "functional":
            if self.grid is None:
                raise InputError("functional samples need a time grid")
            grid = np.asarray(self.grid, dtype=np.float64)
            _check_grid(grid)
            if grid.shape[0] != data.shape[1]:
                raise InputError(
                    f"grid has {grid.shape[0]} points but curves have {data.shape[1]} values"
                )
            object.__setattr__(self, "grid", grid)
        else:
            raise InputError(f"unknown sample kind {self.kind!r}")

    @classmethod
    def vector(cls, data) -> "Sample":
        return cls("vector", data)

    @classmethod
    def functional(cls, data, grid=None) -> "Sample":
        """Curves on ``grid``; defaults to the uniform grid on [0, 1]."""
        data = np.asarray(data, dtype=np.float64)
        if grid is None:
            if data.ndim != 2:
                raise InputError("functional data must be 2-D")
            grid = np.linspace(0.0, 1.0, data.shape[1])
        return cls("functional", data, grid)

    @property
    def n(self) -> int:
        return self.data.shape[0]

    def take(self, index) -> "Sample":
        """Sub-sample (or reorder) the observations."""
        return Sample(self.kind, self.data[index], self.grid)


@dataclass(frozen=True)
class KernelConfig:
    """Gaussian RBF kernel with an automatic or fixed width ``sigma2``."""

    width: Union[Literal["auto"], float] = "auto"
    family: Literal["gaussian_rbf"] = "gaussian_rbf"

    def __post_init__(self):
        if self.family != "gaussian_rbf":
            raise InputError(f"unsupported kernel family {self.family!r}")
        if self.width != "auto":
            w = float(self.width)
            if not (np.isfinite(w) and w > 0):
                raise InputError(f"kernel width must be positive and finite, got {self.width!r}")
            object.__setattr__(self, "width", w)


@dataclass(frozen=True)
class GramMatrix:
    values: np.ndarray
    sigma2: float

    @property
    def n(self) -> int:
        return self.values.shape[0]


def _check_grid(grid: np.ndarray) -> None:
    if grid.ndim != 1 or grid.shape[0] < 2:
        raise InputError("a time grid needs at least 2 points")
    if not np.all(np.isfinite(grid)):
        raise InputError("time grid contains non-finite values")
    if np.any(np.diff(grid) <= 0):
        raise InputError("time grid must be strictly increasing")


def trapezoid_weights(grid) -> np.ndarray:
    """Quadrature weights ``w`` with ``sum(w * f) == trapezoid(f, grid)``."""
    grid = np.asarray(grid, dtype=np.float64)
    _check_grid(grid)
    h = np.diff(grid)
    w = np.zeros_like(grid)
    w[:-1] += h / 2
    w[1:] += h / 2
    return w


def functional_sq_norm(values, grid) -> float:
    """Trapezoidal approximation of the integral of ``x(t)**2`` over the grid."""
    values = np.asarray(values, dtype=np.float64)
    grid = np.asarray(grid, dtype=np.float64)
    _check_grid(grid)
    if values.shape != grid.shape:
        raise InputError(f"curve has {values.shape} values, grid has {grid.shape}")
    sq = values * values
    return float(np.sum(np.diff(grid) * (sq[1:] + sq[:-1]) / 2))


def pairwise_sq_dist(s: Sample) -> np.ndarray:
    """Matrix of squared distances between observations.

    Euclidean for vector samples, trapezoidal L2 for curves. Each pair is
    evaluated once, so the result is exactly symmetric with a zero
    diagonal.
    """
    x = s.data
    if s.kind == "functional":
        x = x * np.sqrt(trapezoid_weights(s.grid))
    if s.n == 1:
        return np.zeros((1, 1))
    return squareform(pdist(x, "sqeuclidean"))


def select_width(s: Sample, sq_dist: Optional[np.ndarray] = None) -> float:
    """Median heuristic: half the median squared pairwise distance.

    With this choice the median pair sits at ``exp(-1)`` in the Gram
    matrix. If more than half the pairs coincide the median is taken over
    the distinct pairs only.
    """
    if s.n < 2:
        raise InputError("width selection needs at least 2 observations")
    if sq_dist is None:
        sq_dist = pairwise_sq_dist(s)
    upper = sq_dist[np.triu_indices(s.n, k=1)]
    med = np.median(upper)
    if med <= 0:
        positive = upper[upper > 0]
        if positive.size == 0:
            raise DegenerateSampleError("all observations are identical; kernel width undefined")
        med = np.median(positive)
    return float(med) / 2


def gram(s: Sample, cfg: KernelConfig = KernelConfig()) -> GramMatrix:
    """Gaussian RBF Gram matrix ``exp(-|x_i - x_j|^2 / (2 sigma2))``."""
    d2 = pairwise_sq_dist(s)
    if cfg.width == "auto":
        sigma2 = select_width(s, d2)
    else:
        sigma2 = float(cfg.width)
    return GramMatrix(np.exp(-d2 / (2 * sigma2)), sigma2)
