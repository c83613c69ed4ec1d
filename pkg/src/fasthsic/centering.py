"""Unbiased and biased (H-centered) versions of a Gram matrix.

Both centerings are computed from row sums, column sums and the grand
sum in O(n^2); the centering matrix H is never formed.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Literal, Union

import numpy as np

from .errors import InputError
from .kernel import GramMatrix

__all__ = ["CenteredGram", "center_unbiased", "center_biased"]

# beyond this many terms per sum, fall back to compensated summation
_FSUM_THRESHOLD = 10_000


@dataclass(frozen=True)
class CenteredGram:
    values: np.ndarray
    mode: Literal["unbiased", "biased"]

    @property
    def n(self) -> int:
        return self.values.shape[0]


def _as_square(K: Union[GramMatrix, np.ndarray]) -> np.ndarray:
    values = K.values if isinstance(K, GramMatrix) else np.asarray(K, dtype=np.float64)
    if values.ndim != 2 or values.shape[0] != values.shape[1]:
        raise InputError(f"Gram matrix must be square, got shape {values.shape}")
    if not np.all(np.isfinite(values)):
        raise InputError("Gram matrix contains non-finite values")
    return values


def _row_col_total(K: np.ndarray):
    n = K.shape[0]
    if n > _FSUM_THRESHOLD:
        rows = np.array([math.fsum(r) for r in K])
        cols = np.array([math.fsum(c) for c in K.T])
        total = math.fsum(rows)
    else:
        rows = K.sum(axis=1)
        cols = K.sum(axis=0)
        total = rows.sum()
    return rows, cols, total


def center_unbiased(K: Union[GramMatrix, np.ndarray]) -> CenteredGram:
    """Unbiased centered Gram matrix.

    Entry ``(i, j)`` subtracts the mean of row ``i`` and of column ``j``
    taken over the off-diagonal entries only, and adds back the mean of
    all off-diagonal entries.
    """
    K = _as_square(K)
    n = K.shape[0]
    if n < 2:
        raise InputError("unbiased centering needs n >= 2")
    rows, cols, total = _row_col_total(K)
    diag = np.diag(K)
    row_mean = (rows - diag) / (n - 1)
    col_mean = (cols - diag) / (n - 1)
    grand = (total - diag.sum()) / (n * (n - 1))
    out = K - row_mean[:, None] - col_mean[None, :] + grand
    return CenteredGram(out, "unbiased")


def center_biased(K: Union[GramMatrix, np.ndarray]) -> CenteredGram:
    """``H K H`` with ``H = I - J/n``, evaluated entrywise."""
    K = _as_square(K)
    n = K.shape[0]
    rows, cols, total = _row_col_total(K)
    out = K - rows[:, None] / n - cols[None, :] / n + total / (n * n)
    return CenteredGram(out, "biased")
