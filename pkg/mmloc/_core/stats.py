# Copyright 2026 mmloc contributors
#
# Description:
# mmloc Error statistics

import math
from typing import Any

import numpy as np
import pandas as pd


class ErrorAccumulator:
    def __init__(self, name: str, dim: int = 3, keep: bool = True) -> None:
        """
        Running statistics of estimation error vectors.

        Sums of squared norms are kept per sample and added with ``math.fsum`` so the result does not
        depend on the order samples were added in. Component-wise mean and variance use Welford updates.

        :param name: Label used in reports.
        :type name: str
        :param dim: Length of each error vector.
        :type dim: int
        :param keep: Keep every error vector (needed for :meth:`errors`).
        :type keep: bool
        """
        self.name = name
        self.dim = dim
        self.keep = keep

        self._count_ = 0
        self._sq_: list[float] = []
        self._errors_: list[np.ndarray] = []
        self.min: float | None = None
        self.max: float | None = None
        self.mean = np.zeros(dim)
        self._m2_ = np.zeros(dim)

    def sample(self, err: Any) -> None:
        """
        Add one error vector (estimate minus truth).

        :raises ValueError: wrong length
        """
        e = np.asarray(err, dtype=float).reshape(-1)
        if e.shape != (self.dim,):
            raise ValueError(f"{self.name}: error vector must have {self.dim} components, got {e.shape}")
        self._count_ += 1
        sq = float(e @ e)
        self._sq_.append(sq)
        if self.keep:
            self._errors_.append(e)

        norm = math.sqrt(sq)
        if self.min is None or norm < self.min:
            self.min = norm
        if self.max is None or norm > self.max:
            self.max = norm

        delta = e - self.mean
        self.mean = self.mean + delta / self._count_
        self._m2_ = self._m2_ + delta * (e - self.mean)

    @property
    def count(self) -> int:
        return self._count_

    def rmse(self) -> float:
        """
        sqrt(sum ||e_i||^2 / L). NaN with no samples.
        """
        if self._count_ == 0:
            return float("nan")
        return math.sqrt(math.fsum(self._sq_) / self._count_)

    def median(self) -> float:
        """
        Median error norm. NaN with no samples.
        """
        if self._count_ == 0:
            return float("nan")
        return float(np.median(np.sqrt(self._sq_)))

    def get_variance(self) -> np.ndarray | None:
        return self._m2_ / (self._count_ - 1) if self._count_ > 1 else None

    def errors(self) -> np.ndarray:
        return np.vstack(self._errors_) if self._errors_ else np.empty((0, self.dim))

    def report(self) -> pd.DataFrame:
        """
        :return: One row with columns name, count, rmse, min, max, mean_norm (norm of the mean error).
        :rtype: pandas.DataFrame
        """
        return pd.DataFrame(
            {
                "name": [self.name],
                "count": [int(self._count_)],
                "rmse": [self.rmse()],
                "min": [self.min],
                "max": [self.max],
                "mean_norm": [float(np.linalg.norm(self.mean)) if self._count_ else None],
            }
        )


def lag1_autocorrelation(x: Any) -> float:
    """
    Sample lag-1 autocorrelation of a sequence.
    """
    v = np.asarray(x, dtype=float)
    v = v - v.mean()
    den = float(v @ v)
    if den == 0.0:
        return 0.0
    return float(v[:-1] @ v[1:]) / den


__all__ = ["ErrorAccumulator", "lag1_autocorrelation"]
