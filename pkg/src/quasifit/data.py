from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DimensionMismatch, EmptyData


@dataclass
class DataSet:
    """Design points X (n x d), responses y (n,) and positive weights w (n,)."""

    X: np.ndarray
    y: np.ndarray
    w: np.ndarray | None = None

    def __post_init__(self):
        X = np.asarray(self.X, dtype=float)
        if X.ndim == 1:
            X = X.reshape(-1, 1)
        y = np.asarray(self.y, dtype=float).reshape(-1)
        if X.shape[0] == 0 or y.size == 0:
            raise EmptyData("data set has no rows")
        if X.shape[0] != y.size:
            raise DimensionMismatch(f"X has {X.shape[0]} rows but y has {y.size}")
        w = np.ones(y.size) if self.w is None else np.asarray(self.w, dtype=float).reshape(-1)
        if w.size != y.size:
            raise DimensionMismatch("weights must match y")
        if not (np.all(np.isfinite(X)) and np.all(np.isfinite(y)) and np.all(np.isfinite(w))):
            raise ValueError("data contain non-finite entries")
        if np.any(w <= 0):
            raise ValueError("weights must be positive")
        self.X, self.y, self.w = X, y, w

    @property
    def n(self) -> int:
        return self.y.size

    @property
    def d(self) -> int:
        return self.X.shape[1]

    def aggregate(self):
        """Merge duplicate design points into weighted means.

        Returns ``(reduced, inverse)`` where ``reduced.X[inverse]`` recovers X.
        """
        uniq, inverse = np.unique(self.X, axis=0, return_inverse=True)
        inverse = inverse.reshape(-1)
        wsum = np.bincount(inverse, weights=self.w, minlength=uniq.shape[0])
        ysum = np.bincount(inverse, weights=self.w * self.y, minlength=uniq.shape[0])
        return DataSet(uniq, ysum / wsum, wsum), inverse
