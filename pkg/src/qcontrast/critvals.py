"""Quantiles of the maximum of a correlated Gaussian vector."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .exceptions import DomainError
from .statdist import RngStream

__all__ = ["CorrelationModel", "upper_order_statistic", "max_gaussian_draws",
           "max_gaussian_quantile"]

NEGATIVE_EIGEN_TOL = 1e-8


def upper_order_statistic(values, level: float) -> float:
    """The ``ceil(N * level)``-th smallest of ``values``."""
    v = np.asarray(values, dtype=float).ravel()
    if v.size == 0:
        raise DomainError("no values to take a quantile of")
    j = min(max(math.ceil(v.size * level - 1e-9), 1), v.size) - 1
    return float(np.partition(v, j)[j])


@dataclass(frozen=True)
class CorrelationModel:
    """Symmetric correlation matrix with a square-root factor for sampling."""

    matrix: np.ndarray
    eigen_floor: float = 0.0

    def __post_init__(self):
        R = np.atleast_2d(np.asarray(self.matrix, dtype=float))
        if R.ndim != 2 or R.shape[0] != R.shape[1]:
            raise DomainError("correlation matrix must be square")
        if np.max(np.abs(R - R.T), initial=0.0) > 1e-8:
            raise DomainError("correlation matrix is not symmetric")
        if self.eigen_floor < 0:
            raise DomainError("eigen_floor must be >= 0")
        object.__setattr__(self, "matrix", (R + R.T) / 2)

    @classmethod
    def from_covariance(cls, cov, eigen_floor: float = 0.0) -> "CorrelationModel":
        """``D C D`` with ``D = diag(C)^(-1/2)``; the diagonal is set to exactly 1."""
        cov = np.asarray(cov, dtype=float)
        d = np.diag(cov)
        if np.any(~(d > 0)):
            raise DomainError("covariance has a non-positive diagonal entry")
        inv = 1.0 / np.sqrt(d)
        R = cov * np.outer(inv, inv)
        np.fill_diagonal(R, 1.0)
        return cls(R, eigen_floor)

    @property
    def r(self) -> int:
        return self.matrix.shape[0]

    def factor(self) -> np.ndarray:
        """``L`` with ``L L' = R`` after clipping tiny negative eigenvalues.

        Rank-deficient matrices (Tukey or grand-mean families) are fine.
        """
        w, V = np.linalg.eigh(self.matrix)
        tol = NEGATIVE_EIGEN_TOL * max(1.0, float(np.max(np.abs(w))))
        if np.min(w) < -tol:
            raise DomainError(f"correlation matrix has eigenvalue {np.min(w):.3g} < 0")
        w = np.where(w < max(self.eigen_floor, 0.0), 0.0, w)
        return V * np.sqrt(w)


def max_gaussian_draws(model: CorrelationModel, absolute: bool, mc_samples: int,
                       rng) -> np.ndarray:
    """``mc_samples`` draws of ``max_l Y_l`` (or ``max_l |Y_l|``), ``Y ~ N(0, R)``."""
    gen = rng.generator() if isinstance(rng, RngStream) else rng
    L = model.factor()
    out = np.empty(mc_samples)
    chunk = 1 << 16
    for start in range(0, mc_samples, chunk):
        size = min(chunk, mc_samples - start)
        y = gen.standard_normal((size, model.r)) @ L.T
        out[start:start + size] = np.max(np.abs(y) if absolute else y, axis=1)
    return out


def max_gaussian_quantile(model: CorrelationModel, level: float, absolute: bool,
                          mc_samples: int = 100_000, rng=None) -> float:
    if not 0 < level < 1:
        raise DomainError("level must lie in (0, 1)")
    if mc_samples < 10_000:
        raise DomainError("mc_samples must be at least 10,000")
    if rng is None:
        rng = RngStream(0)
    return upper_order_statistic(max_gaussian_draws(model, absolute, mc_samples, rng), level)
