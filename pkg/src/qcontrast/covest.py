"""Estimators of the block-diagonal covariance of scaled sample quantiles.

Every block has the form ``(n / n_i) * s_a * s_b * C_ab`` where ``s`` is a
per-probability scale (``1 / f(q)`` for the kernel estimator, a standard
deviation for the bootstrap and interval-based estimators) and ``C`` depends
on the probability grid only.  The single-sample functions below follow the
formulas term by term; :func:`batch_scales` evaluates the same scales for a
whole stack of resampled groups at once.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np
from scipy import stats as _sps
from scipy.linalg import block_diag

from .exceptions import DegenerateIntervalError, DomainError, SingularDensityError
from .quantiles import GroupedSample, ProbabilityGrid, order_index
from .statdist import binomial_cdf, binomial_pmf, normal_quantile

__all__ = [
    "Estimator",
    "KernelConfig",
    "CovarianceEstimate",
    "silverman_bandwidth",
    "kernel_density",
    "bootstrap_weights",
    "interval_bounds",
    "kernel_estimate",
    "bootstrap_estimate",
    "interval_estimate",
    "estimate",
    "group_block",
    "shape_matrix",
    "batch_scales",
]

ALPHA_STAR_CLAMP = 1e-12
_SQRT_2PI = math.sqrt(2 * math.pi)


class Estimator(str, enum.Enum):
    KERNEL = "kernel"
    BOOTSTRAP = "bootstrap"
    INTERVAL = "interval"


@dataclass(frozen=True)
class KernelConfig:
    """Gaussian kernel; ``bandwidth`` is ``"silverman"`` or a positive float."""

    bandwidth: object = "silverman"

    def __post_init__(self):
        bw = self.bandwidth
        if isinstance(bw, str):
            if bw != "silverman":
                raise DomainError(f"unknown bandwidth rule {bw!r}")
        elif not float(bw) > 0:
            raise DomainError("fixed bandwidth must be positive")

    def bandwidth_for(self, x) -> float:
        if self.bandwidth == "silverman":
            return silverman_bandwidth(x)
        return float(self.bandwidth)


@dataclass(frozen=True)
class CovarianceEstimate:
    blocks: tuple
    estimator: Estimator
    n: int
    sizes: tuple
    alpha_used: float | None = None
    zero_variance: tuple = field(default=())

    @property
    def k(self) -> int:
        return len(self.blocks)

    @property
    def m(self) -> int:
        return self.blocks[0].shape[0]

    def matrix(self) -> np.ndarray:
        return block_diag(*self.blocks)

    def contrast_covariance(self, H) -> np.ndarray:
        """``H Sigma H'`` computed block by block."""
        H = np.asarray(H, dtype=float)
        m = self.m
        out = np.zeros((H.shape[0], H.shape[0]))
        for i, blk in enumerate(self.blocks):
            Hi = H[:, i * m:(i + 1) * m]
            out += Hi @ blk @ Hi.T
        return out


# ---------------------------------------------------------------------------
# building blocks
# ---------------------------------------------------------------------------

def silverman_bandwidth(x) -> float:
    """``0.9 * min(sd, IQR / 1.34) * n^(-1/5)``; falls back to ``sd * n^(-1/5)``.

    IQR uses linearly interpolated sample quartiles, sd uses ``ddof=1``.
    Returns 0 for a constant sample.
    """
    x = np.asarray(x, dtype=float)
    n = x.size
    sd = float(np.std(x, ddof=1))
    q25, q75 = np.percentile(x, [25, 75])
    h = 0.9 * min(sd, (q75 - q25) / 1.34) * n ** -0.2
    if h <= 0:
        h = sd * n ** -0.2
    return h


def kernel_density(x, at, h: float):
    x = np.asarray(x, dtype=float)
    u = (np.atleast_1d(at)[:, None] - x[None, :]) / h
    return np.exp(-0.5 * u * u).sum(axis=1) / (x.size * h * _SQRT_2PI)


def shape_matrix(probs, kind) -> np.ndarray:
    """Grid-only factor ``C`` of every block."""
    p = np.asarray(tuple(probs), dtype=float)
    c = np.minimum.outer(p, p) - np.outer(p, p)
    if Estimator(kind) is Estimator.KERNEL:
        return c
    d = np.sqrt(p - p * p)
    return c / np.outer(d, d)


@lru_cache(maxsize=512)
def bootstrap_weights(n: int, p: float) -> np.ndarray:
    """``P_j``, j = 1..n: difference of Bin(n, (j-1)/n) and Bin(n, j/n) CDFs at ceil(np)-1."""
    c = order_index(n, p)
    w = np.array([
        binomial_cdf(n, (j - 1) / n, c) - binomial_cdf(n, j / n, c) for j in range(1, n + 1)
    ])
    w.flags.writeable = False
    return w


@lru_cache(maxsize=512)
def interval_bounds(n: int, p: float, alpha: float):
    """One-based order-statistic bounds ``(l, u)`` and the exact level ``alpha*``."""
    z = normal_quantile(1 - alpha / 2)
    half = z * math.sqrt(n * p * (1 - p))
    lo = max(1, math.floor(n * p - half))
    up = min(n, math.floor(n * p + half))
    pmf = binomial_pmf(n, p)
    a_star = 1.0 - float(pmf[lo + 1:up].sum()) if up - 1 >= lo + 1 else 1.0
    a_star = min(max(a_star, ALPHA_STAR_CLAMP), 1 - ALPHA_STAR_CLAMP)
    return lo, up, a_star


# ---------------------------------------------------------------------------
# single-sample estimators
# ---------------------------------------------------------------------------

def _group_scales(x, probs, kind, alpha, kernel, label):
    s = np.sort(np.asarray(x, dtype=float))
    n = s.size
    kind = Estimator(kind)
    scales = np.empty(len(probs))
    for a, p in enumerate(probs):
        q = s[order_index(n, p)]
        if kind is Estimator.KERNEL:
            h = kernel.bandwidth_for(s)
            if not h > 0:
                raise SingularDensityError(label, p, f"bandwidth is zero for group {label!r}")
            f = kernel_density(s, q, h)[0]
            if f <= 0:
                raise SingularDensityError(label, p)
            scales[a] = 1.0 / f
        elif kind is Estimator.BOOTSTRAP:
            w = bootstrap_weights(n, p)
            scales[a] = math.sqrt(n * float(np.sum((s - q) ** 2 * w)))
        else:
            lo, up, a_star = interval_bounds(n, p, alpha)
            if lo >= up:
                raise DegenerateIntervalError(label, p)
            z = normal_quantile(1 - a_star / 2)
            scales[a] = math.sqrt(n) * (s[up - 1] - s[lo - 1]) / (2 * z + 2 / math.sqrt(n))
    return scales


def group_block(x, grid, kind, *, alpha=0.05, kernel=KernelConfig(), weight=1.0, label="1"):
    """Covariance block of one group, multiplied by ``weight`` (``n / n_i``)."""
    grid = grid if isinstance(grid, ProbabilityGrid) else ProbabilityGrid(grid)
    s = _group_scales(x, grid.probs, kind, alpha, kernel, label)
    return weight * np.outer(s, s) * shape_matrix(grid.probs, kind), s


def estimate(data: GroupedSample, grid, kind, *, alpha: float = 0.05,
             kernel: KernelConfig = KernelConfig()) -> CovarianceEstimate:
    grid = grid if isinstance(grid, ProbabilityGrid) else ProbabilityGrid(grid)
    kind = Estimator(kind)
    if not 0 < alpha < 1:
        raise DomainError("alpha must lie in (0, 1)")
    blocks, zero = [], []
    for lab, g in zip(data.labels, data.groups):
        blk, s = group_block(g, grid, kind, alpha=alpha, kernel=kernel,
                             weight=data.n / g.size, label=lab)
        blocks.append(blk)
        zero.extend((lab, p) for p, v in zip(grid.probs, s) if v == 0)
    return CovarianceEstimate(
        blocks=tuple(blocks), estimator=kind, n=data.n, sizes=data.sizes,
        alpha_used=alpha if kind is Estimator.INTERVAL else None,
        zero_variance=tuple(zero),
    )


def kernel_estimate(data, grid, cfg: KernelConfig = KernelConfig()) -> CovarianceEstimate:
    return estimate(data, grid, Estimator.KERNEL, kernel=cfg)


def bootstrap_estimate(data, grid) -> CovarianceEstimate:
    return estimate(data, grid, Estimator.BOOTSTRAP)


def interval_estimate(data, grid, alpha: float = 0.05) -> CovarianceEstimate:
    return estimate(data, grid, Estimator.INTERVAL, alpha=alpha)


# ---------------------------------------------------------------------------
# vectorised scales for stacks of sorted samples
# ---------------------------------------------------------------------------

@lru_cache(maxsize=4096)
def _weight_matrix(n: int, probs: tuple) -> np.ndarray:
    j = np.arange(1, n + 1)
    cols = []
    for p in probs:
        c = order_index(n, p)
        cols.append(_sps.binom.cdf(c, n, (j - 1) / n) - _sps.binom.cdf(c, n, j / n))
    return np.column_stack(cols)


@lru_cache(maxsize=4096)
def _interval_plan(n: int, probs: tuple, alpha: float):
    lo, up, den = [], [], []
    for p in probs:
        l_, u_, a_star = interval_bounds(n, p, alpha)
        lo.append(l_ - 1)
        up.append(u_ - 1)
        den.append(2 * normal_quantile(1 - a_star / 2) + 2 / math.sqrt(n))
    lo, up = np.array(lo), np.array(up)
    return lo, up, math.sqrt(n) / np.array(den), bool(np.all(lo < up))


def batch_scales(sorted_x: np.ndarray, probs: tuple, kind, *, alpha: float = 0.05,
                 kernel: KernelConfig = KernelConfig()) -> np.ndarray:
    """Scales for each row of ``sorted_x`` (shape ``(B, n_i)``, rows ascending).

    Returns shape ``(B, m)``.  Rows where the estimator is undefined carry
    ``inf`` or ``nan`` instead of raising.
    """
    B, n = sorted_x.shape
    probs = tuple(probs)
    idx = [order_index(n, p) for p in probs]
    q = sorted_x[:, idx]
    kind = Estimator(kind)
    if kind is Estimator.BOOTSTRAP:
        w = _weight_matrix(n, probs)
        dev2 = (sorted_x[:, :, None] - q[:, None, :]) ** 2
        return np.sqrt(n * np.einsum("bjm,jm->bm", dev2, w))
    if kind is Estimator.INTERVAL:
        lo, up, factor, ok = _interval_plan(n, probs, float(alpha))
        if not ok:
            return np.full((B, len(probs)), np.nan)
        return (sorted_x[:, up] - sorted_x[:, lo]) * factor
    if kernel.bandwidth == "silverman":
        sd = np.std(sorted_x, axis=1, ddof=1)
        iqr = _sorted_percentile(sorted_x, 0.75) - _sorted_percentile(sorted_x, 0.25)
        h = 0.9 * np.minimum(sd, iqr / 1.34) * n ** -0.2
        h = np.where(h > 0, h, sd * n ** -0.2)
    else:
        h = np.full(B, float(kernel.bandwidth))
    with np.errstate(divide="ignore", invalid="ignore"):
        u = (q[:, :, None] - sorted_x[:, None, :]) / h[:, None, None]
        f = np.exp(-0.5 * u * u).sum(axis=2) / (n * h[:, None] * _SQRT_2PI)
        s = 1.0 / f
    s[~(h > 0)] = np.nan
    return s


def _sorted_percentile(sorted_x: np.ndarray, q: float) -> np.ndarray:
    n = sorted_x.shape[1]
    pos = (n - 1) * q
    lo = int(math.floor(pos))
    hi = min(lo + 1, n - 1)
    frac = pos - lo
    return sorted_x[:, lo] + frac * (sorted_x[:, hi] - sorted_x[:, lo])
