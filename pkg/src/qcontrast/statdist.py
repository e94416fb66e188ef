"""Random streams, the study distributions and the few special functions we need."""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field

import numpy as np
from scipy import special

from .exceptions import DomainError

__all__ = [
    "RngStream",
    "Distribution",
    "StudyDistribution",
    "normal_cdf",
    "normal_quantile",
    "binomial_pmf",
    "binomial_cdf",
    "sample",
    "distribution_cdf",
    "distribution_quantile",
]


@dataclass(frozen=True)
class RngStream:
    """Counter-based random stream identified by ``(seed, stream_id)``.

    ``stream_id`` is a tuple of non-negative integers so that streams can be
    nested (cell, replicate, method).  Equal identifiers give bit-identical
    draws; distinct identifiers give independent streams (Philox keyed through
    ``SeedSequence.spawn_key``).
    """

    seed: int
    stream_id: tuple[int, ...] = field(default=())

    def __post_init__(self):
        if isinstance(self.stream_id, int):
            object.__setattr__(self, "stream_id", (self.stream_id,))
        if self.seed < 0 or any(s < 0 for s in self.stream_id):
            raise DomainError("seed and stream ids must be non-negative")

    def substream(self, *ids: int) -> "RngStream":
        return RngStream(self.seed, self.stream_id + tuple(int(i) for i in ids))

    def generator(self) -> np.random.Generator:
        ss = np.random.SeedSequence(self.seed, spawn_key=self.stream_id)
        return np.random.Generator(np.random.Philox(ss))


def normal_cdf(x):
    """Standard normal distribution function; positive down to about x = -38."""
    x = np.asarray(x, dtype=float)
    with np.errstate(under="ignore"):
        out = np.where(x < -20, np.exp(special.log_ndtr(np.minimum(x, -20))), special.ndtr(x))
    return float(out) if out.ndim == 0 else out


def normal_quantile(beta):
    """Standard normal quantile ``z_beta`` for ``0 < beta < 1``."""
    b = np.asarray(beta, dtype=float)
    if np.any(~((b > 0) & (b < 1))):
        raise DomainError(f"normal_quantile needs 0 < beta < 1, got {beta!r}")
    z = special.ndtri(b)
    return float(z) if np.ndim(z) == 0 else z


def binomial_pmf(n: int, p: float) -> np.ndarray:
    """PMF of Bin(n, p) on 0..n, computed in log space."""
    if n < 0 or not 0.0 <= p <= 1.0:
        raise DomainError(f"invalid binomial parameters n={n}, p={p}")
    k = np.arange(n + 1)
    if p == 0.0:
        return (k == 0).astype(float)
    if p == 1.0:
        return (k == n).astype(float)
    logc = special.gammaln(n + 1) - special.gammaln(k + 1) - special.gammaln(n - k + 1)
    return np.exp(logc + k * math.log(p) + (n - k) * math.log1p(-p))


def binomial_cdf(n: int, p: float, k: int) -> float:
    """P(X <= k) for X ~ Bin(n, p); exact summation of PMF terms."""
    if k < 0:
        return 0.0
    if k >= n:
        return 1.0
    if n < 0 or not 0.0 <= p <= 1.0:
        raise DomainError(f"invalid binomial parameters n={n}, p={p}")
    if p == 0.0:
        return 1.0
    if p == 1.0:
        return 0.0
    j = np.arange(k + 1)
    logc = special.gammaln(n + 1) - special.gammaln(j + 1) - special.gammaln(n - j + 1)
    logt = logc + j * math.log(p) + (n - j) * math.log1p(-p)
    return float(min(1.0, np.exp(special.logsumexp(logt))))


# ---------------------------------------------------------------------------
# Study distributions
# ---------------------------------------------------------------------------

class Distribution(str, enum.Enum):
    NORMAL = "normal"
    LOGNORMAL = "lognormal"
    CHISQ3 = "chisq3"
    T2 = "t2"
    T3 = "t3"


def _chisq3_cdf(x):
    x = np.maximum(np.asarray(x, dtype=float), 0.0)
    return special.erf(np.sqrt(x / 2)) - np.sqrt(2 * x / np.pi) * np.exp(-x / 2)


def _t2_cdf(x):
    x = np.asarray(x, dtype=float)
    return 0.5 + x / (2 * np.sqrt(2 + x * x))


def _t3_cdf(x):
    x = np.asarray(x, dtype=float)
    s3 = math.sqrt(3.0)
    return 0.5 + (x / (s3 * (1 + x * x / 3)) + np.arctan(x / s3)) / np.pi


def _lognormal_cdf(x):
    x = np.asarray(x, dtype=float)
    with np.errstate(divide="ignore"):
        return np.where(x > 0, special.ndtr(np.log(np.where(x > 0, x, 1.0))), 0.0)


_CDFS = {
    Distribution.NORMAL: special.ndtr,
    Distribution.LOGNORMAL: _lognormal_cdf,
    Distribution.CHISQ3: _chisq3_cdf,
    Distribution.T2: _t2_cdf,
    Distribution.T3: _t3_cdf,
}

# brackets wide enough for quantiles in [1e-6, 1 - 1e-6]
_BRACKETS = {
    Distribution.NORMAL: (-10.0, 10.0),
    Distribution.LOGNORMAL: (0.0, 1e3),
    Distribution.CHISQ3: (0.0, 100.0),
    Distribution.T2: (-1e4, 1e4),
    Distribution.T3: (-1e3, 1e3),
}


def distribution_cdf(kind: Distribution, x):
    return _CDFS[Distribution(kind)](x)


def distribution_quantile(kind: Distribution, p: float) -> float:
    """Population quantile by bisection on the closed-form CDF."""
    from .oracles import cdf_inverse_bisect

    kind = Distribution(kind)
    lo, hi = _BRACKETS[kind]
    return cdf_inverse_bisect(lambda x: float(_CDFS[kind](x)), p, lo, hi)


@dataclass(frozen=True)
class StudyDistribution:
    """One of the five generating distributions with its median."""

    kind: Distribution
    median: float

    @classmethod
    def of(cls, kind) -> "StudyDistribution":
        kind = Distribution(kind)
        return cls(kind, _median(kind))


_MEDIANS: dict[Distribution, float] = {}


def _median(kind: Distribution) -> float:
    if kind not in _MEDIANS:
        if kind is Distribution.LOGNORMAL:
            _MEDIANS[kind] = 1.0
        elif kind is Distribution.CHISQ3:
            _MEDIANS[kind] = distribution_quantile(kind, 0.5)
        else:
            _MEDIANS[kind] = 0.0
    return _MEDIANS[kind]


def sample(dist: StudyDistribution, rng, n: int) -> np.ndarray:
    """Draw ``n`` i.i.d. values of ``dist`` (not centred)."""
    if n < 1:
        raise DomainError("sample size must be >= 1")
    gen = rng.generator() if isinstance(rng, RngStream) else rng
    kind = dist.kind
    if kind is Distribution.NORMAL:
        return gen.standard_normal(n)
    if kind is Distribution.LOGNORMAL:
        return np.exp(gen.standard_normal(n))
    if kind is Distribution.CHISQ3:
        return gen.chisquare(3, n)
    df = 2 if kind is Distribution.T2 else 3
    return gen.standard_t(df, n)
