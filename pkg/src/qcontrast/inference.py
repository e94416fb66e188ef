"""Studentized contrast statistics and the four multiple-testing procedures.

All procedures return a :class:`DecisionSet`.  Resampling procedures draw
from a single :class:`~qcontrast.statdist.RngStream`, so a call is a pure
function of its arguments; calling again with a different ``alpha`` reuses the
same resamples, which keeps decisions monotone in ``alpha``.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field

import numpy as np
from scipy import special

from . import covest
from .contrasts import Direction, HypothesisFamily
from .covest import CovarianceEstimate, Estimator, KernelConfig
from .critvals import CorrelationModel, max_gaussian_draws, upper_order_statistic
from .exceptions import DomainError, ResamplingError, SingularContrastError
from .quantiles import GroupedSample, order_index, pool, quantile_vector
from .statdist import RngStream, normal_quantile

__all__ = [
    "Method",
    "TestStatistics",
    "DecisionSet",
    "studentize",
    "test_statistics",
    "bonferroni_asymptotic",
    "bonferroni_permutation",
    "asymptotic_mctp",
    "bootstrap_mctp",
    "tost_equivalence",
    "run_procedure",
    "permutation_law",
    "MAX_FAILED_FRACTION",
]

MAX_FAILED_FRACTION = 0.05
_CHUNK_ELEMENTS = 250_000


class Method(str, enum.Enum):
    ASYMPTOTIC_BONFERRONI = "asymp-bonferroni"
    PERMUTATION_BONFERRONI = "perm-bonferroni"
    ASYMPTOTIC_MCTP = "asymp-mctp"
    BOOTSTRAP_MCTP = "boot-mctp"


@dataclass(frozen=True)
class TestStatistics:
    values: np.ndarray
    estimates: np.ndarray          # h_l' q_hat
    variances: np.ndarray          # h_l' Sigma_hat h_l
    n: int
    covariance: CovarianceEstimate
    zero_over_zero: np.ndarray     # 0/0 := 0 was applied
    infinite: np.ndarray           # zero variance, non-zero numerator

    __test__ = False  # not a pytest class


@dataclass(frozen=True)
class DecisionSet:
    method: Method
    direction: Direction
    labels: tuple
    statistics: TestStatistics
    critical_values: np.ndarray
    local_reject: np.ndarray
    global_reject: bool
    global_max_rule: bool
    adjusted_p: np.ndarray
    alpha: float
    estimator: Estimator
    B: int | None = None
    B_effective: int | None = None
    n_failed: int = 0
    parts: tuple = field(default=())

    @property
    def r(self) -> int:
        return len(self.labels)


def studentize(numerator, variance, n: int):
    """``sqrt(n) * num / sqrt(var)`` with ``0/0 := 0`` and signed infinity for ``x/0``.

    Works elementwise on arrays of any shape; returns ``(T, zero_over_zero, infinite)``.
    """
    num = np.asarray(numerator, dtype=float)
    var = np.asarray(variance, dtype=float)
    zero = ~(var > 0)
    with np.errstate(divide="ignore", invalid="ignore"):
        t = math.sqrt(n) * num / np.sqrt(np.where(zero, 1.0, var))
    zz = zero & (num == 0)
    inf = zero & (num != 0)
    t = np.where(zz, 0.0, t)
    t = np.where(inf, np.copysign(np.inf, num), t)
    return t, zz, inf


def test_statistics(data: GroupedSample, family: HypothesisFamily,
                    cov: CovarianceEstimate) -> TestStatistics:
    H = family.H
    if H.shape[1] != data.k * family.grid.m or cov.k != data.k or cov.m != family.grid.m:
        raise DomainError("data, family and covariance dimensions disagree")
    est = H @ quantile_vector(data, family.grid)
    var = np.diag(cov.contrast_covariance(H)).copy()
    var[np.abs(var) < 1e-300] = 0.0
    t, zz, inf = studentize(est - family.margins, var, data.n)
    return TestStatistics(t, est, var, data.n, cov, zz, inf)


# ---------------------------------------------------------------------------
# decision helpers
# ---------------------------------------------------------------------------

def _two_sided(family) -> bool:
    return family.direction is Direction.TWO_SIDED


def _local(stats: TestStatistics, crit, two_sided: bool) -> np.ndarray:
    t = stats.values
    if two_sided:
        return (np.abs(t) > crit) | stats.infinite
    return (t > crit) | (stats.infinite & (t > 0))


def _ratio_rule(stats: TestStatistics, crit, two_sided: bool) -> bool:
    """``max_l T_l / c_l > 1`` with ``0/0 := 0``."""
    t = np.abs(stats.values) if two_sided else stats.values
    crit = np.broadcast_to(np.asarray(crit, dtype=float), t.shape)
    with np.errstate(divide="ignore", invalid="ignore"):
        ratio = np.where((t == 0) & (crit == 0), 0.0, t / crit)
        ratio = np.where((crit == 0) & (t != 0), np.copysign(np.inf, t), ratio)
    return bool(np.max(ratio) > 1)


def _check_alpha(alpha):
    if not 0 < alpha < 1:
        raise DomainError(f"alpha must lie in (0, 1), got {alpha}")


def _observed(data, family, cov_kind, cov_alpha, kernel, stats):
    if stats is not None:
        return stats
    cov = covest.estimate(data, family.grid, cov_kind, alpha=cov_alpha, kernel=kernel)
    return test_statistics(data, family, cov)


def _generator(rng):
    if rng is None:
        raise DomainError("a random stream is required for resampling procedures")
    return rng.generator() if isinstance(rng, RngStream) else rng


# ---------------------------------------------------------------------------
# procedures
# ---------------------------------------------------------------------------

def bonferroni_asymptotic(stats: TestStatistics, family: HypothesisFamily,
                          alpha: float) -> DecisionSet:
    _check_alpha(alpha)
    r = family.r
    two = _two_sided(family)
    c = normal_quantile(1 - alpha / (2 * r)) if two else normal_quantile(1 - alpha / r)
    crit = np.full(r, c)
    local = _local(stats, crit, two)
    tail = 2 * special.ndtr(-np.abs(stats.values)) if two else special.ndtr(-stats.values)
    return DecisionSet(
        method=Method.ASYMPTOTIC_BONFERRONI, direction=family.direction,
        labels=family.matrix.labels, statistics=stats, critical_values=crit,
        local_reject=local, global_reject=bool(local.any()),
        global_max_rule=bool(np.max(np.abs(stats.values) if two else stats.values) > c
                             or np.any(local & stats.infinite)),
        adjusted_p=np.minimum(1.0, r * tail), alpha=alpha,
        estimator=stats.covariance.estimator,
    )


def asymptotic_mctp(stats: TestStatistics, family: HypothesisFamily, cov: CovarianceEstimate,
                    alpha: float, mc_samples: int = 100_000, rng=None) -> DecisionSet:
    _check_alpha(alpha)
    if mc_samples < 10_000:
        raise DomainError("mc_samples must be at least 10,000")
    S = cov.contrast_covariance(family.H)
    d = np.diag(S)
    for l in range(family.r):
        if not d[l] > 0:
            raise SingularContrastError(l + 1, family.matrix.labels[l])
    two = _two_sided(family)
    model = CorrelationModel.from_covariance(S)
    draws = max_gaussian_draws(model, two, mc_samples, rng if rng is not None else RngStream(0))
    c = upper_order_statistic(draws, 1 - alpha)
    crit = np.full(family.r, c)
    local = _local(stats, crit, two)
    t = np.abs(stats.values) if two else stats.values
    adj = _tail_fraction(np.sort(draws), t)
    return DecisionSet(
        method=Method.ASYMPTOTIC_MCTP, direction=family.direction,
        labels=family.matrix.labels, statistics=stats, critical_values=crit,
        local_reject=local, global_reject=bool(local.any()),
        global_max_rule=bool(np.max(t) > c or np.any(local & stats.infinite)),
        adjusted_p=adj, alpha=alpha, estimator=cov.estimator,
    )


def _tail_fraction(sorted_draws, t):
    """Fraction of draws >= each t."""
    n = sorted_draws.size
    return (n - np.searchsorted(sorted_draws, t, side="left")) / n


def bonferroni_permutation(data: GroupedSample, family: HypothesisFamily, cov_kind,
                           alpha: float, B: int, rng, *, kernel: KernelConfig = KernelConfig(),
                           cov_alpha: float | None = None,
                           stats: TestStatistics | None = None) -> DecisionSet:
    """Per-contrast permutation critical values at level ``1 - alpha / r``."""
    _check_alpha(alpha)
    if B < 1:
        raise DomainError("B must be >= 1")
    cov_kind = Estimator(cov_kind)
    cov_alpha = alpha if cov_alpha is None else cov_alpha
    stats = _observed(data, family, cov_kind, cov_alpha, kernel, stats)
    tpi, failed = _permutation_statistics(data, family, cov_kind, B, _generator(rng),
                                          cov_alpha, kernel)
    tpi = _drop_failed(tpi, failed, B)
    r = family.r
    two = _two_sided(family)
    ref = np.abs(tpi) if two else tpi
    crit = np.array([upper_order_statistic(ref[:, l], 1 - alpha / r) for l in range(r)])
    local = _local(stats, crit, two)
    t = np.abs(stats.values) if two else stats.values
    p = np.array([_tail_fraction(np.sort(ref[:, l]), t[l]) for l in range(r)])
    return DecisionSet(
        method=Method.PERMUTATION_BONFERRONI, direction=family.direction,
        labels=family.matrix.labels, statistics=stats, critical_values=crit,
        local_reject=local, global_reject=bool(local.any()),
        global_max_rule=_ratio_rule(stats, crit, two),
        adjusted_p=np.minimum(1.0, r * p), alpha=alpha, estimator=cov_kind,
        B=B, B_effective=int(ref.shape[0]), n_failed=int(failed.sum()),
    )


def bootstrap_mctp(data: GroupedSample, family: HypothesisFamily, cov_kind, alpha: float,
                   B: int, rng, *, kernel: KernelConfig = KernelConfig(),
                   cov_alpha: float | None = None,
                   stats: TestStatistics | None = None) -> DecisionSet:
    """Shared critical value from the groupwise bootstrap law of the maximum."""
    _check_alpha(alpha)
    if B < 1:
        raise DomainError("B must be >= 1")
    cov_kind = Estimator(cov_kind)
    cov_alpha = alpha if cov_alpha is None else cov_alpha
    stats = _observed(data, family, cov_kind, cov_alpha, kernel, stats)
    tstar, failed = _bootstrap_statistics(data, family, cov_kind, B, _generator(rng),
                                          cov_alpha, kernel)
    tstar = _drop_failed(tstar, failed, B)
    two = _two_sided(family)
    maxima = np.max(np.abs(tstar) if two else tstar, axis=1)
    c = upper_order_statistic(maxima, 1 - alpha)
    crit = np.full(family.r, c)
    local = _local(stats, crit, two)
    t = np.abs(stats.values) if two else stats.values
    return DecisionSet(
        method=Method.BOOTSTRAP_MCTP, direction=family.direction,
        labels=family.matrix.labels, statistics=stats, critical_values=crit,
        local_reject=local, global_reject=bool(local.any()),
        global_max_rule=bool(np.max(t) > c or np.any(local & stats.infinite)),
        adjusted_p=_tail_fraction(np.sort(maxima), t), alpha=alpha, estimator=cov_kind,
        B=B, B_effective=int(maxima.size), n_failed=int(failed.sum()),
    )


def run_procedure(data: GroupedSample, family: HypothesisFamily, method, cov_kind,
                  alpha: float = 0.05, *, B: int = 2000, rng=None, mc_samples: int = 100_000,
                  kernel: KernelConfig = KernelConfig(), cov_alpha: float | None = None,
                  stats: TestStatistics | None = None) -> DecisionSet:
    """Dispatch to one of the four procedures (or TOST for equivalence families)."""
    method = Method(method)
    cov_kind = Estimator(cov_kind)
    if rng is None:
        rng = RngStream(0)
    if family.direction is Direction.EQUIVALENCE:
        return tost_equivalence(data, family, method, cov_kind, alpha, B=B, rng=rng,
                                mc_samples=mc_samples, kernel=kernel, cov_alpha=cov_alpha)
    cov_alpha = alpha if cov_alpha is None else cov_alpha
    if method is Method.PERMUTATION_BONFERRONI:
        return bonferroni_permutation(data, family, cov_kind, alpha, B, rng, kernel=kernel,
                                      cov_alpha=cov_alpha, stats=stats)
    if method is Method.BOOTSTRAP_MCTP:
        return bootstrap_mctp(data, family, cov_kind, alpha, B, rng, kernel=kernel,
                              cov_alpha=cov_alpha, stats=stats)
    stats = _observed(data, family, cov_kind, cov_alpha, kernel, stats)
    if method is Method.ASYMPTOTIC_BONFERRONI:
        return bonferroni_asymptotic(stats, family, alpha)
    return asymptotic_mctp(stats, family, stats.covariance, alpha, mc_samples, rng)


def permutation_law(data: GroupedSample, family: HypothesisFamily, cov_kind, B: int, rng,
                    *, alpha: float = 0.05, kernel: KernelConfig = KernelConfig()) -> np.ndarray:
    """``B`` draws of the permuted statistic vector ``T^pi``, shape ``(B_effective, r)``."""
    tpi, failed = _permutation_statistics(data, family, Estimator(cov_kind), B,
                                          _generator(rng), alpha, kernel)
    return _drop_failed(tpi, failed, B)


def tost_equivalence(data: GroupedSample, family: HypothesisFamily, method, cov_kind,
                     alpha: float = 0.05, **kw) -> DecisionSet:
    """Two one-sided non-inferiority tests at ``alpha / 2`` each, sharing random draws.

    Lower test: ``H0: h'q <= -delta``; upper test: ``H0: -h'q <= -delta``.
    Equivalence is concluded for contrast ``l`` only if both reject.
    """
    if family.direction is not Direction.EQUIVALENCE:
        raise DomainError("tost_equivalence needs an equivalence family")
    if np.any(family.margins <= 0):
        raise DomainError("equivalence margins must be positive")
    _check_alpha(alpha)
    kw.setdefault("cov_alpha", alpha)
    kw.pop("stats", None)
    lower = HypothesisFamily(family.matrix, -family.margins, Direction.NONINFERIORITY, family.grid)
    upper = HypothesisFamily(family.matrix.negate(), -family.margins, Direction.NONINFERIORITY,
                             family.grid)
    lo = run_procedure(data, lower, method, cov_kind, alpha / 2, **kw)
    up = run_procedure(data, upper, method, cov_kind, alpha / 2, **kw)
    local = lo.local_reject & up.local_reject
    return DecisionSet(
        method=Method(method), direction=Direction.EQUIVALENCE, labels=family.matrix.labels,
        statistics=lo.statistics, critical_values=lo.critical_values, local_reject=local,
        global_reject=bool(local.any()), global_max_rule=bool(local.any()),
        adjusted_p=np.maximum(lo.adjusted_p, up.adjusted_p), alpha=alpha,
        estimator=lo.estimator, B=lo.B, B_effective=lo.B_effective,
        n_failed=max(lo.n_failed, up.n_failed), parts=(lo, up),
    )


# ---------------------------------------------------------------------------
# vectorised resampling engine
# ---------------------------------------------------------------------------

def _drop_failed(t, failed, B):
    nf = int(failed.sum())
    if nf > MAX_FAILED_FRACTION * B:
        raise ResamplingError(f"{nf} of {B} resampling replicates failed (limit 5%)")
    return t[~failed]


def _chunk_size(n: int, B: int) -> int:
    return max(1, min(B, _CHUNK_ELEMENTS // max(n, 1)))


def _stack_statistics(sorted_groups, family, cov_kind, cov_alpha, kernel, n, center):
    """Studentized statistics for a stack of resampled data sets.

    ``sorted_groups[i]`` has shape ``(c, n_i)`` with ascending rows.  Returns
    ``(T, failed)`` with shapes ``(c, r)`` and ``(c,)``.
    """
    probs = family.grid.probs
    m = len(probs)
    H = family.H
    C = covest.shape_matrix(probs, cov_kind)
    c = sorted_groups[0].shape[0]
    est = np.zeros((c, family.r))
    var = np.zeros((c, family.r))
    failed = np.zeros(c, dtype=bool)
    for i, sg in enumerate(sorted_groups):
        ni = sg.shape[1]
        Hi = H[:, i * m:(i + 1) * m]
        q = sg[:, [order_index(ni, p) for p in probs]]
        if center is not None:
            q = q - center[i * m:(i + 1) * m]
        est += q @ Hi.T
        s = covest.batch_scales(sg, probs, cov_kind, alpha=cov_alpha, kernel=kernel)
        bad = ~np.all(np.isfinite(s), axis=1)
        failed |= bad
        s = np.where(bad[:, None], 0.0, s)
        W = Hi[None, :, :] * s[:, None, :]
        var += (n / ni) * np.einsum("brm,mk,brk->br", W, C, W)
    var[np.abs(var) < 1e-300] = 0.0
    t, _, _ = studentize(est, var, n)
    return t, failed


def _permutation_statistics(data, family, cov_kind, B, gen, cov_alpha, kernel):
    pooled = pool(data)
    n = data.n
    bounds = np.cumsum((0,) + data.sizes)
    chunk = _chunk_size(n, B)
    ts, fs = [], []
    for start in range(0, B, chunk):
        size = min(chunk, B - start)
        perm = gen.permuted(np.broadcast_to(pooled, (size, n)), axis=1)
        groups = [np.sort(perm[:, bounds[i]:bounds[i + 1]], axis=1) for i in range(data.k)]
        t, f = _stack_statistics(groups, family, cov_kind, cov_alpha, kernel, n, None)
        ts.append(t)
        fs.append(f)
    return np.vstack(ts), np.concatenate(fs)


def _bootstrap_statistics(data, family, cov_kind, B, gen, cov_alpha, kernel):
    n = data.n
    center = quantile_vector(data, family.grid)
    chunk = _chunk_size(n, B)
    ts, fs = [], []
    for start in range(0, B, chunk):
        size = min(chunk, B - start)
        groups = []
        for g in data.groups:
            idx = gen.integers(0, g.size, size=(size, g.size))
            groups.append(np.sort(g[idx], axis=1))
        t, f = _stack_statistics(groups, family, cov_kind, cov_alpha, kernel, n, center)
        ts.append(t)
        fs.append(f)
    return np.vstack(ts), np.concatenate(fs)
