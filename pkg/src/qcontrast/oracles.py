"""Brute-force reference computations.

These are deliberately simple and slow.  They back the ``selftest`` command
and the test suite; nothing in the main pipeline calls them except the
bisection used for population quantiles of the study distributions.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass

import numpy as np

from .exceptions import DomainError

__all__ = [
    "series_normal_cdf",
    "cdf_inverse_bisect",
    "independent_max_quantile",
    "EnumeratedPermutationLaw",
    "enumerate_permutation_law",
    "enumerate_permutation_quantile",
    "discrete_quantile",
    "MAX_ENUMERATION_N",
    "kolmogorov_distance",
    "CheckResult",
    "selftest",
]

MAX_ENUMERATION_N = 12


def series_normal_cdf(x: float) -> float:
    """Phi(x) from the all-positive-term series of erf; fine for |x| <= 10."""
    x = float(x)
    if x < 0:
        return 1.0 - series_normal_cdf(-x)
    if x > 10:
        return 1.0
    y = x / math.sqrt(2.0)
    term = y
    total = y
    k = 0
    while term > 1e-17 * total:
        k += 1
        term *= 2 * y * y / (2 * k + 1)
        total += term
    erf = 2.0 / math.sqrt(math.pi) * math.exp(-y * y) * total
    return 0.5 * (1.0 + erf)


def cdf_inverse_bisect(cdf, beta: float, lo: float, hi: float, tol: float = 1e-12) -> float:
    """Smallest ``x`` in ``[lo, hi]`` with ``cdf(x) >= beta``, by bisection.

    Requires ``cdf(lo) < beta <= cdf(hi)``.  The returned point satisfies the
    inequality and lies within ``tol`` (relative to ``max(1, |x|)``) of the
    true generalized inverse.
    """
    if not lo < hi:
        raise DomainError("bracket must satisfy lo < hi")
    if not cdf(lo) < beta <= cdf(hi):
        raise DomainError(f"bracket [{lo}, {hi}] does not contain the {beta}-quantile")
    for _ in range(400):
        if hi - lo <= tol * max(1.0, abs(hi)):
            break
        mid = 0.5 * (lo + hi)
        if cdf(mid) >= beta:
            hi = mid
        else:
            lo = mid
    return hi


def independent_max_quantile(r: int, level: float, absolute: bool) -> float:
    """Quantile of ``max Z_l`` (or ``max |Z_l|``) for ``r`` independent N(0, 1)."""
    if absolute:
        cdf = lambda q: (2 * series_normal_cdf(q) - 1) ** r if q > 0 else 0.0
        return cdf_inverse_bisect(cdf, level, 0.0, 10.0)
    return cdf_inverse_bisect(lambda q: series_normal_cdf(q) ** r, level, -10.0, 10.0)


def discrete_quantile(values, beta: float) -> float:
    """``ceil(N beta)``-th smallest value of an equally weighted list."""
    v = sorted(float(x) for x in values)
    j = min(max(math.ceil(len(v) * beta - 1e-9), 1), len(v))
    return v[j - 1]


@dataclass(frozen=True)
class EnumeratedPermutationLaw:
    """Every assignment of the pooled sample to groups of the original sizes."""

    statistics: np.ndarray   # shape (n_assignments, r)
    absolute: bool

    @property
    def size(self) -> int:
        return self.statistics.shape[0]

    def quantiles(self, beta: float) -> np.ndarray:
        vals = np.abs(self.statistics) if self.absolute else self.statistics
        return np.array([discrete_quantile(vals[:, l], beta) for l in range(vals.shape[1])])


def _assignments(indices, sizes):
    if len(sizes) == 1:
        yield (tuple(indices),)
        return
    for first in itertools.combinations(indices, sizes[0]):
        rest = [i for i in indices if i not in first]
        for tail in _assignments(rest, sizes[1:]):
            yield (first,) + tail


def enumerate_permutation_law(data, family, cov_kind, *, alpha: float = 0.05,
                              kernel=None, absolute: bool | None = None):
    """Exact permutation law of the studentized contrast vector (``n <= 12``).

    Uses only the single-sample quantile and covariance routines, one
    assignment at a time.
    """
    from . import covest
    from .contrasts import Direction
    from .quantiles import GroupedSample, pool, quantile_vector

    if data.n > MAX_ENUMERATION_N:
        raise DomainError(f"enumeration needs n <= {MAX_ENUMERATION_N}, got {data.n}")
    if absolute is None:
        absolute = family.direction is Direction.TWO_SIDED
    kernel = kernel or covest.KernelConfig()
    pooled = pool(data)
    rows = []
    for assignment in _assignments(list(range(data.n)), list(data.sizes)):
        perm = GroupedSample([pooled[list(a)] for a in assignment], data.labels)
        cov = covest.estimate(perm, family.grid, cov_kind, alpha=alpha, kernel=kernel)
        est = family.H @ quantile_vector(perm, family.grid)
        var = np.diag(cov.contrast_covariance(family.H))
        t = []
        for e, v in zip(est, var):
            if v > 1e-300:
                t.append(math.sqrt(data.n) * e / math.sqrt(v))
            elif e == 0:
                t.append(0.0)
            else:
                t.append(math.copysign(math.inf, e))
        rows.append(t)
    return EnumeratedPermutationLaw(np.array(rows), absolute)


def enumerate_permutation_quantile(data, family, cov_kind, beta: float, **kw) -> np.ndarray:
    return enumerate_permutation_law(data, family, cov_kind, **kw).quantiles(beta)


def kolmogorov_distance(sample, law, decimals: int = 9) -> float:
    """sup |F_sample - F_law| over the union of both supports.

    Values are rounded to ``decimals`` first, so atoms computed along two
    different floating-point routes are not counted as distinct points.
    """
    a = np.sort(np.round(np.asarray(sample, dtype=float), decimals))
    b = np.sort(np.round(np.asarray(law, dtype=float), decimals))
    pts = np.union1d(a, b)
    fa = np.searchsorted(a, pts, side="right") / a.size
    fb = np.searchsorted(b, pts, side="right") / b.size
    return float(np.max(np.abs(fa - fb)))


# ---------------------------------------------------------------------------
# selftest
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class CheckResult:
    name: str
    ok: bool
    detail: str


def _check(name, ok, detail):
    return CheckResult(name, bool(ok), detail)


def _normal_checks():
    from .statdist import normal_cdf, normal_quantile

    out = []
    q = cdf_inverse_bisect(normal_cdf, 0.975, -10.0, 10.0)
    out.append(_check("normal quantile by bisection", abs(q - normal_quantile(0.975)) < 1e-9
                      and abs(q - 1.959964) < 1e-6, f"z(0.975) = {q:.12f}"))
    xs = np.linspace(-6, 6, 49)
    err = max(abs(series_normal_cdf(x) - float(normal_cdf(x))) for x in xs)
    out.append(_check("normal cdf vs erf series", err < 1e-13, f"max abs error {err:.2e}"))
    return out


def _distribution_checks():
    from .statdist import Distribution, StudyDistribution, distribution_cdf

    out = []
    med = StudyDistribution.of(Distribution.CHISQ3).median
    out.append(_check("chi-square(3) median", abs(med - 2.36597) < 1e-5, f"median = {med:.8f}"))
    for kind in Distribution:
        m = StudyDistribution.of(kind).median
        c = float(distribution_cdf(kind, m))
        out.append(_check(f"{kind.value} cdf at median", abs(c - 0.5) < 1e-9, f"F(m) = {c:.12f}"))
    return out


def _binomial_checks():
    from .covest import bootstrap_weights
    from .statdist import binomial_cdf, binomial_pmf

    worst_sum = worst_cdf = 0.0
    for n in (5, 10, 15, 20, 57, 101):
        for p in (0.25, 0.5, 0.75):
            worst_sum = max(worst_sum, abs(bootstrap_weights(n, p).sum() - 1.0))
            pmf = binomial_pmf(n, p)
            for k in range(n + 1):
                worst_cdf = max(worst_cdf, abs(binomial_cdf(n, p, k) - min(1.0, pmf[:k + 1].sum())))
    return [
        _check("bootstrap weights telescope to 1", worst_sum < 1e-12, f"max |sum - 1| {worst_sum:.2e}"),
        _check("binomial cdf vs pmf partial sums", worst_cdf < 1e-12, f"max error {worst_cdf:.2e}"),
    ]


def _max_gaussian_checks():
    from .critvals import CorrelationModel, max_gaussian_quantile
    from .statdist import RngStream, normal_quantile

    q2 = independent_max_quantile(2, 0.95, absolute=True)
    mc2 = max_gaussian_quantile(CorrelationModel(np.eye(2)), 0.95, True, 200_000, RngStream(1))
    mc1 = max_gaussian_quantile(CorrelationModel(np.eye(1)), 0.95, False, 200_000, RngStream(2))
    z = normal_quantile(0.95)
    return [
        _check("independent max |Z| quantile (r=2)", abs(q2 - 2.2365) < 1e-3, f"exact {q2:.6f}"),
        _check("Monte Carlo max |Z| quantile (r=2)", abs(mc2 - q2) < 0.01, f"{mc2:.4f} vs {q2:.4f}"),
        _check("Monte Carlo z quantile (r=1)", abs(mc1 - z) < 0.01, f"{mc1:.4f} vs {z:.4f}"),
    ]


def _enumeration_checks(B=50_000):
    from .contrasts import HypothesisFamily, dunnett
    from .covest import Estimator
    from .inference import permutation_law
    from .quantiles import GroupedSample
    from .statdist import RngStream

    out = []
    fam = HypothesisFamily(dunnett(2), 0.0, "two-sided", (0.5,))
    tiny = GroupedSample([np.array([0.1, 0.7, 1.3]), np.array([0.4, 2.0, 2.9])])
    law = enumerate_permutation_law(tiny, fam, Estimator.BOOTSTRAP)
    out.append(_check("assignments of 3 + 3", law.size == 20, f"{law.size} assignments"))
    flat = GroupedSample([np.ones(4), np.ones(4)])
    law = enumerate_permutation_law(flat, fam, Estimator.BOOTSTRAP)
    out.append(_check("constant data gives zero statistics", np.all(law.statistics == 0),
                      f"max |T| = {np.max(np.abs(law.statistics)):.3g}"))

    pooled = np.array([-2.1, -1.4, -0.9, -0.5, -0.2, 0.2, 0.5, 0.9, 1.4, 2.1])
    data = GroupedSample([pooled[::2], pooled[1::2]])
    for kind in Estimator:
        exact = enumerate_permutation_law(data, fam, kind)
        mc = np.abs(permutation_law(data, fam, kind, B, RngStream(7, (list(Estimator).index(kind),))))
        d = kolmogorov_distance(mc[:, 0], np.abs(exact.statistics[:, 0]))
        ok = d < 0.02
        detail = [f"KS {d:.4f}"]
        for beta in (0.5, 0.9, 0.95, 0.975):
            q_mc = discrete_quantile(mc[:, 0], beta)
            lo = exact.quantiles(max(beta - 0.01, 1e-9))[0]
            hi = exact.quantiles(min(beta + 0.01, 1.0))[0]
            ok &= lo - 1e-9 <= q_mc <= hi + 1e-9
            detail.append(f"q{beta}={q_mc:.4f} in [{lo:.4f}, {hi:.4f}]")
        out.append(_check(f"enumerated vs sampled permutation law ({kind.value})", ok,
                          ", ".join(detail)))
    return out


def selftest() -> list:
    """Run every oracle cross-check; returns one :class:`CheckResult` per check."""
    results = []
    for group in (_normal_checks, _distribution_checks, _binomial_checks,
                  _max_gaussian_checks, _enumeration_checks):
        results.extend(group())
    return results
