import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from qcontrast.contrasts import Direction, HypothesisFamily, build, custom
from qcontrast.covest import Estimator, estimate
from qcontrast.exceptions import DomainError, ResamplingError, SingularContrastError
from qcontrast.inference import (Method, bonferroni_asymptotic, bootstrap_mctp, permutation_law,
                                 run_procedure, studentize)
from qcontrast.inference import test_statistics as compute_statistics
from qcontrast.oracles import enumerate_permutation_law
from qcontrast.quantiles import GroupedSample
from qcontrast.statdist import RngStream

Z_TWO_SIDED_BONF_R3 = 2.3939797998185094648   # z_{1 - 0.05/6}


def groups(seed, sizes=(11, 13, 15), shift=(0.0, 0.0, 0.0), dist="normal"):
    gen = RngStream(seed, (42,)).generator()
    draw = gen.standard_normal if dist == "normal" else (lambda n: gen.standard_t(3, n))
    return GroupedSample([draw(n) + s for n, s in zip(sizes, shift)])


def family(k=3, direction="two-sided", margin=0.0, fam="dunnett"):
    m, g = build(fam, k)
    return HypothesisFamily(m, margin, direction, g)


def test_studentize_examples():
    t, zz, inf = studentize(np.array([1.0]), np.array([4.0]), 20)
    assert t[0] == pytest.approx(math.sqrt(20) / 2)
    t, zz, inf = studentize(np.array([0.0, 2.0, -2.0]), np.zeros(3), 10)
    assert list(t) == [0.0, np.inf, -np.inf]
    assert list(zz) == [True, False, False] and list(inf) == [False, True, True]


def test_centered_margin_gives_zero():
    d = groups(1)
    fam0 = family()
    cov = estimate(d, fam0.grid, "kernel")
    est = compute_statistics(d, fam0, cov).estimates
    t = compute_statistics(d, family(margin=est), cov)
    assert np.allclose(t.values, 0.0)


@pytest.mark.parametrize("kind", list(Estimator))
def test_statistics_scale_invariant(kind):
    d = groups(2)
    fam = family()
    a = compute_statistics(d, fam, estimate(d, fam.grid, kind)).values
    d2 = d.map(lambda g: 2 * g)
    b = compute_statistics(d2, fam, estimate(d2, fam.grid, kind)).values
    assert np.allclose(a, b, rtol=1e-10)


def test_bonferroni_asymptotic_critical_values():
    d = groups(3)
    fam = family(4 - 1 + 1)
    d4 = groups(3, sizes=(10, 10, 10, 10), shift=(0, 0, 0, 0))
    stats = compute_statistics(d4, fam, estimate(d4, fam.grid, "bootstrap"))
    ds = bonferroni_asymptotic(stats, fam, 0.05)
    assert ds.critical_values[0] == pytest.approx(Z_TWO_SIDED_BONF_R3, abs=1e-12)
    one = family(2, "noninferiority")
    d2 = GroupedSample(d.groups[:2])
    ds1 = bonferroni_asymptotic(compute_statistics(d2, one, estimate(d2, one.grid, "kernel")), one, 0.05)
    assert ds1.critical_values[0] == pytest.approx(1.6448536269514722, abs=1e-12)


def test_zero_statistics_do_not_reject():
    fam = family()
    d = GroupedSample([np.arange(5.0), np.arange(5.0), np.arange(5.0)])
    for method in Method:
        ds = run_procedure(d, fam, method, "bootstrap", B=200, rng=RngStream(1),
                           mc_samples=10_000)
        assert np.all(ds.statistics.values == 0)
        assert not ds.local_reject.any() and not ds.global_reject


def test_all_equal_observations_permutation():
    d = GroupedSample([np.full(4, 2.0), np.full(4, 2.0), np.full(4, 2.0)])
    fam = family()
    tpi = permutation_law(d, fam, "bootstrap", 100, RngStream(2))
    assert np.all(tpi == 0)
    ds = run_procedure(d, fam, "perm-bonferroni", "bootstrap", B=100, rng=RngStream(2))
    assert np.all(ds.statistics.values == 0) and not ds.global_reject


def test_infinite_statistic_forces_rejection():
    d = GroupedSample([np.full(5, 1.0), np.full(5, 3.0)])
    ds = bonferroni_asymptotic(
        compute_statistics(d, family(2), estimate(d, (0.5,), "bootstrap")), family(2), 0.05)
    assert ds.statistics.infinite[0] and ds.local_reject[0] and ds.global_reject
    ni = family(2, "noninferiority", margin=5.0)
    ds = bonferroni_asymptotic(compute_statistics(d, ni, estimate(d, (0.5,), "bootstrap")), ni, 0.05)
    assert ds.statistics.values[0] == -np.inf and not ds.local_reject[0]


def test_singular_contrast_for_asymptotic_mctp():
    d = GroupedSample([np.full(5, 1.0), np.full(5, 1.0), np.arange(5.0)])
    with pytest.raises(SingularContrastError):
        run_procedure(d, family(), "asymp-mctp", "bootstrap", mc_samples=10_000)


def test_bootstrap_degenerate_resampling_gives_zero_critical_value():
    d = GroupedSample([np.full(6, 1.0), np.full(6, 2.0), np.full(6, 4.0)])
    ds = bootstrap_mctp(d, family(), "bootstrap", 0.05, 200, RngStream(3))
    assert np.all(ds.critical_values == 0)


def test_errors():
    d = groups(4)
    with pytest.raises(DomainError):
        run_procedure(d, family(), "perm-bonferroni", "kernel", B=0)
    with pytest.raises(DomainError):
        run_procedure(d, family(), "asymp-bonferroni", "kernel", alpha=1.5)
    many_ties = GroupedSample([np.r_[np.zeros(9), 1.0], np.r_[np.zeros(9), 2.0],
                               np.r_[np.zeros(9), 3.0]])
    with pytest.raises(ResamplingError):
        run_procedure(many_ties, family(), "perm-bonferroni", "kernel", B=200, rng=RngStream(5))


def test_tiny_enumeration_matches_sampler():
    d = GroupedSample([np.array([0.3, 1.1, 2.5]), np.array([0.9, 1.7, 4.0])])
    fam = family(2)
    law = enumerate_permutation_law(d, fam, "bootstrap")
    assert law.size == 20
    exact = np.sort(np.round(np.abs(law.statistics[:, 0]), 9))
    mc = np.round(np.abs(permutation_law(d, fam, "bootstrap", 20_000, RngStream(6))[:, 0]), 9)
    atoms = np.unique(exact)
    assert set(np.unique(mc)) <= set(atoms)
    for beta in (0.5, 0.8, 0.9, 0.95):
        q_mc = np.sort(mc)[math.ceil(mc.size * beta) - 1]
        lo, hi = law.quantiles(beta - 0.02)[0], law.quantiles(min(beta + 0.02, 1.0))[0]
        assert round(lo, 9) <= q_mc <= round(hi, 9)


@pytest.mark.parametrize("method", list(Method))
def test_row_order_permutes_decisions(method):
    d = groups(7, sizes=(12, 12, 12, 12), shift=(0, 0.4, 0.8, 1.2))
    m, g = build("tukey", 4)
    fam = HypothesisFamily(m, 0.0, "two-sided", g)
    order = [3, 0, 5, 1, 4, 2]
    perm = HypothesisFamily(custom(m.rows[order], 4, [m.labels[i] for i in order]), 0.0,
                            "two-sided", g)
    a = run_procedure(d, fam, method, "kernel", B=300, rng=RngStream(8), mc_samples=20_000)
    b = run_procedure(d, perm, method, "kernel", B=300, rng=RngStream(8), mc_samples=20_000)
    assert np.array_equal(a.local_reject[order], b.local_reject)
    assert np.allclose(a.statistics.values[order], b.statistics.values)


@pytest.mark.parametrize("method", list(Method))
@pytest.mark.parametrize("direction", ["two-sided", "noninferiority"])
@given(seed=st.integers(0, 10_000), a1=st.floats(0.001, 0.5), a2=st.floats(0.001, 0.5))
def test_alpha_monotonicity_and_global_rule(method, direction, seed, a1, a2):
    d = groups(seed, shift=(0, 0.5, 1.0))
    fam = family(direction=direction)
    lo, hi = sorted((a1, a2))
    kw = dict(B=100, rng=RngStream(seed), mc_samples=10_000)
    small = run_procedure(d, fam, method, "bootstrap", lo, **kw)
    big = run_procedure(d, fam, method, "bootstrap", hi, **kw)
    assert np.all(big.local_reject | ~small.local_reject)
    for ds in (small, big):
        assert ds.global_reject == ds.global_max_rule


@pytest.mark.parametrize("method", list(Method))
@given(shift=st.floats(-50, 50))
def test_common_location_shift_invariance(method, shift):
    d = groups(9, shift=(0, 0.3, 0.9))
    fam = family()
    kw = dict(B=100, rng=RngStream(10), mc_samples=10_000)
    a = run_procedure(d, fam, method, "kernel", **kw)
    b = run_procedure(d.map(lambda g: g + shift), fam, method, "kernel", **kw)
    assert np.allclose(a.statistics.values, b.statistics.values, rtol=1e-6, atol=1e-6)
    assert np.allclose(a.critical_values, b.critical_values, rtol=1e-6, atol=1e-6)


def test_tost_limits_and_symmetry():
    d = groups(11, sizes=(15, 17, 19))
    m, g = build("tukey", 3)
    for method in Method:
        kw = dict(B=200, rng=RngStream(12), mc_samples=10_000)
        wide = run_procedure(d, HypothesisFamily(m, 100.0, "equivalence", g), method,
                             "kernel", **kw)
        assert wide.local_reject.all()
        narrow = run_procedure(d, HypothesisFamily(m, 1e-6, "equivalence", g), method,
                               "kernel", **kw)
        assert not narrow.local_reject.any()
        fam = HypothesisFamily(m, 0.6, "equivalence", g)
        a = run_procedure(d, fam, method, "kernel", **kw)
        b = run_procedure(d.map(lambda x: -x), fam, method, "kernel", **kw)
        assert np.array_equal(a.local_reject, b.local_reject)
        assert a.direction is Direction.EQUIVALENCE and len(a.parts) == 2
