import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from qcontrast.exceptions import DataError, DomainError
from qcontrast.quantiles import (GroupedSample, ProbabilityGrid, empirical_quantile, pool,
                                 quantile_vector)

finite = st.floats(-1e6, 1e6, allow_nan=False)
samples = st.lists(finite, min_size=1, max_size=60)
probs = st.floats(0.001, 0.999)


def test_empirical_quantile_examples():
    assert empirical_quantile([1, 2, 3, 4, 5], 0.5) == 3
    assert empirical_quantile([1, 2, 3, 4], 0.5) == 2
    for p in (0.01, 0.5, 0.99):
        assert empirical_quantile([7, 7, 7], p) == 7


def test_empirical_quantile_is_left_continuous_inverse():
    # F_hat(x) >= p first happens at the ceil(n p)-th order statistic
    x = np.array([5.0, 1.0, 4.0, 2.0, 3.0])
    assert empirical_quantile(x, 0.2) == 1.0
    assert empirical_quantile(x, 0.2000001) == 2.0
    assert empirical_quantile(x, 0.6) == 3.0


def test_empirical_quantile_errors():
    with pytest.raises(DomainError):
        empirical_quantile([], 0.5)
    with pytest.raises(DomainError):
        empirical_quantile([1.0], 1.0)


def test_quantile_vector_examples():
    grid = ProbabilityGrid((0.25, 0.5, 0.75))
    one = GroupedSample([np.arange(1.0, 9.0), np.arange(1.0, 9.0)])
    q = quantile_vector(one, grid)
    assert list(q[:3]) == [2, 4, 6]
    assert list(q[3:]) == [2, 4, 6]


def test_pool_examples():
    d = GroupedSample([[1.0, 2.0], [3.0, 4.0, 5.0]])
    assert list(pool(d)) == [1, 2, 3, 4, 5]
    assert d.n == 5 and d.sizes == (2, 3)


def test_grouped_sample_validation():
    with pytest.raises(DataError):
        GroupedSample([[1.0, 2.0]])
    with pytest.raises(DataError):
        GroupedSample([[1.0], [1.0, 2.0]])
    with pytest.raises(DataError):
        GroupedSample([[1.0, np.nan], [1.0, 2.0]])
    d = GroupedSample([[1.0, 2.0], [3.0, 4.0], [5.0, 6.0]], ["a", "b", "c"])
    r = d.reorder("c")
    assert r.labels == ("c", "a", "b")
    assert list(r.groups[0]) == [5.0, 6.0]


@pytest.mark.parametrize("bad", [(), (0.0,), (0.5, 1.0), (0.5, 0.5), (0.6, 0.4)])
def test_grid_validation(bad):
    with pytest.raises(DomainError):
        ProbabilityGrid(bad)


@given(samples, probs)
def test_monotone_equivariance(x, p):
    g = lambda v: np.sign(v) * np.abs(v) ** 0.5 + 3.0
    assert empirical_quantile(g(np.array(x)), p) == g(empirical_quantile(x, p))


@given(samples, st.lists(probs, min_size=2, max_size=6, unique=True))
def test_nondecreasing_in_p(x, ps):
    qs = [empirical_quantile(x, p) for p in sorted(ps)]
    assert all(a <= b for a, b in zip(qs, qs[1:]))


@given(st.lists(finite, min_size=2, max_size=30), st.randoms(use_true_random=False))
def test_permutation_invariance(x, rnd):
    y = list(x)
    rnd.shuffle(y)
    grid = ProbabilityGrid((0.25, 0.5, 0.75))
    a = quantile_vector(GroupedSample([x, x]), grid)
    b = quantile_vector(GroupedSample([y, x]), grid)
    assert np.array_equal(a, b)


@given(st.lists(st.lists(finite, min_size=2, max_size=10), min_size=2, max_size=5))
def test_pool_is_multiset_union(groups):
    d = GroupedSample(groups)
    assert sorted(pool(d)) == sorted(v for g in groups for v in g)
