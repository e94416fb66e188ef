import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from qcontrast.contrasts import (ContrastMatrix, Direction, Family, HypothesisFamily, build,
                                 custom, dunnett, grand_mean, kron_with_effect, tukey, validate)
from qcontrast.exceptions import DomainError


def test_dunnett_examples():
    assert np.array_equal(dunnett(4).rows, [[-1, 1, 0, 0], [-1, 0, 1, 0], [-1, 0, 0, 1]])
    assert np.array_equal(dunnett(2).rows, [[-1, 1]])
    assert dunnett(4).labels == ("2 - 1", "3 - 1", "4 - 1")


def test_tukey_examples():
    assert np.array_equal(tukey(3).rows, [[-1, 1, 0], [-1, 0, 1], [0, -1, 1]])
    assert tukey(4).r == 6
    assert len({tuple(r) for r in tukey(5).rows}) == 10


def test_grand_mean_examples():
    g = grand_mean(3)
    assert np.allclose(g.rows[0], [2 / 3, -1 / 3, -1 / 3])
    assert np.allclose(g.rows.sum(axis=0), 0)
    assert np.linalg.matrix_rank(g.rows) == 2


def test_kronecker_example():
    eff = np.array([[0.0, 1, 0], [-1, 0, 1]])
    km = kron_with_effect(dunnett(2), eff)
    assert np.array_equal(km.rows, [[0, -1, 0, 0, 1, 0], [1, 0, -1, -1, 0, 1]])
    assert km.labels == ("2 - 1 [median]", "2 - 1 [IQR]")
    same = kron_with_effect(tukey(4), [[1.0]])
    assert np.array_equal(same.rows, tukey(4).rows)
    assert kron_with_effect(tukey(4), eff).rows.shape == (12, 12)


@pytest.mark.parametrize("builder", [dunnett, tukey, grand_mean])
def test_k_below_two_rejected(builder):
    with pytest.raises(DomainError):
        builder(1)


def test_validate_rejects_non_contrasts():
    with pytest.raises(DomainError):
        custom([[1.0, 1.0]], 2)
    with pytest.raises(DomainError):
        custom([[0.0, 0.0]], 2)
    with pytest.raises(DomainError):
        # sums to zero overall, not per probability index
        custom([[1.0, 0.0, 0.0, -1.0]], 2)
    with pytest.raises(DomainError):
        kron_with_effect(kron_with_effect(dunnett(2), [[1.0, -1.0]]), [[1.0]])


@given(st.integers(2, 9), st.sampled_from(["dunnett", "tukey", "grand-mean"]),
       st.sampled_from(["median", "median-iqr"]))
def test_builders_valid_and_deterministic(k, fam, effect):
    a, ga = build(fam, k, effect)
    b, gb = build(fam, k, effect)
    validate(a)
    assert np.array_equal(a.rows, b.rows) and a.labels == b.labels
    assert a.rows.shape[1] == k * ga.m


def test_hypothesis_family_margins_and_reverse():
    fam = HypothesisFamily(dunnett(3), 7.0, Direction.NONINFERIORITY)
    assert np.array_equal(fam.margins, [7.0, 7.0])
    rev = fam.reversed()
    assert np.array_equal(rev.H, -fam.H) and np.array_equal(rev.margins, [-7.0, -7.0])
    with pytest.raises(DomainError):
        HypothesisFamily(dunnett(3), [1.0, 2.0, 3.0])
    with pytest.raises(DomainError):
        HypothesisFamily(dunnett(3), 0.0, Direction.EQUIVALENCE)
    with pytest.raises(DomainError):
        HypothesisFamily(dunnett(3), 0.0, Direction.TWO_SIDED, (0.25, 0.5))
    with pytest.raises(DomainError):
        HypothesisFamily(dunnett(3), 1.0, Direction.TWO_SIDED).reversed()


def test_relabel():
    m = tukey(3).relabel(["a", "b", "c"])
    assert m.labels == ("b - a", "c - a", "c - b")
    assert isinstance(m, ContrastMatrix) and m.family is Family.TUKEY
