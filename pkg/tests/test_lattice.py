import numpy as np
import pytest
from hypothesis import given, strategies as st
from hypothesis.extra.numpy import arrays

from encbel import lattice


def _brute_subset_sum(f):
    return np.array([sum(f[b] for b in range(len(f)) if b & ~a == 0) for a in range(len(f))])


def _brute_superset_sum(f):
    return np.array([sum(f[b] for b in range(len(f)) if a & ~b == 0) for a in range(len(f))])


@given(st.integers(0, 5).flatmap(lambda n: arrays(np.float64, 1 << n, elements=st.floats(-1, 1))))
def test_transforms_match_brute_force_and_invert(f):
    np.testing.assert_allclose(lattice.subset_sum(f), _brute_subset_sum(f), atol=1e-12)
    np.testing.assert_allclose(lattice.superset_sum(f), _brute_superset_sum(f), atol=1e-12)
    np.testing.assert_allclose(lattice.subset_mobius(lattice.subset_sum(f)), f, atol=1e-12)
    np.testing.assert_allclose(lattice.superset_mobius(lattice.superset_sum(f)), f, atol=1e-12)


def test_transforms_do_not_modify_input():
    f = np.arange(8, dtype=float)
    lattice.subset_sum(f)
    lattice.superset_mobius(f)
    assert f.tolist() == list(range(8))


def test_complement_index():
    idx = lattice.complement_index(3)
    assert idx.tolist() == [7, 6, 5, 4, 3, 2, 1, 0]


def test_dense_limit():
    with pytest.raises(Exception):
        lattice.check_dense(lattice.DENSE_MAX_BITS + 1)
