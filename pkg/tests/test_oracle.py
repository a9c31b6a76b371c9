import itertools

import numpy as np
import pytest

from encbel.errors import ResourceCapError, TotalConflictError
from encbel.frame import Scope, Variable
from encbel.generate import random_loop_network, random_mass, random_polytree
from encbel.massfn import MassFunction
from encbel.oracle import dempster_reference, joint_pieces, max_deviation, oracle_marginals


def test_pieces_cover_edges_and_informative_beliefs(example3):
    labels = [lab for lab, _ in joint_pieces(example3)]
    assert labels == ["belief X", "belief Z", "edge A->X", "edge A->Y", "edge A->Z"]
    assert all(p.scope == example3.all_scope() for _, p in joint_pieces(example3))


@pytest.mark.parametrize("seed", range(5))
def test_combination_order_does_not_matter(seed):
    net = random_loop_network(np.random.default_rng(seed), "2c")
    n = len(joint_pieces(net))
    base = oracle_marginals(net).marginals
    rng = np.random.default_rng(seed)
    for _ in range(3):
        other = oracle_marginals(net, order=list(rng.permutation(n))).marginals
        assert all(d < 1e-12 for d in max_deviation(base, other).values())


def test_work_cap_is_reported():
    net = random_polytree(np.random.default_rng(11), max_vars=5)
    with pytest.raises(ResourceCapError, match="cap"):
        oracle_marginals(net, work_cap=1)


def test_oracle_records_focal_counts(example3):
    res = oracle_marginals(example3)
    assert len(res.focal_counts) == len(joint_pieces(example3))
    assert res.seconds >= 0


def test_dempster_reference_example():
    s = Scope.of(Variable("W", ("u", "v", "w"), order=0))
    m1 = MassFunction(s, {0b001: .5, 0b111: .5})
    m2 = MassFunction(s, {0b010: .5, 0b111: .5})
    d = dempster_reference(m1, m2)
    assert d.labelled() == pytest.approx({"{u}": 1 / 3, "{v}": 1 / 3, "{u,v,w}": 1 / 3})


def test_dempster_reference_total_conflict():
    s = Scope.of(Variable("W", ("u", "v"), order=0))
    with pytest.raises(TotalConflictError):
        dempster_reference(MassFunction(s, {1: 1.0}), MassFunction(s, {2: 1.0}))


def test_dempster_reference_requires_normalized_inputs():
    s = Scope.of(Variable("W", ("u", "v"), order=0))
    with pytest.raises(ValueError):
        dempster_reference(MassFunction(s, {0: .5, 1: .5}), MassFunction.vacuous(s))


def test_dempster_is_commutative():
    rng = np.random.default_rng(0)
    s = Scope.of(Variable("W", tuple("abcd"), order=0))
    for _ in range(50):
        m1, m2 = random_mass(rng, s, 5), random_mass(rng, s, 5)
        try:
            a = dempster_reference(m1, m2)
        except TotalConflictError:
            continue
        assert a.max_abs_diff(dempster_reference(m2, m1)) < 1e-12


def test_product_form_generator_is_deterministic():
    a = random_polytree(np.random.default_rng(9))
    b = random_polytree(np.random.default_rng(9))
    assert repr(a) == repr(b)
    for (k1, f1), (k2, f2) in itertools.zip_longest(a.families.items(), b.families.items()):
        assert k1 == k2
        assert all(x.max_abs_diff(y) == 0 for x, y in zip(f1.entries, f2.entries))
