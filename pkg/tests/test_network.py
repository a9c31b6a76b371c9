import numpy as np
import pytest

from encbel.conditional import ConditionalBeliefFamily
from encbel.errors import MustMergeError, NetworkValidationError, PreconditionError
from encbel.generate import (
    random_family,
    random_figure6_network,
    random_hub_network,
    random_loop_network,
    random_mass,
    random_polytree,
)
from encbel.massfn import FULL, MassFunction
from encbel.network import (
    EvidentialNetwork,
    figure6_shortcut,
    lemma9_shortcut,
    merge_loops,
    merged_family,
    partition_optimize,
    propagate_merged,
    propagate_polytree,
    relevance_table,
    unrelated,
    validate,
)
from encbel.network.polytree import polytree_messenger
from encbel.oracle import oracle_marginals


def _assert_matches_oracle(net, got, tol=1e-9):
    ref = oracle_marginals(net).marginals
    for v in net.variables:
        assert got[v].max_abs_diff(ref[v]) <= tol, v


# -- model and validation -------------------------------------------------------

def test_bundled_network_validates(example3):
    rep = validate(example3)
    assert rep.ok and rep.polytree
    irr = {c: info.labels()[1] for (_, c), info in relevance_table(example3).items()}
    assert irr == {"X": ["a3", "a4", "a5"], "Y": ["a1", "a5"], "Z": ["a1", "a2", "a3"]}


def test_self_loop_rejected():
    net = EvidentialNetwork()
    net.add_variable("A", ["a", "b"])
    with pytest.raises(NetworkValidationError):
        net.add_edge("A", "A", {"a": {FULL: 1}, "b": {FULL: 1}})


def test_directed_cycle_reported():
    net = EvidentialNetwork()
    for n in "ABC":
        net.add_variable(n, ["0", "1"])
    vac = {"0": {FULL: 1}, "1": {FULL: 1}}
    net.add_edge("A", "B", vac)
    net.add_edge("B", "C", vac)
    net.add_edge("C", "A", vac)
    rep = validate(net)
    assert not rep.ok
    assert any("directed cycle" in e for e in rep.errors)


def test_multi_parent_note_and_subnormal_note():
    net = EvidentialNetwork()
    for n in "ABC":
        net.add_variable(n, ["0", "1"])
    net.add_edge("A", "C", {"0": {"0": .5, (): .5}, "1": {FULL: 1}})
    net.add_edge("B", "C", {"0": {FULL: 1}, "1": {FULL: 1}})
    rep = validate(net)
    assert rep.ok
    assert any("empty set" in n for n in rep.notes)
    assert any("parents" in n for n in rep.notes)


def test_node_belief_combines_prior_and_evidence():
    net = EvidentialNetwork()
    net.add_variable("A", ["a", "b", "c"])
    net.set_prior("A", {("a", "b"): 1.0})
    net.add_evidence("A", {("b", "c"): 1.0})
    assert net.node_belief("A").labelled() == {"{b}": 1.0}
    assert net.without_evidence().node_belief("A").labelled() == {"{a,b}": 1.0}


# -- polytree ----------------------------------------------------------------------

def test_bundled_network_marginal(example3):
    bel = propagate_polytree(example3)["A"]
    want = {
        ("a1", "a3"): .1296, ("a1", "a2", "a3"): .4104, ("a1", "a3", "a4"): .0864,
        ("a1", "a2", "a3", "a4"): .2736, ("a1", "a3", "a5"): .0144,
        ("a1", "a2", "a3", "a5"): .0456, ("a1", "a3", "a4", "a5"): .0096, FULL: .0304,
    }
    assert bel.max_abs_diff(MassFunction.from_labels(bel.scope, want)) < 1e-12
    # Y's only support comes through A, whose mass never excludes Y's irrelevant elements
    assert propagate_polytree(example3)["Y"].is_vacuous(1e-12)


@pytest.mark.parametrize("seed", range(15))
def test_polytree_matches_oracle(seed):
    net = random_polytree(np.random.default_rng(seed))
    _assert_matches_oracle(net, propagate_polytree(net))


@pytest.mark.parametrize("seed", range(5))
def test_message_order_invariance(seed):
    net = random_polytree(np.random.default_rng(100 + seed))
    full = propagate_polytree(net)
    for v in reversed(list(net.variables)):
        lazy = propagate_polytree(net, targets=[v])[v]
        assert lazy.max_abs_diff(full[v]) < 1e-12


@pytest.mark.parametrize("seed", range(5))
def test_vacuous_evidence_changes_nothing(seed):
    rng = np.random.default_rng(200 + seed)
    net = random_polytree(rng)
    before = propagate_polytree(net)
    more = net.copy()
    for v in net.variables:
        more.add_evidence(v, MassFunction.vacuous(net.scope(v)))
    after = propagate_polytree(more)
    for v in net.variables:
        assert after[v].max_abs_diff(before[v]) < 1e-12


def test_polytree_refuses_loops():
    net = random_loop_network(np.random.default_rng(0), "2a")
    with pytest.raises(MustMergeError, match="merge"):
        polytree_messenger(net)


def test_vacuous_network_gives_vacuous_marginals():
    net = EvidentialNetwork()
    for n in "ABC":
        net.add_variable(n, ["0", "1", "2"])
    vac = {lab: {FULL: 1} for lab in ["0", "1", "2"]}
    net.add_edge("A", "B", vac)
    net.add_edge("C", "B", vac)
    assert all(m.is_vacuous() for m in propagate_polytree(net).values())


# -- merging ---------------------------------------------------------------------

@pytest.mark.parametrize("shape,merged", [("2a", ("B", "C")), ("2c", ("B", "D"))])
def test_merge_choice(shape, merged):
    net = random_loop_network(np.random.default_rng(1), shape)
    mnet = merge_loops(net)
    assert merged in mnet.nodes
    assert mnet.graph().number_of_edges() == len(mnet.nodes) - 1


@pytest.mark.parametrize("seed", range(10))
@pytest.mark.parametrize("shape", ["2a", "2c"])
def test_merged_matches_oracle(shape, seed):
    net = random_loop_network(np.random.default_rng(seed), shape)
    _assert_matches_oracle(net, propagate_merged(merge_loops(net)))


def _square(rng):
    net = EvidentialNetwork()
    for n in "ABCD":
        net.add_variable(n, [f"{n.lower()}{i}" for i in range(2)])
    for p, c in [("A", "B"), ("B", "C"), ("A", "D"), ("D", "C")]:
        net.add_edge(p, c, random_family(rng, net.scope(p), net.scope(c), 3))
    net.add_evidence("C", random_mass(rng, net.scope("C"), 3))
    net.add_evidence("B", random_mass(rng, net.scope("B"), 3))
    return net


@pytest.mark.parametrize("seed", range(5))
def test_forced_groups_use_general_relations(seed):
    net = _square(np.random.default_rng(seed))
    mnet = merge_loops(net, groups=[["A", "C"]])
    kinds = {r.kind for r in mnet.relations.values()}
    assert kinds == {"general"}
    _assert_matches_oracle(net, propagate_merged(mnet))


@pytest.mark.parametrize("seed", range(8))
def test_collider_routes_match_reference(seed):
    rng = np.random.default_rng(seed)
    net = random_loop_network(rng, "2c", max_frame=3)
    mnet = merge_loops(net)
    rel = next(r for r in mnet.relations.values() if r.kind == "collider")
    ps = rel.parent_scope
    for e in range(1, ps.full + 1):
        ref = rel.reference_conditional(ps, e, rel.child_scope)
        if rel.is_product(e):
            assert rel.collider_product(e).max_abs_diff(ref) < 1e-12
        else:
            assert rel.collider_general(e).max_abs_diff(ref) < 1e-12


def test_merged_family_of_one_is_itself():
    net = random_polytree(np.random.default_rng(3))
    (p, c), f = next(iter(net.families.items()))
    assert merged_family([f], net.scope(c)) is f


# -- partition -------------------------------------------------------------------

@pytest.mark.parametrize("seed", range(10))
def test_partition_matches_polytree(seed):
    net = random_hub_network(np.random.default_rng(seed))
    m, plan = partition_optimize(net, "A")
    assert m.max_abs_diff(propagate_polytree(net)["A"]) < 1e-12
    assert all(g.frame_size <= net.variables["A"].size for g in plan.groups)


def test_partition_grouping(example3):
    m, plan = partition_optimize(example3, "A", groups=[["X", "Z"]])
    assert [g.members for g in plan.groups] == [("X", "Z"), ("Y",)]
    # X and Z share only a3 as an irrelevant element, so that group is not coarsened
    assert not plan.groups[0].coarsened
    assert m.max_abs_diff(propagate_polytree(example3)["A"]) < 1e-12


def test_partition_preconditions(example3):
    with pytest.raises(PreconditionError):
        partition_optimize(example3, "X")
    with pytest.raises(PreconditionError):
        partition_optimize(example3, "A", groups=[["X"], ["X"]])


# -- shortcuts -------------------------------------------------------------------

@pytest.mark.parametrize("seed", range(20))
def test_mixture_shortcut_matches_oracle(seed):
    net = random_figure6_network(np.random.default_rng(seed))
    assert unrelated(net, "X", "Y", "A")
    got = figure6_shortcut(net, "X", "Y", "A")
    assert got.max_abs_diff(oracle_marginals(net).marginals["A"]) < 1e-9


def _three_nodes(rng, phi_x, phi_y, t=4):
    net = EvidentialNetwork()
    net.add_variable("A", [f"a{i}" for i in range(t)])
    net.add_variable("X", ["x0", "x1"])
    net.add_variable("Y", ["y0", "y1", "y2"])
    net.add_edge("A", "X", random_family(rng, net.scope("A"), net.scope("X"), 3, irrelevant=phi_x))
    net.add_edge("A", "Y", random_family(rng, net.scope("A"), net.scope("Y"), 3, irrelevant=phi_y))
    return net


@pytest.mark.parametrize("seed", range(10))
def test_observed_sibling_leaves_other_vacuous(seed):
    rng = np.random.default_rng(seed)
    net = _three_nodes(rng, 0b0011, 0b0110)
    net.add_evidence("X", random_mass(rng, net.scope("X"), 3))
    assert unrelated(net, "X", "Y", "A")
    assert lemma9_shortcut(net, "X", "Y", "A").is_vacuous()
    assert oracle_marginals(net).marginals["Y"].is_vacuous(1e-12)


def test_unrelated_second_clause():
    rng = np.random.default_rng(4)
    net = _three_nodes(rng, 0b0011, 0b1100)
    # irrelevant sets split the frame; X's DRC over its relevant elements is informative
    assert not unrelated(net, "X", "Y", "A")
    vac_x = EvidentialNetwork()
    for v in net.variables.values():
        vac_x.add_variable(v.name, v.frame)
    fx = net.families[("A", "X")]
    # make X's relevant entries disjunctively vacuous: {x0} and {x1} unions cover the frame
    sx = net.scope("X")
    entries = list(fx.entries)
    entries[2] = MassFunction(sx, {0b01: .6, 0b11: .4})
    entries[3] = MassFunction(sx, {0b10: 1.0})
    vac_x.add_edge("A", "X", ConditionalBeliefFamily(fx.parent, fx.child, tuple(entries)))
    vac_x.add_edge("A", "Y", net.families[("A", "Y")])
    assert unrelated(vac_x, "X", "Y", "A")


def test_shortcut_preconditions_name_the_fallback():
    rng = np.random.default_rng(5)
    net = _three_nodes(rng, 0b0011, 0b1100)
    with pytest.raises(PreconditionError, match="fall back"):
        lemma9_shortcut(net, "X", "Y", "A")
    net2 = _three_nodes(rng, 0b0011, 0b0110)
    net2.set_prior("A", random_mass(rng, net2.scope("A"), 3))
    with pytest.raises(PreconditionError, match="prior or evidence"):
        lemma9_shortcut(net2, "X", "Y", "A")
    with pytest.raises(PreconditionError, match="missing edge"):
        figure6_shortcut(net2, "X", "Y", "A")
