"""Seeded random belief functions, families and networks for property tests
and the ``oracle-check --trials`` command."""

from __future__ import annotations

import numpy as np

from .conditional import ConditionalBeliefFamily
from .frame import Scope
from .massfn import MassFunction
from .network.model import EvidentialNetwork


def random_mass(rng: np.random.Generator, scope: Scope, max_focal: int = 4, *,
                allow_empty: bool = False, informative: bool = False) -> MassFunction:
    """Random mass function with 1..max_focal focal sets and Dirichlet masses."""
    n_subsets = 1 << scope.cardinality
    lo = 0 if allow_empty else 1
    k = int(rng.integers(1, min(max_focal, n_subsets - lo) + 1))
    keys = set()
    while len(keys) < k:
        keys.add(int(rng.integers(lo, n_subsets)))
    if informative and keys == {scope.full}:
        keys.add(int(rng.integers(1, scope.full)) if scope.full > 1 else 0)
    w = rng.dirichlet(np.ones(len(keys)))
    return MassFunction(scope, dict(zip(sorted(keys), w)))


def random_family(rng: np.random.Generator, parent: Scope, child: Scope, max_focal: int = 4, *,
                  irrelevant: int = 0, allow_empty: bool = False) -> ConditionalBeliefFamily:
    """Random family; entries for parent configurations in ``irrelevant`` are vacuous,
    the others are forced to be informative."""
    entries = []
    for i in range(parent.cardinality):
        if irrelevant >> i & 1:
            entries.append(MassFunction.vacuous(child))
        else:
            entries.append(random_mass(rng, child, max_focal, allow_empty=allow_empty,
                                       informative=child.cardinality > 1))
    return ConditionalBeliefFamily(parent, child, tuple(entries))


def _frame(name: str, size: int) -> list[str]:
    return [f"{name.lower()}{i}" for i in range(size)]


def random_polytree(rng: np.random.Generator, max_vars: int = 5, max_frame: int = 3,
                    max_focal: int = 4, evidence_prob: float = 0.5) -> EvidentialNetwork:
    """Random tree skeleton with random edge directions."""
    n = int(rng.integers(2, max_vars + 1))
    net = EvidentialNetwork()
    names = [chr(ord("A") + i) for i in range(n)]
    for name in names:
        net.add_variable(name, _frame(name, int(rng.integers(2, max_frame + 1))))
    for i in range(1, n):
        j = int(rng.integers(0, i))
        p, c = (names[j], names[i]) if rng.random() < 0.5 else (names[i], names[j])
        net.add_edge(p, c, random_family(rng, net.scope(p), net.scope(c), max_focal))
    _sprinkle_evidence(rng, net, evidence_prob, max_focal)
    return net


def _sprinkle_evidence(rng, net, prob, max_focal):
    for name in net.variables:
        if rng.random() < prob:
            net.add_evidence(name, random_mass(rng, net.scope(name), max_focal))
    if not any(net.evidence.values()):
        name = list(net.variables)[int(rng.integers(0, len(net.variables)))]
        net.add_evidence(name, random_mass(rng, net.scope(name), max_focal))


LOOP_SHAPES = {
    "2a": ("ABC", [("A", "B"), ("A", "C"), ("C", "B")]),
    "2c": ("ABCD", [("A", "B"), ("A", "D"), ("B", "C"), ("D", "C")]),
}


def random_loop_network(rng: np.random.Generator, shape: str, max_frame: int = 3,
                        max_focal: int = 4, evidence_prob: float = 0.5) -> EvidentialNetwork:
    names, edges = LOOP_SHAPES[shape]
    net = EvidentialNetwork()
    for name in names:
        net.add_variable(name, _frame(name, int(rng.integers(2, max_frame + 1))))
    for p, c in edges:
        net.add_edge(p, c, random_family(rng, net.scope(p), net.scope(c), max_focal))
    _sprinkle_evidence(rng, net, evidence_prob, max_focal)
    return net


def random_hub_network(rng: np.random.Generator, n_children: int | None = None,
                       hub_size: int | None = None, max_focal: int = 3) -> EvidentialNetwork:
    """Hub A with binary or ternary children, each with forced irrelevant elements."""
    n_children = n_children or int(rng.integers(2, 4))
    hub_size = hub_size or int(rng.integers(3, 6))
    net = EvidentialNetwork()
    net.add_variable("A", _frame("A", hub_size))
    full = (1 << hub_size) - 1
    for k in range(n_children):
        name = f"X{k + 1}"
        net.add_variable(name, _frame(name, int(rng.integers(2, 4))))
        irrelevant = int(rng.integers(1, full))
        net.add_edge("A", name, random_family(rng, net.scope("A"), net.scope(name), max_focal,
                                              irrelevant=irrelevant))
        if rng.random() < 0.7:
            net.add_evidence(name, random_mass(rng, net.scope(name), max_focal))
    if rng.random() < 0.3:
        net.set_prior("A", random_mass(rng, net.scope("A"), max_focal))
    return net


def random_figure6_network(rng: np.random.Generator, max_focal: int = 3) -> EvidentialNetwork:
    """A -> X, A -> Y, X -> Y with X binary, disjoint relevant sets and a family
    for Y given X whose DRC over the whole frame of X is vacuous."""
    t = int(rng.integers(3, 6))
    full = (1 << t) - 1
    net = EvidentialNetwork()
    net.add_variable("A", _frame("A", t))
    net.add_variable("X", ["x0", "x1"])
    net.add_variable("Y", _frame("Y", int(rng.integers(2, 4))))
    elems = list(rng.permutation(t))
    nx_rel = int(rng.integers(1, t - 1))
    ny_rel = int(rng.integers(1, t - nx_rel))
    rel_x = sum(1 << int(i) for i in elems[:nx_rel])
    rel_y = sum(1 << int(i) for i in elems[nx_rel:nx_rel + ny_rel])
    net.add_edge("A", "X", random_family(rng, net.scope("A"), net.scope("X"), max_focal,
                                         irrelevant=full & ~rel_x))
    net.add_edge("A", "Y", random_family(rng, net.scope("A"), net.scope("Y"), max_focal,
                                         irrelevant=full & ~rel_y))
    ys = net.scope("Y")
    s = int(rng.integers(1, ys.full))
    entries = []
    for part in (s, ys.full & ~s):
        w = float(rng.uniform(0.05, 0.95))
        entries.append(MassFunction(ys, {part: w, ys.full: 1 - w}))
    net.add_edge("X", "Y", ConditionalBeliefFamily(net.scope("X"), ys, tuple(entries)))
    net.add_evidence("X", random_mass(rng, net.scope("X"), 3))
    if rng.random() < 0.3:
        net.set_prior("A", random_mass(rng, net.scope("A"), max_focal))
    return net
