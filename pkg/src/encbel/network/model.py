"""The evidential network itself: variables, directed edges carrying
conditional belief families, priors and evidence."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Mapping

import networkx as nx

from ..conditional import (
    ConditionalBeliefFamily,
    RelevanceInfo,
    non_informative_checks,
    relevance,
)
from ..errors import NetworkValidationError, ScopeMismatchError
from ..frame import Scope, Variable
from ..massfn import MassFunction, combine_all


class EvidentialNetwork:
    """A DAG of variables whose edges carry conditional belief families.

    Variables get their canonical order from the order of declaration.
    Evidence attached to a variable is combined conjunctively with its prior.
    """

    def __init__(self):
        self.variables: dict[str, Variable] = {}
        self.families: dict[tuple[str, str], ConditionalBeliefFamily] = {}
        self.priors: dict[str, MassFunction] = {}
        self.evidence: dict[str, list[MassFunction]] = {}

    # -- construction -------------------------------------------------------
    def add_variable(self, name: str, frame) -> Variable:
        if name in self.variables:
            raise ValueError(f"variable {name!r} declared twice")
        v = Variable(name, tuple(frame), order=len(self.variables))
        self.variables[name] = v
        return v

    def add_edge(self, parent: str, child: str, family) -> ConditionalBeliefFamily:
        """``family`` is a ConditionalBeliefFamily or a columns mapping for
        :meth:`ConditionalBeliefFamily.from_labels`."""
        if parent == child:
            raise NetworkValidationError([f"edge {parent}->{child}: self-loop"])
        if (parent, child) in self.families:
            raise ValueError(f"edge {parent}->{child} declared twice")
        if not isinstance(family, ConditionalBeliefFamily):
            family = ConditionalBeliefFamily.from_labels(
                self.variables[parent], self.variables[child], family
            )
        self.families[(parent, child)] = family
        return family

    def _mass(self, name: str, m) -> MassFunction:
        if isinstance(m, MassFunction):
            return m
        return MassFunction.from_labels(self.scope(name), m)

    def set_prior(self, name: str, m) -> None:
        self.priors[name] = self._mass(name, m)

    def add_evidence(self, name: str, m) -> None:
        self.evidence.setdefault(name, []).append(self._mass(name, m))

    def copy(self) -> "EvidentialNetwork":
        out = EvidentialNetwork()
        out.variables = dict(self.variables)
        out.families = dict(self.families)
        out.priors = dict(self.priors)
        out.evidence = {k: list(v) for k, v in self.evidence.items()}
        return out

    def without_evidence(self) -> "EvidentialNetwork":
        out = self.copy()
        out.evidence = {}
        return out

    # -- queries --------------------------------------------------------------
    def scope(self, *names: str) -> Scope:
        return Scope(tuple(self.variables[n] for n in names))

    def all_scope(self) -> Scope:
        return Scope(tuple(self.variables.values()))

    def node_belief(self, name: str) -> MassFunction:
        """bel_0 of the variable: its prior combined with all its evidence."""
        parts = []
        if name in self.priors:
            parts.append(self.priors[name])
        parts.extend(self.evidence.get(name, []))
        return combine_all(parts, self.scope(name))

    def has_information(self, name: str) -> bool:
        return not self.node_belief(name).is_vacuous()

    def parents(self, name: str) -> list[str]:
        return [p for (p, c) in self.families if c == name]

    def children(self, name: str) -> list[str]:
        return [c for (p, c) in self.families if p == name]

    def neighbors(self, name: str) -> list[str]:
        return sorted(set(self.parents(name)) | set(self.children(name)),
                      key=lambda n: self.variables[n].order)

    def digraph(self) -> nx.DiGraph:
        g = nx.DiGraph()
        g.add_nodes_from(self.variables)
        g.add_edges_from(self.families)
        return g

    def skeleton(self) -> nx.Graph:
        return self.digraph().to_undirected()

    def is_polytree(self) -> bool:
        return nx.is_forest(self.skeleton())

    def __repr__(self):
        edges = ", ".join(f"{p}->{c}" for p, c in self.families)
        return f"EvidentialNetwork(vars={list(self.variables)}, edges=[{edges}])"


@dataclass
class ValidationReport:
    errors: list[str] = field(default_factory=list)
    notes: list[str] = field(default_factory=list)
    relevance: dict[tuple[str, str], RelevanceInfo] = field(default_factory=dict)
    polytree: bool = False

    @property
    def ok(self) -> bool:
        return not self.errors


def validate(net: EvidentialNetwork) -> ValidationReport:
    rep = ValidationReport()
    g = net.digraph()
    for p, c in net.families:
        if p == c:
            rep.errors.append(f"edge {p}->{c}: self-loop")
    if not nx.is_directed_acyclic_graph(g):
        try:
            cyc = nx.find_cycle(g)
            rep.errors.append("directed cycle: " + " -> ".join(a for a, _ in cyc))
        except nx.NetworkXNoCycle:
            rep.errors.append("graph is not acyclic")
    for (p, c), f in net.families.items():
        where = f"edge {p}->{c}"
        if p not in net.variables or c not in net.variables:
            rep.errors.append(f"{where}: unknown variable")
            continue
        try:
            if f.parent != net.scope(p) or f.child != net.scope(c):
                raise ScopeMismatchError("scope")
        except ScopeMismatchError:
            rep.errors.append(f"{where}: family scopes do not match the endpoint frames")
            continue
        for i, e in enumerate(f.entries):
            if abs(e.total() - 1.0) > 1e-9:
                rep.errors.append(f"{where}: entry {f.parent.labels(i)} does not sum to 1")
        if p != c:
            rep.relevance[(p, c)] = relevance(f)
            if not non_informative_checks(f).over_parent:
                rep.notes.append(f"{where}: some entries carry mass on the empty set")
    for name, ms in list(net.priors.items()) + [
        (n, m) for n, lst in net.evidence.items() for m in lst
    ]:
        ms = ms if isinstance(ms, list) else [ms]
        for m in ms:
            if name not in net.variables:
                rep.errors.append(f"belief attached to unknown variable {name!r}")
            elif m.scope != net.scope(name):
                rep.errors.append(f"belief on {name!r} is not on its frame")
            elif abs(m.total() - 1.0) > 1e-9:
                rep.errors.append(f"belief on {name!r} does not sum to 1")
    for name in net.variables:
        ps = net.parents(name)
        if len(ps) > 1:
            rep.notes.append(
                f"{name} has parents {ps}; each edge is an independent binary relation "
                "and the incoming messages are combined conjunctively"
            )
    rep.polytree = not rep.errors and net.is_polytree()
    return rep


def relevance_table(net: EvidentialNetwork) -> Mapping[tuple[str, str], RelevanceInfo]:
    return {k: relevance(f) for k, f in net.families.items()}
