"""Absorbing undirected loops by merging nodes, and propagation on the
resulting tree of merged nodes.

Each merged node v carries R_v, the combination of the ballooning extensions
of the edges inside it (vacuous for singletons).  The original edges between
two merged nodes form one merged relation, handled by one of three routes:

* fan: a single parent variable with one or more children on the other side.
  Its families are merged into one family on the product of the children.
* collider: several parent variables sharing one child on the other side.
  Parent-to-child conditionals are built per focal set: pointwise conjunction
  for a single configuration, DRC then conjunction for product-shaped sets,
  and a ballooning-based construction otherwise.
* general: anything else.  The ballooning extensions are combined into one
  joint on the relation's variables and conditioned directly.

The general route is also the reference the other two are checked against.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field

import networkx as nx

from ..conditional import (
    ConditionalBeliefFamily,
    ballooning_extension,
    conditional_from_joint,
    drc_extend,
)
from ..errors import ResourceCapError
from ..frame import Scope, extend_mask, fibers, iter_bits, popcount, project_mask
from ..massfn import (
    MassFunction,
    _settle,
    combine_all,
    disjunctive_combine,
    extend,
    marginalize,
    mix,
)
from .polytree import TreeMessenger, down_message, up_message

Node = tuple  # tuple of variable names in canonical order


def merged_family(families: list[ConditionalBeliefFamily], child: Scope) -> ConditionalBeliefFamily:
    """Combine families sharing one parent into a family on the joint child
    space: m(d|a_i) = sum over b-up & c-up = d of m(b|a_i) m(c|a_i)."""
    if len(families) == 1 and families[0].child == child:
        return families[0]
    parent = families[0].parent
    entries = []
    for i in range(parent.cardinality):
        entries.append(combine_all([extend(f.entries[i], child) for f in families], child))
    return ConditionalBeliefFamily(parent, child, tuple(entries))


class MergedRelation:
    """The original edges joining two merged nodes."""

    def __init__(self, net, a: Node, b: Node, edges: list[tuple[str, str]]):
        self.net = net
        self.nodes = (a, b)
        self.edges = sorted(edges, key=lambda e: (net.variables[e[0]].order, net.variables[e[1]].order))
        self.families = {e: net.families[e] for e in self.edges}
        parents = sorted({p for p, _ in self.edges}, key=lambda n: net.variables[n].order)
        children = sorted({c for _, c in self.edges}, key=lambda n: net.variables[n].order)
        self.parents, self.children = parents, children
        self.support = net.scope(*sorted(set(parents) | set(children)))
        self._joint: MassFunction | None = None
        self._ref_cache: dict = {}
        self._collider_cache: dict = {}

        def side(names):
            sides = {a if n in a else b for n in names}
            return sides.pop() if len(sides) == 1 else None

        psides, csides = side(parents), side(children)
        self.parent_node = psides
        self.kind = "general"
        if psides is not None and csides is not None and psides != csides:
            if len(parents) == 1:
                self.kind = "fan"
                self.child_scope = net.scope(*children)
                self.family = merged_family(list(self.families.values()), self.child_scope)
            elif len(children) == 1:
                self.kind = "collider"
                self.parent_scope = net.scope(*parents)
                self.child_scope = net.scope(children[0])

    def __repr__(self):
        edges = ", ".join(f"{p}->{c}" for p, c in self.edges)
        return f"MergedRelation({self.kind}: {edges})"

    # -- reference route ---------------------------------------------------
    @property
    def joint(self) -> MassFunction:
        if self._joint is None:
            self._joint = combine_all(
                [extend(ballooning_extension(f), self.support) for f in self.families.values()]
            )
        return self._joint

    def reference_conditional(self, given: Scope, x: int, target: Scope) -> MassFunction:
        key = (given, x, target)
        if key not in self._ref_cache:
            self._ref_cache[key] = conditional_from_joint(self.joint, given, x, target)
        return self._ref_cache[key]

    def _reference_send(self, src: Node, dst: Node, m: MassFunction) -> MassFunction:
        given = self.support.intersection(m.scope)
        target = self.support.minus(given)
        m_in = marginalize(m, given)
        out = mix([(w, self.reference_conditional(given, x, target)) for x, w in m_in.items()], target)
        return out

    # -- collider conditionals --------------------------------------------
    def _collider_families(self):
        c = self.children[0]
        return [self.families[(p, c)] for p in self.parents]

    def collider_singleton(self, e: int) -> MassFunction:
        idx = self.parent_scope.decode(e.bit_length() - 1)
        fams = self._collider_families()
        return combine_all([f.entries[i] for f, i in zip(fams, idx)])

    def _factors(self, e: int) -> list[int]:
        return [
            project_mask(e, self.parent_scope, self.net.scope(p)) for p in self.parents
        ]

    def is_product(self, e: int) -> bool:
        box = self.parent_scope.full
        for p, ek in zip(self.parents, self._factors(e)):
            box &= extend_mask(ek, self.net.scope(p), self.parent_scope)
        return box == e

    def collider_product(self, e: int) -> MassFunction:
        fams = self._collider_families()
        return combine_all([drc_extend(f, ek) for f, ek in zip(fams, self._factors(e))])

    def collider_general(self, e: int) -> MassFunction:
        """First parent b handled by a disjunctive combination, over b_i in e's
        projection, of m_C(.|b_i) lifted to C x R (R = remaining parents) and
        restricted to the R-values compatible with b_i in e; then combined with
        the ballooning extensions of the remaining parents' families."""
        c = self.children[0]
        cscope = self.child_scope
        b, rest = self.parents[0], self.parents[1:]
        bscope, rscope = self.net.scope(b), self.net.scope(*rest)
        cr = cscope.union(rscope)
        fb = self.families[(b, c)]
        bfib = fibers(self.parent_scope, bscope)
        lifted = None
        for i in iter_bits(project_mask(e, self.parent_scope, bscope)):
            d = project_mask(e & bfib[i], self.parent_scope, rscope)
            dcyl = extend_mask(d, rscope, cr)
            acc: dict[int, float] = {}
            for y, v in fb.entries[i].items():
                k = extend_mask(y, cscope, cr) & dcyl
                acc[k] = acc.get(k, 0.0) + v
            piece = _settle(cr, acc)
            lifted = piece if lifted is None else disjunctive_combine(lifted, piece)
        parts = [lifted] + [extend(ballooning_extension(self.families[(p, c)]), cr) for p in rest]
        return marginalize(combine_all(parts), cscope)

    def collider_conditional(self, e: int) -> MassFunction:
        if e in self._collider_cache:
            return self._collider_cache[e]
        if e == 0:
            out = MassFunction.certain(self.child_scope, 0)
        elif popcount(e) == 1:
            out = self.collider_singleton(e)
        elif self.is_product(e):
            out = self.collider_product(e)
        else:
            out = self.collider_general(e)
        self._collider_cache[e] = out
        return out

    # -- messages -----------------------------------------------------------
    def send(self, src: Node, dst: Node, m: MassFunction, dst_scope: Scope) -> MassFunction:
        if self.kind == "fan":
            p = self.parents[0]
            if src == self.parent_node:
                out = down_message(self.family, marginalize(m, self.net.scope(p)))
            else:
                out = up_message(self.family, marginalize(m, self.child_scope))
        elif self.kind == "collider" and src == self.parent_node:
            m_in = marginalize(m, self.parent_scope)
            out = mix([(w, self.collider_conditional(e)) for e, w in m_in.items()], self.child_scope)
        else:
            out = self._reference_send(src, dst, m)
        return extend(out, dst_scope)


@dataclass
class MergedNetwork:
    net: object
    nodes: list[Node]
    scopes: dict[Node, Scope]
    relations: dict[frozenset, MergedRelation]
    internal: dict[Node, list[tuple[str, str]]]
    merges: list[tuple[Node, Node, Node]] = field(default_factory=list)
    _R: dict = field(default_factory=dict, repr=False)

    def node_of(self, var: str) -> Node:
        for n in self.nodes:
            if var in n:
                return n
        raise KeyError(var)

    def R(self, node: Node) -> MassFunction:
        """Internal relation of a merged node (vacuous for singletons)."""
        if node not in self._R:
            scope = self.scopes[node]
            fams = [self.net.families[e] for e in self.internal[node]]
            self._R[node] = combine_all([extend(ballooning_extension(f), scope) for f in fams], scope)
        return self._R[node]

    def graph(self) -> nx.Graph:
        g = nx.Graph()
        g.add_nodes_from(self.nodes)
        for key in self.relations:
            a, b = tuple(key)
            g.add_edge(a, b)
        return g

    def relation(self, a: Node, b: Node) -> MergedRelation:
        return self.relations[frozenset((a, b))]


def _canon(net, names) -> Node:
    return tuple(sorted(names, key=lambda n: net.variables[n].order))


def _node_graph(net, node_of: dict[str, Node]) -> nx.Graph:
    g = nx.Graph()
    g.add_nodes_from(set(node_of.values()))
    for p, c in net.families:
        a, b = node_of[p], node_of[c]
        if a != b:
            g.add_edge(a, b)
    return g


def _shortest_cycle(g: nx.Graph, key) -> list | None:
    best = None
    for u, v in sorted(g.edges(), key=lambda e: (key(e[0]), key(e[1]))):
        g.remove_edge(u, v)
        try:
            path = nx.shortest_path(g, u, v)
        except nx.NetworkXNoPath:
            path = None
        g.add_edge(u, v)
        if path is not None and (best is None or len(path) < len(best)):
            best = path
    return best


def _depths(net) -> dict[str, int]:
    dg = net.digraph()
    depth = {}
    for n in nx.topological_sort(dg):
        depth[n] = max((depth[p] + 1 for p in dg.predecessors(n)), default=0)
    return depth


def _scope_for(net, names, label) -> Scope:
    try:
        return net.scope(*names)
    except ResourceCapError as exc:
        raise ResourceCapError(f"merging {label} exceeds the product-space cap: {exc}") from None


def merge_loops(net, groups=None) -> MergedNetwork:
    """Merge nodes until the skeleton is a tree.

    ``groups`` optionally names sets of variables to merge first.  Remaining
    loops are broken greedily: take a shortest undirected cycle and merge the
    pair of its nodes that leaves the shortest residual cycle, preferring
    pairs with no source of the loop among them, then pairs not linked by a
    directed path, then the smaller merged frame, then the deeper pair.
    """
    order = {n: v.order for n, v in net.variables.items()}
    node_of: dict[str, Node] = {n: (n,) for n in net.variables}
    merges = []

    def do_merge(a: Node, b: Node):
        new = _canon(net, set(a) | set(b))
        _scope_for(net, new, f"{list(a)} and {list(b)}")
        for v in new:
            node_of[v] = new
        merges.append((a, b, new))

    for grp in groups or []:
        nodes = sorted({node_of[v] for v in grp}, key=lambda n: order[n[0]])
        for other in nodes[1:]:
            do_merge(node_of[nodes[0][0]], other)

    dg = net.digraph()
    depth = _depths(net)
    nkey = lambda n: min(order[v] for v in n)
    while True:
        g = _node_graph(net, node_of)
        cycle = _shortest_cycle(g, nkey)
        if cycle is None:
            break
        L = len(cycle)
        on_cycle = {v for n in cycle for v in n}
        # nodes of the loop with no parent on the loop are its sources
        sources = {n for n in cycle
                   if not any(p in on_cycle and p not in n for v in n for p in net.parents(v))}
        best = None
        for i, j in itertools.combinations(range(L), 2):
            a, b = cycle[i], cycle[j]
            k = j - i
            residual = max([x for x in (k, L - k) if x > 2], default=0)
            n_sources = (a in sources) + (b in sources)
            related = any(nx.has_path(dg, u, v) or nx.has_path(dg, v, u) for u in a for v in b)
            card = 1
            for v in set(a) | set(b):
                card *= net.variables[v].size
            deep = sum(depth[v] for v in set(a) | set(b))
            names = tuple(sorted(set(a) | set(b)))
            cand = (residual, n_sources, related, card, -deep, names)
            if best is None or cand < best[0]:
                best = (cand, a, b)
        do_merge(best[1], best[2])

    nodes = sorted(set(node_of.values()), key=nkey)
    scopes = {n: net.scope(*n) for n in nodes}
    internal = {n: [] for n in nodes}
    between: dict[frozenset, list] = {}
    for e in net.families:
        a, b = node_of[e[0]], node_of[e[1]]
        if a == b:
            internal[a].append(e)
        else:
            between.setdefault(frozenset((a, b)), []).append(e)
    relations = {}
    for key, edges in between.items():
        a, b = sorted(key, key=nkey)
        relations[key] = MergedRelation(net, a, b, edges)
    return MergedNetwork(net, nodes, scopes, relations, internal, merges)


def merged_messenger(mnet: MergedNetwork) -> TreeMessenger:
    net = mnet.net
    order = {n: v.order for n, v in net.variables.items()}

    def local(node):
        scope = mnet.scopes[node]
        parts = [mnet.R(node)] + [extend(net.node_belief(v), scope) for v in node]
        return combine_all(parts)

    def send(src, dst, m):
        return mnet.relation(src, dst).send(src, dst, m, mnet.scopes[dst])

    return TreeMessenger(mnet.graph(), local, send, key=lambda n: min(order[v] for v in n))


def propagate_merged(mnet: MergedNetwork, *, node_beliefs: bool = False):
    """Per-variable marginals on a tree of merged nodes.

    A node's belief is R_v combined with its members' priors and evidence and
    one message per neighbour; variable marginals are its projections.
    """
    tm = merged_messenger(mnet).run()
    beliefs = {n: tm.belief(n) for n in mnet.nodes}
    out = {}
    for n, b in beliefs.items():
        for v in n:
            out[v] = marginalize(b, mnet.net.scope(v))
    out = {v: out[v] for v in mnet.net.variables}
    if node_beliefs:
        return out, beliefs
    return out


__all__ = [
    "MergedNetwork", "MergedRelation", "merge_loops", "merged_family",
    "propagate_merged", "merged_messenger",
]
