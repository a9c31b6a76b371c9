"""Two-pass message passing on tree-shaped networks."""

from __future__ import annotations

from typing import Callable, Hashable, Iterable

import networkx as nx

from ..conditional import ConditionalBeliefFamily, drc_extend, gbt
from ..errors import MustMergeError
from ..massfn import MassFunction, combine_all, mix


class TreeMessenger:
    """Message passing over an undirected forest.

    ``local(node)`` gives the node's own belief; ``send(src, dst, m)`` turns the
    belief gathered at ``src`` (on src's scope) into a message on dst's scope.
    Messages are computed leaves-inward then outward and cached.
    """

    def __init__(self, graph: nx.Graph, local: Callable, send: Callable,
                 key: Callable = str):
        self.graph = graph
        self.local = local
        self.send = send
        self.key = key
        self._messages: dict[tuple[Hashable, Hashable], MassFunction] = {}

    def _sorted(self, nodes: Iterable):
        return sorted(nodes, key=self.key)

    def gathered(self, src, exclude=None) -> MassFunction:
        """src's local belief combined with all messages into src except from ``exclude``."""
        parts = [self.local(src)]
        for z in self._sorted(self.graph.neighbors(src)):
            if z != exclude:
                parts.append(self.message(z, src))
        return combine_all(parts)

    def message(self, src, dst) -> MassFunction:
        k = (src, dst)
        if k not in self._messages:
            self._messages[k] = self.send(src, dst, self.gathered(src, exclude=dst))
        return self._messages[k]

    def run(self):
        """Fill every message with bounded recursion depth."""
        for comp in sorted(nx.connected_components(self.graph), key=lambda c: self.key(min(c, key=self.key))):
            root = min(comp, key=self.key)
            order = list(nx.dfs_preorder_nodes(self.graph, root))
            parent = {root: None}
            for u, v in nx.dfs_edges(self.graph, root):
                parent[v] = u
            for v in reversed(order):
                if parent[v] is not None:
                    self.message(v, parent[v])
            for v in order:
                if parent[v] is not None:
                    self.message(parent[v], v)
        return self

    def belief(self, node) -> MassFunction:
        return self.gathered(node)


def down_message(f: ConditionalBeliefFamily, m_parent: MassFunction) -> MassFunction:
    """Message parent -> child: sum over theta of m(theta) m_child(.|theta) (DRC)."""
    terms = []
    for theta, w in m_parent.items():
        cond = drc_extend(f, theta) if theta else MassFunction.certain(f.child, 0)
        terms.append((w, cond))
    return mix(terms, f.child)


def up_message(f: ConditionalBeliefFamily, m_child: MassFunction) -> MassFunction:
    """Message child -> parent: sum over y of m(y) bel_parent(.|y) (GBT)."""
    return mix([(w, gbt(f, y)) for y, w in m_child.items()], f.parent)


def edge_send(net):
    """The ``send`` callable for a network whose nodes are its variables."""

    def send(src: str, dst: str, m: MassFunction) -> MassFunction:
        if (src, dst) in net.families:
            return down_message(net.families[(src, dst)], m)
        return up_message(net.families[(dst, src)], m)

    return send


def polytree_messenger(net) -> TreeMessenger:
    g = net.skeleton()
    if not nx.is_forest(g):
        cycle = [u for u, _ in nx.find_cycle(g)]
        raise MustMergeError(
            f"the network skeleton has an undirected loop through {cycle}; "
            "use merge_loops and propagate_merged"
        )
    order = {n: v.order for n, v in net.variables.items()}
    return TreeMessenger(g, net.node_belief, edge_send(net), key=order.__getitem__)


def propagate_polytree(net, targets: Iterable[str] | None = None) -> dict[str, MassFunction]:
    """Marginal belief of every variable (or of ``targets``) in a polytree network.

    BEL_X is the node's prior and evidence combined with one message from each
    neighbour.  Parent-to-child messages use the DRC, child-to-parent the GBT.
    """
    tm = polytree_messenger(net)
    if targets is None:
        tm.run()
        targets = list(net.variables)
    return {name: tm.belief(name) for name in targets}
