"""Two-level computation around a hub variable on coarsened frames.

Elements of the hub's frame that are irrelevant to every child in a group
behave as one block in that group's computation, so each group runs on a
partition of the hub frame and its result is refined back before the final
conjunctive combination.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from ..conditional import ConditionalBeliefFamily, drc_extend, relevance
from ..errors import PreconditionError
from ..frame import Partition, make_partition, popcount
from ..massfn import MassFunction, coarsen, combine_all, refine
from .polytree import down_message, polytree_messenger, up_message


@dataclass
class GroupPlan:
    members: tuple[str, ...]
    partition: Partition
    shared_irrelevant: int  # mask over the hub frame
    coarse_families: dict[str, ConditionalBeliefFamily] = field(default_factory=dict)
    belief: MassFunction | None = None  # on the coarse frame
    refined: MassFunction | None = None

    @property
    def frame_size(self) -> int:
        return self.partition.coarse.size

    @property
    def coarsened(self) -> bool:
        return not self.partition.is_identity


@dataclass
class PartitionPlan:
    hub: str
    groups: list[GroupPlan]


def _default_groups(net, hub):
    return [[n] for n in net.neighbors(hub)]


def partition_optimize(net, hub: str, groups=None) -> tuple[MassFunction, PartitionPlan]:
    """Marginal of ``hub`` computed group by group on coarsened frames.

    ``groups`` lists the hub's neighbours per group (default: one group per
    neighbour).  A group whose children share no irrelevant element, or that
    contains a parent of the hub, runs on the full frame.
    """
    tm = polytree_messenger(net)
    children = net.children(hub)
    neighbours = net.neighbors(hub)
    if len(children) < 2:
        raise PreconditionError(
            f"{hub} has {len(children)} child(ren); the partition method needs at least 2, "
            "use polytree propagation"
        )
    groups = [list(g) for g in (groups or _default_groups(net, hub))]
    listed = [n for g in groups for n in g]
    if len(set(listed)) != len(listed) or not set(listed) <= set(neighbours):
        raise PreconditionError("groups must be disjoint sets of the hub's neighbours")
    groups += [[n] for n in neighbours if n not in listed]

    base = net.variables[hub]
    full = (1 << base.size) - 1
    plans = []
    for gi, members in enumerate(groups, start=1):
        shared = full
        for x in members:
            if (hub, x) in net.families:
                shared &= relevance(net.families[(hub, x)]).irrelevant.mask
            else:
                shared = 0
        if popcount(shared) >= 2:
            blocks = [shared] + [1 << i for i in range(base.size) if not shared >> i & 1]
            labels = [f"s{gi}"] + [base.frame[i] for i in range(base.size) if not shared >> i & 1]
        else:
            blocks = [1 << i for i in range(base.size)]
            labels = list(base.frame)
        part = make_partition(base, blocks, name=f"{hub}{gi}", labels=labels)
        plan = GroupPlan(tuple(members), part, shared)
        messages = []
        for x in members:
            incoming = tm.gathered(x, exclude=hub)
            if (hub, x) in net.families:
                f = net.families[(hub, x)]
                cf = ConditionalBeliefFamily(
                    part.coarse_scope, f.child,
                    tuple(drc_extend(f, block) for block in part.blocks),
                )
                plan.coarse_families[x] = cf
                messages.append(up_message(cf, incoming))
            else:
                f = net.families[(x, hub)]
                messages.append(coarsen(down_message(f, incoming), part))
        plan.belief = combine_all(messages, part.coarse_scope)
        plan.refined = refine(plan.belief, part)
        plans.append(plan)
    marginal = combine_all([net.node_belief(hub)] + [p.refined for p in plans])
    return marginal, PartitionPlan(hub, plans)
