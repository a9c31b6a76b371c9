"""Brute-force reference semantics.

The global joint belief is the conjunctive combination of the ballooning
extension of every edge family and of every prior and piece of evidence, all
cylinder-extended to the product space of all variables.  Marginals are read
off by projection.  Nothing here uses the DRC, the GBT or message passing.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field
from typing import Sequence

from .conditional import ballooning_extension
from .errors import ResourceCapError, ScopeMismatchError, TotalConflictError
from .frame import iter_bits
from .massfn import MassFunction, conjunctive_combine, extend, marginalize

DEFAULT_WORK_CAP = 2**24


@dataclass
class OracleResult:
    joint: MassFunction
    marginals: dict[str, MassFunction]
    focal_counts: list[int] = field(default_factory=list)
    seconds: float = 0.0


def joint_pieces(net) -> list[tuple[str, MassFunction]]:
    """Everything that enters the global joint, labelled, on the all-variable scope."""
    scope = net.all_scope()
    pieces = []
    for name in net.variables:
        nb = net.node_belief(name)
        if not nb.is_vacuous():
            pieces.append((f"belief {name}", extend(nb, scope)))
    for (p, c), f in net.families.items():
        pieces.append((f"edge {p}->{c}", extend(ballooning_extension(f), scope)))
    return pieces


def oracle_marginals(net, *, work_cap: int = DEFAULT_WORK_CAP,
                     order: Sequence[int] | None = None) -> OracleResult:
    """Build the global joint and project it onto every variable.

    ``order`` optionally permutes the combination order of the pieces.
    """
    t0 = time.perf_counter()
    pieces = joint_pieces(net)
    if order is not None:
        pieces = [pieces[i] for i in order]
    joint = MassFunction.vacuous(net.all_scope())
    counts = []
    for label, piece in pieces:
        estimate = len(joint) * len(piece)
        if estimate > work_cap:
            raise ResourceCapError(
                f"oracle combination with {label} needs {estimate} focal products (cap {work_cap})"
            )
        joint = conjunctive_combine(joint, piece, dense=False)
        counts.append(len(joint))
    marginals = {name: marginalize(joint, net.scope(name)) for name in net.variables}
    return OracleResult(joint, marginals, counts, time.perf_counter() - t0)


def dempster_reference(m1: MassFunction, m2: MassFunction) -> MassFunction:
    """Dempster's rule written out directly on frozensets of configurations."""
    if m1.scope != m2.scope:
        raise ScopeMismatchError("Dempster's rule needs a common scope")
    sets1 = [(frozenset(iter_bits(k)), v) for k, v in m1.items()]
    sets2 = [(frozenset(iter_bits(k)), v) for k, v in m2.items()]
    if any(not s for s, _ in sets1 + sets2):
        raise ValueError("Dempster's rule expects normalized inputs")
    raw: dict[frozenset, float] = {}
    conflict = 0.0
    for s1, v1 in sets1:
        for s2, v2 in sets2:
            inter = s1 & s2
            if inter:
                raw[inter] = raw.get(inter, 0.0) + v1 * v2
            else:
                conflict += v1 * v2
    k = 1.0 - conflict
    if k <= 1e-12:
        raise TotalConflictError("the two pieces of evidence are in total conflict")
    out = {}
    for s, v in raw.items():
        out[sum(1 << i for i in s)] = v / k
    assert math.isclose(sum(out.values()), 1.0, abs_tol=1e-9)
    return MassFunction(m1.scope, out)


def max_deviation(a: dict[str, MassFunction], b: dict[str, MassFunction]) -> dict[str, float]:
    return {name: a[name].max_abs_diff(b[name]) for name in a if name in b}
