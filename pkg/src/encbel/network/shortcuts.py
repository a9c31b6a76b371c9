"""Shortcuts for two children X, Y of a common parent A that are unrelated
through A: Y's marginal stays vacuous under observations on X, and with an
extra edge X -> Y the belief on A is a mixture of the beliefs obtained for
each observed value of X."""

from __future__ import annotations

from ..conditional import drc_extend, gbt, relevance
from ..errors import PreconditionError
from ..massfn import MassFunction, combine_all, vacuous
from .polytree import up_message

_FALLBACK = "; fall back to merge_loops + propagate_merged"


def _require_edges(net, *edges):
    for e in edges:
        if e not in net.families:
            raise PreconditionError(f"missing edge {e[0]}->{e[1]}{_FALLBACK}")


def _irrelevant(net, a, x) -> int:
    return relevance(net.families[(a, x)]).irrelevant.mask


def unrelated(net, x: str, y: str, a: str) -> bool:
    """u(X, Y, A): both irrelevant sets nonempty and either they intersect, or
    they split A's frame and the DRC of X's (or Y's) family over its relevant
    elements is vacuous."""
    _require_edges(net, (a, x), (a, y))
    full = (1 << net.variables[a].size) - 1
    phi_x, phi_y = _irrelevant(net, a, x), _irrelevant(net, a, y)
    if not phi_x or not phi_y:
        return False
    if phi_x & phi_y:
        return True
    if phi_x | phi_y != full:
        return False
    return (drc_extend(net.families[(a, x)], full & ~phi_x).is_vacuous()
            or drc_extend(net.families[(a, y)], full & ~phi_y).is_vacuous())


def _only_edges(net, names, allowed):
    for e in net.families:
        if (e[0] in names or e[1] in names) and e not in allowed:
            raise PreconditionError(f"edge {e[0]}->{e[1]} is outside the shortcut's pattern{_FALLBACK}")


def _check_common(net, x, y, a):
    if not unrelated(net, x, y, a):
        raise PreconditionError(f"{x} and {y} are not unrelated through {a}{_FALLBACK}")
    for e, f in net.families.items():
        if not f.is_normalized:
            raise PreconditionError(f"edge {e[0]}->{e[1]} has subnormal entries{_FALLBACK}")
    if not net.node_belief(x).is_normalized():
        raise PreconditionError(f"belief on {x} is not normalized{_FALLBACK}")


def lemma9_shortcut(net, x: str, y: str, a: str) -> MassFunction:
    """BEL_Y without propagation: vacuous when X and Y are unrelated through A,
    A has no prior and only X is observed."""
    _require_edges(net, (a, x), (a, y))
    _only_edges(net, {a, x, y}, {(a, x), (a, y)})
    _check_common(net, x, y, a)
    for name in net.variables:
        if name != x and net.has_information(name):
            raise PreconditionError(f"{name} carries a prior or evidence{_FALLBACK}")
    return vacuous(net.scope(y))


def mixture_component(net, x: str, y: str, a: str, i: int) -> MassFunction:
    """Belief on A when X is observed to be its i-th value: X's GBT for {x_i}
    combined with Y's GBT message under Y's belief m_Y(.|x_i)."""
    m_from_x = gbt(net.families[(a, x)], 1 << i)
    m_from_y = up_message(net.families[(a, y)], net.families[(x, y)].entries[i])
    return combine_all([m_from_x, m_from_y])


def figure6_shortcut(net, x: str, y: str, a: str) -> MassFunction:
    """BEL_A for A -> X, A -> Y, X -> Y with X binary and unrelated to Y through A.

    Mass on every proper subset of A's frame is the mixture over x_i of the
    observed mass on {x_i} times the belief obtained for X = x_i; the rest goes
    to the whole frame.  A's own prior is combined in at the end.
    """
    _require_edges(net, (a, x), (a, y), (x, y))
    _only_edges(net, {a, x, y}, {(a, x), (a, y), (x, y)})
    if net.variables[x].size != 2:
        raise PreconditionError(f"{x} is not binary{_FALLBACK}")
    _check_common(net, x, y, a)
    full = (1 << net.variables[a].size) - 1
    relevant_x = full & ~_irrelevant(net, a, x)
    relevant_y = full & ~_irrelevant(net, a, y)
    if relevant_x & relevant_y:
        raise PreconditionError(f"relevant elements of {x} and {y} overlap{_FALLBACK}")
    fxy = net.families[(x, y)]
    if not drc_extend(fxy, fxy.parent.full).is_vacuous():
        raise PreconditionError(f"{y} given the whole frame of {x} is not vacuous{_FALLBACK}")
    if net.has_information(y):
        raise PreconditionError(f"{y} carries a prior or evidence{_FALLBACK}")

    obs = net.node_belief(x)
    acc: dict[int, float] = {}
    for i in range(2):
        w = obs[1 << i]
        if w == 0:
            continue
        for k, v in mixture_component(net, x, y, a, i).items():
            if k != full:
                acc[k] = acc.get(k, 0.0) + w * v
    acc[full] = 1.0 - sum(acc.values())
    scope_a = net.scope(a)
    mixed = MassFunction(scope_a, {k: v for k, v in acc.items() if v > 1e-15})
    return combine_all([mixed, net.node_belief(a)])
