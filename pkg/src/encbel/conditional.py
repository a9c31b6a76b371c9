"""Conditional belief families and the operations that move between them and
joint belief functions: disjunctive rule of combination (DRC), generalized
Bayesian theorem (GBT), forward propagation with a prior, ballooning
extension, joint-to-conditional conversion, validity, non-informativeness and
relevance.
"""

from __future__ import annotations

import threading
from collections import OrderedDict
from dataclasses import dataclass, field
from typing import Mapping

import numpy as np

from . import lattice
from .errors import (
    InvalidFamilyError,
    MissingEntryError,
    NotABeliefFunctionError,
    ResourceCapError,
    ScopeMismatchError,
)
from .frame import ConfigSet, Scope, Variable, extend_mask, fibers, iter_bits, project_mask
from .massfn import (
    MassFunction,
    _settle,
    disjunctive_combine,
    from_pl,
    marginalize,
)

CACHE_SIZE = 2**16
MAX_PARENT_BITS = 20
MAX_BALLOON_FOCAL = 2**20
RELEVANCE_TOL = 1e-12


class _LRU:
    """Bounded memo shared by concurrent readers; results never depend on it."""

    def __init__(self, size: int = CACHE_SIZE):
        self.size = size
        self._d: OrderedDict = OrderedDict()
        self._lock = threading.Lock()

    def get(self, key):
        with self._lock:
            if key in self._d:
                self._d.move_to_end(key)
                return self._d[key]
        return None

    def put(self, key, value):
        with self._lock:
            self._d[key] = value
            self._d.move_to_end(key)
            while len(self._d) > self.size:
                self._d.popitem(last=False)

    def __len__(self):
        return len(self._d)


@dataclass(frozen=True, eq=False)
class ConditionalBeliefFamily:
    """One mass function on ``child`` per configuration of ``parent``.

    ``entries[i]`` is m_child(.|x_i) for parent configuration index ``i``.
    """

    parent: Scope
    child: Scope
    entries: tuple[MassFunction, ...]
    _cache: _LRU = field(default_factory=_LRU, repr=False, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "entries", tuple(self.entries))
        if len(self.entries) != self.parent.cardinality:
            raise InvalidFamilyError(
                f"family needs {self.parent.cardinality} entries, got {len(self.entries)}"
            )
        if set(self.parent.names) & set(self.child.names):
            raise ScopeMismatchError("parent and child scopes overlap")
        for e in self.entries:
            if e.scope != self.child:
                raise ScopeMismatchError("family entry is not on the child scope")

    @classmethod
    def from_labels(cls, parent: Variable | Scope, child: Variable | Scope,
                    columns: Mapping) -> "ConditionalBeliefFamily":
        """``columns`` maps each parent label (or configuration tuple) to a
        ``{child subset: mass}`` dict as accepted by ``MassFunction.from_labels``,
        or to a ready MassFunction."""
        parent = parent if isinstance(parent, Scope) else Scope.of(parent)
        child = child if isinstance(child, Scope) else Scope.of(child)
        entries: list[MassFunction | None] = [None] * parent.cardinality
        for key, col in columns.items():
            i = parent.index_of(key)
            entries[i] = col if isinstance(col, MassFunction) else MassFunction.from_labels(child, col)
        for i, e in enumerate(entries):
            if e is None:
                raise MissingEntryError(f"no column for parent {parent.labels(i)}")
        return cls(parent, child, tuple(entries))

    def entry(self, parent_config) -> MassFunction:
        i = parent_config if isinstance(parent_config, int) else self.parent.index_of(parent_config)
        return self.entries[i]

    @property
    def is_normalized(self) -> bool:
        return all(e.is_normalized() for e in self.entries)

    def __repr__(self):
        return f"ConditionalBeliefFamily({list(self.parent.names)} -> {list(self.child.names)})"


def _theta(f: ConditionalBeliefFamily, theta) -> int:
    if isinstance(theta, ConfigSet):
        if theta.scope != f.parent:
            raise ScopeMismatchError("conditioning set is not on the parent scope")
        return theta.mask
    return theta


def _x(f: ConditionalBeliefFamily, x) -> int:
    if isinstance(x, ConfigSet):
        if x.scope != f.child:
            raise ScopeMismatchError("subset is not on the child scope")
        return x.mask
    return x


# -- DRC -------------------------------------------------------------------

def drc_extend(f: ConditionalBeliefFamily, theta) -> MassFunction:
    """m(.|theta): disjunctive combination of the entries indexed by theta."""
    mask = _theta(f, theta)
    if mask == 0:
        raise ValueError("the DRC is not defined for an empty conditioning set")
    key = ("drc", mask)
    hit = f._cache.get(key)
    if hit is not None:
        return hit
    out = None
    for i in iter_bits(mask):
        out = f.entries[i] if out is None else disjunctive_combine(out, f.entries[i])
    f._cache.put(key, out)
    return out


def drc_pl(f: ConditionalBeliefFamily, theta, x) -> float:
    """pl(x|theta) = 1 - prod over theta_i in theta of (1 - pl(x|theta_i))."""
    mask, xm = _theta(f, theta), _x(f, x)
    prod = 1.0
    for i in iter_bits(mask):
        prod *= 1.0 - f.entries[i].pl(xm)
    return 1.0 - prod


def _entry_pl_matrix(f: ConditionalBeliefFamily) -> np.ndarray:
    """rows: parent configurations; columns: child subsets; values pl(x|x_i)."""
    lattice.check_dense(f.child.cardinality)
    n = f.child.cardinality
    comp = lattice.complement_index(n)
    rows = [1.0 - lattice.subset_sum(e.dense())[comp] for e in f.entries]
    return np.array(rows)


def drc_extend_pl(f: ConditionalBeliefFamily, theta) -> MassFunction:
    """The DRC computed through plausibilities, then inverted to masses."""
    mask = _theta(f, theta)
    if mask == 0:
        raise ValueError("the DRC is not defined for an empty conditioning set")
    pl = _entry_pl_matrix(f)
    idx = list(iter_bits(mask))
    vals = 1.0 - np.prod(1.0 - pl[idx], axis=0)
    return from_pl(vals, f.child)


# -- GBT -------------------------------------------------------------------

def gbt_pl(f: ConditionalBeliefFamily, theta, x) -> float:
    return drc_pl(f, theta, x)


def gbt(f: ConditionalBeliefFamily, x) -> MassFunction:
    """Belief on the parent induced by learning that the child lies in x.

    All parent plausibilities pl(theta|x) are computed, then inverted.  An
    empty x yields all mass on the empty set.
    """
    xm = _x(f, x)
    key = ("gbt", xm)
    hit = f._cache.get(key)
    if hit is not None:
        return hit
    n = f.parent.cardinality
    if n > MAX_PARENT_BITS:
        raise ResourceCapError(f"GBT over a parent frame of {n} elements (cap {MAX_PARENT_BITS})")
    if xm == 0:
        out = MassFunction.certain(f.parent, 0)
    else:
        one_minus = np.array([1.0 - e.pl(xm) for e in f.entries])
        # prod over theta of (1 - pl_i) for every theta, built by doubling
        prods = np.ones(1 << n)
        for i in range(n):
            v = prods.reshape(-1, 2, 1 << i)
            v[:, 1, :] *= one_minus[i]
        try:
            out = from_pl(1.0 - prods, f.parent)
        except NotABeliefFunctionError as exc:
            raise InvalidFamilyError(f"GBT inversion failed: {exc}") from exc
    f._cache.put(key, out)
    return out


def forward_propagate(prior: MassFunction, f: ConditionalBeliefFamily) -> MassFunction:
    """Belief on the child from a prior on the parent:
    pl(x) = sum over theta of m0(theta) pl(x|theta)."""
    if prior.scope != f.parent:
        raise ScopeMismatchError("prior is not on the family's parent scope")
    pl_entries = _entry_pl_matrix(f)
    total = np.zeros(pl_entries.shape[1])
    for theta, w in prior.items():
        if theta == 0:
            continue  # pl(.|empty) = 0
        idx = list(iter_bits(theta))
        total += w * (1.0 - np.prod(1.0 - pl_entries[idx], axis=0))
    return from_pl(total, f.child)


# -- joint forms -------------------------------------------------------------

def _pair_embedding(parent: Scope, child: Scope):
    joint = parent.union(child)
    pf = fibers(joint, parent)
    cf = fibers(joint, child)
    return joint, pf, cf


def ballooning_extension(f: ConditionalBeliefFamily, cap: int = MAX_BALLOON_FOCAL) -> MassFunction:
    """Least committed joint on parent x child whose conditionals are the entries.

    Each focal set is the union over parent configurations x_i of
    {x_i} x y_i, for one focal y_i chosen per entry; its mass is the product.
    """
    count = 1
    for e in f.entries:
        count *= len(e)
    if count > cap:
        raise ResourceCapError(f"ballooning extension would have {count} focal sets (cap {cap})")
    joint, pf, cf = _pair_embedding(f.parent, f.child)
    acc: dict[int, float] = {0: 1.0}
    for i, e in enumerate(f.entries):
        nxt: dict[int, float] = {}
        for y, v in e.items():
            piece = pf[i] & extend_mask(y, f.child, joint)
            for k, w in acc.items():
                key = k | piece
                nxt[key] = nxt.get(key, 0.0) + w * v
        acc = nxt
    return _settle(joint, acc)


def conditional_from_joint(j: MassFunction, parent: Scope, x: int,
                           child: Scope | None = None) -> MassFunction:
    """m_child(.|x): condition the joint on x's cylinder and project to the child."""
    if child is None:
        child = j.scope.minus(parent)
    cyl = extend_mask(x, parent, j.scope)
    acc: dict[int, float] = {}
    for s, v in j.items():
        y = project_mask(s & cyl, j.scope, child)
        acc[y] = acc.get(y, 0.0) + v
    return MassFunction._raw(child, acc)


@dataclass(frozen=True)
class FullConditionalTable:
    """m_child(.|x) for every nonempty subset x of the parent space (keyed by mask)."""

    parent: Scope
    child: Scope
    entries: dict

    def __getitem__(self, x) -> MassFunction:
        mask = x.mask if isinstance(x, ConfigSet) else x
        try:
            return self.entries[mask]
        except KeyError:
            raise MissingEntryError(f"no entry for {self.parent.format_mask(mask)}") from None

    def singletons(self) -> ConditionalBeliefFamily:
        return ConditionalBeliefFamily(
            self.parent, self.child,
            tuple(self.entries[1 << i] for i in range(self.parent.cardinality)),
        )


def _check_table_size(parent: Scope):
    if parent.cardinality > MAX_PARENT_BITS:
        raise ResourceCapError(f"full table over 2^{parent.cardinality} parent subsets")


def joint_to_conditional(j: MassFunction, parent: Scope) -> FullConditionalTable:
    if not parent.issubset(j.scope) or parent == j.scope:
        raise ScopeMismatchError("parent must be a proper part of the joint's scope")
    _check_table_size(parent)
    child = j.scope.minus(parent)
    entries = {x: conditional_from_joint(j, parent, x, child) for x in range(1, parent.full + 1)}
    return FullConditionalTable(parent, child, entries)


def table_from_family(f: ConditionalBeliefFamily) -> FullConditionalTable:
    _check_table_size(f.parent)
    return FullConditionalTable(
        f.parent, f.child, {x: drc_extend(f, x) for x in range(1, f.parent.full + 1)}
    )


# -- checks ------------------------------------------------------------------

@dataclass(frozen=True)
class Validity:
    ok: bool
    witness: tuple | None = None  # (y, x1, x2) with x1 < x2 and pl(y|x1) > pl(y|x2)

    def __bool__(self):
        return self.ok


def validity_check(t: FullConditionalTable, tol: float = 1e-12) -> Validity:
    """pl(y|x1) <= pl(y|x2) whenever x1 is a subset of x2.  Checking covering
    pairs (x2 = x1 plus one element) suffices by transitivity."""
    n = t.parent.cardinality
    pls = {x: _dense_pl(t[x]) for x in range(1, t.parent.full + 1)}
    for x1 in range(1, t.parent.full + 1):
        for i in range(n):
            bit = 1 << i
            if x1 & bit:
                continue
            x2 = x1 | bit
            bad = np.nonzero(pls[x1] > pls[x2] + tol)[0]
            if len(bad):
                return Validity(False, (int(bad[0]), x1, x2))
    return Validity(True)


def _dense_pl(m: MassFunction) -> np.ndarray:
    b = lattice.subset_sum(m.dense())
    return 1.0 - b[lattice.complement_index(m.scope.cardinality)]


@dataclass(frozen=True)
class NonInformativeReport:
    over_parent: bool
    over_child: bool
    notes: tuple[str, ...] = ()


def _silent_about_child(f: ConditionalBeliefFamily, tol: float) -> bool:
    full = f.child.full
    for y in range(1, full):  # proper nonempty subsets only
        if not any(e.bel(y) <= tol for e in f.entries):
            return False
    return True


def non_informative_checks(obj, tol: float = 1e-12) -> NonInformativeReport:
    """Whether a family, full table or joint says nothing about the parent
    (marginal on the parent vacuous) or about the child."""
    if isinstance(obj, ConditionalBeliefFamily):
        return NonInformativeReport(
            over_parent=obj.is_normalized,
            over_child=_silent_about_child(obj, tol),
            notes=("over-child test ranges over proper subsets of the child frame",),
        )
    if isinstance(obj, FullConditionalTable):
        return NonInformativeReport(
            over_parent=all(e.is_normalized(tol) for e in obj.entries.values()),
            over_child=obj[obj.parent.full].is_vacuous(tol),
        )
    if isinstance(obj, tuple) and len(obj) == 2 and isinstance(obj[0], MassFunction):
        j, parent = obj
        child = j.scope.minus(parent)
        return NonInformativeReport(
            over_parent=marginalize(j, parent).is_vacuous(tol),
            over_child=marginalize(j, child).is_vacuous(tol),
        )
    raise TypeError("expected a family, a full table, or a (joint, parent scope) pair")


@dataclass(frozen=True)
class RelevanceInfo:
    relevant: ConfigSet
    irrelevant: ConfigSet

    def labels(self) -> tuple[list, list]:
        fmt = (lambda cs: [c[0] if len(c) == 1 else c for c in cs.members()])
        return fmt(self.relevant), fmt(self.irrelevant)


def relevance(f: ConditionalBeliefFamily, tol: float = RELEVANCE_TOL) -> RelevanceInfo:
    """Parent configurations whose entry is vacuous are irrelevant to the child."""
    irr = 0
    for i, e in enumerate(f.entries):
        if e.is_vacuous(tol):
            irr |= 1 << i
    return RelevanceInfo(ConfigSet(f.parent, f.parent.full & ~irr), ConfigSet(f.parent, irr))


__all__ = [
    "ConditionalBeliefFamily", "FullConditionalTable", "RelevanceInfo", "Validity",
    "NonInformativeReport", "drc_extend", "drc_extend_pl", "drc_pl", "gbt", "gbt_pl",
    "forward_propagate", "ballooning_extension", "conditional_from_joint",
    "joint_to_conditional", "table_from_family", "validity_check",
    "non_informative_checks", "relevance",
]
