"""Basic belief assignments and the operations defined on them.

Everything here is unnormalized (open world): mass may sit on the empty set and
is only removed by an explicit :func:`normalize`.  Focal sets are bitmasks over
the configurations of the mass function's scope (see :mod:`encbel.frame`).
"""

from __future__ import annotations

import math
from collections.abc import Mapping
from typing import Iterable

import numpy as np

from . import lattice
from .errors import (
    MissingEntryError,
    NotABeliefFunctionError,
    ScopeMismatchError,
    TotalConflictError,
)
from .frame import (
    ConfigSet,
    Partition,
    Scope,
    extend_mask,
    project_mask,
)

SUM_TOL = 1e-9
INPUT_SUM_TOL = 1e-6
DROP_BELOW = 1e-15
# Dense transforms are used for combinations on scopes up to this many configurations.
DENSE_CUTOFF = 2**16


class _Full:
    def __repr__(self):
        return "FULL"


FULL = _Full()
"""Key standing for the whole product space in :meth:`MassFunction.from_labels`."""


def _settle(scope: Scope, acc: dict[int, float]) -> "MassFunction":
    """Clean up masses produced by arithmetic and wrap them."""
    out = {}
    dropped = 0.0
    for k, v in acc.items():
        if v < -SUM_TOL:
            raise NotABeliefFunctionError(
                f"negative mass {v:.3g} on {scope.format_mask(k)}"
            )
        if v < DROP_BELOW:
            dropped += v
        else:
            out[k] = v
    total = math.fsum(out.values()) + dropped
    if abs(total - 1.0) > SUM_TOL or not out:
        raise NotABeliefFunctionError(f"masses sum to {total!r}")
    if dropped:
        top = max(out, key=out.__getitem__)
        out[top] += dropped
    return MassFunction._raw(scope, out)


class MassFunction:
    """A basic belief assignment on ``scope``.

    ``focal`` maps focal sets (bitmasks or :class:`ConfigSet`) to masses.
    Inputs summing to within 1e-6 of one are rescaled; zero masses are dropped.
    """

    __slots__ = ("scope", "_m")

    def __init__(self, scope: Scope, focal):
        if isinstance(focal, Mapping):
            focal = focal.items()
        acc: dict[int, float] = {}
        for k, v in focal:
            if isinstance(k, ConfigSet):
                if k.scope != scope:
                    raise ScopeMismatchError("focal set on a different scope")
                k = k.mask
            if not 0 <= k <= scope.full:
                raise ValueError("focal set outside the product space")
            v = float(v)
            if v < 0 or math.isnan(v):
                raise NotABeliefFunctionError(f"invalid mass {v!r}")
            if v > 0:
                acc[k] = acc.get(k, 0.0) + v
        s = math.fsum(acc.values())
        if abs(s - 1.0) > INPUT_SUM_TOL:
            raise NotABeliefFunctionError(f"masses sum to {s!r}, expected 1")
        self.scope = scope
        self._m = {k: v / s for k, v in acc.items()}

    @classmethod
    def _raw(cls, scope: Scope, m: dict[int, float]) -> "MassFunction":
        obj = cls.__new__(cls)
        obj.scope = scope
        obj._m = m
        return obj

    @classmethod
    def vacuous(cls, scope: Scope) -> "MassFunction":
        return cls._raw(scope, {scope.full: 1.0})

    @classmethod
    def certain(cls, scope: Scope, subset) -> "MassFunction":
        mask = subset.mask if isinstance(subset, ConfigSet) else subset
        return cls._raw(scope, {mask: 1.0})

    @classmethod
    def from_labels(cls, scope: Scope, masses: Mapping) -> "MassFunction":
        """Build from label-level keys.

        A key is :data:`FULL`, a single label (single-variable scopes), or an
        iterable of configurations (label tuples, or bare labels when the scope
        has one variable).
        """
        items = []
        for key, v in masses.items():
            items.append((_key_mask(scope, key), v))
        return cls(scope, items)

    # -- access -----------------------------------------------------------
    @property
    def focal(self) -> dict[int, float]:
        return dict(self._m)

    def items(self) -> list[tuple[int, float]]:
        return sorted(self._m.items())

    def __iter__(self):
        return iter(sorted(self._m))

    def __len__(self):
        return len(self._m)

    def __getitem__(self, subset) -> float:
        return self._m.get(_as_mask(self, subset), 0.0)

    mass = __getitem__

    def focal_sets(self) -> list[ConfigSet]:
        return [ConfigSet(self.scope, k) for k in sorted(self._m)]

    @property
    def empty_mass(self) -> float:
        return self._m.get(0, 0.0)

    def is_normalized(self, tol: float = 1e-12) -> bool:
        return self.empty_mass <= tol

    def is_vacuous(self, tol: float = 1e-12) -> bool:
        return abs(self._m.get(self.scope.full, 0.0) - 1.0) <= tol

    def total(self) -> float:
        return math.fsum(self._m.values())

    # -- pointwise transforms -------------------------------------------------
    def bel(self, subset) -> float:
        a = _as_mask(self, subset)
        return math.fsum(v for k, v in self._m.items() if k and not k & ~a)

    def pl(self, subset) -> float:
        a = _as_mask(self, subset)
        return math.fsum(v for k, v in self._m.items() if k & a)

    def q(self, subset) -> float:
        a = _as_mask(self, subset)
        return math.fsum(v for k, v in self._m.items() if not a & ~k)

    def dense(self) -> np.ndarray:
        lattice.check_dense(self.scope.cardinality)
        a = np.zeros(1 << self.scope.cardinality)
        for k, v in self._m.items():
            a[k] = v
        return a

    # -- comparison -------------------------------------------------------
    def max_abs_diff(self, other: "MassFunction") -> float:
        if other.scope != self.scope:
            raise ScopeMismatchError("comparing mass functions on different scopes")
        keys = set(self._m) | set(other._m)
        return max((abs(self._m.get(k, 0.0) - other._m.get(k, 0.0)) for k in keys), default=0.0)

    def isclose(self, other: "MassFunction", tol: float = 1e-9) -> bool:
        return self.max_abs_diff(other) <= tol

    def labelled(self) -> dict[str, float]:
        return {self.scope.format_mask(k): v for k, v in sorted(self._m.items())}

    def __repr__(self):
        body = ", ".join(f"{s}: {v:.6g}" for s, v in self.labelled().items())
        return f"MassFunction({list(self.scope.names)}, {{{body}}})"


def _key_mask(scope: Scope, key) -> int:
    if key is FULL:
        return scope.full
    if isinstance(key, ConfigSet):
        return key.mask
    if isinstance(key, int):
        return key
    if isinstance(key, str):
        return scope.mask_of([key])
    return scope.mask_of(key)


def _as_mask(m: MassFunction, subset) -> int:
    if isinstance(subset, ConfigSet):
        if subset.scope != m.scope:
            raise ScopeMismatchError("subset on a different scope")
        return subset.mask
    if isinstance(subset, int):
        return subset
    return _key_mask(m.scope, subset)


def _same_scope(m1: MassFunction, m2: MassFunction):
    if m1.scope != m2.scope:
        raise ScopeMismatchError(
            f"scopes differ: {list(m1.scope.names)} vs {list(m2.scope.names)}"
        )


def vacuous(scope: Scope) -> MassFunction:
    return MassFunction.vacuous(scope)


# -- set-function views ------------------------------------------------------

class SetFunctionView:
    """bel / pl / q of a mass function, dense when the lattice is small enough,
    otherwise evaluated on demand from the source masses."""

    kind = ""

    def __init__(self, scope: Scope, values: np.ndarray | None = None,
                 source: MassFunction | None = None):
        self.scope = scope
        self.values = values
        self.source = source

    def __call__(self, subset) -> float:
        mask = subset.mask if isinstance(subset, ConfigSet) else subset
        if self.values is not None:
            return float(self.values[mask])
        return getattr(self.source, self.kind)(mask)

    def materialize(self) -> np.ndarray:
        if self.values is None:
            lattice.check_dense(self.scope.cardinality)
            self.values = np.array([self(k) for k in range(1 << self.scope.cardinality)])
        return self.values


class BeliefView(SetFunctionView):
    kind = "bel"


class PlausibilityView(SetFunctionView):
    kind = "pl"


class CommonalityView(SetFunctionView):
    kind = "q"


def _implicability(m: MassFunction) -> np.ndarray:
    return lattice.subset_sum(m.dense())


def _dense_ok(scope: Scope) -> bool:
    return scope.cardinality <= lattice.DENSE_MAX_BITS


def to_bel(m: MassFunction) -> BeliefView:
    if not _dense_ok(m.scope):
        return BeliefView(m.scope, source=m)
    b = _implicability(m)
    return BeliefView(m.scope, b - m.empty_mass, m)


def to_pl(m: MassFunction) -> PlausibilityView:
    if not _dense_ok(m.scope):
        return PlausibilityView(m.scope, source=m)
    b = _implicability(m)
    n = m.scope.cardinality
    return PlausibilityView(m.scope, 1.0 - b[lattice.complement_index(n)], m)


def to_q(m: MassFunction) -> CommonalityView:
    if not _dense_ok(m.scope):
        return CommonalityView(m.scope, source=m)
    return CommonalityView(m.scope, lattice.superset_sum(m.dense()), m)


def _view_values(view, scope):
    if isinstance(view, SetFunctionView):
        return view.scope, view.materialize()
    if scope is None:
        raise ValueError("a scope is required when passing a raw array")
    return scope, np.asarray(view, dtype=np.float64)


def _from_dense(scope: Scope, m: np.ndarray) -> MassFunction:
    return _settle(scope, {k: float(v) for k, v in enumerate(m) if v != 0.0})


def from_bel(view, scope: Scope | None = None) -> MassFunction:
    scope, bel = _view_values(view, scope)
    # bel(Omega) = 1 - m(empty)
    b = bel + (1.0 - bel[-1])
    return _from_dense(scope, lattice.subset_mobius(b))


def from_pl(view, scope: Scope | None = None) -> MassFunction:
    scope, pl = _view_values(view, scope)
    n = scope.cardinality
    b = 1.0 - pl[lattice.complement_index(n)]
    return _from_dense(scope, lattice.subset_mobius(b))


def from_q(view, scope: Scope | None = None) -> MassFunction:
    scope, q = _view_values(view, scope)
    return _from_dense(scope, lattice.superset_mobius(q))


# -- conditioning and combination ---------------------------------------------

def condition(m: MassFunction, a) -> MassFunction:
    """Unnormalized conditioning: every focal set B is moved to B & a."""
    mask = _as_mask(m, a)
    acc: dict[int, float] = {}
    for k, v in m._m.items():
        j = k & mask
        acc[j] = acc.get(j, 0.0) + v
    return MassFunction._raw(m.scope, acc)


def _use_dense(scope: Scope, n1: int, n2: int) -> bool:
    if scope.cardinality > lattice.DENSE_MAX_BITS or (1 << scope.cardinality) > DENSE_CUTOFF:
        return False
    return max(n1, n2) > math.sqrt(1 << scope.cardinality)


def _sparse(m1: MassFunction, m2: MassFunction, disjunctive: bool) -> dict[int, float]:
    acc: dict[int, float] = {}
    get = acc.get
    for k1, v1 in m1._m.items():
        for k2, v2 in m2._m.items():
            k = (k1 | k2) if disjunctive else (k1 & k2)
            acc[k] = get(k, 0.0) + v1 * v2
    return acc


def conjunctive_combine(m1: MassFunction, m2: MassFunction, *, dense: bool | None = None) -> MassFunction:
    """Unnormalized conjunctive rule: m12(A) = sum over B & C = A of m1(B) m2(C)."""
    _same_scope(m1, m2)
    # the vacuous function is neutral; keep that exact
    if m1.is_vacuous(0.0):
        return m2
    if m2.is_vacuous(0.0):
        return m1
    if dense is None:
        dense = _use_dense(m1.scope, len(m1), len(m2))
    if dense:
        q = lattice.superset_sum(m1.dense()) * lattice.superset_sum(m2.dense())
        return _from_dense(m1.scope, lattice.superset_mobius(q))
    return _settle(m1.scope, _sparse(m1, m2, False))


def disjunctive_combine(m1: MassFunction, m2: MassFunction, *, dense: bool | None = None) -> MassFunction:
    """Disjunctive rule: m12(A) = sum over B | C = A of m1(B) m2(C)."""
    _same_scope(m1, m2)
    # the vacuous function absorbs everything
    if m1.is_vacuous(0.0):
        return m1
    if m2.is_vacuous(0.0):
        return m2
    if dense is None:
        dense = _use_dense(m1.scope, len(m1), len(m2))
    if dense:
        b = lattice.subset_sum(m1.dense()) * lattice.subset_sum(m2.dense())
        return _from_dense(m1.scope, lattice.subset_mobius(b))
    return _settle(m1.scope, _sparse(m1, m2, True))


def combine_all(ms: Iterable[MassFunction], scope: Scope | None = None) -> MassFunction:
    """Conjunctive combination of any number of mass functions (vacuous if none)."""
    out = None
    for m in ms:
        out = m if out is None else conjunctive_combine(out, m)
    if out is None:
        if scope is None:
            raise ValueError("empty combination needs a scope")
        return vacuous(scope)
    return out


def conditioning_table(m: MassFunction, subsets: Iterable) -> dict[int, MassFunction]:
    """``{B: m(.|B)}`` for each subset B, the table used by :func:`conjunctive_via_conditional`."""
    return {(_as_mask(m, b)): condition(m, b) for b in subsets}


def conjunctive_via_conditional(table, m2: MassFunction) -> MassFunction:
    """m12(A) = sum over B of m1(A|B) m2(B), given the table B -> m1(.|B)."""
    acc: dict[int, float] = {}
    scope = None
    for b, w in m2._m.items():
        try:
            cond = table[b]
        except KeyError:
            raise MissingEntryError(f"table has no entry for {m2.scope.format_mask(b)}") from None
        if scope is None:
            scope = cond.scope
        for k, v in cond._m.items():
            acc[k] = acc.get(k, 0.0) + w * v
    return _settle(scope, acc)


def mix(terms: Iterable[tuple[float, MassFunction]], scope: Scope) -> MassFunction:
    """Weighted sum of mass functions; weights must sum to one."""
    acc: dict[int, float] = {}
    for w, m in terms:
        if m.scope != scope:
            raise ScopeMismatchError("mixture term on a different scope")
        for k, v in m._m.items():
            acc[k] = acc.get(k, 0.0) + w * v
    return _settle(scope, acc)


# -- scope changes ------------------------------------------------------------

def marginalize(m: MassFunction, sub: Scope) -> MassFunction:
    if not len(sub):
        raise ScopeMismatchError("cannot marginalize onto an empty scope")
    if not sub.issubset(m.scope):
        raise ScopeMismatchError(f"{list(sub.names)} is not inside {list(m.scope.names)}")
    if sub == m.scope:
        return m
    acc: dict[int, float] = {}
    for k, v in m._m.items():
        j = project_mask(k, m.scope, sub)
        acc[j] = acc.get(j, 0.0) + v
    return MassFunction._raw(sub, acc)


def extend(m: MassFunction, sup: Scope) -> MassFunction:
    """Vacuous (cylinder) extension of ``m`` onto the larger scope ``sup``."""
    if not m.scope.issubset(sup):
        raise ScopeMismatchError(f"{list(m.scope.names)} is not inside {list(sup.names)}")
    if sup == m.scope:
        return m
    return MassFunction._raw(sup, {extend_mask(k, m.scope, sup): v for k, v in m._m.items()})


def normalize(m: MassFunction) -> MassFunction:
    """Remove the empty-set mass and rescale by K = 1 - m(empty)."""
    k = 1.0 - m.empty_mass
    if k <= SUM_TOL:
        raise TotalConflictError("all mass is on the empty set")
    return MassFunction._raw(m.scope, {s: v / k for s, v in m._m.items() if s})


def coarsen(m: MassFunction, p: Partition) -> MassFunction:
    if m.scope != p.base_scope:
        raise ScopeMismatchError("mass function is not on the partitioned frame")
    acc: dict[int, float] = {}
    for k, v in m._m.items():
        j = p.coarsen_mask(k)
        acc[j] = acc.get(j, 0.0) + v
    return MassFunction._raw(p.coarse_scope, acc)


def refine(m: MassFunction, p: Partition) -> MassFunction:
    if m.scope != p.coarse_scope:
        raise ScopeMismatchError("mass function is not on the coarse frame")
    return MassFunction._raw(p.base_scope, {p.refine_mask(k): v for k, v in m._m.items()})


# -- rendering ----------------------------------------------------------------

def _fmt(v: float) -> str:
    if abs(v) < 5e-10:
        v = 0.0
    return f"{v:.9f}"


def render_table(m: MassFunction) -> str:
    """Rows of focal set, m, bel, pl, q sorted by bitmask."""
    rows = [("focal", "m", "bel", "pl", "q")]
    for k, v in m.items():
        rows.append((m.scope.format_mask(k), _fmt(v), _fmt(m.bel(k)), _fmt(m.pl(k)), _fmt(m.q(k))))
    width = max(len(r[0]) for r in rows)
    lines = [f"{r[0]:<{width}}  " + "  ".join(f"{c:>11}" for c in r[1:]) for r in rows]
    return "\n".join(lines) + "\n"


__all__ = [
    "FULL", "MassFunction", "BeliefView", "PlausibilityView", "CommonalityView",
    "vacuous", "to_bel", "to_pl", "to_q", "from_bel", "from_pl", "from_q",
    "condition", "conjunctive_combine", "disjunctive_combine", "combine_all",
    "conditioning_table", "conjunctive_via_conditional", "mix", "marginalize",
    "extend", "normalize", "coarsen", "refine", "render_table",
]
