"""Variables, product spaces and subsets of configurations.

A subset of a product space is stored as a Python ``int`` used as a bitset:
bit ``i`` is set when configuration ``i`` belongs to the subset.  Configuration
indices are row-major over the scope's variables in canonical order, i.e.::

    index = sum(idx_k * stride_k),  stride_k = prod(size_j for j > k)

so the last variable varies fastest.  This encoding is part of the persisted
contract and must not change.
"""

from __future__ import annotations

import itertools
import os
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Iterable, Iterator, Sequence

from .errors import InvalidPartitionError, ResourceCapError, ScopeMismatchError

DEFAULT_MAX_CONFIGS = 2**20
CAP_ENV_VAR = "ENCBEL_MAX_CONFIGS"

_declaration_counter = itertools.count()


def max_configs() -> int:
    """Product-space cap, overridable through ``ENCBEL_MAX_CONFIGS``."""
    raw = os.environ.get(CAP_ENV_VAR)
    if raw:
        return int(raw)
    return DEFAULT_MAX_CONFIGS


def iter_bits(mask: int) -> Iterator[int]:
    while mask:
        low = mask & -mask
        yield low.bit_length() - 1
        mask ^= low


def popcount(mask: int) -> int:
    return bin(mask).count("1")


@dataclass(frozen=True)
class Variable:
    name: str
    frame: tuple[str, ...]
    # Global declaration order; decides the canonical order inside scopes.
    order: int = field(default_factory=lambda: next(_declaration_counter), compare=False)

    def __post_init__(self):
        object.__setattr__(self, "frame", tuple(self.frame))
        if not self.frame:
            raise ValueError(f"variable {self.name!r} has an empty frame")
        if len(set(self.frame)) != len(self.frame):
            raise ValueError(f"variable {self.name!r} has duplicate frame labels")

    @property
    def size(self) -> int:
        return len(self.frame)

    def index(self, label: str) -> int:
        try:
            return self.frame.index(label)
        except ValueError:
            raise KeyError(f"{label!r} is not in the frame of {self.name!r}") from None

    def __repr__(self):
        return f"Variable({self.name!r}, {list(self.frame)!r})"


@dataclass(frozen=True)
class Scope:
    variables: tuple[Variable, ...]

    def __post_init__(self):
        vs = tuple(sorted(self.variables, key=lambda v: (v.order, v.name)))
        names = [v.name for v in vs]
        if len(set(names)) != len(names):
            raise ScopeMismatchError(f"duplicate variables in scope: {names}")
        object.__setattr__(self, "variables", vs)
        if self.cardinality > max_configs():
            raise ResourceCapError(
                f"product space over {names} has {self.cardinality} configurations "
                f"(cap {max_configs()}, set {CAP_ENV_VAR} to raise it)"
            )

    @classmethod
    def of(cls, *variables: Variable) -> "Scope":
        return cls(tuple(variables))

    @property
    def names(self) -> tuple[str, ...]:
        return tuple(v.name for v in self.variables)

    @property
    def sizes(self) -> tuple[int, ...]:
        return tuple(v.size for v in self.variables)

    @property
    def cardinality(self) -> int:
        n = 1
        for v in self.variables:
            n *= v.size
        return n

    @property
    def strides(self) -> tuple[int, ...]:
        out = []
        acc = 1
        for size in reversed(self.sizes):
            out.append(acc)
            acc *= size
        return tuple(reversed(out))

    @property
    def full(self) -> int:
        return (1 << self.cardinality) - 1

    def __contains__(self, item) -> bool:
        name = item.name if isinstance(item, Variable) else item
        return name in self.names

    def __len__(self):
        return len(self.variables)

    def __iter__(self):
        return iter(self.variables)

    def issubset(self, other: "Scope") -> bool:
        return set(self.variables) <= set(other.variables)

    def union(self, other: "Scope") -> "Scope":
        return Scope(tuple(set(self.variables) | set(other.variables)))

    def minus(self, other: "Scope") -> "Scope":
        return Scope(tuple(v for v in self.variables if v not in other.variables))

    def intersection(self, other: "Scope") -> "Scope":
        return Scope(tuple(v for v in self.variables if v in other.variables))

    def variable(self, name: str) -> Variable:
        for v in self.variables:
            if v.name == name:
                return v
        raise KeyError(name)

    def sub(self, *names: str) -> "Scope":
        return Scope(tuple(self.variable(n) for n in names))

    def encode(self, idx: Sequence[int]) -> int:
        if len(idx) != len(self.variables):
            raise ScopeMismatchError("configuration length does not match the scope")
        out = 0
        for i, s, v in zip(idx, self.strides, self.variables):
            if not 0 <= i < v.size:
                raise IndexError(f"index {i} out of range for {v.name!r}")
            out += i * s
        return out

    def decode(self, index: int) -> tuple[int, ...]:
        out = []
        for s, size in zip(self.strides, self.sizes):
            out.append((index // s) % size)
        return tuple(out)

    def labels(self, index: int) -> tuple[str, ...]:
        return tuple(v.frame[i] for v, i in zip(self.variables, self.decode(index)))

    def index_of(self, labels: Sequence[str] | str) -> int:
        if isinstance(labels, str):
            labels = (labels,)
        return self.encode([v.index(lab) for v, lab in zip(self.variables, labels)])

    def mask_of(self, configs: Iterable) -> int:
        """Bitmask of a collection of configurations (label tuples, or bare labels
        for single-variable scopes)."""
        mask = 0
        for c in configs:
            mask |= 1 << self.index_of(c)
        return mask

    def format_mask(self, mask: int) -> str:
        if mask == 0:
            return "{}"
        if len(self.variables) == 1:
            frame = self.variables[0].frame
            return "{" + ",".join(frame[i] for i in iter_bits(mask)) + "}"
        items = ("(" + ",".join(self.labels(i)) + ")" for i in iter_bits(mask))
        return "{" + ",".join(items) + "}"

    def __repr__(self):
        return f"Scope({list(self.names)})"


def _check_sub(sub: Scope, sup: Scope):
    if not sub.issubset(sup):
        raise ScopeMismatchError(f"{list(sub.names)} is not contained in {list(sup.names)}")


@lru_cache(maxsize=4096)
def projection_map(sup: Scope, sub: Scope) -> tuple[int, ...]:
    """For each configuration index of ``sup``, its projection index on ``sub``."""
    _check_sub(sub, sup)
    positions = [sup.names.index(n) for n in sub.names]
    out = []
    for i in range(sup.cardinality):
        idx = sup.decode(i)
        out.append(sub.encode([idx[p] for p in positions]))
    return tuple(out)


@lru_cache(maxsize=4096)
def fibers(sup: Scope, sub: Scope) -> tuple[int, ...]:
    """For each configuration of ``sub``, the mask of ``sup`` configurations above it."""
    out = [0] * sub.cardinality
    for i, j in enumerate(projection_map(sup, sub)):
        out[j] |= 1 << i
    return tuple(out)


def project_mask(mask: int, sup: Scope, sub: Scope) -> int:
    if sub == sup:
        return mask
    out = 0
    for j, fib in enumerate(fibers(sup, sub)):
        if mask & fib:
            out |= 1 << j
    return out


def extend_mask(mask: int, sub: Scope, sup: Scope) -> int:
    if sub == sup:
        return mask
    fib = fibers(sup, sub)
    out = 0
    for j in iter_bits(mask):
        out |= fib[j]
    return out


@dataclass(frozen=True)
class ConfigSet:
    """A subset of the configurations of ``scope``."""

    scope: Scope
    mask: int

    def __post_init__(self):
        if self.mask < 0 or self.mask > self.scope.full:
            raise ValueError("mask outside the product space")

    @classmethod
    def from_labels(cls, scope: Scope, configs: Iterable) -> "ConfigSet":
        return cls(scope, scope.mask_of(configs))

    @classmethod
    def full(cls, scope: Scope) -> "ConfigSet":
        return cls(scope, scope.full)

    @classmethod
    def empty(cls, scope: Scope) -> "ConfigSet":
        return cls(scope, 0)

    def members(self) -> list[tuple[str, ...]]:
        return [self.scope.labels(i) for i in iter_bits(self.mask)]

    def indices(self) -> list[int]:
        return list(iter_bits(self.mask))

    def __len__(self):
        return popcount(self.mask)

    def __bool__(self):
        return self.mask != 0

    def _same(self, other: "ConfigSet"):
        if other.scope != self.scope:
            raise ScopeMismatchError("set operation across different scopes")

    def __and__(self, other):
        self._same(other)
        return ConfigSet(self.scope, self.mask & other.mask)

    def __or__(self, other):
        self._same(other)
        return ConfigSet(self.scope, self.mask | other.mask)

    def complement(self) -> "ConfigSet":
        return ConfigSet(self.scope, self.scope.full & ~self.mask)

    def issubset(self, other: "ConfigSet") -> bool:
        self._same(other)
        return self.mask & ~other.mask == 0

    def __str__(self):
        return self.scope.format_mask(self.mask)


def project(x: ConfigSet, sub: Scope) -> ConfigSet:
    """Drop the coordinates of ``x`` that are not in ``sub``."""
    _check_sub(sub, x.scope)
    return ConfigSet(sub, project_mask(x.mask, x.scope, sub))


def cylinder_extend(y: ConfigSet, sup: Scope) -> ConfigSet:
    _check_sub(y.scope, sup)
    return ConfigSet(sup, extend_mask(y.mask, y.scope, sup))


@dataclass(frozen=True)
class Partition:
    """A partition of one variable's frame, with the coarse frame it induces.

    ``lam[i]`` is the block index of frame element ``i``.  The coarse frame
    is exposed as :attr:`coarse` so belief functions can live on it.
    """

    base: Variable
    blocks: tuple[int, ...]
    lam: tuple[int, ...]
    coarse: Variable

    @property
    def base_scope(self) -> Scope:
        return Scope.of(self.base)

    @property
    def coarse_scope(self) -> Scope:
        return Scope.of(self.coarse)

    @property
    def is_identity(self) -> bool:
        return len(self.blocks) == self.base.size

    def coarsen_mask(self, mask: int) -> int:
        out = 0
        for k, block in enumerate(self.blocks):
            if mask & block:
                out |= 1 << k
        return out

    def refine_mask(self, mask: int) -> int:
        out = 0
        for k in iter_bits(mask):
            out |= self.blocks[k]
        return out

    def coarsen(self, theta: ConfigSet) -> ConfigSet:
        if theta.scope != self.base_scope:
            raise ScopeMismatchError("subset is not on the partitioned frame")
        return ConfigSet(self.coarse_scope, self.coarsen_mask(theta.mask))

    def refine(self, x: ConfigSet) -> ConfigSet:
        if x.scope != self.coarse_scope:
            raise ScopeMismatchError("subset is not on the coarse frame")
        return ConfigSet(self.base_scope, self.refine_mask(x.mask))


def make_partition(base: Variable, blocks, *, name: str | None = None,
                   labels: Sequence[str] | None = None) -> Partition:
    """Build a partition of ``base``'s frame.

    ``blocks`` is a sequence of blocks, each a bitmask or an iterable of frame
    labels.  Blocks are put in canonical order (by smallest member).  Unless
    ``labels`` is given, singleton blocks keep their element's label and the
    k-th multi-element block is labelled ``s<k>``.
    """
    masks = []
    for b in blocks:
        if isinstance(b, int):
            masks.append(b)
        else:
            if isinstance(b, str):
                b = [b]
            m = 0
            for lab in b:
                m |= 1 << base.index(lab)
            masks.append(m)
    full = (1 << base.size) - 1
    seen = 0
    for m in masks:
        if m == 0:
            raise InvalidPartitionError("partition has an empty block")
        if m & ~full:
            raise InvalidPartitionError("block outside the frame")
        if m & seen:
            raise InvalidPartitionError("partition blocks overlap")
        seen |= m
    if seen != full:
        missing = [base.frame[i] for i in iter_bits(full & ~seen)]
        raise InvalidPartitionError(f"partition does not cover {missing}")
    order = sorted(range(len(masks)), key=lambda k: (masks[k] & -masks[k]).bit_length())
    if labels is not None:
        if len(labels) != len(masks):
            raise InvalidPartitionError("one label per block is required")
        labels = [labels[k] for k in order]
    masks = [masks[k] for k in order]
    lam = [0] * base.size
    for k, m in enumerate(masks):
        for i in iter_bits(m):
            lam[i] = k
    if labels is None:
        labels = []
        multi = 0
        for m in masks:
            if popcount(m) == 1:
                labels.append(base.frame[m.bit_length() - 1])
            else:
                multi += 1
                labels.append(f"s{multi}")
    coarse = Variable(name or base.name, tuple(labels), order=base.order)
    return Partition(base, tuple(masks), tuple(lam), coarse)
