"""Finite atomic measured Boolean algebras of idempotents.

An idempotent is a set of atoms stored as an integer bitmask (atom ``k``,
counted from 1, is bit ``k - 1``).  The measure of an idempotent is the sum
of its atom weights.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Sequence

from gmpy2 import mpq

__all__ = [
    "StructureError",
    "AtomSpace",
    "Idempotent",
    "meet",
    "join",
    "complement",
    "leq",
    "sup_family",
    "measure",
    "rho",
]


class StructureError(ValueError):
    """Raised when values built over different spaces or algebras are combined."""


def _parse_weight(w):
    q = mpq(w)
    if q <= 0:
        raise ValueError(f"atom weights must be strictly positive, got {w}")
    return q


@dataclass(frozen=True)
class AtomSpace:
    """The atoms of a finite Boolean algebra together with their measures."""

    weights: tuple

    def __init__(self, weights: Sequence):
        weights = tuple(_parse_weight(w) for w in weights)
        if not weights:
            raise ValueError("an atom space needs at least one atom")
        object.__setattr__(self, "weights", weights)

    @classmethod
    def uniform(cls, atom_count: int) -> "AtomSpace":
        return cls([mpq(1, atom_count)] * atom_count)

    @property
    def atom_count(self) -> int:
        return len(self.weights)

    @property
    def top(self) -> "Idempotent":
        return Idempotent(self, (1 << self.atom_count) - 1)

    @property
    def bottom(self) -> "Idempotent":
        return Idempotent(self, 0)

    def atoms(self, *indices: int) -> "Idempotent":
        """The idempotent made of the given (1-based) atoms."""
        bits = 0
        for k in indices:
            if not 1 <= k <= self.atom_count:
                raise IndexError(f"atom {k} outside 1..{self.atom_count}")
            bits |= 1 << (k - 1)
        return Idempotent(self, bits)

    def atom(self, k: int) -> "Idempotent":
        return self.atoms(k)

    def all_idempotents(self) -> list:
        return [Idempotent(self, bits) for bits in range(1 << self.atom_count)]

    def check_same(self, other: "AtomSpace") -> None:
        if other is not self and other != self:
            raise StructureError("values belong to different atom spaces")


@dataclass(frozen=True)
class Idempotent:
    space: AtomSpace = field(repr=False)
    bits: int

    def __post_init__(self):
        if self.bits < 0 or self.bits >> self.space.atom_count:
            raise ValueError("idempotent mentions atoms outside its space")

    @property
    def atoms(self) -> frozenset:
        return frozenset(k + 1 for k in range(self.space.atom_count) if self.bits >> k & 1)

    def __contains__(self, k: int) -> bool:
        return bool(self.bits >> (k - 1) & 1)

    def indices(self) -> list:
        """0-based atom indices, ascending."""
        return [k for k in range(self.space.atom_count) if self.bits >> k & 1]

    @property
    def is_bottom(self) -> bool:
        return self.bits == 0

    @property
    def is_top(self) -> bool:
        return self.bits == (1 << self.space.atom_count) - 1

    def _other(self, other: "Idempotent") -> int:
        if not isinstance(other, Idempotent):
            raise TypeError(f"expected an Idempotent, got {type(other).__name__}")
        self.space.check_same(other.space)
        return other.bits

    def __and__(self, other):
        return Idempotent(self.space, self.bits & self._other(other))

    def __or__(self, other):
        return Idempotent(self.space, self.bits | self._other(other))

    def __invert__(self):
        return Idempotent(self.space, self.space.top.bits & ~self.bits)

    def __le__(self, other):
        return self.bits & ~self._other(other) == 0

    def __str__(self):
        return "{" + ", ".join(str(k) for k in sorted(self.atoms)) + "}"


def meet(e: Idempotent, f: Idempotent) -> Idempotent:
    return e & f


def join(e: Idempotent, f: Idempotent) -> Idempotent:
    return e | f


def complement(e: Idempotent) -> Idempotent:
    return ~e


def leq(e: Idempotent, f: Idempotent) -> bool:
    return e <= f


def sup_family(es: Iterable[Idempotent], space: AtomSpace | None = None) -> Idempotent:
    """Least upper bound of a family; the empty family gives bottom (needs ``space``)."""
    es = list(es)
    if not es:
        if space is None:
            raise ValueError("the supremum of an empty family needs an explicit space")
        return space.bottom
    out = es[0]
    for e in es[1:]:
        out = out | e
    return out


def measure(e: Idempotent):
    return sum((w for k, w in enumerate(e.space.weights) if e.bits >> k & 1), mpq(0))


def rho(a, b):
    """The distance ``measure(support(a - b))`` between two regular elements."""
    if a.algebra is not b.algebra and a.algebra != b.algebra:
        raise StructureError("rho of elements from different algebras")
    return measure((a - b).support())
