"""The commutative regular algebra A: a finite product of rational-function fields.

Each atom of the :class:`~regulus.lattice.AtomSpace` carries one stalk, a
canonical :class:`~regulus.ratfunc.RationalFunction` in the algebra's shared
variables.  All operations act stalk-wise.
"""

from __future__ import annotations

from dataclasses import dataclass
from operator import add, mul, sub
from typing import Iterable, Sequence

from .lattice import AtomSpace, Idempotent, StructureError
from .ratfunc import RationalFunction
from .scalars import as_scalar

__all__ = [
    "Algebra",
    "RegularElement",
    "support",
    "pinv",
    "mask",
    "is_finitely_valued",
    "depends_on",
    "membership_idempotent",
    "jacobian_independent",
    "row_rank",
]


@dataclass(frozen=True)
class Algebra:
    """A = product over the atoms of ``space`` of Q(i)(variables)."""

    space: AtomSpace
    variables: tuple

    def __init__(self, space: AtomSpace, variables: Sequence[str]):
        variables = tuple(variables)
        if len(set(variables)) != len(variables):
            raise ValueError("variable names must be distinct")
        object.__setattr__(self, "space", space)
        object.__setattr__(self, "variables", variables)

    @property
    def nvars(self) -> int:
        return len(self.variables)

    @property
    def atom_count(self) -> int:
        return self.space.atom_count

    def var_index(self, name: str) -> int:
        try:
            return self.variables.index(name)
        except ValueError:
            raise KeyError(f"unknown variable {name!r}") from None

    def check_same(self, other: "Algebra") -> None:
        if other is not self and other != self:
            raise StructureError("elements belong to different algebras")

    # -- element constructors -------------------------------------------
    def element(self, stalks: Iterable[RationalFunction]) -> "RegularElement":
        stalks = tuple(stalks)
        if len(stalks) != self.atom_count:
            raise ValueError(f"expected {self.atom_count} stalks, got {len(stalks)}")
        return RegularElement(self, stalks)

    def broadcast(self, stalk: RationalFunction) -> "RegularElement":
        return RegularElement(self, (stalk,) * self.atom_count)

    def zero(self) -> "RegularElement":
        return self.broadcast(RationalFunction.zero(self.nvars))

    def one(self) -> "RegularElement":
        return self.broadcast(RationalFunction.one(self.nvars))

    def const(self, c) -> "RegularElement":
        return self.broadcast(RationalFunction.const(as_scalar(c), self.nvars))

    def var(self, name: str) -> "RegularElement":
        return self.broadcast(RationalFunction.var(self.var_index(name), self.nvars))

    def idempotent_element(self, e: Idempotent) -> "RegularElement":
        """The element equal to 1 on the atoms of ``e`` and 0 elsewhere."""
        self.space.check_same(e.space)
        one, zero = RationalFunction.one(self.nvars), RationalFunction.zero(self.nvars)
        return RegularElement(self, tuple(one if e.bits >> k & 1 else zero for k in range(self.atom_count)))

    def finitely_valued(self, values: Sequence) -> "RegularElement":
        """The element sum_k values[k] * (atom k)."""
        return self.element(RationalFunction.const(as_scalar(v), self.nvars) for v in values)


def _uniform(stalks) -> bool:
    # broadcast elements share one stalk object; compute once for them
    first = stalks[0]
    for st in stalks[1:]:
        if st is not first:
            return False
    return True


class RegularElement:
    __slots__ = ("algebra", "stalks", "_zero")

    def __init__(self, algebra: Algebra, stalks: tuple):
        self.algebra = algebra
        self.stalks = stalks
        self._zero = None

    @property
    def space(self) -> AtomSpace:
        return self.algebra.space

    @property
    def is_zero(self) -> bool:
        if self._zero is None:
            self._zero = not any(s.num.terms for s in self.stalks)
        return self._zero

    def __bool__(self):
        return not self.is_zero

    def __eq__(self, other):
        if isinstance(other, RegularElement):
            if other is self:
                return True
            if other.algebra is not self.algebra and other.algebra != self.algebra:
                return False
            return self.stalks == other.stalks
        return NotImplemented

    def __hash__(self):
        return hash(self.stalks)

    def __repr__(self):
        return f"RegularElement({self.format()})"

    def format(self) -> str:
        names = self.algebra.variables
        first = self.stalks[0]
        if all(s == first for s in self.stalks[1:]):
            return first.format(names)
        return "[" + " ; ".join(s.format(names) for s in self.stalks) + "]"

    __str__ = format

    def _coerce(self, other):
        if other.__class__ is RegularElement and other.algebra is self.algebra:
            return other
        if isinstance(other, RegularElement):
            if other.algebra is not self.algebra:
                self.algebra.check_same(other.algebra)
            return other
        return self.algebra.const(other)

    def __add__(self, other):
        other = self._coerce(other)
        if other.is_zero:
            return self
        if self.is_zero:
            return other
        s, o = self.stalks, other.stalks
        if _uniform(s) and _uniform(o):
            return RegularElement(self.algebra, (s[0] + o[0],) * len(s))
        return RegularElement(self.algebra, tuple(map(add, s, o)))

    __radd__ = __add__

    def __sub__(self, other):
        other = self._coerce(other)
        if other.is_zero:
            return self
        s, o = self.stalks, other.stalks
        if _uniform(s) and _uniform(o):
            return RegularElement(self.algebra, (s[0] - o[0],) * len(s))
        return RegularElement(self.algebra, tuple(map(sub, s, o)))

    def __rsub__(self, other):
        return self._coerce(other) - self

    def __neg__(self):
        s = self.stalks
        if _uniform(s):
            return RegularElement(self.algebra, (-s[0],) * len(s))
        return RegularElement(self.algebra, tuple(-a for a in s))

    def __mul__(self, other):
        other = self._coerce(other)
        if self.is_zero:
            return self
        if other.is_zero:
            return other
        s, o = self.stalks, other.stalks
        if _uniform(s) and _uniform(o):
            return RegularElement(self.algebra, (s[0] * o[0],) * len(s))
        return RegularElement(self.algebra, tuple(map(mul, s, o)))

    __rmul__ = __mul__

    def scale(self, c) -> "RegularElement":
        c = as_scalar(c)
        return RegularElement(self.algebra, tuple(a.scale(c) for a in self.stalks))

    def __truediv__(self, other):
        """Division by an element with full support (a unit of A)."""
        other = self._coerce(other)
        if not other.support().is_top:
            raise ZeroDivisionError("division by an element that is not invertible; use pinv")
        return self * pinv(other)

    def __rtruediv__(self, other):
        return self._coerce(other) / self

    def __pow__(self, k):
        if k < 0:
            if not self.support().is_top:
                raise ZeroDivisionError("negative power of a non-invertible element")
            return pinv(self) ** (-k)
        return RegularElement(self.algebra, tuple(a**k for a in self.stalks))

    # convenience wrappers
    def support(self) -> Idempotent:
        return support(self)

    def pinv(self) -> "RegularElement":
        return pinv(self)

    def mask(self, e: Idempotent) -> "RegularElement":
        return mask(e, self)


def support(a: RegularElement) -> Idempotent:
    """The least idempotent ``e`` with ``e*a == a``: atoms with nonzero stalk."""
    bits = 0
    for k, s in enumerate(a.stalks):
        if s.num.terms:
            bits |= 1 << k
    return Idempotent(a.space, bits)


def pinv(a: RegularElement) -> RegularElement:
    """Pseudo-inverse: stalk-wise inverse on the support, zero elsewhere."""
    return RegularElement(a.algebra, tuple(s.inverse() if s.num.terms else s for s in a.stalks))


def mask(e: Idempotent, a: RegularElement) -> RegularElement:
    """The product ``e*a``: keep the stalks on the atoms of ``e``."""
    a.space.check_same(e.space)
    if e.is_top:
        return a
    zero = RationalFunction.zero(a.algebra.nvars)
    return RegularElement(a.algebra, tuple(s if e.bits >> k & 1 else zero for k, s in enumerate(a.stalks)))


def is_finitely_valued(a: RegularElement) -> bool:
    return all(s.is_constant for s in a.stalks)


def depends_on(a: RegularElement, v: str, atom: int) -> bool:
    """Whether the formal partial derivative of the stalk at ``atom`` (1-based) w.r.t. ``v`` is nonzero."""
    index = a.algebra.var_index(v)
    if not 1 <= atom <= a.algebra.atom_count:
        raise IndexError(f"atom {atom} outside 1..{a.algebra.atom_count}")
    return not a.stalks[atom - 1].diff(index).is_zero


def _gens_indices(algebra: Algebra, gens) -> set:
    return {algebra.var_index(g) for g in gens}


def membership_idempotent(x: RegularElement, gens: Iterable[str]) -> Idempotent:
    """Largest idempotent ``e`` such that ``e*x`` lies in the subalgebra generated by ``gens``.

    Atom-wise the stalk belongs iff it depends on no variable outside ``gens``.
    Off the returned idempotent, ``x`` is weakly transcendental over that subalgebra.
    """
    algebra = x.algebra
    inside = _gens_indices(algebra, gens)
    outside = [i for i in range(algebra.nvars) if i not in inside]
    bits = 0
    for k, s in enumerate(x.stalks):
        if all(s.diff(i).is_zero for i in outside):
            bits |= 1 << k
    return Idempotent(algebra.space, bits)


def row_rank(rows: list) -> int:
    """Rank of a matrix over a field by Gaussian elimination.

    Entries need ``+ - * /`` and truthiness for zero testing; works for
    ``mpq`` and :class:`RationalFunction` alike.
    """
    rows = [list(r) for r in rows]
    if not rows:
        return 0
    ncols = len(rows[0])
    rank = 0
    for col in range(ncols):
        pivot = None
        for r in range(rank, len(rows)):
            if rows[r][col]:
                pivot = r
                break
        if pivot is None:
            continue
        rows[rank], rows[pivot] = rows[pivot], rows[rank]
        prow = rows[rank]
        p = prow[col]
        inv = p.inverse() if isinstance(p, RationalFunction) else 1 / p
        for r in range(rank + 1, len(rows)):
            f = rows[r][col]
            if f:
                factor = f * inv
                rows[r] = [a - factor * b for a, b in zip(rows[r], prow)]
        rank += 1
        if rank == len(rows):
            break
    return rank


def jacobian_independent(elems: Sequence[RegularElement]) -> Idempotent:
    """Atoms on which the Jacobian of ``elems`` w.r.t. all variables has full row rank.

    In characteristic zero this is exactly where the elements are
    algebraically independent.
    """
    elems = list(elems)
    if not elems:
        raise ValueError("jacobian_independent needs at least one element")
    algebra = elems[0].algebra
    for e in elems[1:]:
        algebra.check_same(e.algebra)
    if len(elems) > algebra.nvars:
        return algebra.space.bottom
    bits = 0
    for k in range(algebra.atom_count):
        rows = [[e.stalks[k].diff(i) for i in range(algebra.nvars)] for e in elems]
        if row_rank(rows) == len(elems):
            bits |= 1 << k
    return Idempotent(algebra.space, bits)


def scalar_value(a: RegularElement, atom: int = 1):
    """The constant value of a finitely valued element at a 1-based atom."""
    return a.stalks[atom - 1].constant_value()

