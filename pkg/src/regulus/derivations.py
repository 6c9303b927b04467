"""Derivations of the regular algebra as per-atom combinations of partials.

On every atom a derivation is ``sum_v c_v * d/dv`` with coefficients
``c_v`` taken from that atom's rational-function field.  The derivation is
stored by its coefficients, so equality and linear algebra are exact.
"""

from __future__ import annotations

from typing import Iterable, Sequence

from .algebra import Algebra, RegularElement, membership_idempotent
from .lattice import Idempotent
from .ratfunc import RationalFunction
from .scalars import as_scalar

__all__ = [
    "ExtensionError",
    "AbelianDerivation",
    "apply",
    "zero_derivation",
    "partial",
    "linear_combine",
    "extend_with_value",
    "derivation_with_values",
]


class ExtensionError(ValueError):
    """A prescribed value cannot be realized (the element is not weakly transcendental there)."""


def _stalk_apply(row, f):
    # row: tuple of coefficient stalks, one per variable
    if not f.num.terms:
        return f
    out = None
    for i, c in enumerate(row):
        if not c.num.terms:
            continue
        fi = f.diff(i)
        if not fi.num.terms:
            continue
        term = c * fi
        out = term if out is None else out + term
    if out is None:
        return RationalFunction.zero(f.nvars)
    return out


class AbelianDerivation:
    __slots__ = ("algebra", "coeffs")

    def __init__(self, algebra: Algebra, coeffs: tuple):
        # coeffs[k][i]: coefficient of d/d(variable i) on atom k
        self.algebra = algebra
        self.coeffs = coeffs

    @classmethod
    def from_elements(cls, algebra: Algebra, coefficients: dict) -> "AbelianDerivation":
        """Build ``sum_v coefficients[v] * d/dv`` from RegularElement coefficients."""
        zero = RationalFunction.zero(algebra.nvars)
        rows = [[zero] * algebra.nvars for _ in range(algebra.atom_count)]
        for v, c in coefficients.items():
            i = algebra.var_index(v)
            if not isinstance(c, RegularElement):
                c = algebra.const(c)
            algebra.check_same(c.algebra)
            for k, s in enumerate(c.stalks):
                rows[k][i] = s
        return cls(algebra, tuple(tuple(r) for r in rows))

    @property
    def space(self):
        return self.algebra.space

    def coefficient(self, v: str) -> RegularElement:
        i = self.algebra.var_index(v)
        return self.algebra.element(row[i] for row in self.coeffs)

    @property
    def is_zero(self) -> bool:
        return not any(c.num.terms for row in self.coeffs for c in row)

    def __eq__(self, other):
        if isinstance(other, AbelianDerivation):
            return self.algebra == other.algebra and self.coeffs == other.coeffs
        return NotImplemented

    def __hash__(self):
        return hash(self.coeffs)

    def __call__(self, x: RegularElement) -> RegularElement:
        return apply(self, x)

    def _check(self, other):
        if other.algebra is not self.algebra:
            self.algebra.check_same(other.algebra)

    def __add__(self, other):
        self._check(other)
        return AbelianDerivation(
            self.algebra,
            tuple(tuple(a + b for a, b in zip(r1, r2)) for r1, r2 in zip(self.coeffs, other.coeffs)),
        )

    def __sub__(self, other):
        self._check(other)
        return AbelianDerivation(
            self.algebra,
            tuple(tuple(a - b for a, b in zip(r1, r2)) for r1, r2 in zip(self.coeffs, other.coeffs)),
        )

    def __neg__(self):
        return AbelianDerivation(self.algebra, tuple(tuple(-a for a in r) for r in self.coeffs))

    def scale(self, c) -> "AbelianDerivation":
        c = as_scalar(c)
        return AbelianDerivation(self.algebra, tuple(tuple(a.scale(c) for a in r) for r in self.coeffs))

    def times(self, z: RegularElement) -> "AbelianDerivation":
        """The derivation ``z * self`` (derivations form an A-module)."""
        self._check(z)
        return AbelianDerivation(
            self.algebra, tuple(tuple(s * a for a in r) for s, r in zip(z.stalks, self.coeffs))
        )

    def mask(self, e: Idempotent) -> "AbelianDerivation":
        """The derivation ``e * self``: unchanged on the atoms of ``e``, zero elsewhere."""
        self.space.check_same(e.space)
        zero_row = (RationalFunction.zero(self.algebra.nvars),) * self.algebra.nvars
        return AbelianDerivation(
            self.algebra,
            tuple(r if e.bits >> k & 1 else zero_row for k, r in enumerate(self.coeffs)),
        )

    def format(self) -> str:
        names = self.algebra.variables
        parts = []
        for v in names:
            c = self.coefficient(v)
            if not c.is_zero:
                parts.append(f"{v}: {c.format()}")
        return "der{" + ", ".join(parts) + "}"

    __str__ = format

    def __repr__(self):
        return f"AbelianDerivation({self.format()})"


def apply(delta: AbelianDerivation, x: RegularElement) -> RegularElement:
    """Stalk-wise ``sum_v c_v * dx/dv``."""
    if x.algebra is not delta.algebra:
        delta.algebra.check_same(x.algebra)
    if x.is_zero:
        return x
    return RegularElement(x.algebra, tuple(_stalk_apply(row, f) for row, f in zip(delta.coeffs, x.stalks)))


def zero_derivation(algebra: Algebra) -> AbelianDerivation:
    zero = RationalFunction.zero(algebra.nvars)
    return AbelianDerivation(algebra, ((zero,) * algebra.nvars,) * algebra.atom_count)


def partial(algebra: Algebra, v: str) -> AbelianDerivation:
    """The coordinate derivation d/dv on every atom."""
    return AbelianDerivation.from_elements(algebra, {v: algebra.one()})


def linear_combine(scalars: Sequence, deltas: Sequence[AbelianDerivation]) -> AbelianDerivation:
    if len(scalars) != len(deltas):
        raise ValueError("need one scalar per derivation")
    if not deltas:
        raise ValueError("linear_combine needs at least one derivation to fix the algebra")
    out = zero_derivation(deltas[0].algebra)
    for c, d in zip(scalars, deltas):
        out = out + d.scale(c)
    return out


def extend_with_value(
    base_gens: Iterable[str],
    base_delta: AbelianDerivation,
    y: RegularElement,
    c: RegularElement,
    on: Idempotent | None = None,
) -> AbelianDerivation:
    """Extend ``base_delta`` from the ``base_gens`` subalgebra so that ``y`` maps to ``c``.

    The result keeps ``base_delta``'s coefficients on ``base_gens`` and, on
    each prescribed atom (``on``; by default every atom where ``y`` is
    weakly transcendental over ``base_gens``), adds ``c_w * d/dw`` for the
    alphabetically first variable ``w`` outside ``base_gens`` that ``y``
    depends on, with ``c_w`` solving ``base(y) + c_w * dy/dw = c``.  All
    other coefficients are zero.
    """
    algebra = base_delta.algebra
    algebra.check_same(y.algebra)
    algebra.check_same(c.algebra)
    base_gens = set(base_gens)
    base_idx = {algebra.var_index(g) for g in base_gens}
    inside = membership_idempotent(y, base_gens)
    if on is None:
        on = ~inside
    else:
        algebra.space.check_same(on.space)
    if not (on & inside).is_bottom:
        raise ExtensionError(
            f"{y.format()} is not weakly transcendental over {sorted(base_gens)} on atoms {on & inside}"
        )
    if not c.support() <= on:
        raise ExtensionError(f"value {c.format()} is prescribed outside the atoms {on}")

    nvars = algebra.nvars
    zero = RationalFunction.zero(nvars)
    free_order = sorted((i for i in range(nvars) if i not in base_idx), key=lambda i: algebra.variables[i])
    rows = []
    for k, base_row in enumerate(base_delta.coeffs):
        row = [base_row[i] if i in base_idx else zero for i in range(nvars)]
        if on.bits >> k & 1:
            f = y.stalks[k]
            base_value = _stalk_apply(row, f)
            for w in free_order:
                fw = f.diff(w)
                if fw.num.terms:
                    row[w] = (c.stalks[k] - base_value) / fw
                    break
            else:
                raise ExtensionError(f"{y.format()} has no free variable on atom {k + 1}")
        rows.append(tuple(row))
    return AbelianDerivation(algebra, tuple(rows))


def derivation_with_values(algebra: Algebra, pairs: Sequence) -> AbelianDerivation:
    """The derivation sending each listed variable to its value and every other variable to 0."""
    return AbelianDerivation.from_elements(algebra, dict(pairs))
