"""Seeded random generators for elements, derivations and matrices.

All generators take an explicit :class:`random.Random` so every report and
test is reproducible from its seed.  Values are kept small (low degree,
few terms, simple denominators) because exact arithmetic cost grows fast
with size; a single counterexample is decisive, so breadth matters more
than bulk.
"""

from __future__ import annotations

import random

from gmpy2 import mpq

from .algebra import Algebra, RegularElement
from .derivations import AbelianDerivation
from .lattice import AtomSpace, Idempotent
from .matrix import MatrixDerivation, MatrixElement
from .poly import Poly
from .ratfunc import RationalFunction
from .scalars import scalar

__all__ = [
    "random_scalar",
    "random_poly",
    "random_stalk",
    "random_element",
    "random_finitely_valued",
    "random_derivation",
    "random_matrix",
    "random_matrix_derivation",
    "random_idempotent",
]

_DENOMS = (1, 1, 1, 2, 3)


def random_scalar(rng: random.Random, imaginary_prob: float = 0.15, nonzero: bool = False):
    while True:
        re = mpq(rng.randint(-3, 3), rng.choice(_DENOMS))
        im = mpq(rng.randint(-2, 2), rng.choice(_DENOMS)) if rng.random() < imaginary_prob else 0
        c = scalar(re, im)
        if c or not nonzero:
            return c


def _random_monomial(rng, nvars, max_deg):
    exps = [0] * nvars
    for _ in range(rng.randint(0, max_deg)):
        exps[rng.randrange(nvars)] += 1
    return tuple(exps)


def random_poly(rng: random.Random, nvars: int, max_terms: int = 3, max_deg: int = 2) -> Poly:
    items = [(_random_monomial(rng, nvars, max_deg), random_scalar(rng, nonzero=True)) for _ in range(rng.randint(1, max_terms))]
    return Poly.from_terms(items, nvars)


def random_stalk(
    rng: random.Random,
    nvars: int,
    zero_prob: float = 0.1,
    const_prob: float = 0.2,
    rational_prob: float = 0.2,
    max_terms: int = 3,
) -> RationalFunction:
    u = rng.random()
    if u < zero_prob:
        return RationalFunction.zero(nvars)
    if u < zero_prob + const_prob or nvars == 0:
        return RationalFunction.const(random_scalar(rng, nonzero=True), nvars)
    num = random_poly(rng, nvars, max_terms=max_terms)
    if rng.random() < rational_prob:
        den = Poly.from_terms(
            [(_random_monomial(rng, nvars, 1), mpq(1)), ((0,) * nvars, random_scalar(rng, imaginary_prob=0.0))],
            nvars,
        )
        if not den.is_constant:
            return RationalFunction.make(num, den)
    return RationalFunction(num)


def random_element(rng: random.Random, algebra: Algebra, broadcast_prob: float = 0.3, **stalk_kw) -> RegularElement:
    if rng.random() < broadcast_prob:
        return algebra.broadcast(random_stalk(rng, algebra.nvars, **stalk_kw))
    return algebra.element(random_stalk(rng, algebra.nvars, **stalk_kw) for _ in range(algebra.atom_count))


def random_finitely_valued(rng: random.Random, algebra: Algebra) -> RegularElement:
    return algebra.finitely_valued(random_scalar(rng) for _ in range(algebra.atom_count))


def random_derivation(rng: random.Random, algebra: Algebra, zero_prob: float = 0.3) -> AbelianDerivation:
    rows = []
    for _ in range(algebra.atom_count):
        rows.append(
            tuple(
                random_stalk(rng, algebra.nvars, zero_prob=zero_prob, const_prob=0.4, rational_prob=0.1, max_terms=2)
                for _ in range(algebra.nvars)
            )
        )
    return AbelianDerivation(algebra, tuple(rows))


def random_matrix(rng: random.Random, algebra: Algebra, n: int, zero_prob: float = 0.3, **stalk_kw) -> MatrixElement:
    zero = algebra.zero()
    return MatrixElement(
        algebra,
        [[zero if rng.random() < zero_prob else random_element(rng, algebra, **stalk_kw) for _ in range(n)] for _ in range(n)],
    )


def random_matrix_derivation(
    rng: random.Random, algebra: Algebra, n: int, zero_prob: float = 0.4, **stalk_kw
) -> MatrixDerivation:
    stalk_kw.setdefault("rational_prob", 0.1)
    stalk_kw.setdefault("max_terms", 2)
    inner = random_matrix(rng, algebra, n, zero_prob=zero_prob, **stalk_kw)
    return MatrixDerivation(inner, random_derivation(rng, algebra, zero_prob=zero_prob))


def random_idempotent(rng: random.Random, space: AtomSpace) -> Idempotent:
    return Idempotent(space, rng.randrange(1 << space.atom_count))
