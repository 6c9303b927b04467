import itertools
import random

import pytest
from gmpy2 import mpq
from hypothesis import given
from hypothesis import strategies as st

from regulus.lattice import (
    AtomSpace,
    Idempotent,
    StructureError,
    complement,
    join,
    leq,
    measure,
    meet,
    rho,
    sup_family,
)
from regulus.sampling import random_element

from conftest import make_algebra

SPACE = AtomSpace((mpq(1, 2), mpq(1, 3), mpq(1, 6)))
idems = st.integers(0, 7).map(lambda b: Idempotent(SPACE, b))


def atoms(*ks):
    return SPACE.atoms(*ks)


def test_named_lattice_values():
    assert meet(atoms(1, 2), atoms(2, 3)) == atoms(2)
    assert join(atoms(1), atoms(2)) == atoms(1, 2)
    assert leq(atoms(1), atoms(1, 2))
    assert not leq(atoms(1, 2), atoms(1))
    assert complement(SPACE.top) == SPACE.bottom
    assert sup_family([atoms(1), atoms(3)]) == atoms(1, 3)
    assert sup_family([], SPACE) == SPACE.bottom
    assert sup_family([atoms(2)]) == atoms(2)


def test_measure_values():
    assert measure(atoms(1, 3)) == mpq(2, 3)
    assert measure(SPACE.top) == 1
    assert measure(SPACE.bottom) == 0


@given(idems)
def test_identity_and_complement_laws(e):
    assert meet(e, SPACE.top) == e
    assert join(e, SPACE.bottom) == e
    assert meet(e, complement(e)) == SPACE.bottom
    assert join(e, complement(e)) == SPACE.top
    assert complement(complement(e)) == e


@given(idems, idems, idems)
def test_boolean_algebra_axioms(e, f, g):
    assert meet(e, join(f, g)) == join(meet(e, f), meet(e, g))
    assert join(e, meet(f, g)) == meet(join(e, f), join(e, g))
    assert complement(meet(e, f)) == join(complement(e), complement(f))
    assert complement(join(e, f)) == meet(complement(e), complement(f))
    assert meet(e, join(e, f)) == e
    assert leq(e, f) == (meet(e, f) == e)


@given(idems, idems)
def test_two_idempotents_split_the_top_into_four_disjoint_parts(e1, e2):
    parts = [e1 & e2, e1 & ~e2, ~e1 & e2, ~(e1 | e2)]
    assert sup_family(parts) == SPACE.top
    for p, q in itertools.combinations(parts, 2):
        assert (p & q).is_bottom



@pytest.mark.parametrize("k", [1, 2, 3, 4])
def test_measure_is_additive_on_disjoint_pairs_exhaustively(k):
    space = AtomSpace([mpq(j + 1, 7) for j in range(k)])
    for e, f in itertools.product(space.all_idempotents(), repeat=2):
        if meet(e, f).is_bottom:
            assert measure(join(e, f)) == measure(e) + measure(f)


def test_weights_must_be_positive_and_spaces_do_not_mix():
    with pytest.raises(ValueError):
        AtomSpace((1, 0))
    other = AtomSpace((1, 1))
    with pytest.raises(StructureError):
        meet(Idempotent(other, 1), atoms(1))


def test_sup_of_empty_family_needs_a_space():
    with pytest.raises(ValueError):
        sup_family([])


def test_rho_examples():
    alg = make_algebra(1, weights=(1,))
    t = alg.var("t")
    assert rho(t, t) == 0
    assert rho(t, alg.zero()) == 1


def test_rho_is_a_metric():
    rng = random.Random(7)
    alg = make_algebra(3, weights=(1, 2, 3))
    for _ in range(200):
        a, b, c = (random_element(rng, alg) for _ in range(3))
        assert (rho(a, b) == 0) == (a == b)
        assert rho(a, b) == rho(b, a)
        assert rho(a, c) <= rho(a, b) + rho(b, c)
