import random

import pytest

from regulus.derivations import AbelianDerivation, apply, partial, zero_derivation
from regulus.lattice import StructureError
from regulus.matrix import (
    DecompositionError,
    MatrixDerivation,
    MatrixElement,
    apply_matrix_derivation,
    central,
    commutant_basis,
    commutator,
    decompose,
    diagonal_probe,
    evaluation_table,
    identity,
    is_diagonal,
    is_upper_toeplitz,
    mask_matrix,
    matrix_unit,
    shift_probe,
    zero_matrix,
)
from regulus.sampling import random_derivation, random_element, random_matrix, random_matrix_derivation

from conftest import make_algebra


def e(i, j, alg, n=2):
    return matrix_unit(n, i, j, alg)


def test_unit_calculus(alg2):
    assert e(1, 1, alg2) * e(1, 2, alg2) == e(1, 2, alg2)
    assert (e(1, 2, alg2) * e(1, 1, alg2)).is_zero
    assert sum((e(i, i, alg2, 3) for i in (2, 3)), e(1, 1, alg2, 3)) == identity(alg2, 3)


def test_commutator_examples(alg2, rng):
    x = random_matrix(rng, alg2, 3)
    assert commutator(x, x).is_zero
    assert commutator(e(1, 2, alg2), e(1, 1, alg2)) == -e(1, 2, alg2)
    assert commutator(central(random_element(rng, alg2), 3), x).is_zero


def test_application_examples(alg1):
    t = alg1.var("t")
    zero = zero_matrix(alg1, 2)
    D = MatrixDerivation(zero, partial(alg1, "t"))
    assert apply_matrix_derivation(D, e(1, 2, alg1) * t) == e(1, 2, alg1)
    assert apply_matrix_derivation(D, e(2, 1, alg1)).is_zero
    inner = MatrixDerivation(e(1, 2, alg1), zero_derivation(alg1))
    assert apply_matrix_derivation(inner, e(2, 1, alg1)) == e(1, 1, alg1) - e(2, 2, alg1)


def _naive(D, x):
    # independent route: generic matrix products plus entrywise application
    entrywise = MatrixElement(x.algebra, [[apply(D.center, v) for v in r] for r in x.rows])
    return D.inner * x - x * D.inner + entrywise


def test_fast_application_agrees_with_the_naive_formula():
    rng = random.Random(4)
    alg = make_algebra(2)
    for _ in range(150):
        n = rng.choice((1, 2, 3))
        D = random_matrix_derivation(rng, alg, n, rational_prob=0.3)
        x = random_matrix(rng, alg, n, rational_prob=0.3)
        assert apply_matrix_derivation(D, x) == _naive(D, x)


def test_matrix_leibniz_rule():
    rng = random.Random(5)
    alg = make_algebra(2)
    for _ in range(100):
        n = rng.choice((2, 3))
        D = random_matrix_derivation(rng, alg, n)
        x, y = random_matrix(rng, alg, n), random_matrix(rng, alg, n)
        assert D(x * y) == D(x) * y + x * D(y)


def test_normalization_absorbs_central_shifts(alg2, rng):
    a = random_matrix(rng, alg2, 3)
    z = random_element(rng, alg2)
    D = MatrixDerivation(a + central(z, 3), zero_derivation(alg2))
    assert D.inner.entry(1, 1).is_zero
    assert D == MatrixDerivation(a, zero_derivation(alg2))


def test_decompose_round_trip_and_zero():
    rng = random.Random(6)
    for _ in range(30):
        alg = make_algebra(rng.choice((1, 2)))
        n = rng.choice((2, 3))
        D = random_matrix_derivation(rng, alg, n)
        assert decompose(evaluation_table(D, alg, n)) == D
    alg = make_algebra(1)
    zero = MatrixDerivation.zero(alg, 2)
    back = decompose(evaluation_table(zero, alg, 2))
    assert back.inner.is_zero and back.center.is_zero


def test_decompose_rejects_non_derivations(alg1):
    def square(x):
        return x * x

    with pytest.raises(DecompositionError):
        decompose(evaluation_table(square, alg1, 2))


def test_mask_matrix(alg2, rng):
    x = random_matrix(rng, alg2, 2)
    assert mask_matrix(alg2.space.top, x) == x
    assert mask_matrix(alg2.space.bottom, x).is_zero


def test_size_one_and_size_mismatch(alg1, rng):
    x, y = random_matrix(rng, alg1, 1), random_matrix(rng, alg1, 1)
    assert (x * y).entry(1, 1) == x.entry(1, 1) * y.entry(1, 1)
    with pytest.raises(StructureError):
        x + random_matrix(rng, alg1, 2)


@pytest.mark.parametrize("n", [1, 2, 3, 4])
def test_commutants_of_the_probes(n):
    rng = random.Random(n)
    alg = make_algebra(2)
    d, q = diagonal_probe(alg, n), shift_probe(alg, n)
    assert all(is_diagonal(b) for b in commutant_basis(d)) and len(commutant_basis(d)) == n
    assert all(is_upper_toeplitz(b) for b in commutant_basis(q)) and len(commutant_basis(q)) == n
    for _ in range(5):
        x = random_matrix(rng, alg, n)
        assert commutator(d, x).is_zero == is_diagonal(x)
        if commutator(q, x).is_zero:
            assert is_upper_toeplitz(x)


def test_abelian_part_acts_entrywise(alg2, rng):
    delta = random_derivation(rng, alg2)
    x = random_matrix(rng, alg2, 2)
    D = MatrixDerivation(zero_matrix(alg2, 2), delta)
    assert D(x) == MatrixElement(alg2, [[apply(delta, v) for v in r] for r in x.rows])
    assert isinstance(D.center, AbelianDerivation)
