import random

import pytest
import sympy
from hypothesis import HealthCheck, settings

from regulus.algebra import Algebra
from regulus.lattice import AtomSpace
from regulus.scalars import GaussianRational

settings.register_profile(
    "exact", deadline=None, max_examples=100, suppress_health_check=[HealthCheck.too_slow]
)
settings.load_profile("exact")


def make_algebra(atoms=1, names=("t", "s"), weights=None):
    space = AtomSpace(weights) if weights is not None else AtomSpace.uniform(atoms)
    return Algebra(space, list(names))


@pytest.fixture
def alg1():
    return make_algebra(1)


@pytest.fixture
def alg2():
    return make_algebra(2)


@pytest.fixture
def alg3():
    return make_algebra(3, weights=(1, 2, 3))


@pytest.fixture
def rng():
    return random.Random(12345)


# -- sympy bridge: the independent oracle for exact expected values --------------


def scalar_to_sympy(c):
    if isinstance(c, GaussianRational):
        return scalar_to_sympy(c.real) + sympy.I * scalar_to_sympy(c.imag)
    return sympy.Rational(int(c.numerator), int(c.denominator))


def poly_to_sympy(p, symbols):
    total = sympy.Integer(0)
    for exps, c in p.exponent_terms().items():
        term = scalar_to_sympy(c)
        for x, e in zip(symbols, exps):
            term *= x**e
        total += term
    return total


def stalk_to_sympy(f, symbols):
    return poly_to_sympy(f.num, symbols) / poly_to_sympy(f.den, symbols)


def same(expr_a, expr_b) -> bool:
    return sympy.cancel(sympy.together(expr_a - expr_b)) == 0
