import random

import pytest
import sympy

from regulus.algebra import membership_idempotent, support
from regulus.derivations import (
    AbelianDerivation,
    ExtensionError,
    apply,
    derivation_with_values,
    extend_with_value,
    linear_combine,
    partial,
    zero_derivation,
)
from regulus.lattice import leq
from regulus.sampling import random_derivation, random_element, random_finitely_valued, random_stalk

from conftest import make_algebra, same, stalk_to_sympy

T, S = sympy.symbols("t s")


def sym(x, atom=0):
    return stalk_to_sympy(x.stalks[atom], (T, S))


def test_application_examples(alg1):
    t, s = alg1.var("t"), alg1.var("s")
    dt, ds = partial(alg1, "t"), partial(alg1, "s")
    assert apply(dt, t**2) == 2 * t
    assert apply(dt + ds, alg1.one()).is_zero
    assert apply(zero_derivation(alg1), t * s + 3).is_zero
    assert apply(dt.scale(2), t) == alg1.const(2)


def test_quotient_and_product_rule_values_match_sympy(alg1):
    t, s = alg1.var("t"), alg1.var("s")
    t_dt = AbelianDerivation.from_elements(alg1, {"t": t})
    got = apply(t_dt, 1 / t)
    assert same(sym(got), T * sympy.diff(1 / T, T))
    assert got == -1 / t
    both = partial(alg1, "t") + partial(alg1, "s")
    got = apply(both, t * s)
    assert same(sym(got), sympy.diff(T * S, T) + sympy.diff(T * S, S))
    assert got == t + s


def test_extend_with_value_examples(alg1):
    t, s = alg1.var("t"), alg1.var("s")
    dt = partial(alg1, "t")
    assert extend_with_value({"t"}, dt, s, alg1.zero()) == dt
    assert extend_with_value(set(), zero_derivation(alg1), t, alg1.one()) == dt


def test_extension_coefficient_matches_sympy(alg1):
    rng = random.Random(5)
    dt = partial(alg1, "t")
    for _ in range(20):
        f = alg1.broadcast(random_stalk(rng, 2, zero_prob=0.0, const_prob=0.0, rational_prob=0.3))
        if not membership_idempotent(f, ["t"]).is_bottom:
            continue
        ext = extend_with_value({"t"}, dt, f, alg1.zero())
        F = sym(f)
        assert same(sym(ext.coefficient("s")), -sympy.diff(F, T) / sympy.diff(F, S))
        assert apply(ext, f).is_zero


def test_extension_rejects_elements_of_the_base_subalgebra(alg1):
    t = alg1.var("t")
    assert extend_with_value({"t"}, partial(alg1, "t"), t**2, alg1.zero()) == partial(alg1, "t")
    with pytest.raises(ExtensionError):
        extend_with_value({"t"}, partial(alg1, "t"), t**2, alg1.zero(), on=alg1.space.top)


def test_extension_picks_the_alphabetically_first_free_variable():
    alg = make_algebra(1, names=("z", "b", "a"))
    y = alg.var("z") + alg.var("b") + alg.var("a")
    ext = extend_with_value({"z"}, zero_derivation(alg), y, alg.one())
    assert ext.coefficient("a") == alg.one()
    assert ext.coefficient("b").is_zero


def test_derivation_with_values_examples(alg1):
    t, s = alg1.var("t"), alg1.var("s")
    D = derivation_with_values(alg1, [("t", alg1.one()), ("s", alg1.one())])
    assert D == partial(alg1, "t") + partial(alg1, "s")
    assert derivation_with_values(alg1, []) == zero_derivation(alg1)
    assert apply(derivation_with_values(alg1, [("t", s)]), t**2) == 2 * t * s


def test_linear_combine(alg2):
    dt, ds = partial(alg2, "t"), partial(alg2, "s")
    assert linear_combine([2, -1], [dt, ds]) == dt.scale(2) - ds
    with pytest.raises(ValueError):
        linear_combine([], [])


def test_leibniz_support_shrink_and_constants():
    rng = random.Random(21)
    alg = make_algebra(2)
    for _ in range(500):
        delta = random_derivation(rng, alg)
        x, y = random_element(rng, alg), random_element(rng, alg)
        assert apply(delta, x * y) == apply(delta, x) * y + x * apply(delta, y)
        assert apply(delta, x + y) == apply(delta, x) + apply(delta, y)
        assert leq(support(apply(delta, x)), support(x))
    for _ in range(100):
        assert apply(random_derivation(rng, alg), random_finitely_valued(rng, alg)).is_zero


def _gens_only(rng, alg):
    # a random rational function of t alone
    t = alg.var("t")
    num = sum((alg.const(rng.randint(-3, 3)) * t**k for k in range(3)), alg.zero())
    return num / (t + rng.randint(1, 4))


def test_extension_keeps_the_base_and_hits_the_prescribed_value():
    rng = random.Random(8)
    alg = make_algebra(2)
    for _ in range(20):
        base = random_derivation(rng, alg)
        y = alg.var("s") * random_element(rng, alg, zero_prob=0.0, const_prob=1.0) + alg.var("t")
        c = random_element(rng, alg)
        ext = extend_with_value({"t"}, base, y, c)
        assert apply(ext, y) == c
        for _ in range(50):
            x = _gens_only(rng, alg)
            assert apply(ext, x) == apply(base, x)


def test_derivations_agreeing_on_the_generators_agree_on_the_subalgebra():
    rng = random.Random(9)
    alg = make_algebra(2)
    for _ in range(100):
        value = random_element(rng, alg)
        d1 = derivation_with_values(alg, [("t", value)])
        d2 = AbelianDerivation.from_elements(alg, {"t": value, "s": random_element(rng, alg)})
        x = _gens_only(rng, alg)
        assert apply(d1, x) == apply(d2, x)
