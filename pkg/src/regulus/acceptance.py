"""The acceptance suite: seven exact checks with runtime budgets.

Each ``criterion_N`` returns a :class:`CriterionResult`; :func:`run_all`
runs them in order.  ``regulus selftest`` and ``tests/test_acceptance.py``
both go through this module, so the two always agree.
"""

from __future__ import annotations

import itertools
import random
import time
from dataclasses import dataclass
from typing import Callable

from gmpy2 import mpq

from .algebra import Algebra, jacobian_independent, pinv, row_rank, support
from .derivations import apply, zero_derivation
from .lattice import AtomSpace, leq, rho
from .matrix import (
    MatrixDerivation,
    MatrixElement,
    apply_matrix_derivation,
    commutant_basis,
    commutator,
    decompose,
    diagonal,
    diagonal_probe,
    evaluation_table,
    is_diagonal,
    is_upper_toeplitz,
    matrix_unit,
    shift_probe,
)
from .sampling import (
    random_derivation,
    random_element,
    random_matrix,
    random_matrix_derivation,
)
from .twolocal import (
    DEFAULT_SEED,
    LinearizationError,
    STEPS,
    TwoLocalMap,
    additivity_check,
    build_counterexample,
    central_idempotent_check,
    certify_pair,
    from_derivation,
    linearize,
    perturb,
)

__all__ = ["CriterionResult", "CRITERIA", "run_all", "LinearizeWorkload"]


@dataclass
class CriterionResult:
    number: int
    title: str
    passed: bool
    detail: str
    seconds: float
    limit: float | None = None

    @property
    def within_budget(self) -> bool:
        return self.limit is None or self.seconds < self.limit

    @property
    def ok(self) -> bool:
        return self.passed and self.within_budget

    def line(self) -> str:
        budget = f" (limit {self.limit:.0f} s)" if self.limit is not None else ""
        status = "PASS" if self.ok else "FAIL"
        return f"[{status}] criterion {self.number}: {self.title} - {self.detail}; {self.seconds:.2f} s{budget}"

    def machine(self) -> str:
        status = "pass" if self.ok else "fail"
        return "\t".join(
            ["criterion", str(self.number), status, f"{self.seconds:.3f}", "" if self.limit is None else str(self.limit), self.detail]
        )


class _Failure(Exception):
    pass


def _require(cond: bool, message: str) -> None:
    if not cond:
        raise _Failure(message)


def _timed(number: int, title: str, limit: float | None, body: Callable[[], str]) -> CriterionResult:
    start = time.perf_counter()
    try:
        detail, passed = body(), True
    except _Failure as exc:
        detail, passed = str(exc), False
    return CriterionResult(number, title, passed, detail, time.perf_counter() - start, limit)


def _two_vars(atoms: int = 1) -> Algebra:
    return Algebra(AtomSpace.uniform(atoms), ["t", "s"])


# -- 1 -------------------------------------------------------------------------------


def criterion_1(seed: int = DEFAULT_SEED, pairs: int = 200) -> CriterionResult:
    def body():
        alg = _two_vars()
        cex = build_counterexample(alg, "t", "s")
        t, s = alg.var("t"), alg.var("s")
        one, zero = alg.one(), alg.zero()
        _require(cex(t) == one, f"value at t is {cex(t).format()}, expected 1")
        _require(cex(s) == one, f"value at s is {cex(s).format()}, expected 1")
        _require(cex(t + s) == zero, f"value at t + s is {cex(t + s).format()}, expected 0")
        rng = random.Random(seed)
        for _ in range(pairs):
            x, y = random_element(rng, alg), random_element(rng, alg)
            cert = certify_pair(cex, x, y)
            _require(cert.ok, cert.text())
        for x, y in ((t, s), (t, t + s), (t**2, s**3)):
            cert = certify_pair(cex, x, y)
            _require(cert.ok, cert.text())
        report = additivity_check(cex, seed=seed)
        _require(not report.additive, "additivity check found no counter-pair")
        _require(report.counter_pair == (t, s), f"unexpected counter-pair {report.text()}")
        return f"values 1, 1, 0; {pairs} random + 3 named pairs certified; counter-pair (t, s)"

    return _timed(1, "non-additive 2-local derivation on A", 5.0, body)


# -- 2 -------------------------------------------------------------------------------


@dataclass
class LinearizeWorkload:
    """Budget knobs for the M_n(A) round-trip; exactness is never relaxed."""

    total: int = 500
    fresh: int = 200
    sizes: tuple = (2, 3, 4)
    atom_counts: tuple = (1, 2)
    probes: int = 1
    samples: int = 1
    derivation_zero_prob: float = 0.5
    matrix_zero_prob: float = 0.6
    const_prob: float = 0.5
    rational_prob: float = 0.05
    max_terms: int = 2

    def configurations(self) -> list:
        configs = list(itertools.product(self.sizes, self.atom_counts))
        base, extra = divmod(self.total, len(configs))
        return [(n, k, base + (1 if idx < extra else 0)) for idx, (n, k) in enumerate(configs)]


def criterion_2(seed: int = DEFAULT_SEED, workload: LinearizeWorkload | None = None) -> CriterionResult:
    w = workload or LinearizeWorkload()

    def body():
        rng = random.Random(seed)
        stalk_kw = dict(const_prob=w.const_prob, rational_prob=w.rational_prob, max_terms=w.max_terms)
        done = 0
        for n, k, count in w.configurations():
            alg = _two_vars(k)
            for _ in range(count):
                D = random_matrix_derivation(rng, alg, n, zero_prob=w.derivation_zero_prob, **stalk_kw)
                try:
                    R = linearize(from_derivation(D), probes=w.probes, samples=w.samples, seed=rng.randrange(2**32))
                except LinearizationError as exc:
                    raise _Failure(f"genuine derivation rejected (n={n}, atoms={k}): {exc}") from None
                for _ in range(w.fresh):
                    x = random_matrix(rng, alg, n, zero_prob=w.matrix_zero_prob, **stalk_kw)
                    if apply_matrix_derivation(R, x) != apply_matrix_derivation(D, x):
                        raise _Failure(f"recovered derivation disagrees at {x.format()} (n={n}, atoms={k})")
                done += 1
        return f"{done} derivations recovered, each agreeing on {w.fresh} fresh matrices"

    return _timed(2, "every 2-local derivation of M_n(A) is a derivation", 60.0, body)


# -- 3 -------------------------------------------------------------------------------


def criterion_3(seed: int = DEFAULT_SEED, cases: int = 100) -> CriterionResult:
    def body():
        rng = random.Random(seed)
        for _ in range(cases):
            n, k = rng.choice((2, 3, 4)), rng.choice((1, 2))
            alg = _two_vars(k)
            D = random_matrix_derivation(rng, alg, n)
            _require(D.inner.entry(1, 1).is_zero, "constructed derivation is not normalized")
            back = decompose(evaluation_table(D, alg, n))
            _require(back == D, f"round-trip changed {D.format()} into {back.format()}")
        return f"{cases} normalized pairs reproduced exactly"

    return _timed(3, "unique decomposition D = D_a + D_delta", None, body)


# -- 4 -------------------------------------------------------------------------------


def _span_rank(vectors: list) -> int:
    return row_rank([[x for row in v for x in row] for v in vectors])


def criterion_4(seed: int = DEFAULT_SEED, samples: int = 10) -> CriterionResult:
    def body():
        rng = random.Random(seed)
        alg = _two_vars(2)
        zero = alg.zero()
        for n in (1, 2, 3, 4):
            d, q = diagonal_probe(alg, n), shift_probe(alg, n)
            basis_d = commutant_basis(d)
            _require(len(basis_d) == n, f"commutant of d has dimension {len(basis_d)} for n={n}")
            _require(all(is_diagonal(b) for b in basis_d), f"non-diagonal matrix commutes with d (n={n})")
            _require(_span_rank(basis_d) == n, f"diagonal commutant basis is degenerate (n={n})")
            basis_q = commutant_basis(q)
            _require(len(basis_q) == n, f"commutant of q has dimension {len(basis_q)} for n={n}")
            _require(all(is_upper_toeplitz(b) for b in basis_q), f"non-Toeplitz matrix commutes with q (n={n})")
            powers = [[[mpq(1) if j - i == p else mpq(0) for j in range(n)] for i in range(n)] for p in range(n)]
            _require(_span_rank(basis_q + powers) == n, f"powers of q leave the computed commutant (n={n})")
            for _ in range(samples):
                x = diagonal(alg, [random_element(rng, alg) for _ in range(n)])
                _require(commutator(d, x).is_zero, "a diagonal matrix fails to commute with d")
                coeffs = [random_element(rng, alg) for _ in range(n)]
                u = MatrixElement(
                    alg,
                    [[sum((coeffs[p] for p in range(n) if j - i == p), zero) for j in range(n)] for i in range(n)],
                )
                _require(commutator(q, u).is_zero, "an upper Toeplitz matrix fails to commute with q")
                if n > 1:
                    y = random_matrix(rng, alg, n)
                    i, j = rng.sample(range(n), 2)
                    y = y.replace(i, j, random_element(rng, alg, zero_prob=0.0))
                    _require(not commutator(d, y).is_zero, "a non-diagonal matrix commutes with d")
        return "commutants of d and q are exactly the diagonal and upper Toeplitz matrices for n <= 4"

    return _timed(4, "commutants of the probe matrices", None, body)


# -- 5 -------------------------------------------------------------------------------


def criterion_5(seed: int = DEFAULT_SEED, pairs: int = 100) -> CriterionResult:
    def body():
        alg = _two_vars()
        t, s = alg.var("t"), alg.var("s")
        _require(jacobian_independent([t, s]).is_top, "t, s judged dependent")
        _require(jacobian_independent([t, t**2]).is_bottom, "t, t^2 judged independent")
        rng = random.Random(seed)
        big = Algebra(AtomSpace.uniform(3), ["t", "s", "u"])
        for _ in range(pairs):
            a, b = random_element(rng, big), random_element(rng, big)
            _require(
                jacobian_independent([a, a + b]) == jacobian_independent([a, b]),
                f"independence of ({a.format()}, {b.format()}) changes under b -> a + b",
            )
        return f"named instances and {pairs} random pairs"

    return _timed(5, "algebraic independence by Jacobian rank", None, body)


# -- 6 -------------------------------------------------------------------------------


def _mask_corpus(alg: Algebra, rng: random.Random) -> list:
    maps = [build_counterexample(alg, "t", "s"), from_derivation(random_derivation(rng, alg))]
    out = [(m, [random_element(rng, alg) for _ in range(4)] + [alg.var("t"), alg.var("t") + alg.var("s")]) for m in maps]
    mD = from_derivation(random_matrix_derivation(rng, alg, 2))
    out.append((mD, [random_matrix(rng, alg, 2) for _ in range(3)]))
    return out


def criterion_6(seed: int = DEFAULT_SEED) -> CriterionResult:
    def body():
        rng = random.Random(seed)
        alg2 = _two_vars(2)
        alg3 = Algebra(AtomSpace((1, 2, 3)), ["t", "s"])
        for _ in range(500):
            a = random_element(rng, alg2)
            _require(a * pinv(a) * a == a, f"regularity fails at {a.format()}")
        for _ in range(500):
            delta = random_derivation(rng, alg2)
            x, y = random_element(rng, alg2), random_element(rng, alg2)
            _require(apply(delta, x * y) == apply(delta, x) * y + x * apply(delta, y), "abelian Leibniz rule fails")
            _require(leq(support(apply(delta, x)), support(x)), "a derivation enlarges a support")
        for _ in range(300):
            n = rng.choice((2, 3))
            D = random_matrix_derivation(rng, alg2, n)
            x, y = random_matrix(rng, alg2, n), random_matrix(rng, alg2, n)
            lhs = apply_matrix_derivation(D, x * y)
            rhs = apply_matrix_derivation(D, x) * y + x * apply_matrix_derivation(D, y)
            _require(lhs == rhs, "matrix Leibniz rule fails")
        for _ in range(200):
            a, b, c = (random_element(rng, alg3) for _ in range(3))
            _require((rho(a, b) == 0) == (a == b), "rho separates points incorrectly")
            _require(rho(a, b) == rho(b, a), "rho is not symmetric")
            _require(rho(a, c) <= rho(a, b) + rho(b, c), "rho violates the triangle inequality")
        checks = 0
        for k in (1, 2, 3):
            alg = _two_vars(k)
            for delta, points in _mask_corpus(alg, rng):
                for e in alg.space.all_idempotents():
                    for x in points:
                        _require(central_idempotent_check(delta, e, x), f"mask-equivariance fails for {e}")
                        checks += 1
        return f"500 + 500 + 500 + 300 + 200 samples, {checks} mask-equivariance checks"

    return _timed(6, "structural axioms", None, body)


# -- 7 -------------------------------------------------------------------------------


def broken_witness_map(alg: Algebra) -> TwoLocalMap:
    """The counterexample's values paired with a witness oracle that always answers 0."""
    cex = build_counterexample(alg, "t", "s")
    return TwoLocalMap(alg, cex.value_fn, lambda x, y: zero_derivation(alg), name="broken")


def adversarial_matrix_map(D: MatrixDerivation) -> TwoLocalMap:
    """``D`` plus a non-additive bump in entry (1, 2); the witness still claims ``D``."""
    alg, n = D.algebra, D.n
    e12 = matrix_unit(n, 1, 2, alg)

    def bump(x: MatrixElement) -> MatrixElement:
        return e12 * (x.entry(2, 1) * x.entry(2, 1))

    return perturb(from_derivation(D), bump, name="bumped")


def criterion_7(seed: int = DEFAULT_SEED) -> CriterionResult:
    def body():
        rng = random.Random(seed)
        alg = _two_vars(2)
        D = random_matrix_derivation(rng, alg, 3)
        try:
            linearize(adversarial_matrix_map(D))
        except LinearizationError as exc:
            _require(exc.step in STEPS, f"rejection names an unknown step {exc.step!r}")
            step = exc.step
        else:
            raise _Failure("linearize accepted a perturbed map")
        broken = broken_witness_map(_two_vars())
        t, s = broken.algebra.var("t"), broken.algebra.var("s")
        cert = certify_pair(broken, t, s)
        _require(not cert.ok and cert.violated in ("x", "y"), "broken witness was accepted")
        return f"perturbed map rejected at step {step!r}; broken witness rejected at {cert.violated}"

    return _timed(7, "negative paths are rejected", None, body)


CRITERIA = (criterion_1, criterion_2, criterion_3, criterion_4, criterion_5, criterion_6, criterion_7)


def run_all(seed: int = DEFAULT_SEED) -> list:
    return [c(seed) for c in CRITERIA]

