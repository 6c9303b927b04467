"""2-local derivations carried together with their witnesses.

A map is 2-local when every pair of points admits one genuine derivation
agreeing with the map at both.  That is an existence statement, so a
:class:`TwoLocalMap` carries a ``witness_fn`` producing the derivation for
a pair; :func:`certify_pair` re-checks both equalities independently.

Two constructions live here:

* :func:`build_counterexample`, an abelian 2-local map that is not additive;
* :func:`linearize`, which turns a certified 2-local map on M_n(A), n >= 2,
  into an explicit derivation ``D_a + D_delta``, verifying every step and
  reporting the first step that fails.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field
from typing import Any, Callable

from .algebra import Algebra, RegularElement, mask, membership_idempotent, support
from .derivations import (
    AbelianDerivation,
    apply,
    derivation_with_values,
    extend_with_value,
    zero_derivation,
)
from .lattice import Idempotent
from .matrix import (
    MatrixDerivation,
    MatrixElement,
    apply_matrix_derivation,
    central,
    diagonal,
    diagonal_probe,
    is_diagonal,
    is_upper_toeplitz,
    mask_matrix,
    matrix_unit,
    shift_probe,
)
from .sampling import random_element, random_matrix

__all__ = [
    "TwoLocalMap",
    "PairCertificate",
    "EvaluationCache",
    "AdditivityReport",
    "StepRecord",
    "LinearizationReport",
    "LinearizationError",
    "from_derivation",
    "certify_pair",
    "build_counterexample",
    "additivity_check",
    "linearize",
    "linearize_report",
    "central_idempotent_check",
    "perturb",
    "DEFAULT_SEED",
    "STEPS",
]

DEFAULT_SEED = 20240611


def _format(v) -> str:
    return v.format() if hasattr(v, "format") else str(v)


@dataclass(frozen=True)
class TwoLocalMap:
    """A total map plus a witness oracle.

    ``n`` is ``None`` for maps on the abelian algebra and the matrix size
    for maps on M_n(A).
    """

    algebra: Algebra
    value_fn: Callable[[Any], Any]
    witness_fn: Callable[[Any, Any], Any]
    n: int | None = None
    name: str = ""
    distinguished: tuple | None = None

    @property
    def carrier(self) -> str:
        return "abelian" if self.n is None else "matrix"

    def __call__(self, x):
        return self.value_fn(x)

    def evaluate_witness(self, D, x):
        if self.n is None:
            return apply(D, x)
        return apply_matrix_derivation(D, x)

    def mask(self, e: Idempotent, x):
        return mask(e, x) if self.n is None else mask_matrix(e, x)

    def format(self) -> str:
        kind = "A" if self.n is None else f"M_{self.n}(A)"
        return f"<2-local map {self.name or '?'} on {kind}>"


def from_derivation(D, name: str = "") -> TwoLocalMap:
    """Any derivation is 2-local, with itself as the witness for every pair."""
    if isinstance(D, MatrixDerivation):
        return TwoLocalMap(D.algebra, D, lambda x, y: D, n=D.n, name=name or "derivation")
    if isinstance(D, AbelianDerivation):
        return TwoLocalMap(D.algebra, D, lambda x, y: D, name=name or "derivation")
    raise TypeError(f"expected a derivation, got {type(D).__name__}")


# -- certification ---------------------------------------------------------------


@dataclass
class PairCertificate:
    x: Any
    y: Any
    witness: Any = None
    violated: str | None = None  # "x", "y" or "witness"
    message: str = ""

    @property
    def ok(self) -> bool:
        return self.violated is None

    def __bool__(self):
        return self.ok

    def text(self) -> str:
        if self.ok:
            return f"certified ({_format(self.x)}, {_format(self.y)}) with witness {_format(self.witness)}"
        return f"FAILED ({_format(self.x)}, {_format(self.y)}): {self.message}"


class EvaluationCache:
    """Memoized evaluations of pure maps, keyed by (map identity, point).

    Map values and witness values share one table: value_fn and witness
    derivations are pure, so evaluating the same callable twice at the same
    point cannot give a different answer.  The cache keeps every callable
    alive so identities stay unique.
    """

    def __init__(self):
        self.table: dict = {}
        self._alive: dict = {}

    def _get(self, fn, x, compute):
        self._alive[id(fn)] = fn
        key = (id(fn), x)
        v = self.table.get(key)
        if v is None:
            v = self.table[key] = compute()
        return v

    def value(self, delta: TwoLocalMap, x):
        return self._get(delta.value_fn, x, lambda: delta.value_fn(x))

    def witness_value(self, delta: TwoLocalMap, W, x):
        return self._get(W, x, lambda: delta.evaluate_witness(W, x))


def certify_pair(delta: TwoLocalMap, x, y, cache: EvaluationCache | None = None) -> PairCertificate:
    """Ask for a witness at (x, y) and check ``delta(x) == W(x)`` and ``delta(y) == W(y)``."""
    try:
        witness = delta.witness_fn(x, y)
    except Exception as exc:  # a witness oracle may refuse; report it like a violation
        return PairCertificate(x, y, None, "witness", f"witness oracle raised {type(exc).__name__}: {exc}")
    for label, p in (("x", x), ("y", y)):
        if cache is None:
            target, got = delta.value_fn(p), delta.evaluate_witness(witness, p)
        else:
            target, got = cache.value(delta, p), cache.witness_value(delta, witness, p)
        if got != target:
            return PairCertificate(
                x, y, witness, label, f"witness disagrees with the map at {label} = {_format(p)}"
            )
    return PairCertificate(x, y, witness)


# -- the abelian counterexample ---------------------------------------------------


class _Counterexample:
    """``x -> (e_a(x) v e_b(x)) * D(x)`` with D(a) = D(b) = 1."""

    def __init__(self, algebra: Algebra, a_var: str, b_var: str):
        if a_var == b_var:
            raise ValueError("the counterexample needs two distinct variables")
        self.algebra = algebra
        self.a_var, self.b_var = a_var, b_var
        one = algebra.one()
        self.D = derivation_with_values(algebra, [(a_var, one), (b_var, one)])

    def cut(self, x: RegularElement) -> tuple:
        ea = membership_idempotent(x, {self.a_var})
        eb = membership_idempotent(x, {self.b_var})
        return ea, eb

    def value(self, x: RegularElement) -> RegularElement:
        ea, eb = self.cut(x)
        return mask(ea | eb, apply(self.D, x))

    def _one_sided(self, x, y, region: Idempotent) -> AbelianDerivation:
        # on `region`, x lies in A_a or A_b while y lies in neither:
        # match D on x's subalgebra and send y to 0
        ea, _ = self.cut(x)
        on_a = region & ea
        on_b = region & ~ea
        zero = self.algebra.zero()
        out = zero_derivation(self.algebra)
        if not on_a.is_bottom:
            out = out + extend_with_value({self.a_var}, self.D, y, zero, on=on_a).mask(on_a)
        if not on_b.is_bottom:
            out = out + extend_with_value({self.b_var}, self.D, y, zero, on=on_b).mask(on_b)
        return out

    def witness(self, x: RegularElement, y: RegularElement) -> AbelianDerivation:
        ea_x, eb_x = self.cut(x)
        ea_y, eb_y = self.cut(y)
        e1, e2 = ea_x | eb_x, ea_y | eb_y
        both = e1 & e2
        only_x = e1 & ~e2
        only_y = ~e1 & e2
        # atoms where neither point lies in A_a or A_b get the zero derivation
        W = self.D.mask(both)
        if not only_x.is_bottom:
            W = W + self._one_sided(x, y, only_x)
        if not only_y.is_bottom:
            W = W + self._one_sided(y, x, only_y)
        return W


def build_counterexample(algebra: Algebra, a_var: str, b_var: str, name: str = "cex") -> TwoLocalMap:
    """A 2-local derivation of A that is not a derivation.

    ``a_var`` and ``b_var`` play two algebraically independent elements of
    full support.
    """
    algebra.var_index(a_var)
    algebra.var_index(b_var)
    cex = _Counterexample(algebra, a_var, b_var)
    return TwoLocalMap(
        algebra, cex.value, cex.witness, name=name, distinguished=(algebra.var(a_var), algebra.var(b_var))
    )


# -- additivity ---------------------------------------------------------------------


@dataclass
class AdditivityReport:
    additive: bool
    checked: int
    counter_pair: tuple | None = None

    def text(self) -> str:
        if self.additive:
            return f"additive on all {self.checked} sampled pairs"
        x, y = self.counter_pair
        return f"not additive: counter-pair ({_format(x)}, {_format(y)}) after {self.checked} pairs"


def _sample_point(delta: TwoLocalMap, rng: random.Random):
    if delta.n is None:
        return random_element(rng, delta.algebra)
    return random_matrix(rng, delta.algebra, delta.n, zero_prob=0.5)


def additivity_check(delta: TwoLocalMap, samples: int = 50, seed: int = DEFAULT_SEED) -> AdditivityReport:
    """Test ``delta(x + y) == delta(x) + delta(y)``, distinguished pair first."""
    pairs = []
    if delta.distinguished is not None:
        pairs.append(delta.distinguished)
    elif delta.n is None and delta.algebra.nvars >= 2:
        v = delta.algebra.variables
        pairs.append((delta.algebra.var(v[0]), delta.algebra.var(v[1])))
    rng = random.Random(seed)
    checked = 0
    for k in range(len(pairs) + samples):
        x, y = pairs[k] if k < len(pairs) else (_sample_point(delta, rng), _sample_point(delta, rng))
        checked += 1
        if delta(x + y) != delta(x) + delta(y):
            return AdditivityReport(False, checked, (x, y))
    return AdditivityReport(True, checked)


def central_idempotent_check(delta: TwoLocalMap, e: Idempotent, x) -> bool:
    """Whether ``delta(e x) == e delta(x)`` for a central idempotent e."""
    return delta(delta.mask(e, x)) == delta.mask(e, delta(x))


def perturb(delta: TwoLocalMap, bump: Callable[[Any], Any], name: str = "") -> TwoLocalMap:
    """Add ``bump`` to the map's values but keep the old witness oracle.

    Used to build adversarial inputs: the witnesses no longer match.
    """
    return TwoLocalMap(
        delta.algebra,
        lambda x: delta.value_fn(x) + bump(x),
        delta.witness_fn,
        n=delta.n,
        name=name or f"{delta.name}+bump",
    )


# -- linearization on M_n(A) ---------------------------------------------------------


STEPS = (
    "mask-equivariance",
    "reduce-at-probes",
    "matrix-units",
    "entrywise-derivations",
    "center-restriction",
    "diagonal-vanishing",
    "diagonal-entries",
    "unit-entry-probes",
    "off-diagonal-entries",
    "residual-zero",
)


class LinearizationError(Exception):
    """The input failed a step of the linearization; it is not a certified 2-local derivation."""

    def __init__(self, step: str, message: str, probe: Any = None):
        detail = f"step {step!r} failed: {message}"
        if probe is not None:
            detail += f" [probe {_format(probe)}]"
        super().__init__(detail)
        self.step = step
        self.probe = probe


@dataclass
class StepRecord:
    step: str
    passed: bool
    detail: str = ""


@dataclass
class LinearizationReport:
    steps: list = field(default_factory=list)
    result: MatrixDerivation | None = None
    error: LinearizationError | None = None

    @property
    def ok(self) -> bool:
        return self.error is None

    def lines(self) -> list:
        out = [f"{'PASS' if s.passed else 'FAIL'} {s.step}: {s.detail}" for s in self.steps]
        if self.result is not None:
            out.append(f"result {self.result.format()}")
        return out


class _Linearizer:
    def __init__(self, delta: TwoLocalMap, probes: int, samples: int, seed: int):
        if delta.n is None:
            raise ValueError("linearize needs a map on M_n(A)")
        if delta.n < 2:
            raise ValueError("linearize needs n >= 2")
        self.delta = delta
        self.algebra = delta.algebra
        self.n = delta.n
        self.rng = random.Random(seed)
        self.cache = EvaluationCache()
        self.report = LinearizationReport()
        self.probes = [random_matrix(self.rng, self.algebra, self.n, zero_prob=0.25) for _ in range(probes)]
        self.samples = samples
        self.step = STEPS[0]

    # helpers
    def value(self, x: MatrixElement) -> MatrixElement:
        return self.cache.value(self.delta, x)

    def fail(self, message, probe=None):
        raise LinearizationError(self.step, message, probe)

    def witness(self, x, y) -> MatrixDerivation:
        cert = certify_pair(self.delta, x, y, self.cache)
        if not cert.ok:
            self.fail(cert.message, x if cert.violated != "y" else y)
        if not isinstance(cert.witness, MatrixDerivation):
            self.fail("witness is not a derivation of M_n(A)", x)
        return cert.witness

    def unit(self, i, j):
        return matrix_unit(self.n, i, j, self.algebra)

    def passed(self, detail):
        self.report.steps.append(StepRecord(self.step, True, detail))

    # pipeline
    def run(self) -> MatrixDerivation:
        alg, n = self.algebra, self.n
        zero_m = central(alg.zero(), n)

        self.step = "mask-equivariance"
        for x in self.probes:
            for k in range(1, alg.atom_count + 1):
                e = alg.space.atom(k)
                if self.delta(mask_matrix(e, x)) != mask_matrix(e, self.value(x)):
                    self.fail(f"map does not commute with the central idempotent {e}", x)
        self.passed(f"{len(self.probes)} probes x {alg.atom_count} atoms")

        self.step = "reduce-at-probes"
        d, q = diagonal_probe(alg, n), shift_probe(alg, n)
        base = self.witness(d, q)
        reduced = lambda x: self.value(x) - self.cache.witness_value(self.delta, base, x)  # noqa: E731
        if not reduced(d).is_zero or not reduced(q).is_zero:
            self.fail("subtracting the witness at (d, q) does not annihilate d and q")
        self.passed(f"base witness {base.format()}")

        self.step = "matrix-units"
        for i in range(1, n + 1):
            for j in range(1, n + 1):
                e = self.unit(i, j)
                h = self.witness(e, d) - base
                if not is_diagonal(h.inner):
                    self.fail(f"reduced witness at (e_{i}{j}, d) has a non-diagonal inner part", e)
                u = self.witness(e, q) - base
                if not is_upper_toeplitz(u.inner):
                    self.fail(f"reduced witness at (e_{i}{j}, q) is not upper-triangular Toeplitz", e)
                if not reduced(e).is_zero:
                    self.fail(f"reduced map does not vanish on e_{i}{j}", e)
        self.passed(f"reduced map vanishes on all {n * n} matrix units")

        self.step = "entrywise-derivations"
        for x in self.probes:
            rx = reduced(x)
            for i in range(1, n + 1):
                for j in range(1, n + 1):
                    W = self.witness(x, self.unit(j, i)) - base
                    if rx.entry(i, j) != apply(W.center, x.entry(i, j)):
                        self.fail(f"entry ({i},{j}) of the reduced value is not a derivation of x_{i}{j}", x)
        self.passed(f"{len(self.probes)} probes sandwiched entrywise")

        self.step = "center-restriction"
        coefficients = {}
        for v in alg.variables:
            value = reduced(central(alg.var(v), n))
            c = value.entry(1, 1)
            if value != central(c, n):
                self.fail(f"reduced value on {v}*1 is not central", central(alg.var(v), n))
            coefficients[v] = c
        delta = AbelianDerivation.from_elements(alg, coefficients)
        for _ in range(self.samples):
            f, g = random_element(self.rng, alg), random_element(self.rng, alg)
            x, y, z = central(f, n), central(g, n), central(f + g, n)
            w = diagonal(alg, [f] + [g] * (n - 1))
            wits = [self.witness(p, w) - base for p in (x, y, z)]
            rw = reduced(w)
            for W in wits:
                if rw.entry(1, 1) != apply(W.center, f) or rw.entry(2, 2) != apply(W.center, g):
                    self.fail("witnesses at (., w) disagree on the diagonal of w", w)
            if reduced(z) != reduced(x) + reduced(y):
                self.fail("restriction to the center is not additive", z)
            if reduced(x) != central(apply(delta, f), n):
                self.fail("restriction to the center differs from the extracted derivation", x)
        self.passed(f"center derivation {delta.format()}")

        total = MatrixDerivation(base.inner, base.center + delta)
        residual = lambda x: self.value(x) - self.cache.witness_value(self.delta, total, x)  # noqa: E731

        self.step = "diagonal-vanishing"
        for _ in range(self.samples):
            x = diagonal(alg, [random_element(self.rng, alg) for _ in range(n)])
            if not residual(x).is_zero:
                self.fail("residual does not vanish on a diagonal matrix", x)
        self.passed(f"{self.samples} diagonal samples")

        self.step = "diagonal-entries"
        one = alg.one()
        for x in self.probes:
            for k in range(1, n + 1):
                f1 = x.entry(k, k)
                lift = f1 + one - alg.idempotent_element(support(f1))
                fs = [f1] + [lift.scale(i) for i in range(2, n + 1)]
                for i in range(n):
                    for j in range(i + 1, n):
                        if not support(fs[i] - fs[j]).is_top:
                            self.fail("diagonal probe entries do not have full-support differences", x)
                y = diagonal(alg, fs)
                if not residual(y).is_zero:
                    self.fail("residual does not vanish on the full-support diagonal probe", y)
                W = self.witness(x, y) - total
                if not is_diagonal(W.inner):
                    self.fail("witness against the diagonal probe has a non-diagonal inner part", x)
                if not residual(x).entry(k, k).is_zero:
                    self.fail(f"residual diagonal entry ({k},{k}) is nonzero", x)
        self.passed(f"{len(self.probes)} probes x {n} diagonal entries")

        self.step = "unit-entry-probes"
        for x in self.probes:
            for i in range(n):
                for j in range(n):
                    if i == j:
                        continue
                    xp = x.replace(j, i, one)
                    r = residual(xp)
                    if not r.rows[i][j].is_zero or not r.rows[j][i].is_zero:
                        self.fail(f"residual entry ({i + 1},{j + 1}) is nonzero although x_{j + 1}{i + 1} = 1", xp)
        self.passed(f"{len(self.probes)} probes x {n * (n - 1)} positions")

        self.step = "off-diagonal-entries"
        for x in self.probes:
            rx = residual(x)
            for i in range(n):
                for j in range(n):
                    if i == j:
                        continue
                    y = x.replace(j, i, one)
                    W = self.witness(x, y) - total
                    wx, wy = apply_matrix_derivation(W, x), apply_matrix_derivation(W, y)
                    if wx.rows[i][j] != wy.rows[i][j]:
                        self.fail(f"witness entry ({i + 1},{j + 1}) depends on x_{j + 1}{i + 1}", x)
                    if rx.rows[i][j] != residual(y).rows[i][j] or not rx.rows[i][j].is_zero:
                        self.fail(f"residual entry ({i + 1},{j + 1}) is nonzero", x)
        self.passed(f"{len(self.probes)} probes x {n * (n - 1)} positions")

        self.step = "residual-zero"
        fresh = [random_matrix(self.rng, alg, n, zero_prob=0.25) for _ in range(self.samples)]
        for x in self.probes + fresh:
            if residual(x) != zero_m:
                self.fail("residual is nonzero", x)
        self.passed(f"{len(self.probes) + len(fresh)} matrices")

        self.report.result = total
        return total


def linearize_report(
    delta: TwoLocalMap, probes: int = 2, samples: int = 2, seed: int = DEFAULT_SEED
) -> LinearizationReport:
    """Run the linearizer and return the per-step report (never raises on step failures)."""
    lin = _Linearizer(delta, probes, samples, seed)
    try:
        lin.run()
    except LinearizationError as exc:
        lin.report.error = exc
        lin.report.steps.append(StepRecord(exc.step, False, str(exc)))
    return lin.report


def linearize(delta: TwoLocalMap, probes: int = 2, samples: int = 2, seed: int = DEFAULT_SEED) -> MatrixDerivation:
    """Convert a certified 2-local derivation of M_n(A), n >= 2, into ``D_a + D_delta``.

    Raises :class:`LinearizationError` naming the first step that fails.
    """
    report = linearize_report(delta, probes, samples, seed)
    if report.error is not None:
        raise report.error
    return report.result


