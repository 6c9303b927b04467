"""Matrices over the regular algebra and their derivations.

Every derivation of M_n(A) is ``x -> [a, x] + delta(x)`` where ``delta`` acts
entrywise.  :class:`MatrixDerivation` stores the pair ``(a, delta)`` with
``a[0][0] == 0`` as the canonical choice of ``a`` (adding a central element
to ``a`` does not change the commutator).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

from gmpy2 import mpq

from .algebra import Algebra, RegularElement, mask
from .derivations import AbelianDerivation, _stalk_apply, zero_derivation
from .lattice import Idempotent, StructureError
from .ratfunc import RationalFunction

__all__ = [
    "MatrixElement",
    "MatrixDerivation",
    "DecompositionError",
    "EvaluationTable",
    "matrix_unit",
    "identity",
    "zero_matrix",
    "central",
    "diagonal",
    "commutator",
    "apply_matrix_derivation",
    "evaluation_table",
    "decompose",
    "mask_matrix",
    "diagonal_probe",
    "shift_probe",
    "commutant_basis",
    "is_diagonal",
    "is_upper_toeplitz",
]


class MatrixElement:
    __slots__ = ("algebra", "rows")

    def __init__(self, algebra: Algebra, rows):
        self.algebra = algebra
        self.rows = rows = tuple(tuple(r) for r in rows)
        n = len(rows)
        if n == 0:
            raise ValueError("matrix entries must form a nonempty square array")
        for r in rows:
            if len(r) != n:
                raise ValueError("matrix entries must form a nonempty square array")

    @property
    def n(self) -> int:
        return len(self.rows)

    @property
    def space(self):
        return self.algebra.space

    def __getitem__(self, ij) -> RegularElement:
        i, j = ij
        return self.rows[i][j]

    def entry(self, i: int, j: int) -> RegularElement:
        """1-based entry access, matching the e_ij notation."""
        return self.rows[i - 1][j - 1]

    @property
    def is_zero(self) -> bool:
        return all(x.is_zero for r in self.rows for x in r)

    def __eq__(self, other):
        if isinstance(other, MatrixElement):
            return self.rows == other.rows
        return NotImplemented

    def __hash__(self):
        return hash(self.rows)

    def _check(self, other):
        if not isinstance(other, MatrixElement):
            raise TypeError(f"expected a MatrixElement, got {type(other).__name__}")
        if other.algebra is not self.algebra:
            self.algebra.check_same(other.algebra)
        if other.n != self.n:
            raise StructureError(f"matrix sizes differ: {self.n} vs {other.n}")

    def __add__(self, other):
        self._check(other)
        return MatrixElement(self.algebra, [[a + b for a, b in zip(r1, r2)] for r1, r2 in zip(self.rows, other.rows)])

    def __sub__(self, other):
        self._check(other)
        return MatrixElement(self.algebra, [[a - b for a, b in zip(r1, r2)] for r1, r2 in zip(self.rows, other.rows)])

    def __neg__(self):
        return MatrixElement(self.algebra, [[-a for a in r] for r in self.rows])

    def __mul__(self, other):
        if isinstance(other, RegularElement):
            return MatrixElement(self.algebra, [[a * other for a in r] for r in self.rows])
        self._check(other)
        return MatrixElement(self.algebra, _matmul(self.rows, other.rows, self.algebra))

    def __rmul__(self, other):
        if isinstance(other, RegularElement):
            return MatrixElement(self.algebra, [[other * a for a in r] for r in self.rows])
        return NotImplemented

    def scale(self, c) -> "MatrixElement":
        return MatrixElement(self.algebra, [[a.scale(c) for a in r] for r in self.rows])

    def replace(self, i: int, j: int, value: RegularElement) -> "MatrixElement":
        """Copy with the 0-based entry (i, j) replaced."""
        rows = [list(r) for r in self.rows]
        rows[i][j] = value
        return MatrixElement(self.algebra, rows)

    def format(self) -> str:
        return "mat[" + ", ".join("[" + ", ".join(x.format() for x in r) + "]" for r in self.rows) + "]"

    __str__ = format

    def __repr__(self):
        return f"MatrixElement({self.format()})"


def _nonzero_rows(b):
    return [[(j, v) for j, v in enumerate(row) if not v.is_zero] for row in b]


def _accumulate(acc, a, b_nz, sign):
    # acc[i][j] += sign * sum_k a[i][k] * b[k][j], skipping zeros
    for i, row in enumerate(a):
        out = acc[i]
        for k, aik in enumerate(row):
            bk = b_nz[k]
            if not bk or aik.is_zero:
                continue
            for j, bkj in bk:
                p = aik * bkj
                cur = out[j]
                if sign > 0:
                    out[j] = p if cur is None else cur + p
                else:
                    out[j] = -p if cur is None else cur - p


def _finish(acc, algebra):
    zero = algebra.zero()
    return [[zero if v is None else v for v in row] for row in acc]


def _matmul(a, b, algebra):
    n = len(a)
    acc = [[None] * n for _ in range(n)]
    _accumulate(acc, a, _nonzero_rows(b), 1)
    return _finish(acc, algebra)


def matrix_unit(n: int, i: int, j: int, algebra: Algebra) -> MatrixElement:
    """The matrix unit e_ij (1-based indices)."""
    if not (1 <= i <= n and 1 <= j <= n):
        raise IndexError(f"matrix unit ({i}, {j}) outside 1..{n}")
    zero, one = algebra.zero(), algebra.one()
    return MatrixElement(algebra, [[one if (r, c) == (i - 1, j - 1) else zero for c in range(n)] for r in range(n)])


def diagonal(algebra: Algebra, entries) -> MatrixElement:
    entries = list(entries)
    n = len(entries)
    zero = algebra.zero()
    return MatrixElement(algebra, [[entries[r] if r == c else zero for c in range(n)] for r in range(n)])


def central(z: RegularElement, n: int) -> MatrixElement:
    """The central matrix z * 1."""
    return diagonal(z.algebra, [z] * n)


def identity(algebra: Algebra, n: int) -> MatrixElement:
    return central(algebra.one(), n)


def zero_matrix(algebra: Algebra, n: int) -> MatrixElement:
    return central(algebra.zero(), n)


def commutator(a: MatrixElement, x: MatrixElement) -> MatrixElement:
    """``a*x - x*a``."""
    a._check(x)
    return MatrixElement(a.algebra, _finish(_commutator_acc(a.rows, x.rows), a.algebra))


def _commutator_acc(a, x):
    n = len(a)
    acc = [[None] * n for _ in range(n)]
    _accumulate(acc, a, _nonzero_rows(x), 1)
    _accumulate(acc, x, _nonzero_rows(a), -1)
    return acc


def mask_matrix(e: Idempotent, x: MatrixElement) -> MatrixElement:
    """Entrywise product with the central idempotent e."""
    return MatrixElement(x.algebra, [[mask(e, a) for a in r] for r in x.rows])


# -- derivations -------------------------------------------------------------


class MatrixDerivation:
    """The derivation ``x -> [inner, x] + center(x)`` (center applied entrywise)."""

    __slots__ = ("inner", "center", "_polynomial")

    def __init__(self, inner: MatrixElement, center: AbelianDerivation, normalize: bool = True):
        inner.algebra.check_same(center.algebra)
        if normalize:
            a11 = inner.rows[0][0]
            if not a11.is_zero:
                inner = inner - central(a11, inner.n)
        self.inner = inner
        self.center = center
        self._polynomial = None

    def polynomial_atoms(self) -> tuple:
        """Per atom: whether every stalk of ``inner`` and every coefficient is a polynomial."""
        if self._polynomial is None:
            flags = []
            for k, row in enumerate(self.center.coeffs):
                ok = all(c.den.is_one for c in row)
                ok = ok and all(e.stalks[k].den.is_one for r in self.inner.rows for e in r)
                flags.append(ok)
            self._polynomial = tuple(flags)
        return self._polynomial

    @classmethod
    def zero(cls, algebra: Algebra, n: int) -> "MatrixDerivation":
        return cls(zero_matrix(algebra, n), zero_derivation(algebra))

    @property
    def algebra(self) -> Algebra:
        return self.inner.algebra

    @property
    def n(self) -> int:
        return self.inner.n

    @property
    def is_zero(self) -> bool:
        return self.inner.is_zero and self.center.is_zero

    def __call__(self, x: MatrixElement) -> MatrixElement:
        return apply_matrix_derivation(self, x)

    def __eq__(self, other):
        if isinstance(other, MatrixDerivation):
            return self.inner == other.inner and self.center == other.center
        return NotImplemented

    def __hash__(self):
        return hash((self.inner, self.center))

    def __add__(self, other):
        return MatrixDerivation(self.inner + other.inner, self.center + other.center)

    def __sub__(self, other):
        return MatrixDerivation(self.inner - other.inner, self.center - other.center)

    def __neg__(self):
        return MatrixDerivation(-self.inner, -self.center)

    def mask(self, e: Idempotent) -> "MatrixDerivation":
        return MatrixDerivation(mask_matrix(e, self.inner), self.center.mask(e))

    def format(self) -> str:
        return f"mder({self.inner.format()}, {self.center.format()})"

    __str__ = format

    def __repr__(self):
        return f"MatrixDerivation({self.format()})"


def _atom_commutator(A, X, row, n, lift):
    # [A, X] + delta(X) on one atom; `lift` picks the stalk representation
    a_nz = [[(j, lift(v)) for j, v in enumerate(r) if v.num.terms] for r in A]
    x_nz = [[(j, lift(v)) for j, v in enumerate(r) if v.num.terms] for r in X]
    out = [[None] * n for _ in range(n)]
    for i in range(n):
        oi = out[i]
        for kk, v in a_nz[i]:
            for j, w in x_nz[kk]:
                p = v * w
                cur = oi[j]
                oi[j] = p if cur is None else cur + p
        for kk, v in x_nz[i]:
            for j, w in a_nz[kk]:
                p = v * w
                cur = oi[j]
                oi[j] = -p if cur is None else cur - p
    return out, x_nz


def apply_matrix_derivation(D: MatrixDerivation, x: MatrixElement) -> MatrixElement:
    """``[a, x] + delta(x)``, computed atom by atom on the raw stalks.

    Atoms where every stalk involved is a polynomial run on bare
    polynomials, skipping fraction bookkeeping.
    """
    D.inner._check(x)
    algebra, n = x.algebra, x.n
    a_rows, x_rows = D.inner.rows, x.rows
    nvars = algebra.nvars
    zero = RationalFunction.zero(nvars)
    poly_atoms = D.polynomial_atoms()
    per_atom = []
    for k in range(algebra.atom_count):
        A = [[e.stalks[k] for e in r] for r in a_rows]
        X = [[e.stalks[k] for e in r] for r in x_rows]
        row = D.center.coeffs[k]
        polynomial = poly_atoms[k] and all(v.den.is_one for r in X for v in r)
        if polynomial:
            out, x_nz = _atom_commutator(A, X, row, n, _num)
            for i in range(n):
                oi = out[i]
                for j, f in x_nz[i]:
                    g = None
                    for idx, c in enumerate(row):
                        if c.num.terms:
                            fi = f.diff(idx)
                            if fi.terms:
                                term = c.num * fi
                                g = term if g is None else g + term
                    if g is not None:
                        cur = oi[j]
                        oi[j] = g if cur is None else cur + g
            out = [[None if p is None or not p.terms else RationalFunction(p) for p in r] for r in out]
        else:
            out, x_nz = _atom_commutator(A, X, row, n, _same)
            for i in range(n):
                oi = out[i]
                for j, f in x_nz[i]:
                    g = _stalk_apply(row, f)
                    if g.num.terms:
                        cur = oi[j]
                        oi[j] = g if cur is None else cur + g
        per_atom.append(out)
    rows = []
    for i in range(n):
        row = []
        for j in range(n):
            stalks = tuple(zero if m[i][j] is None else m[i][j] for m in per_atom)
            row.append(RegularElement(algebra, stalks))
        rows.append(row)
    return MatrixElement(algebra, rows)


def _num(v):
    return v.num


def _same(v):
    return v


# -- decomposition -------------------------------------------------------------


class DecompositionError(ValueError):
    """The evaluation table is not the table of a derivation of the form D_a + D_delta."""

    def __init__(self, message: str, basis: str):
        super().__init__(message)
        self.basis = basis


@dataclass
class EvaluationTable:
    """Values of a map on the matrix units and on the centrally embedded variables."""

    algebra: Algebra
    n: int
    units: dict = field(default_factory=dict)  # (i, j) 1-based -> MatrixElement
    generators: dict = field(default_factory=dict)  # variable name -> MatrixElement


def evaluation_table(fn: Callable[[MatrixElement], MatrixElement], algebra: Algebra, n: int) -> EvaluationTable:
    table = EvaluationTable(algebra, n)
    for i in range(1, n + 1):
        for j in range(1, n + 1):
            table.units[(i, j)] = fn(matrix_unit(n, i, j, algebra))
    for v in algebra.variables:
        table.generators[v] = fn(central(algebra.var(v), n))
    return table


def decompose(table: EvaluationTable) -> MatrixDerivation:
    """Recover the unique ``(a, delta)`` with ``a[1,1] = 0`` reproducing the table."""
    algebra, n = table.algebra, table.n
    a = [[algebra.zero() for _ in range(n)] for _ in range(n)]
    # off-diagonal entries: D(e_jj) has column j equal to a's column j off the diagonal
    for j in range(1, n + 1):
        value = table.units[(j, j)]
        for k in range(1, n + 1):
            if k != j:
                a[k - 1][j - 1] = value.entry(k, j)
    # diagonal chain: D(e_{j,j+1})_{j,j+1} = a_jj - a_{j+1,j+1}
    for j in range(1, n):
        diff = table.units[(j, j + 1)].entry(j, j + 1)
        a[j][j] = a[j - 1][j - 1] - diff
    inner = MatrixElement(algebra, a)
    inner_only = MatrixDerivation(inner, zero_derivation(algebra))

    coefficients = {}
    for v in algebra.variables:
        value = table.generators[v]
        residual = value - apply_matrix_derivation(inner_only, central(algebra.var(v), n))
        coefficients[v] = residual.entry(1, 1)
    delta = AbelianDerivation.from_elements(algebra, coefficients)
    result = MatrixDerivation(inner, delta)

    for (i, j), value in sorted(table.units.items()):
        if apply_matrix_derivation(result, matrix_unit(n, i, j, algebra)) != value:
            raise DecompositionError(f"residual on e_{i}{j} is nonzero", f"e_{i}{j}")
    for v, value in table.generators.items():
        if apply_matrix_derivation(result, central(algebra.var(v), n)) != value:
            raise DecompositionError(f"residual on {v}*1 is nonzero", f"{v}*1")
    return result


# -- probes and commutants -------------------------------------------------------


def diagonal_probe(algebra: Algebra, n: int) -> MatrixElement:
    """d = sum_i 2^-i e_ii; its commutant is exactly the diagonal matrices."""
    return diagonal(algebra, [algebra.const(mpq(1, 2**i)) for i in range(1, n + 1)])


def shift_probe(algebra: Algebra, n: int) -> MatrixElement:
    """q = sum_i e_{i,i+1}; its commutant is the upper-triangular Toeplitz matrices."""
    zero, one = algebra.zero(), algebra.one()
    return MatrixElement(algebra, [[one if c == r + 1 else zero for c in range(n)] for r in range(n)])


def _nullspace(rows, ncols):
    """Basis of the rational nullspace of a matrix given as lists of mpq."""
    m = [list(r) for r in rows]
    pivots = []
    r = 0
    for c in range(ncols):
        p = next((i for i in range(r, len(m)) if m[i][c]), None)
        if p is None:
            continue
        m[r], m[p] = m[p], m[r]
        inv = 1 / m[r][c]
        m[r] = [x * inv for x in m[r]]
        for i in range(len(m)):
            if i != r and m[i][c]:
                f = m[i][c]
                m[i] = [x - f * y for x, y in zip(m[i], m[r])]
        pivots.append(c)
        r += 1
        if r == len(m):
            break
    free = [c for c in range(ncols) if c not in pivots]
    basis = []
    for fc in free:
        v = [mpq(0)] * ncols
        v[fc] = mpq(1)
        for row_idx, pc in enumerate(pivots):
            v[pc] = -m[row_idx][fc]
        basis.append(v)
    return basis


def commutant_basis(m: MatrixElement) -> list:
    """Rational basis of {X : mX - Xm = 0} for a constant matrix m.

    Each basis vector is returned as an n x n list of mpq.  Because the
    linear system has rational coefficients, the commutant over A is the
    A-span of this basis.
    """
    n = m.n
    c = [[m.rows[i][j].stalks[0].constant_value() for j in range(n)] for i in range(n)]
    for i in range(n):
        for j in range(n):
            if any(s != m.rows[i][j].stalks[0] for s in m.rows[i][j].stalks):
                raise ValueError("commutant_basis needs a matrix with the same constant entries on every atom")
    rows = []
    # unknown X[k][l] sits at column k*n + l; equation for entry (i, j)
    for i in range(n):
        for j in range(n):
            eq = [mpq(0)] * (n * n)
            for k in range(n):
                eq[k * n + j] += c[i][k]
                eq[i * n + k] -= c[k][j]
            rows.append(eq)
    return [[v[i * n:(i + 1) * n] for i in range(n)] for v in _nullspace(rows, n * n)]


def is_diagonal(x) -> bool:
    """Accepts a MatrixElement or a square list of scalars."""
    rows = x.rows if isinstance(x, MatrixElement) else x
    return all(not rows[i][j] for i in range(len(rows)) for j in range(len(rows)) if i != j)


def is_upper_toeplitz(x) -> bool:
    """Upper triangular with entries constant along each diagonal."""
    rows = x.rows if isinstance(x, MatrixElement) else x
    n = len(rows)
    for i in range(n):
        for j in range(n):
            if i > j and rows[i][j]:
                return False
            if i > 0 and j > 0 and rows[i][j] != rows[i - 1][j - 1]:
                return False
    return True
