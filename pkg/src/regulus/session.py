"""Sessions: name bindings over one algebra, expression evaluation and commands.

A line is either a command (``load-algebra``, ``let``, ``decompose``,
``counterexample``, ``certify``, ``linearize``, ``check-additivity``,
``selftest``, ``help``) or an expression, whose value is printed.  Every
command returns a :class:`Report` that renders as plain text or as
tab-separated machine records.
"""

from __future__ import annotations

import re
import shlex
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Callable

from gmpy2 import mpq

from . import acceptance
from .algebra import (
    Algebra,
    RegularElement,
    depends_on,
    is_finitely_valued,
    jacobian_independent,
    mask,
    membership_idempotent,
    pinv,
    support,
)
from .derivations import (
    AbelianDerivation,
    ExtensionError,
    apply,
    extend_with_value,
    partial,
)
from .lattice import AtomSpace, Idempotent, StructureError, measure, rho, sup_family
from .matrix import (
    DecompositionError,
    MatrixDerivation,
    MatrixElement,
    apply_matrix_derivation,
    commutator,
    decompose,
    diagonal_probe,
    evaluation_table,
    identity,
    mask_matrix,
    matrix_unit,
    shift_probe,
)
from .parser import (
    RESERVED,
    Ast,
    Call,
    ParseError,
    Var,
    parse,
    parse_sequence,
)
from .scalars import GaussianRational, I, format_scalar, is_scalar
from .twolocal import (
    DEFAULT_SEED,
    TwoLocalMap,
    additivity_check,
    build_counterexample,
    certify_pair,
    from_derivation,
    linearize_report,
)

__all__ = [
    "SessionError",
    "Report",
    "Session",
    "load_algebra_text",
    "evaluate",
    "run_command",
    "format_value",
    "kind_of",
    "FUNCTIONS",
    "COMMANDS",
]

_IDENT = re.compile(r"[A-Za-z_][A-Za-z0-9_]*\Z")


class SessionError(Exception):
    """Evaluation or command failure; ``offset`` points into the source line when known."""

    def __init__(self, message: str, offset: int | None = None):
        super().__init__(message if offset is None else f"at offset {offset}: {message}")
        self.offset = offset


# -- values ------------------------------------------------------------------------


def kind_of(value) -> str:
    if isinstance(value, bool):
        return "boolean"
    if is_scalar(value):
        return "scalar"
    kinds = {
        RegularElement: "element",
        Idempotent: "idempotent",
        AbelianDerivation: "derivation",
        MatrixElement: "matrix",
        MatrixDerivation: "matrix-derivation",
        TwoLocalMap: "two-local",
    }
    for cls, name in kinds.items():
        if isinstance(value, cls):
            return name
    return type(value).__name__


def _a(noun: str) -> str:
    return ("an " if noun[0] in "aeiou" else "a ") + noun


def format_value(value) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    if is_scalar(value):
        return format_scalar(value)
    if isinstance(value, Idempotent):
        return str(value)
    return value.format()


# -- algebra files -------------------------------------------------------------------


def load_algebra_text(text: str) -> Algebra:
    """Parse ``atoms k`` / k weights / ``vars v1 v2 ...`` (blank lines and # comments skipped)."""
    lines = [ln.split("#", 1)[0].strip() for ln in text.splitlines()]
    lines = [ln for ln in lines if ln]
    if len(lines) != 3:
        raise SessionError(f"an algebra file has exactly 3 lines (atoms, weights, vars), found {len(lines)}")
    head = lines[0].split()
    if len(head) != 2 or head[0] != "atoms" or not head[1].isdigit():
        raise SessionError(f"first line must be 'atoms K', found {lines[0]!r}")
    k = int(head[1])
    try:
        weights = [mpq(w) for w in lines[1].split()]
    except ValueError as exc:
        raise SessionError(f"bad weight on the second line: {exc}") from None
    if len(weights) != k:
        raise SessionError(f"expected {k} weights, found {len(weights)}")
    names = lines[2].split()
    if not names or names[0] != "vars":
        raise SessionError(f"third line must be 'vars v1 v2 ...', found {lines[2]!r}")
    names = names[1:]
    for v in names:
        if not _IDENT.match(v) or v in RESERVED:
            raise SessionError(f"{v!r} cannot be a variable name")
    try:
        return Algebra(AtomSpace(weights), names)
    except ValueError as exc:
        raise SessionError(str(exc)) from None


# -- reports -------------------------------------------------------------------------


@dataclass
class Report:
    """Output of one line: text lines for people, (tag, fields...) records for scripts."""

    command: str
    ok: bool = True
    text: list = field(default_factory=list)
    records: list = field(default_factory=list)

    def add(self, line: str, *record) -> None:
        self.text.append(line)
        if record:
            self.records.append(tuple(str(x) for x in record))

    def render(self, machine: bool = False) -> str:
        if machine:
            rows = [(self.command, "status", "ok" if self.ok else "fail")]
            rows += [(self.command,) + r for r in self.records]
            return "\n".join("\t".join(r) for r in rows)
        return "\n".join(self.text)


# -- evaluation ------------------------------------------------------------------------


class _Evaluator:
    def __init__(self, session: "Session"):
        self.session = session
        self.algebra = session.require_algebra()

    def lift(self, value):
        """Raw scalars act as constant elements inside expressions."""
        if is_scalar(value):
            return self.algebra.const(value)
        return value

    def eval(self, node: Ast):
        method = getattr(self, "eval_" + type(node).__name__)
        return method(node)

    def eval_Rational(self, node):
        return self.algebra.const(mpq(node.num, node.den))

    def eval_ImagUnit(self, node):
        return self.algebra.const(I)

    def eval_Var(self, node):
        if node.name in self.algebra.variables:
            return self.algebra.var(node.name)
        if node.name in self.session.bindings:
            return self.session.bindings[node.name]
        raise SessionError(f"unbound name {node.name!r}", node.pos)

    def eval_Neg(self, node):
        v = self.lift(self.eval(node.operand))
        if isinstance(v, (RegularElement, MatrixElement, AbelianDerivation, MatrixDerivation)):
            return -v
        raise SessionError(f"cannot negate {_a(kind_of(v))}", node.pos)

    def eval_BinOp(self, node):
        a = self.lift(self.eval(node.left))
        b = self.lift(self.eval(node.right))
        try:
            result = _BINARY[node.op](a, b)
        except ZeroDivisionError as exc:
            raise SessionError(str(exc), node.right.pos) from None
        except StructureError as exc:
            raise SessionError(str(exc), node.pos) from None
        if result is NotImplemented:
            raise SessionError(f"cannot apply {node.op!r} to {_a(kind_of(a))} and {_a(kind_of(b))}", node.pos)
        return result

    def eval_Pow(self, node):
        base = self.lift(self.eval(node.base))
        k = node.exponent
        try:
            if isinstance(base, RegularElement):
                return base**k
            if isinstance(base, MatrixElement) and k >= 0:
                out = identity(base.algebra, base.n)
                for _ in range(k):
                    out = out * base
                return out
        except ZeroDivisionError as exc:
            raise SessionError(str(exc), node.pos) from None
        raise SessionError(f"cannot raise {_a(kind_of(base))} to the power {k}", node.pos)

    def eval_Bundle(self, node):
        atoms = self.algebra.atom_count
        if len(node.items) != atoms:
            raise SessionError(f"a bundle needs one entry per atom ({atoms}), found {len(node.items)}", node.pos)
        values = [self.lift(self.eval(x)) for x in node.items]
        if all(isinstance(v, RegularElement) for v in values):
            return self.algebra.element(v.stalks[k] for k, v in enumerate(values))
        if all(isinstance(v, AbelianDerivation) for v in values):
            return AbelianDerivation(self.algebra, tuple(v.coeffs[k] for k, v in enumerate(values)))
        raise SessionError("bundle entries must all be elements or all be derivations", node.pos)

    def element(self, node) -> RegularElement:
        v = self.lift(self.eval(node))
        if not isinstance(v, RegularElement):
            raise SessionError(f"expected an element, found {_a(kind_of(v))}", node.pos)
        return v

    def eval_MatLit(self, node):
        n = len(node.rows)
        for r in node.rows:
            if len(r) != n:
                raise SessionError(f"matrix literal must be square; a row has {len(r)} entries, expected {n}", node.pos)
        return MatrixElement(self.algebra, [[self.element(x) for x in r] for r in node.rows])

    def eval_DerLit(self, node):
        coefficients = {}
        for v, x in node.entries:
            if v not in self.algebra.variables:
                raise SessionError(f"{v!r} is not a variable of the algebra", node.pos)
            if v in coefficients:
                raise SessionError(f"variable {v!r} listed twice", node.pos)
            coefficients[v] = self.element(x)
        return AbelianDerivation.from_elements(self.algebra, coefficients)

    def eval_IdemLit(self, node):
        space = self.algebra.space
        bits = 0
        for k in node.atoms:
            if not 1 <= k <= space.atom_count:
                raise SessionError(f"atom {k} outside 1..{space.atom_count}", node.pos)
            bits |= 1 << (k - 1)
        return Idempotent(space, bits)

    def eval_Call(self, node):
        fn = FUNCTIONS.get(node.name)
        if fn is not None:
            try:
                return fn.impl(self, node)
            except (StructureError, ExtensionError, ZeroDivisionError, KeyError, IndexError) as exc:
                message = exc.args[0] if isinstance(exc, KeyError) and exc.args else str(exc)
                raise SessionError(f"{node.name}: {message}", node.pos) from None
        if node.name in self.session.bindings:
            target = self.session.bindings[node.name]
            if len(node.args) != 1:
                raise SessionError(f"{node.name} takes one argument", node.pos)
            return _apply_map(target, self.eval(node.args[0]), node)
        raise SessionError(f"unknown function {node.name!r}", node.pos)


def _same_kind(a, b, kinds) -> bool:
    return any(isinstance(a, k) and isinstance(b, k) for k in kinds)


_ADDITIVE = (RegularElement, MatrixElement, AbelianDerivation, MatrixDerivation)


def _add(a, b):
    return a + b if _same_kind(a, b, _ADDITIVE) else NotImplemented


def _sub(a, b):
    return a - b if _same_kind(a, b, _ADDITIVE) else NotImplemented


def _mul(a, b):
    if _same_kind(a, b, (RegularElement, MatrixElement)):
        return a * b
    if isinstance(a, Idempotent) and isinstance(b, Idempotent):
        return a & b
    if isinstance(b, Idempotent):
        a, b = b, a
    if isinstance(a, Idempotent):
        if isinstance(b, RegularElement):
            return mask(a, b)
        if isinstance(b, MatrixElement):
            return mask_matrix(a, b)
        if isinstance(b, (AbelianDerivation, MatrixDerivation)):
            return b.mask(a)
        return NotImplemented
    if isinstance(b, RegularElement):
        a, b = b, a
    if isinstance(a, RegularElement):
        if isinstance(b, MatrixElement):
            return a * b
        if isinstance(b, AbelianDerivation):
            return b.times(a)
    return NotImplemented


def _div(a, b):
    if isinstance(b, RegularElement):
        if isinstance(a, RegularElement):
            return a / b
        if isinstance(a, MatrixElement):
            return a * (b.algebra.one() / b)
    return NotImplemented


_BINARY = {"+": _add, "-": _sub, "*": _mul, "/": _div}


def _apply_map(target, x, node):
    try:
        if isinstance(target, AbelianDerivation) and isinstance(x, RegularElement):
            return apply(target, x)
        if isinstance(target, MatrixDerivation) and isinstance(x, MatrixElement):
            return apply_matrix_derivation(target, x)
        if isinstance(target, TwoLocalMap):
            want = RegularElement if target.n is None else MatrixElement
            if isinstance(x, want):
                return target(x)
    except StructureError as exc:
        raise SessionError(str(exc), node.pos) from None
    raise SessionError(f"cannot apply {_a(kind_of(target))} to {_a(kind_of(x))}", node.pos)


# -- builtin functions -------------------------------------------------------------------


@dataclass(frozen=True)
class Function:
    name: str
    signature: str
    summary: str
    impl: Callable[[_Evaluator, Call], Any]


FUNCTIONS: dict = {}


def _builtin(signature: str, summary: str):
    name = signature.split("(", 1)[0]

    def register(impl):
        FUNCTIONS[name] = Function(name, signature, summary, impl)
        return impl

    return register


def _args(ev: _Evaluator, node: Call, kinds: tuple, variadic: bool = False) -> list:
    """Evaluate the arguments and check their kinds ("element", "idempotent", "int", ...)."""
    args = node.args
    if variadic:
        if len(args) < len(kinds) - 1:
            raise SessionError(f"{node.name} takes at least {len(kinds) - 1} arguments", node.pos)
        kinds = kinds[:-1] + (kinds[-1],) * (len(args) - len(kinds) + 1)
    elif len(args) != len(kinds):
        raise SessionError(f"{node.name} takes {len(kinds)} argument(s), found {len(args)}", node.pos)
    return [_coerce_arg(ev, a, k, node) for a, k in zip(args, kinds)]


def _coerce_arg(ev, arg: Ast, kind: str, node: Call):
    if kind == "name":
        if not isinstance(arg, Var) or arg.name not in ev.algebra.variables:
            raise SessionError(f"{node.name}: expected a variable name", arg.pos)
        return arg.name
    value = ev.lift(ev.eval(arg))
    if kind == "any":
        return value
    if kind == "int":
        if isinstance(value, RegularElement) and is_finitely_valued(value) and len(set(value.stalks)) == 1:
            c = value.stalks[0].constant_value()
            if not isinstance(c, GaussianRational) and c.denominator == 1:
                return int(c)
        raise SessionError(f"{node.name}: expected an integer", arg.pos)
    wanted = {
        "element": RegularElement,
        "idempotent": Idempotent,
        "matrix": MatrixElement,
        "derivation": AbelianDerivation,
        "mderivation": MatrixDerivation,
    }[kind]
    if not isinstance(value, wanted):
        raise SessionError(f"{node.name}: expected {_a(_KIND_NAMES.get(kind, kind))}, found {_a(kind_of(value))}", arg.pos)
    return value


_KIND_NAMES = {"mderivation": "matrix-derivation"}


@_builtin("support(x)", "least idempotent e with e*x = x")
def _support(ev, node):
    (x,) = _args(ev, node, ("element",))
    return support(x)


@_builtin("pinv(x)", "pseudo-inverse: inverse on the support, 0 elsewhere")
def _pinv(ev, node):
    (x,) = _args(ev, node, ("element",))
    return pinv(x)


@_builtin("mask(e, x)", "product of an idempotent with an element, matrix or derivation")
def _mask(ev, node):
    e, x = _args(ev, node, ("idempotent", "any"))
    result = _mul(e, x)
    if result is NotImplemented:
        raise SessionError(f"mask: cannot mask {_a(kind_of(x))}", node.pos)
    return result


@_builtin("rho(x, y)", "measure of the support of x - y")
def _rho(ev, node):
    x, y = _args(ev, node, ("element", "element"))
    return rho(x, y)


@_builtin("measure(e)", "sum of the atom weights of e")
def _measure(ev, node):
    (e,) = _args(ev, node, ("idempotent",))
    return measure(e)


@_builtin("meet(e, f)", "greatest lower bound")
def _meet(ev, node):
    e, f = _args(ev, node, ("idempotent", "idempotent"))
    return e & f


@_builtin("join(e, f)", "least upper bound")
def _join(ev, node):
    e, f = _args(ev, node, ("idempotent", "idempotent"))
    return e | f


@_builtin("complement(e)", "1 - e")
def _complement(ev, node):
    (e,) = _args(ev, node, ("idempotent",))
    return ~e


@_builtin("leq(e, f)", "whether e <= f")
def _leq(ev, node):
    e, f = _args(ev, node, ("idempotent", "idempotent"))
    return e <= f


@_builtin("sup(e, ...)", "supremum of a family (empty family: bottom)")
def _sup(ev, node):
    es = _args(ev, node, ("idempotent",), variadic=True) if node.args else []
    return sup_family(es, ev.algebra.space)


@_builtin("top()", "the unit idempotent")
def _top(ev, node):
    _args(ev, node, ())
    return ev.algebra.space.top


@_builtin("bottom()", "the zero idempotent")
def _bottom(ev, node):
    _args(ev, node, ())
    return ev.algebra.space.bottom


@_builtin("fv(x)", "whether x is finitely valued (constant on every atom)")
def _fv(ev, node):
    (x,) = _args(ev, node, ("element",))
    return is_finitely_valued(x)


@_builtin("depends_on(x, v, k)", "whether the stalk of x on atom k involves variable v")
def _depends_on(ev, node):
    x, v, k = _args(ev, node, ("element", "name", "int"))
    return depends_on(x, v, k)


@_builtin("membership(x, v, ...)", "atoms where x lies in the subalgebra generated by the listed variables")
def _membership(ev, node):
    x, *gens = _args(ev, node, ("element", "name"), variadic=True)
    return membership_idempotent(x, gens)


@_builtin("jacobian(x, ...)", "atoms where the elements are algebraically independent")
def _jacobian(ev, node):
    return jacobian_independent(_args(ev, node, ("element",), variadic=True))


@_builtin("partial(v)", "the coordinate derivation d/dv")
def _partial(ev, node):
    (v,) = _args(ev, node, ("name",))
    return partial(ev.algebra, v)


@_builtin("coefficient(D, v)", "coefficient of d/dv in a derivation")
def _coefficient(ev, node):
    d, v = _args(ev, node, ("derivation", "name"))
    return d.coefficient(v)


@_builtin("apply(D, x)", "apply a derivation or 2-local map")
def _apply(ev, node):
    d, x = _args(ev, node, ("any", "any"))
    return _apply_map(d, x, node)


@_builtin("mapply(D, x)", "apply a matrix derivation")
def _mapply(ev, node):
    d, x = _args(ev, node, ("mderivation", "matrix"))
    return _apply_map(d, x, node)


@_builtin("commutator(a, x)", "ax - xa")
def _commutator(ev, node):
    a, x = _args(ev, node, ("matrix", "matrix"))
    return commutator(a, x)


@_builtin("unit(n, i, j)", "the matrix unit e_ij of size n")
def _unit(ev, node):
    n, i, j = _args(ev, node, ("int", "int", "int"))
    if n < 1 or not (1 <= i <= n and 1 <= j <= n):
        raise SessionError(f"unit: indices ({i}, {j}) outside 1..{n}", node.pos)
    return matrix_unit(n, i, j, ev.algebra)


@_builtin("identity(n)", "the identity matrix of size n")
def _identity(ev, node):
    (n,) = _args(ev, node, ("int",))
    if n < 1:
        raise SessionError("identity: size must be positive", node.pos)
    return identity(ev.algebra, n)


@_builtin("dprobe(n)", "diag(1/2, 1/4, ...), whose commutant is the diagonal matrices")
def _dprobe(ev, node):
    (n,) = _args(ev, node, ("int",))
    return diagonal_probe(ev.algebra, n)


@_builtin("qprobe(n)", "the superdiagonal shift, whose commutant is upper Toeplitz")
def _qprobe(ev, node):
    (n,) = _args(ev, node, ("int",))
    return shift_probe(ev.algebra, n)


@_builtin("entry(x, i, j)", "1-based matrix entry")
def _entry(ev, node):
    x, i, j = _args(ev, node, ("matrix", "int", "int"))
    if not (1 <= i <= x.n and 1 <= j <= x.n):
        raise SessionError(f"entry: ({i}, {j}) outside 1..{x.n}", node.pos)
    return x.entry(i, j)


@_builtin("mder(a, D)", "the matrix derivation x -> [a, x] + D(x), normalized to a11 = 0")
def _mder(ev, node):
    a, d = _args(ev, node, ("matrix", "derivation"))
    return MatrixDerivation(a, d)


@_builtin("inner(M)", "the normalized inner part a of a matrix derivation")
def _inner(ev, node):
    (m,) = _args(ev, node, ("mderivation",))
    return m.inner


@_builtin("center(M)", "the entrywise part of a matrix derivation")
def _center(ev, node):
    (m,) = _args(ev, node, ("mderivation",))
    return m.center


@_builtin("twolocal(D)", "the 2-local map of a derivation (witness: D itself)")
def _twolocal(ev, node):
    (d,) = _args(ev, node, ("any",))
    if not isinstance(d, (AbelianDerivation, MatrixDerivation)):
        raise SessionError(f"twolocal: expected a derivation, found {_a(kind_of(d))}", node.pos)
    return from_derivation(d)


@_builtin("extend(D, y, c, v, ...)", "keep D on the listed variables and send y to c")
def _extend(ev, node):
    d, y, c, *gens = _args(ev, node, ("derivation", "element", "element", "name"), variadic=True)
    if len(node.args) == 3:
        gens = []
    return extend_with_value(gens, d, y, c)


# -- sessions ------------------------------------------------------------------------------


@dataclass
class Session:
    algebra: Algebra | None = None
    bindings: dict = field(default_factory=dict)
    base_dir: Path = field(default_factory=Path)

    def require_algebra(self) -> Algebra:
        if self.algebra is None:
            raise SessionError("no algebra loaded; use load-algebra FILE")
        return self.algebra

    def set_algebra(self, algebra: Algebra) -> None:
        self.algebra = algebra
        self.bindings.clear()

    def bind(self, name: str, value) -> None:
        if not _IDENT.match(name) or name in RESERVED:
            raise SessionError(f"{name!r} is not a bindable name")
        if self.algebra is not None and name in self.algebra.variables:
            raise SessionError(f"{name!r} is a variable of the algebra")
        if name in FUNCTIONS:
            raise SessionError(f"{name!r} is a builtin function")
        self.bindings[name] = value

    def eval(self, source: str):
        return evaluate(self, parse(source))

    def execute(self, line: str) -> Report | None:
        return run_command(self, line)


def evaluate(session: Session, ast: Ast):
    return _Evaluator(session).eval(ast)


# -- commands ---------------------------------------------------------------------------------


def _options(words: list, allowed: dict) -> tuple:
    """Split ``--name N`` options (integers) off a word list."""
    values = dict(allowed)
    rest = []
    k = 0
    while k < len(words):
        w = words[k]
        if w.startswith("--"):
            key = w[2:]
            if key not in allowed:
                raise SessionError(f"unknown option {w}")
            if k + 1 >= len(words) or not words[k + 1].lstrip("-").isdigit():
                raise SessionError(f"option {w} needs an integer")
            values[key] = int(words[k + 1])
            k += 2
        else:
            rest.append(w)
            k += 1
    return values, rest


def _lookup(session: Session, name: str):
    if name not in session.bindings:
        raise SessionError(f"unbound name {name!r}")
    return session.bindings[name]


def _cmd_load_algebra(session: Session, rest: str, report: Report):
    words = shlex.split(rest)
    if len(words) != 1:
        raise SessionError("usage: load-algebra FILE")
    path = Path(words[0])
    if not path.is_absolute():
        path = session.base_dir / path
    try:
        text = path.read_text()
    except OSError as exc:
        raise SessionError(f"cannot read {path}: {exc.strerror}") from None
    session.set_algebra(load_algebra_text(text))
    alg = session.algebra
    weights = " ".join(format_scalar(w) for w in alg.space.weights)
    report.add(f"algebra: {alg.atom_count} atom(s), weights {weights}", "atoms", alg.atom_count)
    report.add(f"variables: {' '.join(alg.variables)}", "vars", *alg.variables)


def _cmd_let(session: Session, rest: str, report: Report, offset: int):
    m = re.match(r"\s*([A-Za-z_][A-Za-z0-9_]*)\s*=", rest)
    if not m:
        raise SessionError("usage: let NAME = EXPR")
    name = m.group(1)
    value = evaluate(session, _parse_at(rest, m.end(), offset))
    session.bind(name, value)
    report.add(f"{name} = {format_value(value)}", "bind", name, kind_of(value), format_value(value))


def _parse_at(text: str, start: int, offset: int) -> Ast:
    # errors carry offsets into the full input line
    try:
        return parse(text, start)
    except ParseError as exc:
        raise ParseError(exc.offset + offset, exc.message) from None


def _matrix_map(session: Session, name: str):
    value = _lookup(session, name)
    if isinstance(value, MatrixDerivation):
        return value, value.n
    if isinstance(value, TwoLocalMap) and value.n is not None:
        return value, value.n
    raise SessionError(f"{name} is {_a(kind_of(value))}, expected a map on matrices")


def _cmd_decompose(session: Session, rest: str, report: Report):
    words = rest.split()
    if len(words) != 1:
        raise SessionError("usage: decompose NAME")
    fn, n = _matrix_map(session, words[0])
    table = evaluation_table(fn, session.require_algebra(), n)
    try:
        result = decompose(table)
    except DecompositionError as exc:
        report.ok = False
        report.add(f"not a derivation: {exc}", "error", exc.basis, str(exc))
        return
    session.bindings["_"] = result
    a, d = result.inner.format(), result.center.format()
    report.add(f"(a, delta) = ({a}, {d})", "inner", a)
    report.records.append(("center", d))


def _cmd_counterexample(session: Session, rest: str, report: Report):
    words = rest.split()
    name = "cex"
    if len(words) == 4 and words[2] == "as":
        name = words[3]
        words = words[:2]
    if len(words) != 2:
        raise SessionError("usage: counterexample VAR VAR [as NAME]")
    alg = session.require_algebra()
    a, b = words
    for v in (a, b):
        if v not in alg.variables:
            raise SessionError(f"{v!r} is not a variable of the algebra")
    if a == b:
        raise SessionError("the two variables must differ")
    cex = build_counterexample(alg, a, b, name=name)
    session.bind(name, cex)
    report.add(f"{name}: non-additive 2-local derivation built from {a}, {b}", "bind", name, "two-local")
    x, y = alg.var(a), alg.var(b)
    for label, point in ((a, x), (b, y), (f"{a} + {b}", x + y)):
        value = format_value(cex(point))
        report.add(f"{name}({label}) = {value}", "value", label, value)


def _cmd_certify(session: Session, rest: str, report: Report, offset: int):
    m = re.match(r"\s*([A-Za-z_][A-Za-z0-9_]*)", rest)
    if not m:
        raise SessionError("usage: certify NAME EXPR EXPR")
    target = _lookup(session, m.group(1))
    if isinstance(target, (AbelianDerivation, MatrixDerivation)):
        target = from_derivation(target, m.group(1))
    if not isinstance(target, TwoLocalMap):
        raise SessionError(f"{m.group(1)} is {_a(kind_of(target))}, expected a 2-local map")
    try:
        exprs = parse_sequence(rest, m.end())
    except ParseError as exc:
        raise ParseError(exc.offset + offset, exc.message) from None
    if len(exprs) != 2:
        raise SessionError(f"certify needs exactly two points, found {len(exprs)}")
    x, y = (evaluate(session, e) for e in exprs)
    cert = certify_pair(target, x, y)
    report.ok = cert.ok
    report.add(cert.text(), "certificate", "ok" if cert.ok else f"violated-{cert.violated}", format_value(x), format_value(y))
    if cert.ok:
        report.records.append(("witness", format_value(cert.witness)))


def _cmd_linearize(session: Session, rest: str, report: Report):
    opts, words = _options(rest.split(), {"probes": 2, "samples": 2, "seed": DEFAULT_SEED})
    if len(words) != 1:
        raise SessionError("usage: linearize NAME [--probes N] [--samples N] [--seed N]")
    fn, _ = _matrix_map(session, words[0])
    if isinstance(fn, MatrixDerivation):
        fn = from_derivation(fn, words[0])
    try:
        rep = linearize_report(fn, opts["probes"], opts["samples"], opts["seed"])
    except ValueError as exc:
        raise SessionError(str(exc)) from None
    for s in rep.steps:
        report.add(f"{'PASS' if s.passed else 'FAIL'} {s.step}: {s.detail}", "step", s.step, "pass" if s.passed else "fail")
    if rep.error is not None:
        report.ok = False
        report.records.append(("failed-step", rep.error.step))
        return
    session.bindings["_"] = rep.result
    a, d = rep.result.inner.format(), rep.result.center.format()
    report.add(f"recovered a = {a}", "inner", a)
    report.add(f"recovered delta = {d}", "center", d)


def _cmd_check_additivity(session: Session, rest: str, report: Report):
    opts, words = _options(rest.split(), {"samples": 50, "seed": DEFAULT_SEED})
    if len(words) != 1:
        raise SessionError("usage: check-additivity NAME [--samples N] [--seed N]")
    target = _lookup(session, words[0])
    if isinstance(target, (AbelianDerivation, MatrixDerivation)):
        target = from_derivation(target, words[0])
    if not isinstance(target, TwoLocalMap):
        raise SessionError(f"{words[0]} is {_a(kind_of(target))}, expected a 2-local map")
    rep = additivity_check(target, samples=opts["samples"], seed=opts["seed"])
    if rep.additive:
        report.add(rep.text(), "additive", "true", rep.checked)
    else:
        x, y = (format_value(v) for v in rep.counter_pair)
        report.add(rep.text(), "additive", "false", rep.checked)
        report.records.append(("counter-pair", x, y))


def _cmd_selftest(session: Session, rest: str, report: Report):
    words = rest.split()
    if len(words) > 1 or (words and not words[0].isdigit()):
        raise SessionError("usage: selftest [SEED]")
    seed = int(words[0]) if words else DEFAULT_SEED
    for result in acceptance.run_all(seed):
        report.add(result.line())
        report.records.append(tuple(result.machine().split("\t")))
        report.ok = report.ok and result.ok


def _cmd_help(session: Session, rest: str, report: Report):
    for usage in COMMANDS.values():
        report.add(f"  {usage}")
    report.add("functions:")
    for fn in FUNCTIONS.values():
        report.add(f"  {fn.signature}: {fn.summary}")
    report.add("any other line is evaluated as an expression")


COMMANDS = {
    "load-algebra": "load-algebra FILE",
    "let": "let NAME = EXPR",
    "decompose": "decompose NAME",
    "counterexample": "counterexample VAR VAR [as NAME]",
    "certify": "certify NAME EXPR, EXPR",
    "linearize": "linearize NAME [--probes N] [--samples N] [--seed N]",
    "check-additivity": "check-additivity NAME [--samples N] [--seed N]",
    "selftest": "selftest [SEED]",
    "help": "help",
}

_HANDLERS = {
    "load-algebra": _cmd_load_algebra,
    "decompose": _cmd_decompose,
    "counterexample": _cmd_counterexample,
    "linearize": _cmd_linearize,
    "check-additivity": _cmd_check_additivity,
    "selftest": _cmd_selftest,
    "help": _cmd_help,
}
_WITH_OFFSET = {"let": _cmd_let, "certify": _cmd_certify}


def run_command(session: Session, line: str) -> Report | None:
    """Execute one input line; blank lines and ``#`` comments give ``None``."""
    stripped = line.strip()
    if not stripped or stripped.startswith("#"):
        return None
    lead = len(line) - len(line.lstrip())
    head, _, rest = stripped.partition(" ")
    offset = lead + len(head) + 1
    if head in _HANDLERS:
        report = Report(head)
        _HANDLERS[head](session, rest, report)
        return report
    if head in _WITH_OFFSET:
        report = Report(head)
        _WITH_OFFSET[head](session, rest, report, offset)
        return report
    value = evaluate(session, parse(line))
    report = Report("value")
    report.add(format_value(value), kind_of(value), format_value(value))
    return report
