"""Expression language: lexer, AST and recursive-descent parser.

Grammar, lowest precedence first::

    expr    := term (('+' | '-') term)*
    term    := factor (('*' | '/') factor)*
    factor  := '-' factor | power
    power   := primary ('^' ['-'] INT)?
    primary := rational | 'i' | ident | call | '(' expr ')'
             | bundle | matlit | derlit | idemlit
    bundle  := '[' expr (';' expr)* ']'
    matlit  := 'mat' '[' row (',' row)* ']'      row := '[' expr (',' expr)* ']'
    derlit  := 'der' '{' [ident ':' expr (',' ident ':' expr)*] '}'
    idemlit := '{' [INT (',' INT)*] '}'
    call    := ident '(' [expr (',' expr)*] ')'

Lexing rule for rationals: ``p/q`` written without spaces is one literal,
except directly after ``/`` or ``^``.  So ``t + 1/2`` adds the literal 1/2
while ``s/1/2`` still means ``(s/1)/2``.  The rule never changes the value
of an expression, only the shape of its tree.

Every node records the offset of its first character; offsets do not take
part in equality, so ``parse(str(tree)) == tree``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from math import gcd

__all__ = [
    "ParseError",
    "Token",
    "tokenize",
    "Ast",
    "Rational",
    "ImagUnit",
    "Var",
    "Neg",
    "BinOp",
    "Pow",
    "Bundle",
    "MatLit",
    "DerLit",
    "IdemLit",
    "Call",
    "parse",
    "parse_sequence",
    "RESERVED",
]

RESERVED = frozenset({"i", "mat", "der"})
_PUNCT = set("+-*/^()[];,{}:")


class ParseError(ValueError):
    """A syntax error at a character offset of the source."""

    def __init__(self, offset: int, message: str):
        super().__init__(f"syntax error at offset {offset}: {message}")
        self.offset = offset
        self.message = message

    def render(self, source: str) -> str:
        return f"{source}\n{' ' * self.offset}^ {self.message}"


@dataclass(frozen=True)
class Token:
    kind: str  # "int", "rat", "ident", "end" or the punctuation character itself
    text: str
    pos: int


def tokenize(source: str, start: int = 0) -> list:
    tokens = []
    i, n = start, len(source)
    while i < n:
        ch = source[i]
        if ch.isspace():
            i += 1
            continue
        if ch.isdigit():
            j = i
            while j < n and source[j].isdigit():
                j += 1
            prev = tokens[-1].kind if tokens else None
            if j + 1 < n and source[j] == "/" and source[j + 1].isdigit() and prev not in ("/", "^"):
                k = j + 1
                while k < n and source[k].isdigit():
                    k += 1
                if int(source[j + 1:k]) == 0:
                    raise ParseError(j + 1, "zero denominator in rational literal")
                tokens.append(Token("rat", source[i:k], i))
                i = k
            else:
                tokens.append(Token("int", source[i:j], i))
                i = j
            continue
        if ch.isalpha() or ch == "_":
            j = i
            while j < n and (source[j].isalnum() or source[j] == "_"):
                j += 1
            tokens.append(Token("ident", source[i:j], i))
            i = j
            continue
        if ch in _PUNCT:
            tokens.append(Token(ch, ch, i))
            i += 1
            continue
        raise ParseError(i, f"unexpected character {ch!r}")
    tokens.append(Token("end", "", n))
    return tokens


# -- AST -------------------------------------------------------------------------

_ATOM = 5


class Ast:
    """Base class of expression nodes."""

    pos: int

    def precedence(self) -> int:
        return _ATOM

    def __str__(self) -> str:
        return self.unparse()


def _pos():
    return field(default=0, compare=False, repr=False)


def _wrap(node: Ast, needs: bool) -> str:
    text = node.unparse()
    return f"({text})" if needs else text


@dataclass(frozen=True)
class Rational(Ast):
    num: int
    den: int = 1
    pos: int = _pos()

    def __post_init__(self):
        if self.den <= 0 or self.num < 0 or (self.num and gcd(self.num, self.den) != 1):
            raise ValueError("Rational nodes hold a reduced nonnegative fraction")

    def precedence(self):
        # a bare fraction re-lexes as a literal only where one may start
        return _ATOM if self.den == 1 else 2

    def unparse(self):
        return str(self.num) if self.den == 1 else f"{self.num}/{self.den}"


@dataclass(frozen=True)
class ImagUnit(Ast):
    pos: int = _pos()

    def unparse(self):
        return "i"


@dataclass(frozen=True)
class Var(Ast):
    name: str
    pos: int = _pos()

    def unparse(self):
        return self.name


@dataclass(frozen=True)
class Neg(Ast):
    operand: Ast
    pos: int = _pos()

    def precedence(self):
        return 3

    def unparse(self):
        return "-" + _wrap(self.operand, self.operand.precedence() < 3)


@dataclass(frozen=True)
class BinOp(Ast):
    op: str
    left: Ast
    right: Ast
    pos: int = _pos()

    def precedence(self):
        return 1 if self.op in "+-" else 2

    def unparse(self):
        p = self.precedence()
        left = _wrap(self.left, self.left.precedence() < p)
        right = _wrap(self.right, self.right.precedence() <= p)
        if p == 1 or (self.op == "/" and left[-1].isdigit() and right[0].isdigit()):
            # spaces keep "1 / 2" from re-lexing as a single literal
            return f"{left} {self.op} {right}"
        return f"{left}{self.op}{right}"


@dataclass(frozen=True)
class Pow(Ast):
    base: Ast
    exponent: int
    pos: int = _pos()

    def precedence(self):
        return 4

    def unparse(self):
        return f"{_wrap(self.base, self.base.precedence() <= 4)}^{self.exponent}"


@dataclass(frozen=True)
class Bundle(Ast):
    items: tuple
    pos: int = _pos()

    def unparse(self):
        return "[" + " ; ".join(x.unparse() for x in self.items) + "]"


@dataclass(frozen=True)
class MatLit(Ast):
    rows: tuple
    pos: int = _pos()

    def unparse(self):
        return "mat[" + ", ".join("[" + ", ".join(x.unparse() for x in r) + "]" for r in self.rows) + "]"


@dataclass(frozen=True)
class DerLit(Ast):
    entries: tuple  # ((variable name, Ast), ...)
    pos: int = _pos()

    def unparse(self):
        return "der{" + ", ".join(f"{v}: {x.unparse()}" for v, x in self.entries) + "}"


@dataclass(frozen=True)
class IdemLit(Ast):
    atoms: tuple
    pos: int = _pos()

    def unparse(self):
        return "{" + ", ".join(str(k) for k in self.atoms) + "}"


@dataclass(frozen=True)
class Call(Ast):
    name: str
    args: tuple
    pos: int = _pos()

    def unparse(self):
        return f"{self.name}(" + ", ".join(x.unparse() for x in self.args) + ")"


# -- parser ------------------------------------------------------------------------


class _Parser:
    def __init__(self, source: str, start: int):
        self.source = source
        self.tokens = tokenize(source, start)
        self.k = 0

    @property
    def tok(self) -> Token:
        return self.tokens[self.k]

    def peek(self, ahead: int = 1) -> Token:
        return self.tokens[min(self.k + ahead, len(self.tokens) - 1)]

    def advance(self) -> Token:
        t = self.tokens[self.k]
        self.k += 1
        return t

    def describe(self, t: Token) -> str:
        return "end of input" if t.kind == "end" else repr(t.text)

    def expect(self, kind: str, opener: Token | None = None) -> Token:
        t = self.tok
        if t.kind != kind:
            if opener is not None and t.kind in ("end", ";", ",", ")", "]", "}"):
                raise ParseError(opener.pos, f"unmatched {opener.text!r}")
            raise ParseError(t.pos, f"expected {kind!r}, found {self.describe(t)}")
        return self.advance()

    def expr(self) -> Ast:
        node = self.term()
        while self.tok.kind in ("+", "-"):
            op = self.advance()
            node = BinOp(op.kind, node, self.term(), pos=node.pos)
        return node

    def term(self) -> Ast:
        node = self.factor()
        while self.tok.kind in ("*", "/"):
            op = self.advance()
            node = BinOp(op.kind, node, self.factor(), pos=node.pos)
        return node

    def factor(self) -> Ast:
        if self.tok.kind == "-":
            t = self.advance()
            return Neg(self.factor(), pos=t.pos)
        return self.power()

    def power(self) -> Ast:
        base = self.primary()
        if self.tok.kind != "^":
            return base
        self.advance()
        sign = 1
        if self.tok.kind == "-":
            self.advance()
            sign = -1
        t = self.tok
        if t.kind != "int":
            raise ParseError(t.pos, f"expected an integer exponent, found {self.describe(t)}")
        self.advance()
        return Pow(base, sign * int(t.text), pos=base.pos)

    def comma_list(self, parse_item, close: str, opener: Token) -> tuple:
        items = []
        if self.tok.kind != close:
            items.append(parse_item())
            while self.tok.kind == ",":
                self.advance()
                items.append(parse_item())
        self.expect(close, opener)
        return tuple(items)

    def primary(self) -> Ast:
        t = self.tok
        if t.kind == "int":
            self.advance()
            return Rational(int(t.text), pos=t.pos)
        if t.kind == "rat":
            self.advance()
            p, q = (int(s) for s in t.text.split("/"))
            g = gcd(p, q) or 1
            return Rational(p // g, q // g, pos=t.pos)
        if t.kind == "(":
            self.advance()
            node = self.expr()
            self.expect(")", t)
            return node
        if t.kind == "[":
            self.advance()
            items = [self.expr()]
            while self.tok.kind == ";":
                self.advance()
                items.append(self.expr())
            self.expect("]", t)
            return Bundle(tuple(items), pos=t.pos)
        if t.kind == "{":
            self.advance()
            return IdemLit(self.comma_list(self.atom_index, "}", t), pos=t.pos)
        if t.kind == "ident":
            return self.identifier()
        raise ParseError(t.pos, f"expected an expression, found {self.describe(t)}")

    def atom_index(self) -> int:
        t = self.tok
        if t.kind != "int":
            raise ParseError(t.pos, f"expected an atom number, found {self.describe(t)}")
        self.advance()
        return int(t.text)

    def identifier(self) -> Ast:
        t = self.advance()
        nxt = self.tok
        if t.text == "i":
            return ImagUnit(pos=t.pos)
        if t.text == "mat" and nxt.kind == "[":
            self.advance()
            rows = self.comma_list(self.matrix_row, "]", nxt)
            return MatLit(rows, pos=t.pos)
        if t.text == "der" and nxt.kind == "{":
            self.advance()
            return DerLit(self.comma_list(self.der_entry, "}", nxt), pos=t.pos)
        if t.text in RESERVED:
            raise ParseError(t.pos, f"{t.text!r} is reserved")
        if nxt.kind == "(":
            self.advance()
            return Call(t.text, self.comma_list(self.expr, ")", nxt), pos=t.pos)
        return Var(t.text, pos=t.pos)

    def matrix_row(self) -> tuple:
        opener = self.expect("[")
        return self.comma_list(self.expr, "]", opener)

    def der_entry(self) -> tuple:
        t = self.tok
        if t.kind != "ident":
            raise ParseError(t.pos, f"expected a variable name, found {self.describe(t)}")
        self.advance()
        self.expect(":")
        return (t.text, self.expr())


def parse(source: str, start: int = 0) -> Ast:
    """Parse one expression; ``start`` skips a prefix and keeps offsets absolute."""
    p = _Parser(source, start)
    node = p.expr()
    if p.tok.kind != "end":
        if p.tok.kind == ")":
            raise ParseError(p.tok.pos, "unmatched ')'")
        raise ParseError(p.tok.pos, f"unexpected {p.describe(p.tok)} after expression")
    return node


def parse_sequence(source: str, start: int = 0) -> list:
    """Parse expressions one after another, optionally separated by commas."""
    p = _Parser(source, start)
    out = []
    while p.tok.kind != "end":
        if out and p.tok.kind == ",":
            p.advance()
        out.append(p.expr())
    return out
