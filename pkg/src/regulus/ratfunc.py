"""Canonical multivariate rational functions.

The canonical form is a reduced fraction whose denominator is monic under
grlex; zero is ``0/1``.  Two rational functions are equal iff their
numerator and denominator dicts are equal.
"""

from __future__ import annotations

from .poly import _ONES, Poly, format_poly, gcd

__all__ = ["RationalFunction"]


class RationalFunction:
    __slots__ = ("num", "den")

    def __init__(self, num, den=None):
        # trusted constructor: (num, den) must already be canonical
        self.num = num
        self.den = den if den is not None else (_ONES.get(num.nvars) or Poly.one(num.nvars))

    @classmethod
    def make(cls, num, den):
        """Canonicalize an arbitrary fraction ``num/den``."""
        if not den.terms:
            raise ZeroDivisionError("rational function with zero denominator")
        if not num.terms:
            return cls(num, Poly.one(num.nvars))
        if den.is_constant:
            return cls(num.scale(1 / den.constant_value()))
        g = gcd(num, den)
        if not g.is_one:
            num = num.exquo(g)
            den = den.exquo(g)
        lc = den.LC
        if lc != 1:
            inv = 1 / lc
            num, den = num.scale(inv), den.scale(inv)
        return cls(num, den)

    @classmethod
    def zero(cls, nvars):
        return cls(Poly.zero(nvars))

    @classmethod
    def one(cls, nvars):
        return cls(Poly.one(nvars))

    @classmethod
    def const(cls, c, nvars):
        return cls(Poly.const(c, nvars))

    @classmethod
    def var(cls, index, nvars):
        return cls(Poly.var(index, nvars))

    @property
    def nvars(self):
        return self.num.nvars

    @property
    def is_zero(self):
        return not self.num.terms

    def __bool__(self):
        return bool(self.num.terms)

    @property
    def is_polynomial(self):
        return self.den.is_one

    @property
    def is_constant(self):
        return self.den.is_one and self.num.is_constant

    def constant_value(self):
        if not self.is_constant:
            raise ValueError("rational function is not constant")
        return self.num.constant_value()

    def variables(self):
        return self.num.variables() | self.den.variables()

    def __eq__(self, other):
        if isinstance(other, RationalFunction):
            return self.num.terms == other.num.terms and self.den.terms == other.den.terms
        return NotImplemented

    def __hash__(self):
        return hash((self.num, self.den))

    def __repr__(self):
        return f"RationalFunction({self.num!r}, {self.den!r})"

    # -- arithmetic ---------------------------------------------------
    def __neg__(self):
        return RationalFunction(-self.num, self.den)

    def __add__(self, other):
        if not other.num.terms:
            return self
        if not self.num.terms:
            return other
        d1, d2 = self.den, other.den
        if d1.is_one and d2.is_one:
            return RationalFunction(self.num + other.num, d1)
        if d1 == d2:
            return RationalFunction.make(self.num + other.num, d1)
        g = gcd(d1, d2)
        if g.is_one:
            return RationalFunction(self.num * d2 + other.num * d1, d1 * d2)
        d1g, d2g = d1.exquo(g), d2.exquo(g)
        num = self.num * d2g + other.num * d1g
        if not num.terms:
            return RationalFunction.zero(self.nvars)
        h = gcd(num, g)
        if not h.is_one:
            num, g = num.exquo(h), g.exquo(h)
        return RationalFunction(num, d1g * d2g * g)

    def __sub__(self, other):
        if not other.num.terms:
            return self
        if self.den.is_one and other.den.is_one:
            return RationalFunction(self.num - other.num, self.den)
        return self + (-other)

    def __mul__(self, other):
        n1, d1, n2, d2 = self.num, self.den, other.num, other.den
        if not n1.terms or not n2.terms:
            return RationalFunction.zero(self.nvars)
        if d1.is_one and d2.is_one:
            return RationalFunction(n1 * n2, d1)
        if not d2.is_one:
            g = gcd(n1, d2)
            if not g.is_one:
                n1, d2 = n1.exquo(g), d2.exquo(g)
        if not d1.is_one:
            g = gcd(n2, d1)
            if not g.is_one:
                n2, d1 = n2.exquo(g), d1.exquo(g)
        num, den = n1 * n2, d1 * d2
        lc = den.LC
        if lc != 1:
            inv = 1 / lc
            num, den = num.scale(inv), den.scale(inv)
        return RationalFunction(num, den)

    def scale(self, c):
        if not c:
            return RationalFunction.zero(self.nvars)
        return RationalFunction(self.num.scale(c), self.den)

    def inverse(self):
        if not self.num.terms:
            raise ZeroDivisionError("inverse of the zero rational function")
        num, den = self.den, self.num
        lc = den.LC
        if lc != 1:
            inv = 1 / lc
            num, den = num.scale(inv), den.scale(inv)
        return RationalFunction(num, den)

    def __truediv__(self, other):
        return self * other.inverse()

    def __pow__(self, k):
        if not isinstance(k, int):
            raise ValueError("rational function powers must be integers")
        if k < 0:
            return self.inverse() ** (-k)
        return RationalFunction(self.num**k, self.den**k)

    def diff(self, index):
        """Formal partial derivative with respect to variable ``index``."""
        n, d = self.num, self.den
        if d.is_one:
            return RationalFunction(n.diff(index), d)
        dd = d.diff(index)
        if not dd.terms:
            return RationalFunction.make(n.diff(index), d)
        num = n.diff(index) * d - n * dd
        return RationalFunction.make(num, d * d)

    def evaluate(self, point):
        return self.num.evaluate(point) / self.den.evaluate(point)

    def format(self, names):
        num = format_poly(self.num, names)
        if self.den.is_one:
            return num
        if len(self.num.terms) > 1:
            num = f"({num})"
        den = format_poly(self.den, names)
        single_power = len(self.den.terms) == 1 and len(self.den.variables()) == 1
        if not single_power:
            den = f"({den})"
        return f"{num}/{den}"
