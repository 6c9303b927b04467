"""Exact Gaussian rational scalars.

Real scalars are plain :class:`gmpy2.mpq` values; only scalars with a
nonzero imaginary part are wrapped in :class:`GaussianRational`.  Every
arithmetic result that happens to be real collapses back to ``mpq``, so
the common (real) case runs at native gmpy2 speed and equality between
scalars stays syntactic.
"""

from __future__ import annotations

from typing import Union

from gmpy2 import mpq

__all__ = ["GaussianRational", "Scalar", "scalar", "as_scalar", "is_scalar", "format_scalar", "I"]

_RATIONAL_TYPES = (type(mpq(0)), int)


class GaussianRational:
    """A Gaussian rational ``real + imag*i`` with ``imag != 0``.

    Construct through :func:`scalar`, which returns an ``mpq`` when the
    imaginary part vanishes.
    """

    __slots__ = ("real", "imag")

    def __init__(self, real, imag):
        self.real = mpq(real)
        self.imag = mpq(imag)

    @classmethod
    def _raw(cls, real, imag):
        # trusted: real and imag are already mpq, imag nonzero
        g = _new(cls)
        g.real = real
        g.imag = imag
        return g

    @property
    def re(self):
        return self.real

    @property
    def im(self):
        return self.imag

    def conjugate(self):
        return GaussianRational(self.real, -self.imag)

    def __repr__(self):
        return f"GaussianRational({self.real}, {self.imag})"

    def __str__(self):
        return format_scalar(self)

    def __bool__(self):
        return True

    def __hash__(self):
        return hash((self.real, self.imag))

    def __eq__(self, other):
        if isinstance(other, GaussianRational):
            return self.real == other.real and self.imag == other.imag
        if isinstance(other, _RATIONAL_TYPES):
            return False
        return NotImplemented

    def __ne__(self, other):
        r = self.__eq__(other)
        return r if r is NotImplemented else not r

    def __neg__(self):
        return _raw(-self.real, -self.imag)

    def __pos__(self):
        return self

    def __add__(self, other):
        if other.__class__ is GaussianRational:
            im = self.imag + other.imag
            return _raw(self.real + other.real, im) if im else self.real + other.real
        if isinstance(other, _RATIONAL_TYPES):
            return _raw(self.real + other, self.imag)
        return NotImplemented

    __radd__ = __add__

    def __sub__(self, other):
        if other.__class__ is GaussianRational:
            im = self.imag - other.imag
            return _raw(self.real - other.real, im) if im else self.real - other.real
        if isinstance(other, _RATIONAL_TYPES):
            return _raw(self.real - other, self.imag)
        return NotImplemented

    def __rsub__(self, other):
        if isinstance(other, _RATIONAL_TYPES):
            return _raw(other - self.real, -self.imag)
        return NotImplemented

    def __mul__(self, other):
        if other.__class__ is GaussianRational:
            a, b, c, d = self.real, self.imag, other.real, other.imag
            im = a * d + b * c
            return _raw(a * c - b * d, im) if im else a * c - b * d
        if isinstance(other, _RATIONAL_TYPES):
            if not other:
                return mpq(0)
            return _raw(self.real * other, self.imag * other)
        return NotImplemented

    __rmul__ = __mul__

    def inverse(self):
        norm = self.real * self.real + self.imag * self.imag
        return GaussianRational(self.real / norm, -self.imag / norm)

    def __truediv__(self, other):
        if isinstance(other, GaussianRational):
            return self * other.inverse()
        if isinstance(other, _RATIONAL_TYPES):
            if not other:
                raise ZeroDivisionError("division of a Gaussian rational by zero")
            return GaussianRational(self.real / other, self.imag / other)
        return NotImplemented

    def __rtruediv__(self, other):
        if isinstance(other, _RATIONAL_TYPES):
            return self.inverse() * other
        return NotImplemented

    def __pow__(self, k):
        if not isinstance(k, int):
            return NotImplemented
        if k < 0:
            return self.inverse() ** (-k)
        result = mpq(1)
        base = self
        while k:
            if k & 1:
                result = base * result
            base = base * base
            k >>= 1
        return result


_new = object.__new__
_raw = GaussianRational._raw

Scalar = Union[mpq, GaussianRational]

I = GaussianRational(0, 1)


def scalar(real=0, imag=0) -> Scalar:
    """Build a canonical scalar: ``mpq`` if ``imag == 0``, else a GaussianRational."""
    imag = mpq(imag)
    if imag:
        return GaussianRational(real, imag)
    return mpq(real)


# gmpy2 probes several conversion hooks before deferring to a reflected
# operator, so ``mpq op GaussianRational`` is slow; these helpers keep the
# Gaussian operand on the left


def smul(a, b) -> Scalar:
    return b * a if b.__class__ is GaussianRational else a * b


def sadd(a, b) -> Scalar:
    return b + a if b.__class__ is GaussianRational else a + b


def ssub(a, b) -> Scalar:
    return -b + a if b.__class__ is GaussianRational else a - b


def is_scalar(value) -> bool:
    return isinstance(value, (GaussianRational,) + _RATIONAL_TYPES)


def as_scalar(value) -> Scalar:
    if isinstance(value, GaussianRational):
        return value
    if isinstance(value, complex):
        raise TypeError("floating complex numbers are not exact scalars")
    if isinstance(value, float):
        raise TypeError("floats are not exact scalars")
    return mpq(value)


def _format_rational(q) -> str:
    q = mpq(q)
    if q.denominator == 1:
        return str(q.numerator)
    return f"{q.numerator}/{q.denominator}"


def format_scalar(c: Scalar) -> str:
    """Render a scalar in the expression syntax, e.g. ``3/2``, ``-i``, ``(1 + 2*i)``.

    Compound values are parenthesized so the output can be embedded in a
    product without further care.
    """
    if not isinstance(c, GaussianRational):
        return _format_rational(c)
    re, im = c.real, c.imag
    if im == 1:
        im_text = "i"
    elif im == -1:
        im_text = "-i"
    else:
        im_text = f"{_format_rational(im)}*i"
    if not re:
        if im_text.startswith("-") or "/" in im_text:
            return f"({im_text})"
        return im_text
    sign = "-" if im < 0 else "+"
    if im == 1 or im == -1:
        tail = "i"
    else:
        tail = f"{_format_rational(abs(im))}*i"
    return f"({_format_rational(re)} {sign} {tail})"
