"""Sparse multivariate polynomials over the Gaussian rationals.

A polynomial is a dict mapping packed monomials to nonzero scalars.  A
monomial ``x_0^e_0 ... x_{n-1}^e_{n-1}`` is packed into one integer with
the total degree in the highest field and ``e_0`` just below it, so plain
integer order is graded lexicographic order (first variable largest) and
multiplying monomials is integer addition.  Exponents must stay below
2**31; :meth:`Poly.from_terms`, :meth:`Poly.var` and ``**`` enforce this.
"""

from __future__ import annotations

from functools import reduce

from gmpy2 import mpq

from .scalars import GaussianRational, format_scalar, sadd, smul, ssub

_G = GaussianRational

__all__ = ["Poly", "gcd", "grlex_key", "format_poly", "pack", "unpack"]

_BITS = 32
_FIELD = (1 << _BITS) - 1
_MAX_EXP = 1 << (_BITS - 1)
_GUARDS: dict = {}


def grlex_key(exps):
    """Sort key on exponent tuples matching the packed order."""
    return (sum(exps), tuple(exps))


def _shift(nvars, index):
    return _BITS * (nvars - 1 - index)


def _guard(nvars):
    g = _GUARDS.get(nvars)
    if g is None:
        g = _GUARDS[nvars] = sum(1 << (_BITS * f + _BITS - 1) for f in range(nvars + 1))
    return g


def pack(exps) -> int:
    nvars = len(exps)
    key = 0
    total = 0
    for e in exps:
        if not 0 <= e < _MAX_EXP:
            raise OverflowError(f"exponent {e} outside 0..{_MAX_EXP - 1}")
        key = (key << _BITS) | e
        total += e
    if total >= _MAX_EXP:
        raise OverflowError("total degree too large")
    return key | (total << (_BITS * nvars))


def unpack(key: int, nvars: int) -> tuple:
    return tuple((key >> (_BITS * (nvars - 1 - i))) & _FIELD for i in range(nvars))


_ONES: dict = {}


class Poly:
    __slots__ = ("terms", "nvars", "_hash", "_one")

    def __init__(self, terms, nvars):
        # caller guarantees: no zero coefficients, keys packed for nvars;
        # terms are never mutated after construction
        self.terms = terms
        self.nvars = nvars
        self._hash = None
        self._one = None

    # -- constructors -------------------------------------------------
    @classmethod
    def zero(cls, nvars):
        return cls({}, nvars)

    @classmethod
    def const(cls, c, nvars):
        if not c:
            return cls({}, nvars)
        return cls({0: c}, nvars)

    @classmethod
    def one(cls, nvars):
        one = _ONES.get(nvars)
        if one is None:
            one = _ONES[nvars] = cls({0: mpq(1)}, nvars)
            one._one = True
        return one

    @classmethod
    def var(cls, index, nvars, power=1):
        if not 0 <= index < nvars:
            raise IndexError(f"variable index {index} outside 0..{nvars - 1}")
        exps = [0] * nvars
        exps[index] = power
        return cls({pack(exps): mpq(1)}, nvars)

    @classmethod
    def from_terms(cls, items, nvars):
        terms = {}
        for exps, c in items:
            if len(exps) != nvars:
                raise ValueError(f"exponent tuple {tuple(exps)} does not have {nvars} entries")
            exps = pack(exps)
            v = sadd(terms.get(exps, 0), c)
            if v:
                terms[exps] = v
            else:
                terms.pop(exps, None)
        return cls(terms, nvars)

    # -- predicates ---------------------------------------------------
    @property
    def is_zero(self):
        return not self.terms

    def __bool__(self):
        return bool(self.terms)

    @property
    def is_constant(self):
        t = self.terms
        return not t or (len(t) == 1 and 0 in t)

    @property
    def is_one(self):
        one = self._one
        if one is None:
            t = self.terms
            one = len(t) == 1 and 0 in t and t[0] == 1
            self._one = one
        return one

    def constant_value(self):
        """Return the scalar value of a constant polynomial."""
        if not self.terms:
            return mpq(0)
        if not self.is_constant:
            raise ValueError("polynomial is not constant")
        return next(iter(self.terms.values()))

    def exponent_terms(self) -> dict:
        """The terms keyed by exponent tuples."""
        return {unpack(m, self.nvars): c for m, c in self.terms.items()}

    def variables(self):
        used = set()
        n = self.nvars
        for m in self.terms:
            for i in range(n):
                if (m >> _shift(n, i)) & _FIELD:
                    used.add(i)
        return used

    def degree(self, index):
        sh = _shift(self.nvars, index)
        return max(((m >> sh) & _FIELD for m in self.terms), default=-1)

    @property
    def total_degree(self):
        ds = _BITS * self.nvars
        return max((m >> ds for m in self.terms), default=-1)

    # -- leading data (grlex) ------------------------------------------
    def leading_monomial(self):
        """Packed leading monomial; see :func:`unpack`."""
        return max(self.terms)

    @property
    def LC(self):
        if not self.terms:
            return mpq(0)
        return self.terms[self.leading_monomial()]

    def monic(self):
        if not self.terms:
            return self
        lc = self.LC
        if lc == 1:
            return self
        inv = 1 / lc
        return Poly({m: smul(inv, c) for m, c in self.terms.items()}, self.nvars)

    # -- equality -----------------------------------------------------
    def __eq__(self, other):
        if isinstance(other, Poly):
            return self.terms == other.terms
        return NotImplemented

    def __hash__(self):
        if self._hash is None:
            self._hash = hash(frozenset(self.terms.items()))
        return self._hash

    def __repr__(self):
        return f"Poly({self.exponent_terms()!r}, {self.nvars})"

    # -- arithmetic ---------------------------------------------------
    def __neg__(self):
        return Poly({m: -c for m, c in self.terms.items()}, self.nvars)

    def __add__(self, other):
        if not other.terms:
            return self
        if not self.terms:
            return other
        if len(other.terms) > len(self.terms):
            big, small = other.terms, self.terms
        else:
            big, small = self.terms, other.terms
        out = dict(big)
        for m, c in small.items():
            v = out.get(m)
            if v is None:
                out[m] = c
            else:
                v = c + v if c.__class__ is _G else v + c
                if v:
                    out[m] = v
                else:
                    del out[m]
        return Poly(out, self.nvars)

    def __sub__(self, other):
        if not other.terms:
            return self
        out = dict(self.terms)
        for m, c in other.terms.items():
            v = out.get(m)
            if v is None:
                out[m] = -c
            else:
                v = -c + v if c.__class__ is _G else v - c
                if v:
                    out[m] = v
                else:
                    del out[m]
        return Poly(out, self.nvars)

    def __mul__(self, other):
        a, b = self.terms, other.terms
        if not a or not b:
            return Poly({}, self.nvars)
        if len(a) == 1:
            (m1, c1), = a.items()
            if not m1:
                if c1 == 1:
                    return other
                if c1.__class__ is _G:
                    return Poly({m: c1 * c for m, c in b.items()}, self.nvars)
                return Poly({m: c * c1 for m, c in b.items()}, self.nvars)
        if len(b) == 1:
            (m2, c2), = b.items()
            if not m2:
                if c2 == 1:
                    return self
                if c2.__class__ is _G:
                    return Poly({m: c2 * c for m, c in a.items()}, self.nvars)
                return Poly({m: c * c2 for m, c in a.items()}, self.nvars)
        if len(a) == 1 and len(b) == 1:
            (m1, c1), = a.items()
            (m2, c2), = b.items()
            return Poly({m1 + m2: smul(c1, c2)}, self.nvars)
        out = {}
        get = out.get
        for m1, c1 in a.items():
            for m2, c2 in b.items():
                m = m1 + m2
                p = c2 * c1 if c2.__class__ is _G else c1 * c2
                v = get(m)
                if v is None:
                    out[m] = p
                else:
                    v = p + v if p.__class__ is _G else v + p
                    if v:
                        out[m] = v
                    else:
                        del out[m]
        return Poly(out, self.nvars)

    def scale(self, c):
        if not c:
            return Poly({}, self.nvars)
        if c == 1:
            return self
        if c.__class__ is _G:
            return Poly({m: c * v for m, v in self.terms.items()}, self.nvars)
        return Poly({m: v * c for m, v in self.terms.items()}, self.nvars)

    def mul_monomial(self, key, c=1):
        """Multiply by ``c`` times the packed monomial ``key``."""
        return Poly({m + key: smul(c, v) for m, v in self.terms.items()}, self.nvars)

    def __pow__(self, k):
        if not isinstance(k, int) or k < 0:
            raise ValueError("polynomial powers must be nonnegative integers")
        if self.terms and self.total_degree * k >= _MAX_EXP:
            raise OverflowError("polynomial power exceeds the supported degree")
        result = Poly.one(self.nvars)
        base = self
        while k:
            if k & 1:
                result = result * base
            base = base * base
            k >>= 1
        return result

    def diff(self, index):
        sh = _shift(self.nvars, index)
        step = (1 << sh) + (1 << (_BITS * self.nvars))
        out = {}
        for m, c in self.terms.items():
            e = (m >> sh) & _FIELD
            if e:
                out[m - step] = c * e
        return Poly(out, self.nvars)

    def evaluate(self, point):
        """Evaluate at a tuple of scalars (used by tests as an oracle)."""
        total = mpq(0)
        for m, c in self.terms.items():
            v = c
            for x, e in zip(point, unpack(m, self.nvars)):
                if e:
                    v = v * x**e
            total = total + v
        return total

    # -- division -----------------------------------------------------
    def divmod(self, divisor):
        """Multivariate division by a single divisor under grlex.

        Returns ``(quotient, remainder)``; the remainder is zero exactly
        when ``divisor`` divides ``self``.
        """
        if not divisor.terms:
            raise ZeroDivisionError("polynomial division by zero")
        lm = divisor.leading_monomial()
        guard = _guard(self.nvars)
        inv_lc = 1 / divisor.terms[lm]
        work = dict(self.terms)
        quot = {}
        rem = {}
        dterms = list(divisor.terms.items())
        while work:
            m = max(work)
            c = work[m]
            if ((m | guard) - lm) & guard == guard:
                shift = m - lm
                coef = smul(c, inv_lc)
                quot[shift] = sadd(quot.get(shift, 0), coef)
                for dm, dc in dterms:
                    key = dm + shift
                    v = ssub(work.get(key, 0), smul(coef, dc))
                    if v:
                        work[key] = v
                    else:
                        work.pop(key, None)
            else:
                rem[m] = c
                del work[m]
        quot = {m: c for m, c in quot.items() if c}
        return Poly(quot, self.nvars), Poly(rem, self.nvars)

    def exquo(self, divisor):
        """Exact quotient; raises ``ArithmeticError`` if the division leaves a remainder."""
        if divisor.is_constant:
            return self.scale(1 / divisor.constant_value())
        q, r = self.divmod(divisor)
        if r.terms:
            raise ArithmeticError("inexact polynomial division")
        return q


# -- gcd --------------------------------------------------------------------


def _split(p, index):
    """Coefficients of ``p`` viewed as a polynomial in variable ``index``."""
    parts = {}
    sh, ds = _shift(p.nvars, index), _BITS * p.nvars
    for m, c in p.terms.items():
        e = (m >> sh) & _FIELD
        parts.setdefault(e, {})[m - (e << sh) - (e << ds)] = c
    return {e: Poly(t, p.nvars) for e, t in parts.items()}


def _lead_in(p, index):
    d = p.degree(index)
    sh, ds = _shift(p.nvars, index), _BITS * p.nvars
    strip = (d << sh) + (d << ds)
    terms = {}
    for m, c in p.terms.items():
        if (m >> sh) & _FIELD == d:
            terms[m - strip] = c
    return d, Poly(terms, p.nvars)


def _monomial_gcd(mono, other):
    n = mono.nvars
    (m, _), = mono.terms.items()
    mins = list(unpack(m, n))
    for key in other.terms:
        for i, e in enumerate(unpack(key, n)):
            if e < mins[i]:
                mins[i] = e
    return Poly({pack(mins): mpq(1)}, n)


def _content(p, index):
    parts = list(_split(p, index).values())
    return reduce(gcd, parts[1:], parts[0].monic())


def _primitive(p, index):
    c = _content(p, index)
    if c.is_constant:
        return p.monic()
    return p.exquo(c).monic()


def _prem(a, b, index):
    db, lcb = _lead_in(b, index)
    r = a
    while r.terms:
        dr, lcr = _lead_in(r, index)
        if dr < db:
            break
        k = dr - db
        shift = (k << _shift(r.nvars, index)) + (k << (_BITS * r.nvars))
        r = lcb * r - (lcr * b).mul_monomial(shift)
    return r


def gcd(p, q):
    """Monic greatest common divisor (gcd(0, 0) = 0)."""
    if not p.terms:
        return q.monic()
    if not q.terms:
        return p.monic()
    if p.is_constant or q.is_constant:
        return Poly.one(p.nvars)
    if len(p.terms) == 1:
        return _monomial_gcd(p, q)
    if len(q.terms) == 1:
        return _monomial_gcd(q, p)
    vp, vq = p.variables(), q.variables()
    if not vp & vq:
        return Poly.one(p.nvars)
    pm, qm = p.monic(), q.monic()
    if pm == qm:
        return pm
    if p.total_degree == 1 or q.total_degree == 1:
        lin, other = (pm, qm) if p.total_degree == 1 else (qm, pm)
        _, r = other.divmod(lin)
        return lin if not r.terms else Poly.one(p.nvars)

    index = min(vp & vq)
    cp, cq = _content(pm, index), _content(qm, index)
    g_content = gcd(cp, cq)
    a = pm if cp.is_constant else pm.exquo(cp).monic()
    b = qm if cq.is_constant else qm.exquo(cq).monic()
    if a.degree(index) < b.degree(index):
        a, b = b, a
    if b.degree(index) <= 0:
        return g_content
    while True:
        r = _prem(a, b, index)
        if not r.terms:
            g = b
            break
        if r.degree(index) <= 0:
            g = Poly.one(p.nvars)
            break
        a, b = b, _primitive(r, index)
    return (g_content * _primitive(g, index)).monic()


# -- printing -----------------------------------------------------------------


def _format_monomial(exps, names):
    parts = []
    for name, e in zip(names, exps):
        if e == 1:
            parts.append(name)
        elif e:
            parts.append(f"{name}^{e}")
    return "*".join(parts)


def format_poly(p, names):
    """Render a polynomial in the expression syntax, highest grlex term first."""
    if not p.terms:
        return "0"
    out = []
    for key in sorted(p.terms, reverse=True):
        c = p.terms[key]
        mono = _format_monomial(unpack(key, p.nvars), names)
        negative = not isinstance(c, GaussianRational) and c < 0
        mag = -c if negative else c
        if not mono:
            body = format_scalar(mag)
        elif mag == 1:
            body = mono
        else:
            body = f"{format_scalar(mag)}*{mono}"
        if not out:
            out.append(f"-{body}" if negative else body)
        else:
            out.append(f" - {body}" if negative else f" + {body}")
    return "".join(out)
