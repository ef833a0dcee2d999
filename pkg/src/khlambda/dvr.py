"""Exact arithmetic in Q[l] localized at the prime (l).

Elements are fractions p(l)/q(l) with q(0) != 0.  They are kept in a
canonical form

    l**v * n(l) / d(l),    n(0) != 0,  d(0) == 1,  gcd(n, d) == 1

so equality, hashing and the l-adic valuation are all O(1) reads.
"""

from __future__ import annotations

import re
from fractions import Fraction
from functools import total_ordering
from typing import Iterable, Sequence, Union

Poly = tuple  # tuple[Fraction, ...], constant term first, no trailing zeros

_ZERO = Fraction(0)
_ONE = Fraction(1)


class NotAUnitError(ArithmeticError):
    """Raised when inverting an element that is not a unit of the ring."""

    def __init__(self, message: str, *, is_zero: bool):
        super().__init__(message)
        self.is_zero = is_zero


class DivisionError(ArithmeticError):
    """Raised by exact division when the divisor's valuation is too large."""


@total_ordering
class _Infinity:
    __slots__ = ()

    def __repr__(self):
        return "INF"

    def __eq__(self, other):
        return isinstance(other, _Infinity)

    def __lt__(self, other):
        return False

    def __hash__(self):
        return hash("khlambda.INF")

    def __add__(self, other):
        return self

    __radd__ = __add__


#: Valuation of the zero element.
INF = _Infinity()

Valuation = Union[int, _Infinity]


# -- dense polynomial helpers over Q -----------------------------------------

def _trim(p: Sequence[Fraction]) -> Poly:
    n = len(p)
    while n and p[n - 1] == 0:
        n -= 1
    return tuple(p[:n])


def _padd(a: Poly, b: Poly) -> Poly:
    if len(a) < len(b):
        a, b = b, a
    out = list(a)
    for i, c in enumerate(b):
        out[i] += c
    return _trim(out)


def _pneg(a: Poly) -> Poly:
    return tuple(-c for c in a)


def _pmul(a: Poly, b: Poly) -> Poly:
    if not a or not b:
        return ()
    if len(a) == 1:
        c = a[0]
        return tuple(c * x for x in b)
    if len(b) == 1:
        c = b[0]
        return tuple(c * x for x in a)
    out = [_ZERO] * (len(a) + len(b) - 1)
    for i, x in enumerate(a):
        if x:
            for j, y in enumerate(b):
                out[i + j] += x * y
    return _trim(out)


def _pdivmod(a: Poly, b: Poly) -> tuple[Poly, Poly]:
    if not b:
        raise ZeroDivisionError("polynomial division by zero")
    rem = list(a)
    db = len(b) - 1
    lead = b[-1]
    if len(rem) <= db:
        return (), _trim(rem)
    quo = [_ZERO] * (len(rem) - db)
    for k in range(len(rem) - 1, db - 1, -1):
        c = rem[k]
        if c:
            f = c / lead
            quo[k - db] = f
            for j in range(db + 1):
                rem[k - db + j] -= f * b[j]
    return _trim(quo), _trim(rem[:db])


def _pgcd(a: Poly, b: Poly) -> Poly:
    while b:
        a, b = b, _pdivmod(a, b)[1]
    if not a:
        return ()
    lead = a[-1]
    return tuple(c / lead for c in a)


def _strip_l(p: Poly) -> tuple[int, Poly]:
    v = 0
    while v < len(p) and p[v] == 0:
        v += 1
    return v, p[v:]


class DvrScalar:
    """An element of Q[l]_(l).  Immutable."""

    __slots__ = ("_v", "_num", "_den")

    def __init__(self, value=0):
        if isinstance(value, DvrScalar):
            self._v, self._num, self._den = value._v, value._num, value._den
            return
        c = Fraction(value)
        if c:
            self._v, self._num, self._den = 0, (c,), (_ONE,)
        else:
            self._v, self._num, self._den = 0, (), (_ONE,)

    # construction ---------------------------------------------------------

    @classmethod
    def _raw(cls, v: int, num: Poly, den: Poly) -> "DvrScalar":
        obj = object.__new__(cls)
        obj._v = v
        obj._num = num
        obj._den = den
        return obj

    @classmethod
    def from_fraction(cls, num: Iterable, den: Iterable = (1,)) -> "DvrScalar":
        """Build ``num(l) / den(l)`` from coefficient lists (constant term first)."""
        n = _trim([Fraction(c) for c in num])
        d = _trim([Fraction(c) for c in den])
        if not d or d[0] == 0:
            raise ValueError("denominator must have a nonzero constant term")
        return cls._normalize(0, n, d)

    @classmethod
    def monomial(cls, coeff, power: int = 0) -> "DvrScalar":
        c = Fraction(coeff)
        if not c:
            return ZERO
        if power < 0:
            raise ValueError("negative powers of l are not in the ring")
        return cls._raw(power, (c,), (_ONE,))

    @classmethod
    def _normalize(cls, v: int, num: Poly, den: Poly) -> "DvrScalar":
        if not num:
            return ZERO
        s, num = _strip_l(num)
        v += s
        if len(den) > 1:
            g = _pgcd(num, den)
            if len(g) > 1:
                num = _pdivmod(num, g)[0]
                den = _pdivmod(den, g)[0]
        d0 = den[0]
        if d0 != 1:
            num = tuple(c / d0 for c in num)
            den = tuple(c / d0 for c in den)
        return cls._raw(v, num, den)

    # accessors --------------------------------------------------------------

    @property
    def valuation(self) -> Valuation:
        return INF if not self._num else self._v

    @property
    def numerator(self) -> Poly:
        """Numerator coefficients including the ``l**v`` factor."""
        if not self._num:
            return ()
        return (_ZERO,) * self._v + self._num

    @property
    def denominator(self) -> Poly:
        return self._den

    @property
    def is_zero(self) -> bool:
        return not self._num

    @property
    def is_unit(self) -> bool:
        return bool(self._num) and self._v == 0

    @property
    def is_monomial(self) -> bool:
        return len(self._num) == 1 and len(self._den) == 1

    def leading_coefficient(self) -> Fraction:
        """Coefficient of ``l**v`` in the power-series expansion."""
        return self._num[0] if self._num else _ZERO

    def unit_part(self) -> "DvrScalar":
        """``self / l**v``; raises on zero."""
        if not self._num:
            raise NotAUnitError("zero has no unit part", is_zero=True)
        return DvrScalar._raw(0, self._num, self._den)

    def at_one(self) -> Fraction:
        """Evaluate at l = 1 (the Lee specialization); requires den(1) != 0."""
        n = sum(self._num, _ZERO)
        d = sum(self._den, _ZERO)
        if d == 0:
            raise ZeroDivisionError("denominator vanishes at l = 1")
        return n / d

    # arithmetic -------------------------------------------------------------

    def __add__(self, other):
        if not isinstance(other, DvrScalar):
            try:
                other = DvrScalar(other)
            except (TypeError, ValueError):
                return NotImplemented
        if not self._num:
            return other
        if not other._num:
            return self
        a, b = self, other
        if a._v > b._v:
            a, b = b, a
        shift = b._v - a._v
        if a._den == b._den:
            bn = (_ZERO,) * shift + b._num if shift else b._num
            num = _padd(a._num, bn)
            den = a._den
            if len(den) == 1:
                if not num:
                    return ZERO
                s, num = _strip_l(num)
                return DvrScalar._raw(a._v + s, num, den)
            return DvrScalar._normalize(a._v, num, den)
        bn = _pmul(b._num, a._den)
        if shift:
            bn = (_ZERO,) * shift + bn
        num = _padd(_pmul(a._num, b._den), bn)
        return DvrScalar._normalize(a._v, num, _pmul(a._den, b._den))

    __radd__ = __add__

    def __neg__(self):
        if not self._num:
            return self
        return DvrScalar._raw(self._v, _pneg(self._num), self._den)

    def __sub__(self, other):
        if not isinstance(other, DvrScalar):
            try:
                other = DvrScalar(other)
            except (TypeError, ValueError):
                return NotImplemented
        return self + (-other)

    def __rsub__(self, other):
        return DvrScalar(other) - self

    def __mul__(self, other):
        if not isinstance(other, DvrScalar):
            try:
                other = DvrScalar(other)
            except (TypeError, ValueError):
                return NotImplemented
        if not self._num or not other._num:
            return ZERO
        v = self._v + other._v
        if len(self._den) == 1 and len(other._den) == 1:
            return DvrScalar._raw(v, _pmul(self._num, other._num), self._den)
        return DvrScalar._normalize(
            v, _pmul(self._num, other._num), _pmul(self._den, other._den)
        )

    __rmul__ = __mul__

    def __pow__(self, n: int):
        if n < 0:
            return self.invert() ** (-n)
        out = ONE
        base = self
        while n:
            if n & 1:
                out = out * base
            base = base * base
            n >>= 1
        return out

    def invert(self) -> "DvrScalar":
        if not self._num:
            raise NotAUnitError("cannot invert zero", is_zero=True)
        if self._v:
            raise NotAUnitError(
                f"element of positive valuation {self._v} is not a unit",
                is_zero=False,
            )
        return DvrScalar._normalize(0, self._den, self._num)

    def divide_exact(self, other: "DvrScalar") -> "DvrScalar":
        other = other if isinstance(other, DvrScalar) else DvrScalar(other)
        if not other._num:
            raise DivisionError("division by zero")
        if not self._num:
            return ZERO
        if self._v < other._v:
            raise DivisionError(
                f"valuation {self._v} is smaller than divisor valuation {other._v}"
            )
        v = self._v - other._v
        if len(self._den) == 1 and len(other._den) == 1 and len(other._num) == 1:
            c = other._num[0]
            return DvrScalar._raw(v, tuple(x / c for x in self._num), self._den)
        return DvrScalar._normalize(
            v, _pmul(self._num, other._den), _pmul(self._den, other._num)
        )

    def __truediv__(self, other):
        return self.divide_exact(other)

    def __rtruediv__(self, other):
        return DvrScalar(other).divide_exact(self)

    # comparison -------------------------------------------------------------

    def __eq__(self, other):
        if not isinstance(other, DvrScalar):
            try:
                other = DvrScalar(other)
            except (TypeError, ValueError):
                return NotImplemented
        return (self._v, self._num, self._den) == (other._v, other._num, other._den)

    def __hash__(self):
        if not self._num:
            return hash(0)
        if self._v == 0 and len(self._num) == 1 and len(self._den) == 1:
            return hash(self._num[0])
        return hash((self._v, self._num, self._den))

    def __bool__(self):
        return bool(self._num)

    def is_associate(self, other: "DvrScalar") -> bool:
        return self.valuation == other.valuation

    # text -------------------------------------------------------------------

    def __repr__(self):
        return f"DvrScalar({str(self)!r})"

    def __str__(self):
        return format_scalar(self)


ZERO = DvrScalar._raw(0, (), (_ONE,))
ONE = DvrScalar._raw(0, (_ONE,), (_ONE,))
LAMBDA = DvrScalar._raw(1, (_ONE,), (_ONE,))


def lam(power: int = 1) -> DvrScalar:
    """``l**power``."""
    return DvrScalar.monomial(1, power)


def valuation(a: DvrScalar) -> Valuation:
    return a.valuation


# -- text format --------------------------------------------------------------

def _format_poly(p: Poly) -> str:
    terms = []
    for k, c in enumerate(p):
        if not c:
            continue
        mag = abs(c)
        if k == 0:
            body = str(mag)
        else:
            mono = "l" if k == 1 else f"l^{k}"
            body = mono if mag == 1 else f"{mag}*{mono}"
        terms.append(("-" if c < 0 else "+", body))
    if not terms:
        return "0"
    sign, body = terms[0]
    out = ("-" if sign == "-" else "") + body
    for sign, body in terms[1:]:
        out += f" {sign} {body}"
    return out


def format_scalar(a: DvrScalar) -> str:
    """Render as ``"p(l)"`` or ``"(p(l))/(q(l))"``."""
    num = _format_poly(a.numerator)
    if len(a.denominator) == 1:
        return num
    return f"({num})/({_format_poly(a.denominator)})"


_TOKEN = re.compile(r"\s*(?:(\d+(?:/\d+)?)|(l|λ|lambda)|(\*\*|[-+*/^()]))")


def parse_scalar(text: str) -> DvrScalar:
    """Parse the textual form produced by :func:`format_scalar`.

    Accepts integer or ``a/b`` coefficients, the variable ``l`` (also
    ``λ``/``lambda``), ``+ - * / ^ **`` and parentheses.
    """
    tokens = []
    pos = 0
    text = text.strip()
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if not m or m.end() == pos:
            raise ValueError(f"unexpected character at {pos} in {text!r}")
        num, var, op = m.groups()
        if num is not None:
            tokens.append(("num", Fraction(num)))
        elif var is not None:
            tokens.append(("var", None))
        else:
            tokens.append(("op", "^" if op == "**" else op))
        pos = m.end()
    tokens.append(("end", None))
    i = 0

    def peek():
        return tokens[i]

    def take():
        nonlocal i
        tok = tokens[i]
        i += 1
        return tok

    def expr():
        val = term()
        while peek() in (("op", "+"), ("op", "-")):
            op = take()[1]
            rhs = term()
            val = val + rhs if op == "+" else val - rhs
        return val

    def term():
        val = unary()
        while peek() in (("op", "*"), ("op", "/")):
            op = take()[1]
            rhs = unary()
            val = val * rhs if op == "*" else val.divide_exact(rhs)
        return val

    def unary():
        if peek() == ("op", "-"):
            take()
            return -unary()
        if peek() == ("op", "+"):
            take()
            return unary()
        return power()

    def power():
        base = atom()
        if peek() == ("op", "^"):
            take()
            kind, exp = take()
            if kind != "num" or exp.denominator != 1:
                raise ValueError("exponent must be a non-negative integer")
            return base ** int(exp)
        return base

    def atom():
        kind, val = take()
        if kind == "num":
            return DvrScalar(val)
        if kind == "var":
            return LAMBDA
        if (kind, val) == ("op", "("):
            inner = expr()
            if take() != ("op", ")"):
                raise ValueError("unbalanced parentheses")
            return inner
        raise ValueError(f"unexpected token {val!r}")

    result = expr()
    if peek()[0] != "end":
        raise ValueError(f"trailing input in {text!r}")
    return result
