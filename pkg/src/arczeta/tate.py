"""Laurent polynomials in the symbol L with exact rational coefficients.

A `TatePoly` is a finite Q-linear combination of integer (possibly negative)
powers of L, stored sparsely as a dict mapping exponent to a nonzero
`Fraction`.  This is the coefficient ring for all symbolic series here;
inverted factors (L^i - 1)^-1 are never stored inside a TatePoly but tracked
as explicit denominator factors by `arczeta.ratseries.RatSeries`.

Evaluation at a rational number q ("counting specialization") is `tate_eval`.
Exact division, used when cancelling denominator factors, raises
`NonPolynomialCoefficient` if the quotient would leave the ring.
"""

from __future__ import annotations

from fractions import Fraction
from typing import Iterable, Iterator, Mapping, Union

Scalar = Union[int, Fraction]


class ZeroBase(ZeroDivisionError):
    """A negative power of L was evaluated at q = 0."""


class NonPolynomialCoefficient(ArithmeticError):
    """An operation that must stay inside Q[L, L^-1] produced a remainder."""


def _coerce(value: Scalar) -> Fraction:
    if isinstance(value, Fraction):
        return value
    if isinstance(value, int):
        return Fraction(value)
    raise TypeError(f"expected int or Fraction, got {type(value).__name__}")


class TatePoly:
    """Element of Q[L, L^-1], immutable by convention."""

    __slots__ = ("c",)

    def __init__(self, terms: Mapping[int, Scalar] | Iterable[tuple[int, Scalar]] = ()):
        items = terms.items() if isinstance(terms, Mapping) else terms
        c: dict[int, Fraction] = {}
        for e, v in items:
            v = _coerce(v)
            if v:
                c[int(e)] = c.get(int(e), Fraction(0)) + v
                if not c[int(e)]:
                    del c[int(e)]
        self.c = c

    # -- constructors ------------------------------------------------------

    @classmethod
    def zero(cls) -> TatePoly:
        return cls()

    @classmethod
    def one(cls) -> TatePoly:
        return cls({0: 1})

    @classmethod
    def const(cls, value: Scalar) -> TatePoly:
        return cls({0: value})

    @classmethod
    def L(cls, exponent: int = 1, coeff: Scalar = 1) -> TatePoly:
        """The monomial coeff * L^exponent."""
        return cls({exponent: coeff})

    # -- basic structure ----------------------------------------------------

    def is_zero(self) -> bool:
        return not self.c

    def is_one(self) -> bool:
        return self.c == {0: Fraction(1)}

    def min_exp(self) -> int:
        if not self.c:
            raise ValueError("zero polynomial has no valuation")
        return min(self.c)

    def max_exp(self) -> int:
        if not self.c:
            raise ValueError("zero polynomial has no degree")
        return max(self.c)

    def terms(self) -> Iterator[tuple[int, Fraction]]:
        """Terms in ascending exponent order."""
        return iter(sorted(self.c.items()))

    def __bool__(self) -> bool:
        return bool(self.c)

    def __eq__(self, other: object) -> bool:
        if isinstance(other, TatePoly):
            return self.c == other.c
        if isinstance(other, (int, Fraction)):
            return self == TatePoly.const(other)
        return NotImplemented

    def __hash__(self) -> int:
        return hash(frozenset(self.c.items()))

    def __repr__(self) -> str:
        return f"TatePoly({self})"

    # -- arithmetic ----------------------------------------------------------

    def __add__(self, other: TatePoly | Scalar) -> TatePoly:
        other = _as_poly(other)
        c = dict(self.c)
        for e, v in other.c.items():
            s = c.get(e, Fraction(0)) + v
            if s:
                c[e] = s
            elif e in c:
                del c[e]
        out = TatePoly.__new__(TatePoly)
        out.c = c
        return out

    __radd__ = __add__

    def __neg__(self) -> TatePoly:
        out = TatePoly.__new__(TatePoly)
        out.c = {e: -v for e, v in self.c.items()}
        return out

    def __sub__(self, other: TatePoly | Scalar) -> TatePoly:
        return self + (-_as_poly(other))

    def __rsub__(self, other: Scalar) -> TatePoly:
        return _as_poly(other) - self

    def __mul__(self, other: TatePoly | Scalar) -> TatePoly:
        other = _as_poly(other)
        c: dict[int, Fraction] = {}
        for e1, v1 in self.c.items():
            for e2, v2 in other.c.items():
                e = e1 + e2
                s = c.get(e, Fraction(0)) + v1 * v2
                if s:
                    c[e] = s
                elif e in c:
                    del c[e]
        out = TatePoly.__new__(TatePoly)
        out.c = c
        return out

    __rmul__ = __mul__

    def __pow__(self, n: int) -> TatePoly:
        if n < 0:
            raise ValueError("negative powers of a general TatePoly are not defined")
        result = TatePoly.one()
        base = self
        while n:
            if n & 1:
                result = result * base
            base = base * base
            n >>= 1
        return result

    def shift(self, k: int) -> TatePoly:
        """Multiply by L^k."""
        out = TatePoly.__new__(TatePoly)
        out.c = {e + k: v for e, v in self.c.items()}
        return out

    def exact_div(self, other: TatePoly) -> TatePoly:
        """Exact quotient self / other in Q[L, L^-1].

        Raises NonPolynomialCoefficient if other is zero or does not divide
        self.  Laurent division reduces to ordinary polynomial division after
        shifting both operands to valuation 0.
        """
        if other.is_zero():
            raise NonPolynomialCoefficient("division by zero polynomial")
        if self.is_zero():
            return TatePoly.zero()
        sv, ov = self.min_exp(), other.min_exp()
        # dense coefficient lists of the shifted (ordinary) polynomials
        a = _dense(self, sv)
        b = _dense(other, ov)
        q, r = _polydivmod(a, b)
        if any(r):
            raise NonPolynomialCoefficient(f"{other} does not divide {self}")
        return TatePoly((i + sv - ov, v) for i, v in enumerate(q) if v)

    def divides(self, other: TatePoly) -> bool:
        try:
            other.exact_div(self)
            return True
        except NonPolynomialCoefficient:
            return False

    # -- evaluation and rendering ---------------------------------------------

    def eval(self, q: Scalar) -> Fraction:
        """Evaluate at L = q.  Raises ZeroBase for negative exponents at q = 0."""
        q = _coerce(q)
        total = Fraction(0)
        for e, v in self.c.items():
            if e < 0 and q == 0:
                raise ZeroBase("L^%d evaluated at q = 0" % e)
            total += v * q**e
        return total

    def __str__(self) -> str:
        if not self.c:
            return "0"
        parts: list[str] = []
        for e, v in sorted(self.c.items(), reverse=True):
            mag = -v if v < 0 else v
            if e == 0:
                body = str(mag)
            else:
                lpow = "L" if e == 1 else f"L^{e}"
                if mag == 1:
                    body = lpow
                elif mag.denominator == 1:
                    body = f"{mag}*{lpow}"
                else:
                    body = f"({mag})*{lpow}"
            if not parts:
                parts.append(body if v > 0 else f"-{body}")
            else:
                parts.append(f"+ {body}" if v > 0 else f"- {body}")
        return " ".join(parts)

    def to_json(self) -> list[list]:
        """JSON form: ascending [L-exponent, "num/den"] pairs."""
        return [[e, str(v)] for e, v in sorted(self.c.items())]

    @classmethod
    def from_json(cls, data: Iterable[Iterable]) -> TatePoly:
        return cls((int(e), Fraction(str(v))) for e, v in data)


def _as_poly(value: TatePoly | Scalar) -> TatePoly:
    return value if isinstance(value, TatePoly) else TatePoly.const(value)


def _dense(p: TatePoly, base: int) -> list[Fraction]:
    out = [Fraction(0)] * (p.max_exp() - base + 1)
    for e, v in p.c.items():
        out[e - base] = v
    return out


def _polydivmod(a: list[Fraction], b: list[Fraction]) -> tuple[list[Fraction], list[Fraction]]:
    """Quotient and remainder of dense Q[x] polynomials (ascending coefficients)."""
    while b and not b[-1]:
        b = b[:-1]
    if not b:
        raise ZeroDivisionError("polynomial division by zero")
    r = list(a)
    q = [Fraction(0)] * max(0, len(a) - len(b) + 1)
    lead = b[-1]
    for i in range(len(a) - len(b), -1, -1):
        coeff = r[i + len(b) - 1] / lead
        if coeff:
            q[i] = coeff
            for j, bv in enumerate(b):
                r[i + j] -= coeff * bv
    return q, r


def cyclotomic_unit(i: int) -> TatePoly:
    """The denominator factor L^i - 1 (i >= 1)."""
    if i < 1:
        raise ValueError("cyclotomic index must be >= 1")
    return TatePoly({i: 1, 0: -1})


def tate_eval(p: TatePoly, q: Scalar) -> Fraction:
    """Counting specialization L -> q of a Laurent polynomial.

    Raises ZeroBase when p involves a negative power of L and q = 0.
    """
    return p.eval(q)
