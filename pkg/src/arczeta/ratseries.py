"""Rational power series in T over Q[L, L^-1, (L^i - 1)^-1].

A `RatSeries` is numerator / denominator where

* the numerator is a polynomial in T with `TatePoly` coefficients, stored as
  a sparse dict T-exponent -> TatePoly;
* the denominator is a multiset of geometric factors (1 - L^a T^b) with
  a in Z, b >= 1, plus a multiset of scalar factors (L^i - 1) with i >= 1.

All arithmetic is exact.  The shape is closed under addition and
multiplication, supports truncated expansion (coefficients must land back in
Q[L, L^-1]; otherwise `NonPolynomialCoefficient`), counting specialization
L -> q into a reduced rational function over Q (`rs_specialize`), pole
location in the T = L^alpha scale (`rs_poles_in_L`), and recovery of a
rational form from initial coefficients against a known denominator
(`rs_fit`).
"""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Mapping, Sequence, Union

from .tate import NonPolynomialCoefficient, Scalar, TatePoly, cyclotomic_unit, tate_eval


class SpecializationPole(ZeroDivisionError):
    """The counting specialization hit a vanishing denominator factor."""


class InsufficientData(ValueError):
    """Too few series coefficients to pin down a numerator."""


class NoRationalFit(ValueError):
    """The data is inconsistent with the hinted denominator."""


TNum = dict[int, TatePoly]  # numerator: T-exponent -> coefficient


# ---------------------------------------------------------------------------
# numerator (T-polynomial) helpers


def _tnum_clean(num: TNum) -> TNum:
    return {n: c for n, c in num.items() if not c.is_zero()}


def _tnum_add(x: TNum, y: TNum) -> TNum:
    out = dict(x)
    for n, c in y.items():
        s = out.get(n, TatePoly.zero()) + c
        if s.is_zero():
            out.pop(n, None)
        else:
            out[n] = s
    return out


def _tnum_mul(x: TNum, y: TNum) -> TNum:
    out: TNum = {}
    for n1, c1 in x.items():
        for n2, c2 in y.items():
            n = n1 + n2
            s = out.get(n, TatePoly.zero()) + c1 * c2
            if s.is_zero():
                out.pop(n, None)
            else:
                out[n] = s
    return out


def _tnum_scale(x: TNum, c: TatePoly) -> TNum:
    if c.is_zero():
        return {}
    return {n: v * c for n, v in x.items()}


def _tnum_mul_geom(x: TNum, a: int, b: int) -> TNum:
    """Multiply by (1 - L^a T^b)."""
    shifted = {n + b: c.shift(a) for n, c in x.items()}
    out = dict(x)
    for n, c in shifted.items():
        s = out.get(n, TatePoly.zero()) - c
        if s.is_zero():
            out.pop(n, None)
        else:
            out[n] = s
    return out


def _tnum_divmod_geom(x: TNum, a: int, b: int) -> tuple[TNum, bool]:
    """Divide by (1 - L^a T^b); returns (quotient, exact).

    Division from the top: the leading T-coefficient of the divisor is the
    unit -L^a, so the loop always terminates with a remainder of T-degree
    < b, and exactness means that remainder is zero.
    """
    r = dict(x)
    q: TNum = {}
    while r:
        n = max(r)
        if n < b:
            return q, False
        qc = r[n].shift(-a) * -1
        q[n - b] = qc
        del r[n]
        s = r.get(n - b, TatePoly.zero()) - qc
        if s.is_zero():
            r.pop(n - b, None)
        else:
            r[n - b] = s
    return q, True


def _tnum_div_cyclo(x: TNum, i: int) -> tuple[TNum, bool]:
    """Divide every coefficient by (L^i - 1); returns (quotient, exact)."""
    unit = cyclotomic_unit(i)
    out: TNum = {}
    for n, c in x.items():
        try:
            out[n] = c.exact_div(unit)
        except NonPolynomialCoefficient:
            return {}, False
    return out, True


# ---------------------------------------------------------------------------
# the series type


class RatSeries:
    """Finite expression num(L, T) / prod (1 - L^a T^b) / prod (L^i - 1)."""

    __slots__ = ("num", "geom", "cyclo")

    def __init__(
        self,
        num: Mapping[int, TatePoly] | Iterable[tuple[int, TatePoly]],
        geom: Iterable[tuple[int, int]] = (),
        cyclo: Iterable[int] = (),
    ):
        items = num.items() if isinstance(num, Mapping) else num
        self.num: TNum = _tnum_clean({int(n): c for n, c in items})
        g = []
        for a, b in geom:
            if b < 1:
                raise ValueError(f"geometric factor needs b >= 1, got b = {b}")
            g.append((int(a), int(b)))
        self.geom: tuple[tuple[int, int], ...] = tuple(sorted(g, key=lambda ab: (ab[1], ab[0])))
        c = [int(i) for i in cyclo]
        if any(i < 1 for i in c):
            raise ValueError("cyclotomic factor index must be >= 1")
        self.cyclo: tuple[int, ...] = tuple(sorted(c))

    # -- constructors --------------------------------------------------------

    @classmethod
    def zero(cls) -> RatSeries:
        return cls({})

    @classmethod
    def one(cls) -> RatSeries:
        return cls({0: TatePoly.one()})

    @classmethod
    def const(cls, c: TatePoly | Scalar) -> RatSeries:
        c = c if isinstance(c, TatePoly) else TatePoly.const(c)
        return cls({0: c})

    @classmethod
    def geometric(cls, a: int, b: int) -> RatSeries:
        """1 / (1 - L^a T^b)."""
        return cls({0: TatePoly.one()}, geom=[(a, b)])

    @classmethod
    def monomial(cls, coeff: TatePoly | Scalar, n: int) -> RatSeries:
        c = coeff if isinstance(coeff, TatePoly) else TatePoly.const(coeff)
        return cls({n: c})

    def is_zero(self) -> bool:
        return not self.num

    # -- operators ------------------------------------------------------------

    def __add__(self, other: RatSeries) -> RatSeries:
        return rs_add(self, other)

    def __sub__(self, other: RatSeries) -> RatSeries:
        return rs_add(self, rs_scale(other, TatePoly.const(-1)))

    def __mul__(self, other: RatSeries) -> RatSeries:
        return rs_mul(self, other)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, RatSeries):
            return NotImplemented
        return rs_equal(self, other)

    def __hash__(self) -> None:  # pragma: no cover
        raise TypeError("RatSeries is not hashable")

    def __repr__(self) -> str:
        return f"RatSeries({rs_text(self)!r})"

    def __str__(self) -> str:
        return rs_text(self)


# ---------------------------------------------------------------------------
# arithmetic


def rs_scale(x: RatSeries, c: TatePoly | Scalar) -> RatSeries:
    c = c if isinstance(c, TatePoly) else TatePoly.const(c)
    return RatSeries(_tnum_scale(x.num, c), x.geom, x.cyclo)


def rs_add(x: RatSeries, y: RatSeries) -> RatSeries:
    """Sum over the least common denominator of the two factor multisets."""
    gx, gy = Counter(x.geom), Counter(y.geom)
    cx, cy = Counter(x.cyclo), Counter(y.cyclo)
    gl = gx | gy  # multiset max
    cl = cx | cy
    nx, ny = x.num, y.num
    for (a, b), mult in sorted((gl - gx).items()):
        for _ in range(mult):
            nx = _tnum_mul_geom(nx, a, b)
    for (a, b), mult in sorted((gl - gy).items()):
        for _ in range(mult):
            ny = _tnum_mul_geom(ny, a, b)
    for i, mult in sorted((cl - cx).items()):
        nx = _tnum_scale(nx, cyclotomic_unit(i) ** mult)
    for i, mult in sorted((cl - cy).items()):
        ny = _tnum_scale(ny, cyclotomic_unit(i) ** mult)
    return RatSeries(_tnum_add(nx, ny), gl.elements(), cl.elements())


def rs_mul(x: RatSeries, y: RatSeries) -> RatSeries:
    return RatSeries(
        _tnum_mul(x.num, y.num),
        tuple(x.geom) + tuple(y.geom),
        tuple(x.cyclo) + tuple(y.cyclo),
    )


def rs_equal(x: RatSeries, y: RatSeries) -> bool:
    """Exact equality by cross-multiplication (no normal form needed)."""
    nx, ny = x.num, y.num
    for a, b in y.geom:
        nx = _tnum_mul_geom(nx, a, b)
    for a, b in x.geom:
        ny = _tnum_mul_geom(ny, a, b)
    scale_x = TatePoly.one()
    for i in y.cyclo:
        scale_x = scale_x * cyclotomic_unit(i)
    scale_y = TatePoly.one()
    for i in x.cyclo:
        scale_y = scale_y * cyclotomic_unit(i)
    return _tnum_add(_tnum_scale(nx, scale_x), _tnum_scale(ny, scale_y * -1)) == {}


def rs_normalize(x: RatSeries) -> RatSeries:
    """Cancel denominator factors that divide the numerator exactly.

    Value-preserving: only common factors are removed, the numerator is never
    rescaled.  Factors are kept in canonical sorted order by the constructor.
    """
    num = x.num
    geom: list[tuple[int, int]] = []
    for a, b in x.geom:
        if num:
            q, exact = _tnum_divmod_geom(num, a, b)
            if exact:
                num = q
                continue
        geom.append((a, b))
    cyclo: list[int] = []
    for i in x.cyclo:
        if num:
            q, exact = _tnum_div_cyclo(num, i)
            if exact:
                num = q
                continue
        cyclo.append(i)
    if not num:
        return RatSeries.zero()
    return RatSeries(num, geom, cyclo)


# ---------------------------------------------------------------------------
# expansion


@dataclass
class TruncatedSeries:
    """Coefficients c_0..c_order of a series in T, each a TatePoly."""

    coeffs: list[TatePoly]
    order: int

    def __post_init__(self) -> None:
        if len(self.coeffs) != self.order + 1:
            raise ValueError("need exactly order + 1 coefficients")

    def __getitem__(self, n: int) -> TatePoly:
        return self.coeffs[n]

    def specialize(self, q: Scalar) -> list[Fraction]:
        return [tate_eval(c, q) for c in self.coeffs]


def rs_expand(x: RatSeries, order: int) -> TruncatedSeries:
    """Truncated expansion c_0..c_order with coefficients in Q[L, L^-1].

    Geometric factors expand termwise; each (L^i - 1) denominator factor must
    then divide every coefficient exactly, else NonPolynomialCoefficient.
    """
    if order < 0:
        raise ValueError("order must be >= 0")
    coeffs = [x.num.get(n, TatePoly.zero()) for n in range(order + 1)]
    for a, b in x.geom:
        # multiply the truncated series by sum_{s>=0} L^(a s) T^(b s)
        out = [TatePoly.zero()] * (order + 1)
        for n in range(order + 1):
            acc = TatePoly.zero()
            s = 0
            while b * s <= n:
                c = coeffs[n - b * s]
                if not c.is_zero():
                    acc = acc + c.shift(a * s)
                s += 1
            out[n] = acc
        coeffs = out
    for i in x.cyclo:
        unit = cyclotomic_unit(i)
        coeffs = [c.exact_div(unit) for c in coeffs]
    return TruncatedSeries(coeffs, order)


# ---------------------------------------------------------------------------
# rational functions over Q (the specialized side)


def _qtrim(p: Sequence[Fraction]) -> list[Fraction]:
    p = list(p)
    while p and not p[-1]:
        p.pop()
    return p


def _qmul(a: Sequence[Fraction], b: Sequence[Fraction]) -> list[Fraction]:
    if not a or not b:
        return []
    out = [Fraction(0)] * (len(a) + len(b) - 1)
    for i, av in enumerate(a):
        if not av:
            continue
        for j, bv in enumerate(b):
            out[i + j] += av * bv
    return out


def _qdivmod(a: Sequence[Fraction], b: Sequence[Fraction]) -> tuple[list[Fraction], list[Fraction]]:
    a, b = _qtrim(a), _qtrim(b)
    if not b:
        raise ZeroDivisionError("division by zero polynomial")
    r = list(a)
    q = [Fraction(0)] * max(0, len(a) - len(b) + 1)
    for i in range(len(a) - len(b), -1, -1):
        c = r[i + len(b) - 1] / b[-1]
        if c:
            q[i] = c
            for j, bv in enumerate(b):
                r[i + j] -= c * bv
    return q, _qtrim(r)


def _qgcd(a: Sequence[Fraction], b: Sequence[Fraction]) -> list[Fraction]:
    a, b = _qtrim(a), _qtrim(b)
    while b:
        _, r = _qdivmod(a, b)
        a, b = b, r
    if a:
        lead = a[-1]
        a = [v / lead for v in a]
    return a


@dataclass
class RatFunc:
    """Reduced rational function num/den in Q(T), den normalized to den(0)=1
    when possible (else monic)."""

    num: tuple[Fraction, ...]
    den: tuple[Fraction, ...]

    @classmethod
    def from_polys(cls, num: Sequence[Fraction], den: Sequence[Fraction]) -> RatFunc:
        num, den = _qtrim(num), _qtrim(den)
        if not den:
            raise ZeroDivisionError("zero denominator")
        if not num:
            return cls((), (Fraction(1),))
        g = _qgcd(num, den)
        if len(g) > 1:
            num, _ = _qdivmod(num, g)
            den, _ = _qdivmod(den, g)
        scale = den[0] if den[0] else den[-1]
        num = [v / scale for v in num]
        den = [v / scale for v in den]
        return cls(tuple(num), tuple(den))

    def taylor(self, order: int) -> list[Fraction]:
        """Series coefficients c_0..c_order (requires den(0) != 0)."""
        if not self.den or not self.den[0]:
            raise ZeroDivisionError("denominator vanishes at T = 0")
        d0 = self.den[0]
        out: list[Fraction] = []
        for n in range(order + 1):
            acc = self.num[n] if n < len(self.num) else Fraction(0)
            for k in range(1, min(n, len(self.den) - 1) + 1):
                acc -= self.den[k] * out[n - k]
            out.append(acc / d0)
        return out

    def __str__(self) -> str:
        return f"({_qpoly_text(self.num)}) / ({_qpoly_text(self.den)})"


def _qpoly_text(p: Sequence[Fraction]) -> str:
    if not _qtrim(list(p)):
        return "0"
    parts = []
    for i, v in enumerate(p):
        if not v:
            continue
        mag = -v if v < 0 else v
        if i == 0:
            body = str(mag)
        else:
            tpow = "T" if i == 1 else f"T^{i}"
            body = tpow if mag == 1 else f"{mag}*{tpow}"
        if not parts:
            parts.append(body if v > 0 else f"-{body}")
        else:
            parts.append(f"+ {body}" if v > 0 else f"- {body}")
    return " ".join(parts)


def rs_specialize(x: RatSeries, q: Scalar) -> RatFunc:
    """Counting specialization L -> q, as a reduced rational function of T.

    Requires q not in {0, 1, -1}: those values kill a cyclotomic factor
    (q^i - 1) or the locus L = 0, and the specialization is not defined.
    """
    q = Fraction(q)
    if q in (0, 1, -1):
        raise SpecializationPole(f"specialization undefined at q = {q}")
    scalar = Fraction(1)
    for i in x.cyclo:
        v = q**i - 1
        if v == 0:  # unreachable for |q| > 1 or non-unit rationals; kept as a guard
            raise SpecializationPole(f"factor (L^{i} - 1) vanishes at q = {q}")
        scalar *= v
    deg = max(x.num, default=0)
    num = [Fraction(0)] * (deg + 1)
    for n, c in x.num.items():
        num[n] = tate_eval(c, q) / scalar
    den: list[Fraction] = [Fraction(1)]
    for a, b in x.geom:
        factor = [Fraction(0)] * (b + 1)
        factor[0] = Fraction(1)
        factor[b] = -(q**a)
        den = _qmul(den, factor)
    return RatFunc.from_polys(num, den)


# ---------------------------------------------------------------------------
# poles in the T = L^alpha scale


def rs_poles_in_L(x: RatSeries) -> set[Fraction]:
    """Exponents alpha = -a/b of actual poles at T = L^alpha.

    Candidates come from denominator factors (1 - L^a T^b) with a != 0.  A
    candidate survives if the total multiplicity of vanishing denominator
    factors at T = L^alpha exceeds the vanishing order of the numerator
    there, computed exactly over Q[L^(1/s)] with s the reduced denominator
    of alpha.
    """
    candidates = sorted({Fraction(-a, b) for a, b in x.geom if a != 0})
    poles: set[Fraction] = set()
    for alpha in candidates:
        p0, s = alpha.numerator, alpha.denominator
        mult = sum(1 for a, b in x.geom if a * s + b * p0 == 0)
        # Vanishing order of the numerator at T = L^alpha: substitute into
        # successive T-derivatives over the ring Q[M, M^-1], M = L^(1/s).
        order = 0
        num = x.num
        while order < mult:
            sub: dict[int, Fraction] = {}
            for n, c in num.items():
                for e, v in c.c.items():
                    k = s * e + p0 * n
                    sub[k] = sub.get(k, Fraction(0)) + v
                    if not sub[k]:
                        del sub[k]
            if sub:
                break
            num = {n - 1: c * n for n, c in num.items() if n >= 1}
            order += 1
        if order < mult:
            poles.add(alpha)
    return poles


# ---------------------------------------------------------------------------
# fitting a rational form to counted data


def rs_fit(
    data: Sequence[Union[int, Fraction]],
    denom_hint: Sequence[tuple[Union[int, Fraction], int]],
) -> list[Fraction]:
    """Recover the numerator of sum(data[n] T^n) * prod(1 - c T^b).

    `data` lists series coefficients c_0..c_N; `denom_hint` lists factors
    (1 - c T^b).  The product of data and hint must be a polynomial of degree
    <= N - D, D = sum of the b's: the D trailing computable coefficients act
    as consistency checks.  Raises InsufficientData when N < D, NoRationalFit
    when a check coefficient is nonzero.
    """
    coeffs = [Fraction(v) for v in data]
    order = len(coeffs) - 1
    if order < 0:
        raise InsufficientData("no coefficients given")
    den: list[Fraction] = [Fraction(1)]
    for c, b in denom_hint:
        if b < 1:
            raise ValueError(f"hint factor needs b >= 1, got {b}")
        factor = [Fraction(0)] * (b + 1)
        factor[0] = Fraction(1)
        factor[b] = -Fraction(c)
        den = _qmul(den, factor)
    degd = len(den) - 1
    if order < degd:
        raise InsufficientData(f"need at least {degd + 1} coefficients, got {order + 1}")
    prod = [Fraction(0)] * (order + 1)
    for n in range(order + 1):
        acc = Fraction(0)
        for k in range(min(n, degd) + 1):
            acc += den[k] * coeffs[n - k]
        prod[n] = acc
    bound = order - degd
    for n in range(bound + 1, order + 1):
        if prod[n]:
            raise NoRationalFit(
                f"coefficient of T^{n} in data * denominator is {prod[n]}, expected 0"
            )
    return _qtrim(prod[: bound + 1])


# ---------------------------------------------------------------------------
# rendering and serialization


def _coeff_text(c: TatePoly) -> str:
    s = str(c)
    simple = len(c.c) == 1 and next(iter(c.c.values())) > 0
    return s if simple and "*" not in s and "/" not in s else f"({s})"


def rs_text(x: RatSeries) -> str:
    """Plain-text rendering, stable across runs."""
    if not x.num:
        return "0"
    parts = []
    for n in sorted(x.num):
        c = x.num[n]
        if n == 0:
            parts.append(str(c) if len(c.c) == 1 else f"({c})")
            continue
        tpow = "T" if n == 1 else f"T^{n}"
        if c.is_one():
            parts.append(tpow)
        else:
            parts.append(f"{_coeff_text(c)}*{tpow}")
    num_s = " + ".join(parts)
    dens = []
    for (a, b), mult in sorted(Counter(x.geom).items(), key=lambda kv: (kv[0][1], kv[0][0])):
        tpow = "T" if b == 1 else f"T^{b}"
        if a == 0:
            body = f"(1 - {tpow})"
        else:
            lpow = "L" if a == 1 else f"L^{a}"
            body = f"(1 - {lpow}*{tpow})"
        dens.append(body if mult == 1 else f"{body}^{mult}")
    for i, mult in sorted(Counter(x.cyclo).items()):
        lpow = "L" if i == 1 else f"L^{i}"
        body = f"({lpow} - 1)"
        dens.append(body if mult == 1 else f"{body}^{mult}")
    if not dens:
        return num_s
    den_s = " ".join(dens)
    if len(parts) > 1:
        num_s = f"({num_s})"
    return f"{num_s} / [{den_s}]"


def _coeff_latex(c: TatePoly) -> str:
    if not c.c:
        return "0"
    parts = []
    for e, v in sorted(c.c.items(), reverse=True):
        mag = -v if v < 0 else v
        if e == 0:
            body = str(mag) if mag.denominator == 1 else f"\\tfrac{{{mag.numerator}}}{{{mag.denominator}}}"
        else:
            lpow = "\\mathbb{L}" if e == 1 else f"\\mathbb{{L}}^{{{e}}}"
            if mag == 1:
                body = lpow
            elif mag.denominator == 1:
                body = f"{mag} {lpow}"
            else:
                body = f"\\tfrac{{{mag.numerator}}}{{{mag.denominator}}} {lpow}"
        if not parts:
            parts.append(body if v > 0 else f"-{body}")
        else:
            parts.append(f"+ {body}" if v > 0 else f"- {body}")
    return " ".join(parts)


def rs_latex(x: RatSeries) -> str:
    """LaTeX rendering with L typeset as \\mathbb{L}."""
    if not x.num:
        return "0"
    parts = []
    for n in sorted(x.num):
        c = x.num[n]
        if n == 0:
            parts.append(_coeff_latex(c) if len(c.c) == 1 else f"\\left({_coeff_latex(c)}\\right)")
            continue
        tpow = "T" if n == 1 else f"T^{{{n}}}"
        if c.is_one():
            parts.append(tpow)
        elif len(c.c) == 1:
            parts.append(f"{_coeff_latex(c)} {tpow}")
        else:
            parts.append(f"\\left({_coeff_latex(c)}\\right) {tpow}")
    num_s = " + ".join(parts)
    dens = []
    for (a, b), mult in sorted(Counter(x.geom).items(), key=lambda kv: (kv[0][1], kv[0][0])):
        tpow = "T" if b == 1 else f"T^{{{b}}}"
        if a == 0:
            body = f"\\left(1 - {tpow}\\right)"
        else:
            lpow = "\\mathbb{L}" if a == 1 else f"\\mathbb{{L}}^{{{a}}}"
            body = f"\\left(1 - {lpow} {tpow}\\right)"
        dens.append(body if mult == 1 else f"{body}^{{{mult}}}")
    for i, mult in sorted(Counter(x.cyclo).items()):
        lpow = "\\mathbb{L}" if i == 1 else f"\\mathbb{{L}}^{{{i}}}"
        body = f"\\left({lpow} - 1\\right)"
        dens.append(body if mult == 1 else f"{body}^{{{mult}}}")
    if not dens:
        return num_s
    return f"\\frac{{{num_s}}}{{{' '.join(dens)}}}"


def rs_to_json(x: RatSeries) -> dict:
    """JSON object with keys numerator, denomGeom, denomCyclo."""
    return {
        "numerator": [[n, x.num[n].to_json()] for n in sorted(x.num)],
        "denomGeom": [
            [a, b, mult]
            for (a, b), mult in sorted(Counter(x.geom).items(), key=lambda kv: (kv[0][1], kv[0][0]))
        ],
        "denomCyclo": [[i, mult] for i, mult in sorted(Counter(x.cyclo).items())],
    }


def rs_from_json(obj: Mapping) -> RatSeries:
    num = {int(n): TatePoly.from_json(c) for n, c in obj.get("numerator", [])}
    geom = []
    for a, b, mult in obj.get("denomGeom", []):
        geom.extend([(int(a), int(b))] * int(mult))
    cyclo = []
    for i, mult in obj.get("denomCyclo", []):
        cyclo.extend([int(i)] * int(mult))
    return RatSeries(num, geom, cyclo)
