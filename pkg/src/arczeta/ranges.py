"""Iterated arithmetic-progression form of Presburger sets, and weighted sums.

`to_iterated_ranges` rewrites a quantifier-free formula into finitely many
disjoint pieces; in a piece, each variable (in a fixed elimination order)
ranges over an arithmetic progression {base + step*s : s >= 0}, optionally
capped, whose base/cap are affine in the outer variables.  Bases and caps may
carry rational coefficients but are integer-valued on every admissible outer
point (the decomposition introduces the congruences that guarantee it).

`weighted_sum` then evaluates sum over all points of L^(-lweight) T^tweight
in closed form, one variable at a time, using the geometric identity
sum_{s>=0} x^(A+sB) = x^A/(1-x^B) and its polynomial-weight refinements
(finite differences for sum s^g y^s, binomial reindexing for capped tails).
The result is a RatSeries; factors (1 - L^a) without T become (L^a - 1)
denominator units.
"""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass, field
from fractions import Fraction
from math import comb, lcm
from typing import Iterable, Iterator, Mapping, Sequence

from . import presburger as pb
from .presburger import LinTerm
from .ratseries import RatSeries, rs_add
from .tate import TatePoly


class UnsupportedShape(ValueError):
    """The formula needs a range shape the normalizer does not produce."""


class DivergentSum(ArithmeticError):
    """The requested weighted sum does not converge."""


# ---------------------------------------------------------------------------
# affine forms with rational coefficients (integer-valued on admissible points)


@dataclass(frozen=True)
class AffineForm:
    coeffs: tuple[tuple[str, Fraction], ...]
    const: Fraction

    @classmethod
    def make(cls, coeffs: Mapping[str, Fraction | int], const: Fraction | int = 0) -> AffineForm:
        items = tuple(
            sorted((v, Fraction(c)) for v, c in coeffs.items() if Fraction(c) != 0)
        )
        return cls(items, Fraction(const))

    @classmethod
    def const_form(cls, c: Fraction | int) -> AffineForm:
        return cls((), Fraction(c))

    @classmethod
    def var(cls, name: str) -> AffineForm:
        return cls(((name, Fraction(1)),), Fraction(0))

    @classmethod
    def from_linterm(cls, t: LinTerm) -> AffineForm:
        return cls.make({v: Fraction(c) for v, c in t.coeffs}, Fraction(t.const))

    def as_dict(self) -> dict[str, Fraction]:
        return dict(self.coeffs)

    def coeff(self, var: str) -> Fraction:
        return self.as_dict().get(var, Fraction(0))

    def drop(self, var: str) -> AffineForm:
        return AffineForm.make({v: c for v, c in self.coeffs if v != var}, self.const)

    def add(self, other: AffineForm) -> AffineForm:
        d = self.as_dict()
        for v, c in other.coeffs:
            d[v] = d.get(v, Fraction(0)) + c
        return AffineForm.make(d, self.const + other.const)

    def sub(self, other: AffineForm) -> AffineForm:
        return self.add(other.scale(-1))

    def scale(self, k: Fraction | int) -> AffineForm:
        k = Fraction(k)
        return AffineForm.make({v: c * k for v, c in self.coeffs}, self.const * k)

    def shift(self, c: Fraction | int) -> AffineForm:
        return AffineForm(self.coeffs, self.const + Fraction(c))

    def subst(self, env: Mapping[str, AffineForm]) -> AffineForm:
        out = AffineForm.const_form(self.const)
        for v, c in self.coeffs:
            repl = env.get(v)
            out = out.add(repl.scale(c) if repl is not None else AffineForm.make({v: c}))
        return out

    def eval(self, env: Mapping[str, int]) -> Fraction:
        return self.const + sum((c * env[v] for v, c in self.coeffs), Fraction(0))

    def eval_int(self, env: Mapping[str, int]) -> int:
        v = self.eval(env)
        if v.denominator != 1:
            raise ValueError(f"form {self} is not integral at {env}")
        return v.numerator

    def is_const(self) -> bool:
        return not self.coeffs

    def vars(self) -> set[str]:
        return {v for v, _ in self.coeffs}

    def denominator_lcm(self) -> int:
        return lcm(self.const.denominator, *(c.denominator for _, c in self.coeffs)) \
            if self.coeffs else self.const.denominator

    def __str__(self) -> str:
        parts: list[str] = []
        for v, c in self.coeffs:
            if not parts:
                if c == 1:
                    parts.append(v)
                elif c == -1:
                    parts.append(f"-{v}")
                else:
                    parts.append(f"{c}*{v}")
            else:
                sign, mag = ("+", c) if c > 0 else ("-", -c)
                parts.append(f"{sign} {v}" if mag == 1 else f"{sign} {mag}*{v}")
        if self.const or not parts:
            if not parts:
                parts.append(str(self.const))
            else:
                sign, mag = ("+", self.const) if self.const > 0 else ("-", -self.const)
                parts.append(f"{sign} {mag}")
        return " ".join(parts)


# ---------------------------------------------------------------------------
# the range system


@dataclass(frozen=True)
class RangeVar:
    """var runs over {base + step*s : s >= 0}, optionally capped above."""

    var: str
    base: AffineForm  # over outer variables
    step: int
    cap: AffineForm | None = None  # aligned: cap - base == 0 mod step on the piece


@dataclass(frozen=True)
class Piece:
    ranges: tuple[RangeVar, ...]  # ordered outermost first


@dataclass(frozen=True)
class IteratedRangeSystem:
    order: tuple[str, ...]
    pieces: tuple[Piece, ...]

    def __str__(self) -> str:
        lines = []
        for i, piece in enumerate(self.pieces):
            rs = []
            for r in piece.ranges:
                body = f"{r.var} in {{{r.base} + {r.step}*s}}"
                if r.cap is not None:
                    body += f" up to {r.cap}"
                rs.append(body)
            lines.append(f"piece {i + 1}: " + "; ".join(rs))
        return "\n".join(lines) if lines else "(empty system)"

    def contains(self, point: Mapping[str, int]) -> bool:
        return any(_piece_contains(p, point) for p in self.pieces)

    def iter_points(self, tmax: Mapping[str, int]) -> Iterator[dict[str, int]]:
        """Enumerate points with each variable clipped to tmax[var]."""
        for piece in self.pieces:
            yield from _piece_points(piece, 0, {}, tmax)


def _piece_contains(piece: Piece, point: Mapping[str, int]) -> bool:
    env: dict[str, int] = {}
    for r in piece.ranges:
        v = point[r.var]
        base = r.base.eval(env)
        if base.denominator != 1:
            return False
        base = base.numerator
        if v < base or (v - base) % r.step:
            return False
        if r.cap is not None:
            cap = r.cap.eval(env)
            if Fraction(v) > cap:
                return False
        env[r.var] = v
    return True


def _piece_points(
    piece: Piece, i: int, env: dict[str, int], tmax: Mapping[str, int]
) -> Iterator[dict[str, int]]:
    if i == len(piece.ranges):
        yield dict(env)
        return
    r = piece.ranges[i]
    base = r.base.eval(env)
    if base.denominator != 1:
        raise ValueError(f"non-integral base {r.base} at {env}")
    v = base.numerator
    hi = Fraction(tmax[r.var])
    if r.cap is not None:
        hi = min(hi, r.cap.eval(env))
    while v <= hi:
        env[r.var] = v
        yield from _piece_points(piece, i + 1, env, tmax)
        del env[r.var]
        v += r.step


# ---------------------------------------------------------------------------
# decomposition: quantifier-free formula -> disjoint pieces
#
# internal constraint forms (integer coefficients):
#   _Ineq(t): t <= 0        _Congr(t, n): t == 0 mod n


@dataclass(frozen=True)
class _Ineq:
    t: LinTerm


@dataclass(frozen=True)
class _Congr:
    t: LinTerm
    n: int


def _fold_bool(f: pb.Formula, assign: dict[pb.Formula, bool]) -> pb.Formula | None:
    """Partial boolean evaluation under an atom assignment; None = undecided
    subformula (returned as-is)."""
    if isinstance(f, pb.BoolConst):
        return f
    if isinstance(f, (pb.Cmp, pb.Cong)):
        if f in assign:
            return pb.TRUE if assign[f] else pb.FALSE
        return f
    if isinstance(f, pb.Not):
        a = _fold_bool(f.arg, assign)
        if isinstance(a, pb.BoolConst):
            return pb.BoolConst(not a.value)
        return pb.Not(a)
    if isinstance(f, (pb.And, pb.Or)):
        is_and = isinstance(f, pb.And)
        absorb = pb.FALSE if is_and else pb.TRUE
        rest = []
        for a in f.args:
            a = _fold_bool(a, assign)
            if a == absorb:
                return absorb
            if isinstance(a, pb.BoolConst):
                continue
            rest.append(a)
        if not rest:
            return pb.BoolConst(is_and)
        if len(rest) == 1:
            return rest[0]
        return (pb.And if is_and else pb.Or)(tuple(rest))
    raise ValueError("formula must be quantifier-free")


def _first_atom(f: pb.Formula) -> pb.Formula | None:
    if isinstance(f, (pb.Cmp, pb.Cong)):
        return f
    if isinstance(f, pb.Not):
        return _first_atom(f.arg)
    if isinstance(f, (pb.And, pb.Or)):
        for a in f.args:
            r = _first_atom(a)
            if r is not None:
                return r
    return None


def _atom_constraints(atom: pb.Formula, value: bool) -> list[list[_Ineq | _Congr]]:
    """Disjoint alternatives of positive constraints expressing atom == value."""
    if isinstance(atom, pb.Cong):
        if value:
            return [[_Congr(atom.term, atom.modulus)]]
        return [
            [_Congr(LinTerm(atom.term.coeffs, atom.term.const + r), atom.modulus)]
            for r in range(1, atom.modulus)
        ]
    assert isinstance(atom, pb.Cmp)
    t, rel = atom.term, atom.rel
    if not value:
        rel = {"<=": ">", "<": ">=", "=": "!=", ">=": "<", ">": "<="}[rel]
    if rel == "<=":
        return [[_Ineq(t)]]
    if rel == "<":
        return [[_Ineq(LinTerm(t.coeffs, t.const + 1))]]
    if rel == ">=":
        return [[_Ineq(t.scale(-1))]]
    if rel == ">":
        s = t.scale(-1)
        return [[_Ineq(LinTerm(s.coeffs, s.const + 1))]]
    if rel == "=":
        return [[_Ineq(t), _Ineq(t.scale(-1))]]
    # rel == "!=": two disjoint strict sides
    s = t.scale(-1)
    return [
        [_Ineq(LinTerm(t.coeffs, t.const + 1))],
        [_Ineq(LinTerm(s.coeffs, s.const + 1))],
    ]


def _disjoint_conjunctions(f: pb.Formula) -> Iterator[list[_Ineq | _Congr]]:
    """Yield constraint conjunctions whose solution sets partition that of f.

    Sign-pattern expansion over atoms in first-occurrence order: assigning an
    atom both ways gives disjoint branches, and negated atoms expand into
    disjoint alternatives (residues / strict sides).
    """

    def go(g: pb.Formula, assign: dict, acc: list) -> Iterator[list]:
        g = _fold_bool(g, assign)
        if isinstance(g, pb.BoolConst):
            if g.value:
                yield list(acc)
            return
        atom = _first_atom(g)
        assert atom is not None
        for value in (True, False):
            for alt in _atom_constraints(atom, value):
                yield from go(g, {**assign, atom: value}, acc + alt)

    yield from go(f, {}, [])


def _lin_from_affine(form: AffineForm, shift: Fraction | int = 0) -> LinTerm:
    """Integer LinTerm equal to a positive multiple of (form + shift)."""
    form = form.shift(shift)
    scale = form.denominator_lcm()
    scaled = form.scale(scale)
    return LinTerm.make(
        {v: c.numerator for v, c in scaled.coeffs}, scaled.const.numerator
    )


def _affine_congruence(form: AffineForm, residue: int, modulus: int) -> _Congr:
    """Constraint: form == residue (mod modulus), scaled to integer coeffs."""
    scale = form.denominator_lcm()
    scaled = form.shift(-residue).scale(scale)
    t = LinTerm.make({v: c.numerator for v, c in scaled.coeffs}, scaled.const.numerator)
    return _Congr(t, modulus * scale)


def to_iterated_ranges(f: pb.Formula, order: Sequence[str]) -> IteratedRangeSystem:
    """Disjoint iterated-progression decomposition of a quantifier-free set.

    Variables are processed innermost (last in `order`) first.  Every
    variable must acquire a lower bound; sets unbounded below in some
    variable raise UnsupportedShape.  Non-unit coefficients and congruences
    are handled by residue case-splits that push congruence conditions onto
    the outer variables.
    """
    if not pb.is_quantifier_free(f):
        raise ValueError("to_iterated_ranges needs a quantifier-free formula")
    names = list(order)
    if len(set(names)) != len(names):
        raise ValueError("duplicate variable in order")
    extra = pb.free_vars(f) - set(names)
    if extra:
        raise ValueError(f"formula uses variables outside the order: {sorted(extra)}")

    pieces: list[Piece] = []
    for conj in _disjoint_conjunctions(f):
        pieces.extend(_ranges_for_conjunction(list(conj), names))
    return IteratedRangeSystem(tuple(names), tuple(pieces))


def _ranges_for_conjunction(
    constraints: list[_Ineq | _Congr], names: list[str]
) -> Iterator[Piece]:
    for assignment in _solve_vars(constraints, names):
        yield Piece(tuple(assignment[v] for v in names))


def _solve_vars(
    constraints: list[_Ineq | _Congr], names: list[str]
) -> Iterator[dict[str, RangeVar]]:
    """Assign a RangeVar to every name, innermost first, splitting as needed."""
    if not names:
        # only variable-free constraints may remain
        for c in constraints:
            if isinstance(c, _Ineq):
                if c.t.coeffs or c.t.const > 0:
                    if c.t.coeffs:
                        raise UnsupportedShape(f"constraint {c.t} <= 0 left unresolved")
                    return  # constant false: dead piece
            else:
                if c.t.coeffs:
                    raise UnsupportedShape(f"constraint {c.t} == 0 mod {c.n} left unresolved")
                if c.t.const % c.n:
                    return
        yield {}
        return

    var = names[-1]
    outer = names[:-1]
    mine = [c for c in constraints if c.t.coeff(var)]
    rest = [c for c in constraints if not c.t.coeff(var)]

    for step, residue, extra1 in _congruence_split(mine, var):
        ineqs = [c for c in mine if isinstance(c, _Ineq)]
        for lowers, uppers, extra2 in _bound_split(ineqs, var):
            for base, extra3 in _pick_base(lowers, step, residue):
                for cap, extra4 in _pick_cap(uppers, base, step):
                    carried = rest + extra1 + extra2 + extra3 + extra4
                    rv = RangeVar(var, base, step, cap)
                    for inner in _solve_vars(carried, outer):
                        yield {**inner, var: rv}


def _congruence_split(
    mine: list[_Ineq | _Congr], var: str
) -> Iterator[tuple[int, int, list[_Congr]]]:
    """Split on var's residue: yields (step, residue, outer conditions)."""
    congs = [c for c in mine if isinstance(c, _Congr)]
    if not congs:
        yield 1, 0, []
        return
    step = lcm(*(c.n for c in congs))
    for rho in range(step):
        conds = []
        ok = True
        for c in congs:
            coef = c.t.coeff(var)
            t = c.t.drop_var(var)
            shifted = LinTerm(t.coeffs, t.const + coef * rho)
            if not shifted.coeffs:
                if shifted.const % c.n:
                    ok = False
                    break
            else:
                conds.append(_Congr(shifted, c.n))
        if ok:
            yield step, rho, conds


def _bound_split(
    ineqs: list[_Ineq], var: str
) -> Iterator[tuple[list[AffineForm], list[AffineForm], list[_Congr]]]:
    """Turn c*var + t <= 0 atoms into exact affine lower/upper bounds.

    Non-unit |c| needs the value of t mod |c|; each residue choice adds a
    congruence condition on the outer variables (disjoint alternatives).
    """
    bounds: list[tuple[str, AffineForm, int]] = []  # (kind, u, d): var <=/>= u/d
    for c in ineqs:
        coef = c.t.coeff(var)
        t = AffineForm.from_linterm(c.t.drop_var(var))
        if coef > 0:
            bounds.append(("upper", t.scale(-1), coef))
        else:
            bounds.append(("lower", t, -coef))

    def go(i: int, lowers: list, uppers: list, conds: list) -> Iterator:
        if i == len(bounds):
            yield lowers, uppers, conds
            return
        kind, u, d = bounds[i]
        if d == 1:
            nl = lowers + [u] if kind == "lower" else lowers
            nu = uppers + [u] if kind == "upper" else uppers
            yield from go(i + 1, nl, nu, conds)
            return
        for r in range(d):
            # u == r (mod d); lower: ceil(u/d) = (u - r)/d + (1 if r else 0)
            cond = _affine_congruence(u, r, d)
            bound = u.shift(-r).scale(Fraction(1, d))
            if kind == "lower" and r:
                bound = bound.shift(1)
            nl = lowers + [bound] if kind == "lower" else list(lowers)
            nu = uppers + [bound] if kind == "upper" else list(uppers)
            yield from go(i + 1, nl, nu, conds + [cond])

    yield from go(0, [], [], [])


def _pick_base(
    lowers: list[AffineForm], step: int, residue: int
) -> Iterator[tuple[AffineForm, list[_Ineq | _Congr]]]:
    """Choose the max lower bound (disjoint case split), then align it to the
    residue class; alignment needs the bound's value mod step."""
    if not lowers:
        raise UnsupportedShape("variable has no lower bound")
    for i, b in enumerate(lowers):
        conds: list[_Ineq | _Congr] = []
        # b is the max: strictly greater than earlier ones, >= later ones
        for j, other in enumerate(lowers):
            if j == i:
                continue
            diff = other.sub(b)  # require diff <= 0 (or <= -1 for j < i)
            conds.append(_Ineq(_lin_from_affine(diff, 1 if j < i else 0)))
        if step == 1:
            yield b, conds
            continue
        for sigma in range(step):
            cond = _affine_congruence(b, sigma, step)
            base = b.shift((residue - sigma) % step)
            yield base, conds + [cond]


def _pick_cap(
    uppers: list[AffineForm], base: AffineForm, step: int
) -> Iterator[tuple[AffineForm | None, list[_Ineq | _Congr]]]:
    """Choose the min upper bound (disjoint split), align to the progression,
    and keep only the branch where the range is nonempty."""
    if not uppers:
        yield None, []
        return
    for i, u in enumerate(uppers):
        conds: list[_Ineq | _Congr] = []
        for j, other in enumerate(uppers):
            if j == i:
                continue
            diff = u.sub(other)  # require u <= other (strict for j < i)
            conds.append(_Ineq(_lin_from_affine(diff, 1 if j < i else 0)))
        if step == 1:
            gap = base.sub(u)  # nonempty: base <= u
            yield u, conds + [_Ineq(_lin_from_affine(gap))]
            continue
        for tau in range(step):
            cond = _affine_congruence(u.sub(base), tau, step)
            cap = u.shift(-tau)
            gap = base.sub(cap)
            yield cap, conds + [cond, _Ineq(_lin_from_affine(gap))]


# ---------------------------------------------------------------------------
# weighted geometric summation


@dataclass
class _Term:
    coef: Fraction
    mono: dict[str, int]  # powers of progression indices still to be summed
    lexp: AffineForm
    texp: AffineForm
    denom: Counter = field(default_factory=Counter)  # (a, b) -> mult of (1 - L^a T^b)


def _finite_diffs(gamma: int) -> list[int]:
    """a_i = i-th forward difference of s^gamma at 0, so that
    s^gamma = sum_i a_i * C(s, i)."""
    vals = [s**gamma for s in range(gamma + 1)]
    out = []
    while vals:
        out.append(vals[0])
        vals = [vals[k + 1] - vals[k] for k in range(len(vals) - 1)]
    return out


_Poly = dict[tuple[tuple[str, int], ...], Fraction]  # monomials in index vars


def _poly_from_affine(form: AffineForm) -> _Poly:
    out: _Poly = {}
    if form.const:
        out[()] = form.const
    for v, c in form.coeffs:
        out[((v, 1),)] = c
    return out


def _poly_mul(a: _Poly, b: _Poly) -> _Poly:
    out: _Poly = {}
    for m1, c1 in a.items():
        for m2, c2 in b.items():
            d = dict(m1)
            for v, e in m2:
                d[v] = d.get(v, 0) + e
            key = tuple(sorted(d.items()))
            out[key] = out.get(key, Fraction(0)) + c1 * c2
            if not out[key]:
                del out[key]
    return out


def _poly_pow(a: _Poly, e: int) -> _Poly:
    out: _Poly = {(): Fraction(1)}
    for _ in range(e):
        out = _poly_mul(out, a)
    return out


def _binom_poly(form: AffineForm, k: int) -> _Poly:
    """C(form, k) = form (form-1) ... (form-k+1) / k! as a polynomial."""
    out: _Poly = {(): Fraction(1)}
    for j in range(k):
        out = _poly_mul(out, _poly_from_affine(form.shift(-j)))
    return {m: c / Fraction(_factorial(k)) for m, c in out.items()}


def _factorial(k: int) -> int:
    r = 1
    for i in range(2, k + 1):
        r *= i
    return r


def _int_coeff(x: Fraction, what: str) -> int:
    if x.denominator != 1:
        raise UnsupportedShape(f"non-integer {what} coefficient {x}")
    return x.numerator


def _sum_one_var(terms: list[_Term], s: str, cnt: AffineForm | None) -> list[_Term]:
    """Replace each term by its closed-form sum over s = 0..(cnt-1) (or all
    s >= 0 when cnt is None)."""
    out: list[_Term] = []
    for t in terms:
        gamma = t.mono.pop(s, 0)
        bl = _int_coeff(t.lexp.coeff(s), "L-exponent")
        bt = _int_coeff(t.texp.coeff(s), "T-exponent")
        al, at = t.lexp.drop(s), t.texp.drop(s)
        base = _Term(t.coef, dict(t.mono), al, at, Counter(t.denom))
        if bl == 0 and bt == 0:
            if cnt is None:
                raise DivergentSum(f"index {s} does not move the weights")
            # pure counting: sum_{s=0}^{cnt-1} s^gamma
            for mono, c in _power_sum_poly(gamma, cnt).items():
                out.append(_with_poly(base, mono, c))
            continue
        convergent = bt > 0 or (bt == 0 and bl < 0)
        if cnt is None:
            if not convergent:
                raise DivergentSum(
                    f"sum over {s} diverges: step exponent T^{bt} L^{bl}"
                )
            out.extend(_open_sum(base, gamma, bl, bt))
            continue
        if not convergent:
            # reverse the index: s -> (cnt-1) - s, making the step convergent
            rev: list[_Term] = []
            top_l = al.add(cnt.shift(-1).scale(bl))
            top_t = at.add(cnt.shift(-1).scale(bt))
            for j in range(gamma + 1):
                cpoly = _poly_pow(_poly_from_affine(cnt.shift(-1)), gamma - j)
                for mono, c in cpoly.items():
                    nt = _with_poly(
                        _Term(
                            base.coef * comb(gamma, j) * (-1) ** j,
                            dict(base.mono),
                            top_l,
                            top_t,
                            Counter(base.denom),
                        ),
                        mono,
                        c,
                    )
                    nt.mono[s] = nt.mono.get(s, 0) + j
                    nt.lexp = nt.lexp.add(AffineForm.make({s: -bl}))
                    nt.texp = nt.texp.add(AffineForm.make({s: -bt}))
                    rev.append(nt)
            out.extend(_sum_one_var(rev, s, cnt))
            continue
        # convergent capped sum: full sum minus the tail starting at s = cnt
        out.extend(_open_sum(base, gamma, bl, bt))
        for j in range(gamma + 1):
            cpoly = _poly_pow(_poly_from_affine(cnt), gamma - j)
            tail_l = al.add(cnt.scale(bl))
            tail_t = at.add(cnt.scale(bt))
            for mono, c in cpoly.items():
                tail = _with_poly(
                    _Term(
                        -base.coef * comb(gamma, j),
                        dict(base.mono),
                        tail_l,
                        tail_t,
                        Counter(base.denom),
                    ),
                    mono,
                    c,
                )
                out.extend(_open_sum(tail, j, bl, bt))
    return out


def _with_poly(t: _Term, mono: tuple[tuple[str, int], ...], c: Fraction) -> _Term:
    nt = _Term(t.coef * c, dict(t.mono), t.lexp, t.texp, Counter(t.denom))
    for v, e in mono:
        nt.mono[v] = nt.mono.get(v, 0) + e
    return nt


def _power_sum_poly(gamma: int, cnt: AffineForm) -> _Poly:
    """sum_{s=0}^{cnt-1} s^gamma as a polynomial in the outer indices."""
    out: _Poly = {}
    for i, a in enumerate(_finite_diffs(gamma)):
        if not a:
            continue
        # sum_{s=0}^{S} C(s, i) = C(S+1, i+1) with S+1 = cnt
        for m, c in _binom_poly(cnt, i + 1).items():
            out[m] = out.get(m, Fraction(0)) + a * c
            if not out[m]:
                del out[m]
    return out


def _open_sum(t: _Term, gamma: int, bl: int, bt: int) -> list[_Term]:
    """sum_{s>=0} s^gamma x^(A + sB) = sum_i a_i x^(A+iB) / (1-x^B)^(i+1)."""
    out = []
    for i, a in enumerate(_finite_diffs(gamma)):
        if not a:
            continue
        nt = _Term(
            t.coef * a,
            dict(t.mono),
            t.lexp.shift(i * bl),
            t.texp.shift(i * bt),
            Counter(t.denom),
        )
        nt.denom[(bl, bt)] += i + 1
        out.append(nt)
    return out


def weighted_sum(
    sys: IteratedRangeSystem, lweight: AffineForm, tweight: AffineForm
) -> RatSeries:
    """Closed form of sum over sys of L^(-lweight(x)) * T^(tweight(x)).

    Convergence: along every uncapped direction the T-weight must strictly
    increase, or failing that the L-weight must strictly increase (the sum
    then converges through (L^i - 1)^-1 denominators); otherwise DivergentSum.
    """
    total = RatSeries.zero()
    for piece in sys.pieces:
        # express each original variable affinely in the progression indices
        env: dict[str, AffineForm] = {}
        caps: list[tuple[str, AffineForm | None]] = []
        for r in piece.ranges:
            idx = f"s_{r.var}"
            base = r.base.subst(env)
            env[r.var] = base.add(AffineForm.make({idx: r.step}))
            for v, c in env[r.var].coeffs:
                _int_coeff(c, f"progression for {r.var}")
            if r.cap is None:
                caps.append((idx, None))
            else:
                span = r.cap.subst(env).sub(base)
                cnt = span.scale(Fraction(1, r.step)).shift(1)  # S + 1 terms
                for v, c in cnt.coeffs:
                    _int_coeff(c, f"cap for {r.var}")
                _int_coeff(cnt.const, f"cap for {r.var}")
                caps.append((idx, cnt))
        terms = [
            _Term(
                Fraction(1),
                {},
                lweight.subst(env).scale(-1),
                tweight.subst(env),
            )
        ]
        for idx, cnt in reversed(caps):
            terms = _sum_one_var(terms, idx, cnt)
        for t in terms:
            if t.mono:
                raise UnsupportedShape(f"unsummed indices {sorted(t.mono)} remain")
            total = rs_add(total, _term_to_series(t))
    return total


def _term_to_series(t: _Term) -> RatSeries:
    if not t.lexp.is_const() or not t.texp.is_const():
        raise UnsupportedShape("weights did not reduce to constants")
    lexp = _int_coeff(t.lexp.const, "L-exponent")
    texp = _int_coeff(t.texp.const, "T-exponent")
    coef = t.coef
    geom: list[tuple[int, int]] = []
    cyclo: list[int] = []
    for (a, b), mult in sorted(t.denom.items()):
        if b < 0:
            raise UnsupportedShape(f"negative T-step in factor (1 - L^{a} T^{b})")
        if b > 0:
            geom.extend([(a, b)] * mult)
            continue
        # T-free factor (1 - L^a): convergence guaranteed a < 0; rewrite
        # 1/(1 - L^a) = L^-a / (L^-a - 1)
        if a >= 0:
            raise DivergentSum(f"factor (1 - L^{a}) is not invertible here")
        lexp += -a * mult
        cyclo.extend([-a] * mult)
    if texp < 0:
        raise UnsupportedShape(f"negative T-exponent {texp}")
    num = {texp: TatePoly({lexp: coef})}
    return RatSeries(num, geom, cyclo)
