"""Certified counting of liftable residues of polynomial systems over Z/p^{n+1}.

``count_liftable`` counts residues a mod p^{n+1} with f(a) = 0 mod p^{n+1}
(and reducing into the locus W mod p) that admit a lift solving f modulo
p^{n+1+maxDepth}.  The search subdivides Z_p^m into cells b + p^S Z^m and
decides whole cells at once:

* Over a cell, f_i equals f_i(b) modulo p^H where H is the minimal p-order of
  the scaled Hasse-derivative jets  jet_a = D^[a]f_i(b) * p^{S|a|}, a != 0.
  If some f_i(b) has order F0 < H, every point of the cell has order exactly
  F0 -- the cell is dead past level F0 and all residues inside are excluded
  with proof.  If min(F0, H) >= K = n+1+maxDepth, every point of the cell
  solves f mod p^K and all residues inside are counted.
* Otherwise the cell splits into p^m children at scale S+1.  A child whose
  values have order < H+1 is dead outright, because child jets always gain at
  least one order per scale (D^[a]f(b+u) expands in parent jets of index
  >= a, each scaled by p^{|a|} more).

Certificates upgrade counted residues to proven members of the projection of
the exact solution set: an exact integer zero, or Hensel's criterion on a
maximal minor of the Jacobian (order v): if ord f(b) > 2v and
ord f(b) - v >= n+1, Newton iteration converges to a true zero agreeing with
b mod p^{n+1}.  A run is certified when every counted residue carries a
certificate; exclusions are always proof-backed.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from math import comb
from typing import Iterable, Mapping, Sequence

import numpy as np

from .counting import BudgetExceeded

__all__ = ["IntPoly", "LiftResult", "count_liftable", "DEFAULT_NODE_BUDGET"]

DEFAULT_NODE_BUDGET = 10_000_000
_INF = math.inf


# ---------------------------------------------------------------------------
# integer polynomials
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class IntPoly:
    """Polynomial over Z in variables x1..x{nvars}, sparse exponent-vector form."""

    nvars: int
    terms: tuple[tuple[tuple[int, ...], int], ...]  # sorted ((e1..em), coeff), coeff != 0

    @classmethod
    def make(cls, nvars: int, terms: Mapping[tuple[int, ...], int]) -> IntPoly:
        clean = {tuple(e): int(c) for e, c in terms.items() if c}
        for e in clean:
            if len(e) != nvars or any(x < 0 for x in e):
                raise ValueError(f"bad exponent vector {e} for {nvars} variables")
        return cls(nvars, tuple(sorted(clean.items())))

    @classmethod
    def parse(cls, text: str, nvars: int | None = None) -> IntPoly:
        return _parse_poly(text, nvars)

    def eval(self, point: Sequence[int]) -> int:
        if len(point) != self.nvars:
            raise ValueError("point dimension mismatch")
        total = 0
        for expo, coeff in self.terms:
            v = coeff
            for x, e in zip(point, expo):
                if e:
                    v *= x**e
            total += v
        return total

    def hasse_deriv(self, alpha: Sequence[int]) -> IntPoly:
        """Divided-power derivative: D^[alpha] x^e = C(e, alpha) x^{e-alpha}."""
        out: dict[tuple[int, ...], int] = {}
        for expo, coeff in self.terms:
            if any(a > e for a, e in zip(alpha, expo)):
                continue
            c = coeff
            for a, e in zip(alpha, expo):
                c *= comb(e, a)
            key = tuple(e - a for a, e in zip(alpha, expo))
            out[key] = out.get(key, 0) + c
        return IntPoly.make(self.nvars, out)

    def gradient(self) -> list[IntPoly]:
        units = [tuple(1 if j == i else 0 for j in range(self.nvars)) for i in range(self.nvars)]
        return [self.hasse_deriv(u) for u in units]

    def max_exponents(self) -> tuple[int, ...]:
        if not self.terms:
            return (0,) * self.nvars
        return tuple(max(e[i] for e, _ in self.terms) for i in range(self.nvars))

    def is_zero(self) -> bool:
        return not self.terms

    def __str__(self) -> str:
        if not self.terms:
            return "0"
        parts = []
        for expo, coeff in self.terms:
            vars_ = "*".join(
                f"x{i + 1}" + (f"^{e}" if e > 1 else "") for i, e in enumerate(expo) if e
            )
            if not vars_:
                parts.append(str(coeff))
            elif coeff == 1:
                parts.append(vars_)
            elif coeff == -1:
                parts.append(f"-{vars_}")
            else:
                parts.append(f"{coeff}*{vars_}")
        text = " + ".join(parts).replace("+ -", "- ")
        return text


_ALIASES = {"x": 1, "y": 2, "z": 3, "w": 4}


class _PolyParser:
    """expr := term (('+'|'-') term)*; term := factor ('*' factor)*;
    factor := '-' factor | atom ('^' INT)?; atom := INT | VAR | '(' expr ')'."""

    def __init__(self, text: str):
        self.text = text
        self.pos = 0

    def _skip(self) -> None:
        while self.pos < len(self.text) and self.text[self.pos].isspace():
            self.pos += 1

    def _peek(self) -> str:
        self._skip()
        return self.text[self.pos] if self.pos < len(self.text) else ""

    def _expect(self, ch: str) -> None:
        if self._peek() != ch:
            raise ValueError(f"expected {ch!r} at position {self.pos} in {self.text!r}")
        self.pos += 1

    def parse(self) -> dict[tuple[int, ...], int]:
        out = self._expr()
        self._skip()
        if self.pos != len(self.text):
            raise ValueError(f"trailing input at position {self.pos} in {self.text!r}")
        return out

    def _expr(self) -> dict:
        acc = self._term()
        while self._peek() in ("+", "-"):
            op = self._peek()
            self.pos += 1
            rhs = self._term()
            sign = 1 if op == "+" else -1
            for k, v in rhs.items():
                acc[k] = acc.get(k, 0) + sign * v
        return acc

    def _term(self) -> dict:
        acc = self._factor()
        while self._peek() == "*":
            self.pos += 1
            acc = _poly_mul(acc, self._factor())
        return acc

    def _factor(self) -> dict:
        if self._peek() == "-":
            self.pos += 1
            return {k: -v for k, v in self._factor().items()}
        base = self._atom()
        if self._peek() == "^":
            self.pos += 1
            e = self._int()
            if e < 0:
                raise ValueError("negative exponent")
            out = {(): 1}
            for _ in range(e):
                out = _poly_mul(out, base)
            return out
        return base

    def _atom(self) -> dict:
        ch = self._peek()
        if ch == "(":
            self.pos += 1
            inner = self._expr()
            self._expect(")")
            return inner
        if ch.isdigit():
            return {(): self._int()}
        if ch.isalpha():
            self.pos += 1
            if self._peek().isdigit() and ch == "x":
                idx = self._int()
                if idx < 1:
                    raise ValueError("variables are numbered from x1")
            elif ch in _ALIASES:
                idx = _ALIASES[ch]
            else:
                raise ValueError(f"unknown variable {ch!r} in {self.text!r}")
            return {(idx,): 1}  # store var index; widened later
        raise ValueError(f"unexpected character {ch!r} at position {self.pos} in {self.text!r}")

    def _int(self) -> int:
        self._skip()
        start = self.pos
        while self.pos < len(self.text) and self.text[self.pos].isdigit():
            self.pos += 1
        if start == self.pos:
            raise ValueError(f"expected integer at position {start} in {self.text!r}")
        return int(self.text[start : self.pos])


def _poly_mul(a: dict, b: dict) -> dict:
    out: dict = {}
    for ka, va in a.items():
        for kb, vb in b.items():
            k = tuple(sorted(ka + kb))
            out[k] = out.get(k, 0) + va * vb
    return out


def _parse_poly(text: str, nvars: int | None) -> IntPoly:
    raw = _PolyParser(text).parse()
    width = nvars if nvars is not None else max((max(k) for k in raw if k), default=1)
    terms: dict[tuple[int, ...], int] = {}
    for k, v in raw.items():
        if k and max(k) > width:
            raise ValueError(f"variable x{max(k)} out of range (nvars={width})")
        expo = [0] * width
        for idx in k:
            expo[idx - 1] += 1
        key = tuple(expo)
        terms[key] = terms.get(key, 0) + v
    return IntPoly.make(width, terms)


# ---------------------------------------------------------------------------
# modular helpers
# ---------------------------------------------------------------------------


def _ordp(value: int, p: int) -> float | int:
    if value == 0:
        return _INF
    v, k = abs(value), 0
    while v % p == 0:
        v //= p
        k += 1
    return k


def _mulmod_vec(a: np.ndarray, b: np.ndarray, modulus: int) -> np.ndarray:
    """a*b mod modulus for int64 arrays, safe for modulus < 2^61.

    Shift-and-add over width-w limbs of b: with r, a < modulus < 2^bits and
    w <= 62 - bits, both r << w and a*limb stay below 2^62.
    """
    if modulus <= 1 << 31:
        return (a * b) % modulus
    bits = modulus.bit_length()
    w = max(1, 62 - bits)
    steps = -(-bits // w)
    mask = (1 << w) - 1
    r = np.zeros_like(a)
    for k in range(steps - 1, -1, -1):
        limb = (b >> (k * w)) & mask
        r = ((r << w) + a * limb) % modulus
    return r


def _ord_vec(vals: np.ndarray, p: int, cap: int) -> np.ndarray:
    ords = np.full(vals.shape, cap, dtype=np.int64)
    cur = vals.copy()
    for t in range(cap):
        hit = (ords == cap) & (cur != 0) & (cur % p != 0)
        ords[hit] = t
        cur //= p
    return ords


# ---------------------------------------------------------------------------
# the cell tree
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class LiftResult:
    count: int
    certified: bool
    nodes: int

    @property
    def method(self) -> str:
        return "hensel-certified" if self.certified else "stabilized-uncertified"

    def __iter__(self):
        yield self.count
        yield self.certified


class _System:
    def __init__(self, polys: list[IntPoly], p: int, K: int, n: int, nvars: int):
        self.polys = polys
        self.p = p
        self.K = K
        self.n = n
        self.modulus = p**K
        self.nvars = nvars
        # nonzero Hasse derivatives, shared across all cells
        self.jets: list[tuple[tuple[int, ...], int, IntPoly]] = []
        for poly in polys:
            hull = poly.max_exponents()
            for alpha in itertools.product(*(range(e + 1) for e in hull)):
                if sum(alpha) == 0:
                    continue
                dp = poly.hasse_deriv(alpha)
                if not dp.is_zero():
                    self.jets.append((alpha, sum(alpha), dp))
        self.jacobian = [poly.gradient() for poly in polys]
        self.vectorized = self.modulus < 1 << 61
        self.offsets = np.array(
            list(itertools.product(range(p), repeat=self.nvars)), dtype=np.int64
        )

    def f_order(self, b: tuple[int, ...]) -> float | int:
        return min((_ordp(poly.eval(b), self.p) for poly in self.polys), default=_INF)

    def horizon(self, b: tuple[int, ...], S: int) -> float | int:
        h: float | int = _INF
        for _, weight, dp in self.jets:
            o = _ordp(dp.eval(b), self.p)
            if o + S * weight < h:
                h = o + S * weight
        return h

    def exact_zero(self, b: tuple[int, ...]) -> bool:
        return all(poly.eval(b) == 0 for poly in self.polys)

    def hensel_bound(self, b: tuple[int, ...]) -> float | int:
        """Minimal p-order over maximal minors of the Jacobian at b (r = #polys)."""
        r = len(self.polys)
        if r == 0 or r > self.nvars or r > 3:
            return _INF
        rows = [[g.eval(b) for g in grad] for grad in self.jacobian]
        best: float | int = _INF
        for cols in itertools.combinations(range(self.nvars), r):
            sub = [[rows[i][j] for j in cols] for i in range(r)]
            if r == 1:
                det = sub[0][0]
            elif r == 2:
                det = sub[0][0] * sub[1][1] - sub[0][1] * sub[1][0]
            else:
                det = (
                    sub[0][0] * (sub[1][1] * sub[2][2] - sub[1][2] * sub[2][1])
                    - sub[0][1] * (sub[1][0] * sub[2][2] - sub[1][2] * sub[2][0])
                    + sub[0][2] * (sub[1][0] * sub[2][1] - sub[1][1] * sub[2][0])
                )
            o = _ordp(det, self.p)
            if o < best:
                best = o
        return best

    def surviving_children(
        self, b: tuple[int, ...], S: int, threshold: int
    ) -> list[tuple[int, ...]]:
        """Children b + p^S v whose min_i ord f_i (capped at K) reaches threshold."""
        step = self.p**S
        if self.vectorized:
            pts = np.array(b, dtype=np.int64)[None, :] + step * self.offsets
            pts %= self.modulus
            best = np.full(pts.shape[0], self.K, dtype=np.int64)
            for poly in self.polys:
                acc = np.zeros(pts.shape[0], dtype=np.int64)
                for expo, coeff in poly.terms:
                    t = np.full(pts.shape[0], coeff % self.modulus, dtype=np.int64)
                    for i, e in enumerate(expo):
                        for _ in range(e):
                            t = _mulmod_vec(t, pts[:, i], self.modulus)
                    acc = (acc + t) % self.modulus
                best = np.minimum(best, _ord_vec(acc, self.p, self.K))
            return [tuple(row) for row in pts[best >= threshold].tolist()]
        out = []
        for off in self.offsets.tolist():
            pt = tuple(x + step * v for x, v in zip(b, off))
            if min(self.f_order(pt), self.K) >= threshold:
                out.append(pt)
        return out


def count_liftable(
    f: Sequence[IntPoly | str],
    W: Sequence[IntPoly | str],
    p: int,
    n: int,
    max_depth: int,
    budget: int = DEFAULT_NODE_BUDGET,
) -> LiftResult:
    """Count residues mod p^{n+1} solving f, inside W mod p, liftable to depth max_depth."""
    if n < 0 or max_depth < 0:
        raise ValueError("n and max_depth must be >= 0")
    nvars = max(
        [poly.nvars for poly in f if isinstance(poly, IntPoly)]
        + [poly.nvars for poly in W if isinstance(poly, IntPoly)]
        + [1],
    )
    fp = [poly if isinstance(poly, IntPoly) else IntPoly.parse(poly) for poly in f]
    wp = [poly if isinstance(poly, IntPoly) else IntPoly.parse(poly) for poly in W]
    nvars = max([poly.nvars for poly in fp + wp] + [nvars])
    fp = [_widen(poly, nvars) for poly in fp]
    wp = [_widen(poly, nvars) for poly in wp]

    K = n + 1 + max_depth
    sys = _System(fp, p, K, n, nvars)
    owner_mod = p ** (n + 1)

    if p**nvars > budget:
        raise BudgetExceeded(f"root enumeration p^m = {p**nvars} exceeds budget {budget}")
    roots = [
        b
        for b in itertools.product(range(p), repeat=nvars)
        if all(poly.eval(b) % p == 0 for poly in wp) and all(poly.eval(b) % p == 0 for poly in fp)
    ]

    owners: dict[tuple[int, ...], bool] = {}
    bulk_count = 0
    bulk_certified = True
    charge = 0

    stack: list[tuple[tuple[int, ...], int]] = [(b, 1) for b in roots]
    while stack:
        b, S = stack.pop()
        charge += 1
        if charge > budget:
            raise BudgetExceeded(f"cell tree exceeded budget of {budget} nodes")
        F0 = sys.f_order(b)
        single = S >= n + 1
        if single:
            owner = tuple(x % owner_mod for x in b)
            if F0 == _INF and sys.exact_zero(b):
                owners[owner] = True
                continue
            v = sys.hensel_bound(b)
            if v != _INF and F0 > 2 * v and F0 - v >= n + 1:
                owners[owner] = True
                continue
        H = sys.horizon(b, S)
        effective = min(F0, H)
        if effective >= K:
            if single:
                owners.setdefault(owner, False)
            else:
                width = p ** ((n + 1 - S) * nvars)
                bulk_count += width
                bulk_certified = bulk_certified and F0 == _INF and H == _INF
            continue
        if F0 < H:
            continue  # f has order exactly F0 < K on the whole cell: dead
        # branch, discarding children whose order cannot reach the child horizon
        charge += p**nvars
        if charge > budget:
            raise BudgetExceeded(f"cell tree exceeded budget of {budget} nodes")
        for child in sys.surviving_children(b, S, min(H + 1, K)):
            stack.append((child, S + 1))

    count = bulk_count + len(owners)
    certified = (bulk_count == 0 or bulk_certified) and all(owners.values())
    return LiftResult(count=count, certified=certified, nodes=charge)


def _widen(poly: IntPoly, nvars: int) -> IntPoly:
    if poly.nvars == nvars:
        return poly
    return IntPoly.make(nvars, {e + (0,) * (nvars - poly.nvars): c for e, c in poly.terms})
