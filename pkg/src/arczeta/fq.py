"""Finite fields F_{p^d} with a fixed modulus table, and truncated power series.

Elements of F_{p^d} are coefficient tuples (c_0, ..., c_{d-1}) of residues mod
p, the coordinates with respect to the basis 1, u, ..., u^{d-1} where u is a
root of the table modulus.  The moduli are pinned data (not searched at run
time) so that element encodings, and therefore every enumeration and report
downstream, are stable across runs and machines.

:class:`TruncPow` is the scalar model of F_q[t]/t^{n+1} used by small paths
and reference computations; bulk enumeration vectorizes the same arithmetic
over numpy arrays instead (see :mod:`arczeta.counting`).
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterator

__all__ = ["is_prime", "Fq", "TruncPow", "IRREDUCIBLE"]


_SMALL_PRIMES = (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37)


def is_prime(n: int) -> bool:
    """Deterministic Miller-Rabin, exact for all 64-bit integers."""
    if n < 2:
        return False
    for p in _SMALL_PRIMES:
        if n % p == 0:
            return n == p
    d, s = n - 1, 0
    while d % 2 == 0:
        d //= 2
        s += 1
    for a in _SMALL_PRIMES:
        x = pow(a, d, n)
        if x in (1, n - 1):
            continue
        for _ in range(s - 1):
            x = x * x % n
            if x == n - 1:
                break
        else:
            return False
    return True


# Modulus table: (p, d) -> (c_0, ..., c_{d-1}) for f(u) = u^d + c_{d-1}u^{d-1} + ... + c_0,
# the first irreducible in the base-p counting order of the coefficient vector.
IRREDUCIBLE: dict[tuple[int, int], tuple[int, ...]] = {
    (2, 1): (1,),
    (2, 2): (1, 1),
    (2, 3): (1, 1, 0),
    (2, 4): (1, 1, 0, 0),
    (2, 5): (1, 0, 1, 0, 0),
    (2, 6): (1, 1, 0, 0, 0, 0),
    (2, 7): (1, 1, 0, 0, 0, 0, 0),
    (2, 8): (1, 1, 0, 1, 1, 0, 0, 0),
    (2, 9): (1, 1, 0, 0, 0, 0, 0, 0, 0),
    (2, 10): (1, 0, 0, 1, 0, 0, 0, 0, 0, 0),
    (2, 11): (1, 0, 1, 0, 0, 0, 0, 0, 0, 0, 0),
    (2, 12): (1, 0, 0, 1, 0, 0, 0, 0, 0, 0, 0, 0),
    (3, 1): (1,),
    (3, 2): (1, 0),
    (3, 3): (1, 2, 0),
    (3, 4): (2, 1, 0, 0),
    (3, 5): (1, 2, 0, 0, 0),
    (3, 6): (2, 1, 0, 0, 0, 0),
    (3, 7): (2, 0, 1, 0, 0, 0, 0),
    (3, 8): (2, 0, 1, 0, 0, 0, 0, 0),
    (3, 9): (1, 0, 1, 2, 0, 0, 0, 0, 0),
    (3, 10): (1, 0, 2, 0, 0, 0, 0, 0, 0, 0),
    (3, 11): (2, 0, 1, 0, 0, 0, 0, 0, 0, 0, 0),
    (3, 12): (2, 0, 1, 0, 0, 0, 0, 0, 0, 0, 0, 0),
    (5, 1): (1,),
    (5, 2): (2, 0),
    (5, 3): (1, 1, 0),
    (5, 4): (2, 0, 0, 0),
    (5, 5): (1, 4, 0, 0, 0),
    (5, 6): (2, 1, 0, 0, 0, 0),
    (5, 7): (1, 1, 0, 0, 0, 0, 0),
    (5, 8): (2, 0, 0, 0, 0, 0, 0, 0),
    (5, 9): (3, 2, 1, 0, 0, 0, 0, 0, 0),
    (5, 10): (3, 1, 1, 0, 0, 0, 0, 0, 0, 0),
    (5, 11): (1, 2, 0, 0, 0, 0, 0, 0, 0, 0, 0),
    (5, 12): (4, 1, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0),
    (7, 1): (1,),
    (7, 2): (1, 0),
    (7, 3): (2, 0, 0),
    (7, 4): (1, 1, 0, 0),
    (7, 5): (3, 1, 0, 0, 0),
    (7, 6): (2, 0, 0, 0, 0, 0),
    (7, 7): (1, 6, 0, 0, 0, 0, 0),
    (7, 8): (3, 1, 0, 0, 0, 0, 0, 0),
    (7, 9): (2, 0, 0, 0, 0, 0, 0, 0, 0),
    (7, 10): (3, 2, 0, 0, 0, 0, 0, 0, 0, 0),
    (7, 11): (3, 1, 0, 0, 0, 0, 0, 0, 0, 0, 0),
    (7, 12): (2, 1, 1, 0, 0, 0, 0, 0, 0, 0, 0, 0),
    (11, 1): (1,),
    (11, 2): (1, 0),
    (11, 3): (4, 1, 0),
    (11, 4): (2, 1, 0, 0),
    (11, 5): (2, 0, 0, 0, 0),
    (11, 6): (2, 1, 0, 0, 0, 0),
    (11, 7): (4, 1, 0, 0, 0, 0, 0),
    (11, 8): (4, 1, 0, 0, 0, 0, 0, 0),
    (11, 9): (5, 1, 0, 0, 0, 0, 0, 0, 0),
    (11, 10): (3, 0, 0, 0, 0, 0, 0, 0, 0, 0),
    (11, 11): (1, 10, 0, 0, 0, 0, 0, 0, 0, 0, 0),
    (11, 12): (7, 1, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0),
    (13, 1): (1,),
    (13, 2): (2, 0),
    (13, 3): (2, 0, 0),
    (13, 4): (2, 0, 0, 0),
    (13, 5): (2, 4, 0, 0, 0),
    (13, 6): (2, 0, 0, 0, 0, 0),
    (13, 7): (2, 3, 0, 0, 0, 0, 0),
    (13, 8): (2, 0, 0, 0, 0, 0, 0, 0),
    (13, 9): (2, 0, 0, 0, 0, 0, 0, 0, 0),
    (13, 10): (9, 1, 1, 0, 0, 0, 0, 0, 0, 0),
    (13, 11): (5, 1, 0, 0, 0, 0, 0, 0, 0, 0, 0),
    (13, 12): (2, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0),
}

Elem = tuple[int, ...]


class Fq:
    """F_{p^d} = F_p[u]/(modulus) with elements as length-d coefficient tuples."""

    def __init__(self, p: int, d: int = 1):
        if not is_prime(p):
            raise ValueError(f"p = {p} is not prime")
        if d < 1:
            raise ValueError("extension degree must be >= 1")
        try:
            self.modulus = IRREDUCIBLE[(p, d)]
        except KeyError:
            raise ValueError(f"no modulus tabulated for p={p}, d={d} (have p <= 13, d <= 12)") from None
        self.p = p
        self.d = d
        self.q = p**d
        # reduction[k][j]: coefficient of u^j in u^(d+k) mod modulus, k = 0..d-2
        rows = []
        prev = [(-c) % p for c in self.modulus]  # u^d
        rows.append(tuple(prev))
        for _ in range(d - 2):
            shifted = [0] + prev[:-1]
            lead = prev[-1]
            prev = [(shifted[j] - lead * self.modulus[j]) % p for j in range(d)]
            rows.append(tuple(prev))
        self.reduction: tuple[tuple[int, ...], ...] = tuple(rows)

    def __repr__(self) -> str:
        return f"Fq({self.p}, {self.d})"

    @property
    def zero(self) -> Elem:
        return (0,) * self.d

    @property
    def one(self) -> Elem:
        return (1,) + (0,) * (self.d - 1)

    def scalar(self, c: int) -> Elem:
        return (c % self.p,) + (0,) * (self.d - 1)

    def elements(self) -> Iterator[Elem]:
        """All q elements, in base-p counting order of the coefficient vector."""
        for code in range(self.q):
            yield self.decode(code)

    def encode(self, a: Elem) -> int:
        code = 0
        for c in reversed(a):
            code = code * self.p + c
        return code

    def decode(self, code: int) -> Elem:
        out = []
        for _ in range(self.d):
            out.append(code % self.p)
            code //= self.p
        return tuple(out)

    def add(self, a: Elem, b: Elem) -> Elem:
        return tuple((x + y) % self.p for x, y in zip(a, b))

    def sub(self, a: Elem, b: Elem) -> Elem:
        return tuple((x - y) % self.p for x, y in zip(a, b))

    def neg(self, a: Elem) -> Elem:
        return tuple((-x) % self.p for x in a)

    def mul(self, a: Elem, b: Elem) -> Elem:
        d, p = self.d, self.p
        full = [0] * (2 * d - 1)
        for i, x in enumerate(a):
            if x:
                for j, y in enumerate(b):
                    full[i + j] += x * y
        out = [c % p for c in full[:d]]
        for k in range(d, 2 * d - 1):
            c = full[k] % p
            if c:
                row = self.reduction[k - d]
                for j in range(d):
                    out[j] = (out[j] + c * row[j]) % p
        return tuple(out)

    def pow(self, a: Elem, e: int) -> Elem:
        if e < 0:
            return self.pow(self.inv(a), -e)
        result, base = self.one, a
        while e:
            if e & 1:
                result = self.mul(result, base)
            base = self.mul(base, base)
            e >>= 1
        return result

    def inv(self, a: Elem) -> Elem:
        if a == self.zero:
            raise ZeroDivisionError("inverse of zero in Fq")
        return self.pow(a, self.q - 2)

    def in_prime_field(self, a: Elem) -> bool:
        return all(c == 0 for c in a[1:])


@dataclass(frozen=True)
class TruncPow:
    """An element of F_q[t]/t^{n+1}: coefficient tuple of length n+1 over Fq."""

    field: Fq
    coeffs: tuple[Elem, ...]

    @property
    def n(self) -> int:
        return len(self.coeffs) - 1

    @classmethod
    def zero(cls, field: Fq, n: int) -> TruncPow:
        return cls(field, (field.zero,) * (n + 1))

    @classmethod
    def from_scalars(cls, field: Fq, scalars: list[int], n: int) -> TruncPow:
        cs = [field.scalar(c) for c in scalars[: n + 1]]
        cs += [field.zero] * (n + 1 - len(cs))
        return cls(field, tuple(cs))

    def __add__(self, other: TruncPow) -> TruncPow:
        self._check(other)
        return TruncPow(self.field, tuple(self.field.add(a, b) for a, b in zip(self.coeffs, other.coeffs)))

    def __mul__(self, other: TruncPow) -> TruncPow:
        self._check(other)
        F, n = self.field, self.n
        out = [F.zero] * (n + 1)
        for i, a in enumerate(self.coeffs):
            if a == F.zero:
                continue
            for j in range(n + 1 - i):
                b = other.coeffs[j]
                if b != F.zero:
                    out[i + j] = F.add(out[i + j], F.mul(a, b))
        return TruncPow(F, tuple(out))

    def scale(self, c: Elem) -> TruncPow:
        return TruncPow(self.field, tuple(self.field.mul(c, a) for a in self.coeffs))

    def __pow__(self, e: int) -> TruncPow:
        if e < 0:
            raise ValueError("negative power of a truncated series")
        result = TruncPow.from_scalars(self.field, [1], self.n)
        base = self
        while e:
            if e & 1:
                result = result * base
            base = base * base
            e >>= 1
        return result

    def order(self) -> int | float:
        for i, c in enumerate(self.coeffs):
            if c != self.field.zero:
                return i
        return float("inf")

    def _check(self, other: TruncPow) -> None:
        if self.field.p != other.field.p or self.field.d != other.field.d or self.n != other.n:
            raise ValueError("mixed truncation orders or fields")
