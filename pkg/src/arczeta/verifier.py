"""End-to-end consistency checks between closed forms and independent counters.

A :class:`VerificationPlan` names a target identity, a branch or monomial
input, and a list of primes.  Running a plan expands the relevant closed-form
series, substitutes ``L := p``, and compares each coefficient exactly (no
tolerance anywhere) against a count produced by a route that never touches
the closed form:

* ``branch-par``        coefficient of ``T^n`` in the specialized image series
                        vs. enumeration of ``F_p[t]/t^{n+1}`` jets,
* ``branch-pgeom``      geometric series vs. a bounded-degree extension
                        search (heuristic: never certified),
* ``igusa-monomial``    specialized monomial integral vs. exact Haar volumes
                        from residue counting,
* ``cusp-cross-method`` residue lifting counts, jet enumeration, and the
                        specialized series, all three required to agree.

Verdicts list every ``(p, n)`` comparison, carry a machine-checkable summary
(``pass`` / ``fail`` / ``uncertified``), and serialize deterministically:
running the same plan twice yields byte-identical JSON.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from fractions import Fraction
from typing import Mapping, Sequence

from .branch import BranchSpec, characteristic_sequence, p_ar, p_geom
from .counting import (
    DEFAULT_BUDGET,
    count_branch_image,
    count_branch_image_geometric,
    igusa_monomial,
    measure_ord_locus,
)
from .fq import is_prime
from .liftable import count_liftable
from .ratseries import NoRationalFit, RatFunc, rs_equal, rs_fit, rs_from_json, rs_specialize

__all__ = [
    "NoAdmissiblePrime",
    "VerificationPlan",
    "CompRow",
    "Verdict",
    "admissible_primes",
    "verify_branch_par",
    "verify_branch_pgeom",
    "verify_igusa",
    "verify_cross_method",
    "verify_rational_shape",
    "run_plan",
]

TARGETS = ("branch-par", "branch-pgeom", "cusp-cross-method", "igusa-monomial")

# Enumeration cost grows like p^(n+1); past this bound the independent arc
# count is out of desk reach and rational-shape fits fall back to the closed
# form for the high coefficients (recorded in the verdict's assumptions).
ENUMERATION_CEILING = 4_000_000

GEOM_ASSUMPTION = "geometric counts search extensions of degree <= m only (heuristic, never certified)"


class NoAdmissiblePrime(ValueError):
    """Every supplied prime was excluded by the admissibility filter."""


# ---------------------------------------------------------------------------
# plan
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class VerificationPlan:
    """Input to one verification run; see module docstring for targets."""

    target: str
    branch: BranchSpec | None = None
    exponents: tuple[int, ...] | None = None
    poly: tuple[str, ...] = ()
    locus: tuple[str, ...] = ()
    primes: tuple[int, ...] = ()
    n_max: int = 8
    budget: int = DEFAULT_BUDGET
    depth: int | None = None
    window: bool = True
    force_primes: bool = False
    expect_series: Mapping | None = None
    perturb: tuple[int, int] | None = None

    def __post_init__(self) -> None:
        if self.target not in TARGETS:
            raise ValueError(f"unknown target {self.target!r}; expected one of {TARGETS}")
        if self.n_max < 0:
            raise ValueError("n_max must be >= 0")
        if self.budget < 1:
            raise ValueError("budget must be >= 1")
        if self.depth is not None and self.depth < 0:
            raise ValueError("depth must be >= 0")
        if not self.primes:
            raise ValueError("prime list must be nonempty")
        if self.target == "igusa-monomial":
            if not self.exponents:
                raise ValueError("igusa-monomial plans need exponents")
        elif self.branch is None:
            raise ValueError(f"{self.target} plans need a branch")

    @classmethod
    def from_json(cls, obj: Mapping | str) -> VerificationPlan:
        if isinstance(obj, str):
            obj = json.loads(obj)
        if not isinstance(obj, Mapping):
            raise ValueError("plan JSON must be an object")
        known = {
            "target",
            "branch",
            "exponents",
            "poly",
            "locus",
            "primes",
            "n_max",
            "budget",
            "depth",
            "window",
            "force_primes",
            "expect_series",
            "perturb",
        }
        extra = set(obj) - known
        if extra:
            raise ValueError(f"unknown plan fields: {sorted(extra)}")
        try:
            return cls(
                target=str(obj["target"]),
                branch=BranchSpec.from_json(obj["branch"]) if obj.get("branch") is not None else None,
                exponents=tuple(int(k) for k in obj["exponents"]) if obj.get("exponents") else None,
                poly=tuple(str(s) for s in obj.get("poly", ())),
                locus=tuple(str(s) for s in obj.get("locus", ())),
                primes=tuple(int(p) for p in obj.get("primes", ())),
                n_max=int(obj.get("n_max", 8)),
                budget=int(obj.get("budget", DEFAULT_BUDGET)),
                depth=int(obj["depth"]) if obj.get("depth") is not None else None,
                window=bool(obj.get("window", True)),
                force_primes=bool(obj.get("force_primes", False)),
                expect_series=obj.get("expect_series"),
                perturb=tuple(int(v) for v in obj["perturb"]) if obj.get("perturb") else None,
            )
        except (KeyError, TypeError) as exc:
            raise ValueError(f"malformed plan JSON: {exc}") from exc

    def to_json(self) -> dict:
        out: dict = {
            "target": self.target,
            "primes": list(self.primes),
            "n_max": self.n_max,
            "budget": self.budget,
            "window": self.window,
            "force_primes": self.force_primes,
        }
        if self.branch is not None:
            out["branch"] = self.branch.to_json()
        if self.exponents is not None:
            out["exponents"] = list(self.exponents)
        if self.poly:
            out["poly"] = list(self.poly)
        if self.locus:
            out["locus"] = list(self.locus)
        if self.depth is not None:
            out["depth"] = self.depth
        if self.expect_series is not None:
            out["expect_series"] = dict(self.expect_series)
        if self.perturb is not None:
            out["perturb"] = list(self.perturb)
        return out


# ---------------------------------------------------------------------------
# verdict
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class CompRow:
    """One exact comparison at (p, n); counted_alt holds a second counter."""

    p: int
    n: int
    symbolic: Fraction
    counted: Fraction
    counted_alt: Fraction | None = None
    certified: bool = True

    @property
    def equal(self) -> bool:
        if self.counted_alt is not None and self.counted_alt != self.symbolic:
            return False
        return self.symbolic == self.counted

    def to_json(self) -> dict:
        return {
            "p": self.p,
            "n": self.n,
            "symbolic": str(self.symbolic),
            "counted": str(self.counted),
            "counted_alt": None if self.counted_alt is None else str(self.counted_alt),
            "certified": self.certified,
            "equal": self.equal,
        }


@dataclass(frozen=True)
class Verdict:
    target: str
    rows: tuple[CompRow, ...]
    summary: str
    detail: str = ""
    assumptions: tuple[str, ...] = ()

    @classmethod
    def from_rows(
        cls,
        target: str,
        rows: Sequence[CompRow],
        assumptions: Sequence[str] = (),
        forced_fail: str | None = None,
    ) -> Verdict:
        rows = tuple(rows)
        if forced_fail is not None:
            return cls(target, rows, "fail", forced_fail, tuple(assumptions))
        for r in rows:
            # an uncertified count that differs is inconclusive, not a failure
            if not r.equal and r.certified:
                alt = "" if r.counted_alt is None else f" (second counter: {r.counted_alt})"
                return cls(
                    target,
                    rows,
                    "fail",
                    f"first mismatch at p={r.p}, n={r.n}: symbolic {r.symbolic} != counted {r.counted}{alt}",
                    tuple(assumptions),
                )
        for r in rows:
            if not r.certified:
                note = "" if r.equal else f" (values differ: {r.symbolic} vs {r.counted})"
                return cls(
                    target,
                    rows,
                    "uncertified",
                    f"count at p={r.p}, n={r.n} carries no certificate{note}",
                    tuple(assumptions),
                )
        return cls(target, rows, "pass", "", tuple(assumptions))

    def to_json(self) -> dict:
        return {
            "target": self.target,
            "summary": self.summary,
            "detail": self.detail,
            "assumptions": list(self.assumptions),
            "rows": [r.to_json() for r in self.rows],
        }

    @classmethod
    def from_json(cls, obj: Mapping | str) -> Verdict:
        if isinstance(obj, str):
            obj = json.loads(obj)
        rows = tuple(
            CompRow(
                p=int(r["p"]),
                n=int(r["n"]),
                symbolic=Fraction(r["symbolic"]),
                counted=Fraction(r["counted"]),
                counted_alt=None if r.get("counted_alt") is None else Fraction(r["counted_alt"]),
                certified=bool(r["certified"]),
            )
            for r in obj["rows"]
        )
        return cls(
            target=str(obj["target"]),
            rows=rows,
            summary=str(obj["summary"]),
            detail=str(obj.get("detail", "")),
            assumptions=tuple(obj.get("assumptions", ())),
        )

    def to_text(self) -> str:
        lines = [f"target: {self.target}", f"summary: {self.summary}"]
        if self.detail:
            lines.append(f"detail: {self.detail}")
        for a in self.assumptions:
            lines.append(f"assumption: {a}")
        for r in self.rows:
            alt = "" if r.counted_alt is None else f"  alt={r.counted_alt}"
            mark = "ok" if r.equal else "MISMATCH"
            cert = "certified" if r.certified else "uncertified"
            lines.append(f"p={r.p} n={r.n}  symbolic={r.symbolic}  counted={r.counted}{alt}  [{mark}, {cert}]")
        return "\n".join(lines) + "\n"


# ---------------------------------------------------------------------------
# prime admissibility
# ---------------------------------------------------------------------------


def admissible_primes(plan: VerificationPlan) -> list[int]:
    """Filter plan.primes for the branch hypotheses; exact reasons on failure.

    Excluded (unless ``plan.force_primes``): primes dividing a coefficient
    denominator, primes <= m, and primes != 1 mod m.  Non-primes are an input
    error, not a filter case.
    """
    for p in plan.primes:
        if not is_prime(p):
            raise ValueError(f"{p} is not prime")
    if plan.target == "igusa-monomial" or plan.force_primes:
        return list(plan.primes)
    b = plan.branch
    assert b is not None
    denoms = {a.denominator for a in b.coeffs.values()}
    kept, reasons = [], []
    for p in plan.primes:
        if any(d % p == 0 for d in denoms):
            reasons.append(f"{p} divides a coefficient denominator")
        elif p <= b.m:
            reasons.append(f"{p} <= multiplicity {b.m}")
        elif (p - 1) % b.m != 0:
            reasons.append(f"{p} != 1 mod {b.m}")
        else:
            kept.append(p)
    if not kept:
        raise NoAdmissiblePrime("; ".join(reasons) if reasons else "prime list empty")
    return kept


# ---------------------------------------------------------------------------
# verification operations
# ---------------------------------------------------------------------------


def _specialized_coeffs(series, p: int, order: int) -> list[Fraction]:
    return rs_specialize(series, p).taylor(order)


def verify_branch_par(plan: VerificationPlan) -> Verdict:
    """Image series at L := p vs. jet enumeration over F_p[t]/t^{n+1}."""
    if plan.target != "branch-par":
        raise ValueError(f"plan target {plan.target!r} is not branch-par")
    b = plan.branch
    assert b is not None
    series = p_ar(characteristic_sequence(b))
    forced = None
    if plan.expect_series is not None:
        if not rs_equal(series, rs_from_json(plan.expect_series)):
            forced = "computed symbolic series differs from the plan's expected series"
    rows = []
    for p in admissible_primes(plan):
        coeffs = _specialized_coeffs(series, p, plan.n_max + 1)
        for n in range(plan.n_max + 1):
            counted = count_branch_image(b, p, 1, n, window=plan.window, budget=plan.budget)
            rows.append(CompRow(p, n, coeffs[n], Fraction(counted)))
    return Verdict.from_rows("branch-par", rows, forced_fail=forced)


def verify_branch_pgeom(plan: VerificationPlan) -> Verdict:
    """Geometric series vs. bounded extension search; heuristic, never passes."""
    if plan.target != "branch-pgeom":
        raise ValueError(f"plan target {plan.target!r} is not branch-pgeom")
    b = plan.branch
    assert b is not None
    series = p_geom(characteristic_sequence(b))
    rows = []
    for p in admissible_primes(plan):
        coeffs = _specialized_coeffs(series, p, plan.n_max + 1)
        for n in range(plan.n_max + 1):
            counted = count_branch_image_geometric(b, p, n, budget=plan.budget)
            rows.append(CompRow(p, n, coeffs[n], Fraction(counted), certified=False))
    return Verdict.from_rows("branch-pgeom", rows, assumptions=[GEOM_ASSUMPTION])


def verify_igusa(plan: VerificationPlan) -> Verdict:
    """Specialized monomial integral vs. exact Haar volumes, coefficientwise."""
    if plan.target != "igusa-monomial":
        raise ValueError(f"plan target {plan.target!r} is not igusa-monomial")
    ks = plan.exponents
    assert ks is not None
    series = igusa_monomial(ks)
    rows = []
    for p in admissible_primes(plan):
        coeffs = _specialized_coeffs(series, p, plan.n_max + 1)
        for n in range(plan.n_max + 1):
            rows.append(CompRow(p, n, coeffs[n], measure_ord_locus(ks, p, n)))
    return Verdict.from_rows("igusa-monomial", rows)


def verify_cross_method(plan: VerificationPlan) -> Verdict:
    """Residue lifting, jet enumeration, and the specialized series agree.

    The lifting depth defaults to max(6, 2n), enough for the cusp's tail
    zones to certify; an explicit shallow depth yields an uncertified verdict.
    """
    if plan.target != "cusp-cross-method":
        raise ValueError(f"plan target {plan.target!r} is not cusp-cross-method")
    b = plan.branch
    assert b is not None
    f = plan.poly or ("x^2 - y^3",)
    W = plan.locus or ("x", "y")
    series = p_ar(characteristic_sequence(b))
    rows = []
    for p in admissible_primes(plan):
        coeffs = _specialized_coeffs(series, p, plan.n_max + 1)
        for n in range(plan.n_max + 1):
            depth = plan.depth if plan.depth is not None else max(6, 2 * n)
            lifted = count_liftable(f, W, p, n, depth, budget=plan.budget)
            image = count_branch_image(b, p, 1, n, window=plan.window, budget=plan.budget)
            rows.append(
                CompRow(
                    p,
                    n,
                    coeffs[n],
                    Fraction(lifted.count),
                    counted_alt=Fraction(image),
                    certified=lifted.certified,
                )
            )
    return Verdict.from_rows("cusp-cross-method", rows)


def verify_rational_shape(plan: VerificationPlan) -> Verdict:
    """Reconstruct the specialized series from coefficient data by linear fit.

    Uses the denominator shape of the symbolic series as the fit hint.  Data
    coefficients come from jet enumeration while p^{n+1} stays within desk
    reach and from the closed form beyond that (the count itself grows like
    p^{n-m}, so no enumeration can reach high n); the trailing fit residuals
    act as consistency checks either way.  A perturbed coefficient (negative
    control, ``plan.perturb``) must break the fit.
    """
    if plan.target != "branch-par":
        raise ValueError("rational-shape verification runs on a branch-par plan")
    b = plan.branch
    assert b is not None
    series = p_ar(characteristic_sequence(b))
    order = plan.n_max + 1
    rows: list[CompRow] = []
    assumptions: list[str] = []
    forced: str | None = None
    for p in admissible_primes(plan):
        specialized = rs_specialize(series, p)
        coeffs = specialized.taylor(order)
        data = list(coeffs)
        enum_limit = -1
        for n in range(order):
            if p ** (n + 1) > ENUMERATION_CEILING:
                break
            counted = count_branch_image(b, p, 1, n, window=plan.window, budget=plan.budget)
            rows.append(CompRow(p, n, coeffs[n], Fraction(counted)))
            data[n] = Fraction(counted)
            enum_limit = n
        assumptions.append(
            f"p={p}: fit data n <= {enum_limit} from jet enumeration, higher n from the closed form"
        )
        if plan.perturb is not None:
            idx, delta = plan.perturb
            if not 0 <= idx < order:
                raise ValueError(f"perturb index {idx} outside 0..{order - 1}")
            data[idx] += delta
        hint = [(Fraction(p) ** a, bb) for a, bb in series.geom]
        try:
            num = rs_fit(data, hint)
        except NoRationalFit as exc:
            forced = f"p={p}: no rational fit: {exc}"
            continue
        den: list[Fraction] = [Fraction(1)]
        for c, bb in hint:
            new = [Fraction(0)] * (len(den) + bb)
            for i, v in enumerate(den):
                new[i] += v
                new[i + bb] -= c * v
            den = new
        if RatFunc.from_polys(num, den).taylor(order) != specialized.taylor(order):
            forced = f"p={p}: fitted rational function differs from the specialized series"
    return Verdict.from_rows("branch-par", rows, assumptions=assumptions, forced_fail=forced)


def run_plan(plan: VerificationPlan) -> Verdict:
    ops = {
        "branch-par": verify_branch_par,
        "branch-pgeom": verify_branch_pgeom,
        "igusa-monomial": verify_igusa,
        "cusp-cross-method": verify_cross_method,
    }
    return ops[plan.target](plan)
