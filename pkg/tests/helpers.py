"""Shared brute-force oracles used across test modules.

These deliberately avoid the library's own fast paths: quantifiers are
evaluated by windowed enumeration, sums by direct truncated accumulation,
and image counts by plain python sets over all arcs.  Slower, independent,
easy to audit.
"""

from __future__ import annotations

from itertools import product
from math import lcm

from arczeta import presburger as pb


def quantifier_window(f: pb.Formula, free_box: int = 30) -> int:
    """Window W for brute-force quantifier semantics.

    Any atom sum(c_i x_i) + c crossing zero inside the free box [-30, 30]^v
    has its bound variables within B = max_atoms(|c| + sum|c_i| * 30); adding
    the congruence period D = lcm(moduli) and slack 60 makes the windowed
    semantics agree with Z-semantics for every corpus formula (cross-checked
    against QE output, which is exact).
    """
    bound = 1
    moduli = [1]

    def walk(g: pb.Formula) -> None:
        nonlocal bound
        if isinstance(g, (pb.Cmp, pb.Cong)):
            t = g.term
            bound = max(bound, abs(t.const) + sum(abs(c) for _, c in t.coeffs) * free_box)
            if isinstance(g, pb.Cong):
                moduli.append(g.modulus)
        elif isinstance(g, pb.Not):
            walk(g.arg)
        elif isinstance(g, (pb.And, pb.Or)):
            for a in g.args:
                walk(a)
        elif isinstance(g, (pb.Exists, pb.Forall)):
            walk(g.body)

    walk(f)
    return bound + lcm(*moduli) + 60


def brute_eval(f: pb.Formula, point: dict[str, int], window: int) -> bool:
    """Evaluate with quantified variables ranging over [-window, window]."""
    if isinstance(f, pb.BoolConst):
        return f.value
    if isinstance(f, pb.Cmp):
        v = f.term.eval(point)
        return {"<=": v <= 0, "<": v < 0, "=": v == 0, ">=": v >= 0, ">": v > 0}[f.rel]
    if isinstance(f, pb.Cong):
        return f.term.eval(point) % f.modulus == 0
    if isinstance(f, pb.Not):
        return not brute_eval(f.arg, point, window)
    if isinstance(f, pb.And):
        return all(brute_eval(a, point, window) for a in f.args)
    if isinstance(f, pb.Or):
        return any(brute_eval(a, point, window) for a in f.args)
    if isinstance(f, pb.Exists):
        return any(
            brute_eval(f.body, {**point, f.var: v}, window) for v in range(-window, window + 1)
        )
    if isinstance(f, pb.Forall):
        return all(
            brute_eval(f.body, {**point, f.var: v}, window) for v in range(-window, window + 1)
        )
    raise TypeError(f"not a formula: {f!r}")


def enumerate_solutions(f: pb.Formula, order: list[str], box: range) -> set[tuple[int, ...]]:
    """All solutions of a quantifier-free formula within box^len(order)."""
    out = set()
    for pt in product(box, repeat=len(order)):
        if pb.membership(f, dict(zip(order, pt))):
            out.add(pt)
    return out


def direct_weighted_sum(sys, lweight, tweight, tmax: int, clip: int = 400):
    """Truncated sum of L^(-lweight) T^tweight over the system's points.

    Only valid when every point with tweight <= tmax has coordinates <= clip;
    pick corpora accordingly (tweight coefficient >= 1 on unbounded
    variables).
    """
    from arczeta.tate import TatePoly

    coeffs = [TatePoly.zero() for _ in range(tmax + 1)]
    for pt in sys.iter_points({v: clip for v in sys.order}):
        n = tweight.eval_int(pt)
        if 0 <= n <= tmax:
            e = lweight.eval_int(pt)
            coeffs[n] = coeffs[n] + TatePoly.L(-e)
    return coeffs
