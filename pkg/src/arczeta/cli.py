"""Command-line interface tying the library together.

Subcommands
-----------
branch      characteristic exponents, image series, poles, recovered exponents
count       jet-image counts for a branch, or residue-lifting counts for
            polynomial systems
presburger  quantifier elimination, weighted sums, point evaluation
igusa       monomial integral series, optionally checked against exact
            volumes at a prime
verify      run a verification plan from JSON and emit a verdict

Exit codes: 0 success / verification pass, 1 usage or input error,
2 verification failure, 3 verification uncertified.

Configuration precedence: command-line flags, then the ``--config`` JSON
file, then built-in defaults.  The only environment variable consulted is
``THREADS`` (worker count for counting operations).  Outputs are
deterministic byte-for-byte; wall-clock timings appear only with
``--timings``.
"""

from __future__ import annotations

import functools
import json
import os
import re
import sys
import time
from fractions import Fraction
from pathlib import Path

import click

from .branch import BranchSpec, characteristic_sequence, p_ar, p_geom, puiseux_from_poles
from .counting import CountReport, CountRow, count_branch_report, igusa_monomial
from .liftable import IntPoly, count_liftable
from .presburger import (
    eliminate_quantifiers,
    free_vars,
    membership,
    parse_presburger,
    simplify,
    to_text,
)
from .ranges import AffineForm, to_iterated_ranges, weighted_sum
from .ratseries import rs_latex, rs_normalize, rs_poles_in_L, rs_text, rs_to_json
from .verifier import VerificationPlan, run_plan, verify_igusa

_EXIT_FOR_SUMMARY = {"pass": 0, "fail": 2, "uncertified": 3}


class _Group(click.Group):
    """Group whose standalone mode maps usage errors to exit code 1."""

    def main(self, *args, standalone_mode=True, **kwargs):
        if not standalone_mode:
            return super().main(*args, standalone_mode=False, **kwargs)
        try:
            rv = super().main(*args, standalone_mode=False, **kwargs)
        except click.UsageError as exc:
            exc.show()
            sys.exit(1)
        except click.ClickException as exc:
            exc.show()
            sys.exit(exc.exit_code)
        except click.exceptions.Abort:
            click.echo("Aborted!", err=True)
            sys.exit(130)
        sys.exit(rv if isinstance(rv, int) else 0)


def _fail(message: str) -> None:
    click.echo(f"error: {message}", err=True)
    sys.exit(1)


def _guarded(fn):
    @functools.wraps(fn)
    def wrapper(*args, **kwargs):
        try:
            return fn(*args, **kwargs)
        except (ValueError, ArithmeticError, RuntimeError, OSError) as exc:
            _fail(str(exc))

    return wrapper


def _cfg(ctx, key, value, default):
    if value is not None:
        return value
    return ctx.obj.get(key, default)


def _threads(ctx, flag_value) -> int:
    value = flag_value
    if value is None and "THREADS" in os.environ:
        try:
            value = int(os.environ["THREADS"])
        except ValueError:
            _fail(f"THREADS must be an integer, got {os.environ['THREADS']!r}")
    if value is None:
        value = ctx.obj.get("threads", 1)
    value = int(value)
    if value < 1:
        _fail("threads must be >= 1")
    return value


def _format(ctx, flag_value, allowed: tuple[str, ...]) -> str:
    fmt = _cfg(ctx, "format", flag_value, allowed[0])
    if fmt not in allowed:
        _fail(f"unsupported format {fmt!r}; choose from {', '.join(allowed)}")
    return fmt


def _read_json(path: str):
    return json.loads(Path(path).read_text())


def _dump_json(obj) -> str:
    return json.dumps(obj, indent=2, sort_keys=True)


def _emit(text: str, out: str | None) -> None:
    if out:
        Path(out).write_text(text + "\n")
    else:
        click.echo(text)


_AFFINE_ITEM = re.compile(r"\s*(?:(?P<int>\d+)|(?P<var>[a-z][a-z0-9_]*))")


def _parse_affine(text: str) -> AffineForm:
    """Integer affine combinations: '0', 'n', '2*n + 3*l - 1'."""
    coeffs: dict[str, int] = {}
    const = 0
    pos, sign = 0, 1
    first = True
    while True:
        stripped = text[pos:].lstrip()
        if not stripped and not first:
            break
        if not first:
            op = stripped[:1]
            if op not in "+-":
                raise ValueError(f"expected + or - at {stripped!r} in affine form {text!r}")
            sign = 1 if op == "+" else -1
            pos = len(text) - len(stripped) + 1
        elif stripped[:1] == "-":
            sign = -1
            pos = len(text) - len(stripped) + 1
        first = False
        coeff, var = 1, None
        while True:
            m = _AFFINE_ITEM.match(text, pos)
            if not m:
                raise ValueError(f"expected term at position {pos} in affine form {text!r}")
            if m.group("int"):
                coeff *= int(m.group("int"))
            else:
                if var is not None:
                    raise ValueError(f"nonlinear product in affine form {text!r}")
                var = m.group("var")
            pos = m.end()
            rest = text[pos:].lstrip()
            if rest[:1] == "*":
                pos = len(text) - len(rest) + 1
                continue
            break
        if var is None:
            const += sign * coeff
        else:
            coeffs[var] = coeffs.get(var, 0) + sign * coeff
        if not text[pos:].strip():
            break
    return AffineForm.make(coeffs, const)


def _zero_timings(report: CountReport) -> CountReport:
    return CountReport(
        name=report.name,
        p=report.p,
        d=report.d,
        rows=[CountRow(r.n, r.count, r.method, 0.0) for r in report.rows],
        assumptions=list(report.assumptions),
    )


def _report_text(report: CountReport) -> str:
    lines = [f"name: {report.name}  p={report.p}  d={report.d}"]
    for a in report.assumptions:
        lines.append(f"assumption: {a}")
    lines.append("n,count,method,seconds")
    for r in report.rows:
        lines.append(f"{r.n},{r.count},{r.method},{r.seconds:.3f}")
    return "\n".join(lines)


@click.group(cls=_Group)
@click.option("--config", "config_path", default=None, metavar="FILE", help="JSON file with flag defaults.")
@click.pass_context
def main(ctx, config_path):
    """Exact image series, p-adic integrals, and counting verifications."""
    cfg = {}
    if config_path:
        try:
            cfg = _read_json(config_path)
        except (OSError, ValueError) as exc:
            _fail(f"cannot read config: {exc}")
        if not isinstance(cfg, dict):
            _fail("config file must hold a JSON object")
    ctx.obj = cfg


# ---------------------------------------------------------------------------
# branch
# ---------------------------------------------------------------------------


@main.command()
@click.option("--input", "path", required=True, metavar="FILE", help="Branch JSON file.")
@click.option("--format", "fmt", type=click.Choice(["text", "json", "latex"]), default=None)
@click.option("--normalize", is_flag=True, help="Canonicalize the series before rendering.")
@click.option("--out", default=None, metavar="FILE")
@click.pass_context
@_guarded
def branch(ctx, path, fmt, normalize, out):
    """Characteristic data and image series of a plane branch."""
    fmt = _format(ctx, fmt, ("text", "json", "latex"))
    b = BranchSpec.from_json(_read_json(path))
    c = characteristic_sequence(b)
    geom_series, ar_series = p_geom(c), p_ar(c)
    if normalize:
        geom_series, ar_series = rs_normalize(geom_series), rs_normalize(ar_series)
    window = sorted(a for a in rs_poles_in_L(ar_series) if -1 < a < 0)
    recovered = puiseux_from_poles(window, c.m) if window else []
    if fmt == "json":
        payload = {
            "m": c.m,
            "g": c.g,
            "beta": list(c.beta),
            "e": list(c.e),
            "N": list(c.N),
            "p_geom": rs_to_json(geom_series),
            "p_ar": rs_to_json(ar_series),
            "poles": [str(a) for a in window],
            "recovered_exponents": recovered,
        }
        _emit(_dump_json(payload), out)
        return
    render = rs_latex if fmt == "latex" else rs_text
    lines = [
        str(c),
        f"g: {c.g}",
        f"P_geom: {render(geom_series)}",
        f"P_ar: {render(ar_series)}",
        f"poles in (-1,0): {', '.join(str(a) for a in window) or 'none'}",
        f"recovered exponents: {recovered}",
    ]
    _emit("\n".join(lines), out)


# ---------------------------------------------------------------------------
# count
# ---------------------------------------------------------------------------


@main.command("count")
@click.option("--branch", "branch_path", default=None, metavar="FILE", help="Branch JSON file.")
@click.option("--poly", "polys", multiple=True, metavar="EXPR", help="Polynomial equation(s); repeatable.")
@click.option("--locus", "locus", multiple=True, metavar="EXPR", help="Reduction locus generator(s); repeatable.")
@click.option("--origin", is_flag=True, help="Shorthand: reduction locus = all variables.")
@click.option("-p", "--prime", type=int, default=None)
@click.option("--ext-degree", "ext_degree", type=int, default=None, help="Field extension degree d (branch mode).")
@click.option("--n-max", "n_max", type=int, default=None)
@click.option("--window/--no-window", "window", default=None)
@click.option("--budget", type=int, default=None)
@click.option("--depth", type=int, default=None, help="Lifting depth (poly mode); default max(6, 2n).")
@click.option("--threads", type=int, default=None)
@click.option("--timings", is_flag=True, help="Include wall-clock timings (non-deterministic output).")
@click.option("--format", "fmt", type=click.Choice(["csv", "json", "text"]), default=None)
@click.option("--out", default=None, metavar="FILE")
@click.pass_context
@_guarded
def count_cmd(ctx, branch_path, polys, locus, origin, prime, ext_degree, n_max, window, budget, depth, threads, timings, fmt, out):
    """Count jet images of a branch or liftable residues of a system."""
    fmt = _format(ctx, fmt, ("csv", "json", "text"))
    prime = _cfg(ctx, "prime", prime, None)
    if prime is None:
        _fail("a prime is required (-p/--prime or config)")
    n_max = int(_cfg(ctx, "n_max", n_max, 8))
    budget_v = int(_cfg(ctx, "budget", budget, 4_000_000))
    window_v = _cfg(ctx, "window", window, True)
    nthreads = _threads(ctx, threads)
    if bool(branch_path) == bool(polys):
        _fail("exactly one of --branch or --poly is required")
    if branch_path:
        b = BranchSpec.from_json(_read_json(branch_path))
        d = int(_cfg(ctx, "ext_degree", ext_degree, 1))
        report = count_branch_report(
            b, int(prime), d, n_max, window=bool(window_v), budget=budget_v, threads=nthreads
        )
    else:
        parsed = [IntPoly.parse(s) for s in polys]
        nvars = max(q.nvars for q in parsed)
        if origin and locus:
            _fail("--origin and --locus are mutually exclusive")
        w = list(locus) if locus else ([f"x{i + 1}" for i in range(nvars)] if origin else [])
        report = CountReport(name="liftable-residues", p=int(prime), d=1)
        depth_cfg = _cfg(ctx, "depth", depth, None)
        for n in range(n_max + 1):
            dep = int(depth_cfg) if depth_cfg is not None else max(6, 2 * n)
            t0 = time.perf_counter()
            res = count_liftable(list(polys), w, int(prime), n, dep, budget=budget_v)
            report.rows.append(CountRow(n, res.count, res.method, time.perf_counter() - t0))
        report.assumptions.append(
            "depth policy: max(6, 2n) unless --depth is given; uncertified rows mean the tree stabilized without certificates"
        )
    if not timings:
        report = _zero_timings(report)
    if fmt == "csv":
        _emit(report.to_csv().rstrip("\n"), out)
    elif fmt == "json":
        _emit(_dump_json(report.to_json()), out)
    else:
        _emit(_report_text(report), out)


# ---------------------------------------------------------------------------
# presburger
# ---------------------------------------------------------------------------


@main.group()
def presburger():
    """Work with Presburger formulas."""


@presburger.command()
@click.argument("formula")
@click.option("--var", "declared", multiple=True, help="Declared variable (repeatable).")
@click.option("--format", "fmt", type=click.Choice(["text", "json"]), default=None)
@click.option("--out", default=None, metavar="FILE")
@click.pass_context
@_guarded
def qe(ctx, formula, declared, fmt, out):
    """Eliminate quantifiers and print an equivalent quantifier-free formula."""
    fmt = _format(ctx, fmt, ("text", "json"))
    f = parse_presburger(formula, list(declared) or None)
    result = to_text(simplify(eliminate_quantifiers(f)))
    if fmt == "json":
        _emit(_dump_json({"input": formula, "result": result}), out)
    else:
        _emit(result, out)


@presburger.command("sum")
@click.option("--set", "set_text", required=True, metavar="FORMULA", help="Defining formula of the index set.")
@click.option("--tweight", required=True, metavar="AFFINE", help="Exponent of T, e.g. 'n' or '2*n - 1'.")
@click.option("--lweight", default="0", metavar="AFFINE", help="Exponent of L^-1 (default 0).")
@click.option("--order", default=None, metavar="VARS", help="Comma-separated elimination order.")
@click.option("--format", "fmt", type=click.Choice(["text", "json", "latex"]), default=None)
@click.option("--out", default=None, metavar="FILE")
@click.pass_context
@_guarded
def sum_cmd(ctx, set_text, tweight, lweight, order, fmt, out):
    """Closed form of sum of L^-lweight T^tweight over a Presburger set."""
    fmt = _format(ctx, fmt, ("text", "json", "latex"))
    f = parse_presburger(set_text)
    names = [v.strip() for v in order.split(",")] if order else sorted(free_vars(f))
    system = to_iterated_ranges(f, names)
    series = weighted_sum(system, _parse_affine(lweight), _parse_affine(tweight))
    if fmt == "json":
        _emit(_dump_json(rs_to_json(series)), out)
    elif fmt == "latex":
        _emit(rs_latex(series), out)
    else:
        _emit(rs_text(series), out)


@presburger.command()
@click.argument("formula")
@click.option("--point", required=True, metavar="ASSIGN", help="Comma-separated assignments, e.g. 'x=4,y=-2'.")
@click.option("--var", "declared", multiple=True)
@click.pass_context
@_guarded
def check(ctx, formula, point, declared, **_ignored):
    """Evaluate a formula at an integer point (quantifiers eliminated first)."""
    f = parse_presburger(formula, list(declared) or None)
    assigns = {}
    for part in point.split(","):
        name, _, val = part.partition("=")
        if not _:
            _fail(f"bad assignment {part!r}; expected name=value")
        assigns[name.strip()] = int(val)
    qf = simplify(eliminate_quantifiers(f))
    missing = free_vars(qf) - set(assigns)
    if missing:
        _fail(f"point does not assign {sorted(missing)}")
    click.echo("true" if membership(qf, assigns) else "false")


# ---------------------------------------------------------------------------
# igusa
# ---------------------------------------------------------------------------


@main.command()
@click.option("-k", "--exponent", "ks", multiple=True, type=int, required=True, help="Monomial exponent; repeatable.")
@click.option("-p", "--prime", type=int, default=None, help="Check coefficients against exact volumes at p.")
@click.option("--n-max", "n_max", type=int, default=None)
@click.option("--format", "fmt", type=click.Choice(["text", "json", "latex"]), default=None)
@click.option("--out", default=None, metavar="FILE")
@click.pass_context
@_guarded
def igusa(ctx, ks, prime, n_max, fmt, out):
    """Monomial integral series; with -p, verify against residue counting."""
    fmt = _format(ctx, fmt, ("text", "json", "latex"))
    prime = _cfg(ctx, "prime", prime, None)
    if prime is None:
        series = igusa_monomial(ks)
        if fmt == "json":
            _emit(_dump_json(rs_to_json(series)), out)
        elif fmt == "latex":
            _emit(rs_latex(series), out)
        else:
            _emit(rs_text(series), out)
        return
    plan = VerificationPlan(
        target="igusa-monomial",
        exponents=tuple(ks),
        primes=(int(prime),),
        n_max=int(_cfg(ctx, "n_max", n_max, 6)),
    )
    verdict = verify_igusa(plan)
    if fmt == "json":
        _emit(_dump_json(verdict.to_json()), out)
    else:
        _emit(verdict.to_text().rstrip("\n"), out)
    sys.exit(_EXIT_FOR_SUMMARY[verdict.summary])


# ---------------------------------------------------------------------------
# verify
# ---------------------------------------------------------------------------


@main.command()
@click.option("--plan", "plan_path", required=True, metavar="FILE", help="Verification plan JSON.")
@click.option("--out", default=None, metavar="FILE", help="Write the verdict JSON here.")
@click.option("--format", "fmt", type=click.Choice(["text", "json"]), default=None)
@click.pass_context
@_guarded
def verify(ctx, plan_path, out, fmt):
    """Run a verification plan; exit 0 pass, 2 fail, 3 uncertified."""
    fmt = _format(ctx, fmt, ("text", "json"))
    plan = VerificationPlan.from_json(_read_json(plan_path))
    verdict = run_plan(plan)
    if out:
        Path(out).write_text(_dump_json(verdict.to_json()) + "\n")
    if fmt == "json":
        click.echo(_dump_json(verdict.to_json()))
    else:
        click.echo(verdict.to_text().rstrip("\n"))
    sys.exit(_EXIT_FOR_SUMMARY[verdict.summary])


if __name__ == "__main__":
    main()
