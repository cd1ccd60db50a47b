"""Command-line front end.

Exit codes: 0 ok, 1 verification failed, 2 parse/usage error, 3 domain
error, 4 resource guard, 5 I/O error.
"""

from __future__ import annotations

import argparse
import json
import sys
import warnings
from dataclasses import dataclass, field
from decimal import Decimal, localcontext
from fractions import Fraction
from pathlib import Path
from typing import Sequence, TextIO

from .core import (
    DomainError,
    SpaceParseError,
    format_fraction,
    format_space,
    joint_matrix,
    parse_space,
    union_prob,
)
from .dyadic import DyadicConfig, DyadicSequence, verify_ce1_chain
from .search import SearchConfig, search_gaps
from .sequences import DEFAULT_P_GRID, DEFAULT_WINDOW, Subsequence, ctx, ms_estimate
from .six_events import GK_VALUE, KAT_VALUE, reference_matrix, six_event_system
from .union_bounds import chung_erdos, gk_solve, kat_bound

EXIT_OK, EXIT_FAIL, EXIT_PARSE, EXIT_DOMAIN, EXIT_GUARD, EXIT_IO = range(6)

MAX_N = 2 ** 20
MAX_RESOLUTION = 21
BOUND_ORDER = ("gk", "kat", "ce", "union")


class CliError(Exception):
    def __init__(self, message: str, code: int):
        super().__init__(message)
        self.code = code


def render_decimal(x) -> str:
    """12 significant digits; exact rationals are rounded from the exact value."""
    if isinstance(x, (Fraction, int)):
        x = Fraction(x)
        with localcontext() as c:
            c.prec = 12
            d = Decimal(x.numerator) / Decimal(x.denominator)
        return format(d, "g")
    return ctx.nstr(x, 12)


@dataclass
class BoundReport:
    instance: str
    bound: str
    exact: Fraction | None
    value: object
    diagnostics: dict = field(default_factory=dict)

    def row(self) -> str:
        exact = format_fraction(self.exact) if self.exact is not None else "-"
        return f"{self.instance}\t{self.bound}\t{exact}\t{render_decimal(self.value)}"

    def to_json(self) -> dict:
        return {
            "instance": self.instance,
            "bound": self.bound,
            "exact": format_fraction(self.exact) if self.exact is not None else None,
            "decimal": render_decimal(self.value),
            "diagnostics": self.diagnostics,
        }


def _fr_list(xs) -> list[str]:
    return [format_fraction(x) for x in xs]


def bound_reports(system, instance: str, which: str = "all") -> list[BoundReport]:
    names = BOUND_ORDER if which == "all" else (which,)
    out = []
    for name in names:
        if name == "gk":
            sol = gk_solve(system)
            out.append(BoundReport(instance, "gk", sol.bound, sol.bound, {
                "gamma": _fr_list(sol.gamma), "rank": sol.rank,
                "free_indices": list(sol.free_indices)}))
        elif name == "kat":
            val, terms = kat_bound(system)
            out.append(BoundReport(instance, "kat", val, val, {
                "S": _fr_list(terms.S), "theta": _fr_list(terms.theta),
                "term": _fr_list(terms.term)}))
        elif name == "ce":
            v = chung_erdos(system)
            out.append(BoundReport(instance, "ce", v, v))
        elif name == "union":
            v = union_prob(system)
            out.append(BoundReport(instance, "union", v, v))
        else:
            raise ValueError(f"unknown bound {name!r}")
    return out


def _load(path: str):
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise CliError(f"{path}: {exc.strerror or exc}", EXIT_IO) from None
    try:
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            return parse_space(text)
    except SpaceParseError as exc:
        raise CliError(f"{path}:{exc.line}:{exc.column}: {exc.reason}", EXIT_PARSE) from None


# -- commands --------------------------------------------------------------

def cmd_bounds(path: str, which: str = "all", as_json: bool = False, out: TextIO | None = None) -> int:
    out = out or sys.stdout
    system = _load(path)
    try:
        reports = bound_reports(system, path, which)
    except DomainError as exc:
        raise CliError(f"{path}: {exc}", EXIT_DOMAIN) from None
    if as_json:
        json.dump([r.to_json() for r in reports], out, indent=2)
        out.write("\n")
    else:
        out.write("instance\tbound\texact\tdecimal\n")
        for r in reports:
            out.write(r.row() + "\n")
    return EXIT_OK


def cmd_verify_paper(table: dict | None = None, out: TextIO | None = None) -> int:
    """Rebuild the six-event instance and check matrix, GK, KAT and the gap."""
    out = out or sys.stdout
    system = six_event_system(table)
    ref = reference_matrix()
    got = joint_matrix(system).entries
    checks: list[tuple[bool, str, list[str]]] = []

    diff = []
    if len(got) != len(ref):
        diff.append(f"  size: computed {len(got)}, expected {len(ref)}")
    else:
        for i, (grow, rrow) in enumerate(zip(got, ref)):
            for j, (g, r) in enumerate(zip(grow, rrow)):
                if g != r:
                    diff.append(f"  P(A{i + 1}A{j + 1}): computed {format_fraction(g)}, "
                                f"expected {format_fraction(r)}")
    checks.append((not diff, f"joint matrix equals the reference matrix ({len(ref) ** 2} entries)", diff))

    gk = gk_solve(system).bound
    kat, _ = kat_bound(system)
    checks.append((gk == GK_VALUE, f"gk = {format_fraction(GK_VALUE)}",
                   [] if gk == GK_VALUE else [f"  computed {format_fraction(gk)}"]))
    checks.append((kat == KAT_VALUE, f"kat = {format_fraction(KAT_VALUE)}",
                   [] if kat == KAT_VALUE else [f"  computed {format_fraction(kat)}"]))
    checks.append((kat > gk, f"kat > gk (gap {format_fraction(kat - gk)})", []))

    passed = 0
    for ok, label, details in checks:
        out.write(f"{'PASS' if ok else 'FAIL'}\t{label}\n")
        for line in details:
            out.write(line + "\n")
        passed += ok
    out.write(f"{passed}/{len(checks)} checks passed\n")
    return EXIT_OK if passed == len(checks) else EXIT_FAIL


def parse_p_list(text: str) -> list[Fraction]:
    try:
        return [Fraction(tok.strip()) for tok in text.split(",") if tok.strip()]
    except (ValueError, ZeroDivisionError):
        raise CliError(f"bad exponent list {text!r}", EXIT_PARSE) from None


def parse_tau(spec: str) -> Subsequence:
    if spec == "identity":
        return Subsequence.identity()
    if spec.startswith("stride:"):
        try:
            return Subsequence.stride(spec[len("stride:"):])
        except (ValueError, SyntaxError):
            raise CliError(f"bad stride expression in {spec!r}", EXIT_PARSE) from None
    if spec.startswith("list:"):
        path = spec[len("list:"):]
        try:
            text = Path(path).read_text(encoding="utf-8")
        except OSError as exc:
            raise CliError(f"{path}: {exc.strerror or exc}", EXIT_IO) from None
        try:
            return Subsequence.from_list([int(t) for t in text.split()], label=spec)
        except ValueError:
            raise CliError(f"{path}: expected whitespace-separated integers", EXIT_PARSE) from None
    raise CliError(f"unknown tau spec {spec!r}", EXIT_PARSE)


def _flag(ok: bool) -> str:
    return "pass" if ok else "fail"


def cmd_dyadic(N: int, p_list: Sequence[Fraction], tau_spec: str = "identity",
               window=DEFAULT_WINDOW, ms_grid: Sequence | None = None,
               out: TextIO | None = None) -> int:
    out = out or sys.stdout
    if not 2 <= N <= MAX_N:
        raise CliError(f"N must lie in 2..{MAX_N}", EXIT_GUARD)
    for p in p_list:
        if not 0 < p < 1:
            raise CliError(f"p = {p}: chain exponents must lie in (0, 1); p must avoid 1", EXIT_DOMAIN)
    if not p_list:
        raise CliError("empty exponent list", EXIT_PARSE)
    tau = parse_tau(tau_spec)
    try:
        idx = tau.prefix(N)
    except DomainError as exc:
        raise CliError(str(exc), EXIT_DOMAIN) from None
    cfg = DyadicConfig.for_max_index(idx[-1])
    if cfg.resolution > MAX_RESOLUTION:
        raise CliError(f"tau({N}) = {idx[-1]} needs more than 2^{MAX_RESOLUTION} atoms", EXIT_GUARD)

    out.write(f"# dyadic sequence, resolution {cfg.resolution} ({cfg.atoms} atoms), tau {tau.label}\n")
    out.write("n\tp\tmoment\trhs\tstep_a\tstep_b\tstep_c\tresult\n")
    all_ok = True
    for p in p_list:
        try:
            r = verify_ce1_chain(cfg, tau, N, p)
        except DomainError as exc:
            raise CliError(str(exc), EXIT_DOMAIN) from None
        all_ok &= r.passed
        out.write(f"{N}\t{format_fraction(p)}\t{ctx.nstr(r.moment, 12)}\t{ctx.nstr(r.rhs, 12)}\t"
                  f"{_flag(r.step_a)}\t{_flag(r.step_b)}\t{_flag(r.step_c)}\t"
                  f"{'PASS' if r.passed else 'FAIL'}\n")

    grid = list(ms_grid) if ms_grid else list(DEFAULT_P_GRID)
    try:
        ms = ms_estimate(DyadicSequence(cfg), tau, N, window, grid)
    except DomainError as exc:
        raise CliError(str(exc), EXIT_DOMAIN) from None
    out.write("p\tms_value\tms_n\tmoment\tmoment_n\n")
    for pt in ms.curve:
        out.write(f"{format_fraction(pt.p)}\t{ctx.nstr(pt.value, 12)}\t{pt.value_n}\t"
                  f"{ctx.nstr(pt.moment, 12)}\t{pt.moment_n}\n")
    out.write(f"ms_estimate\t{ctx.nstr(ms.value, 12)}\tp={format_fraction(ms.best_p)}\n")
    out.write(f"small_p_moment\t{ctx.nstr(ms.small_p_moment, 12)}\n")
    return EXIT_OK if all_ok else EXIT_FAIL


SUMMARY_COLUMNS = ("rank", "source", "gap", "gk", "kat", "union", "file")


def cmd_search(cfg: SearchConfig, out_dir: str | None, include: Sequence[str] = (),
               workers: int = 1, out: TextIO | None = None) -> int:
    out = out or sys.stdout
    included = []
    for path in include:
        system = _load(path)
        try:
            system.require_positive()
        except DomainError as exc:
            raise CliError(f"{path}: {exc}", EXIT_DOMAIN) from None
        included.append((path, system))
    target = None
    if out_dir is not None:
        target = Path(out_dir)
        try:
            target.mkdir(parents=True, exist_ok=True)
            probe = target / ".write-probe"
            probe.write_text("")
            probe.unlink()
        except OSError as exc:
            raise CliError(f"{out_dir}: {exc.strerror or exc}", EXIT_IO) from None

    hits = search_gaps(cfg, include=included, workers=workers)

    rows = ["\t".join(SUMMARY_COLUMNS)]
    for k, h in enumerate(hits, start=1):
        fname = f"hit_{k}.space"
        rows.append("\t".join([str(k), h.source, format_fraction(h.gap), format_fraction(h.gk),
                               format_fraction(h.kat), format_fraction(h.union), fname]))
        if target is not None:
            header = (f"source {h.source}", f"gk {format_fraction(h.gk)}",
                      f"kat {format_fraction(h.kat)}", f"gap {format_fraction(h.gap)}",
                      f"union {format_fraction(h.union)}")
            try:
                (target / fname).write_text(format_space(h.system, header), encoding="utf-8")
            except OSError as exc:
                raise CliError(f"{target / fname}: {exc.strerror or exc}", EXIT_IO) from None
    summary = "\n".join(rows) + "\n"
    if target is not None:
        try:
            (target / "summary.tsv").write_text(summary, encoding="utf-8")
        except OSError as exc:
            raise CliError(f"{target}: {exc.strerror or exc}", EXIT_IO) from None
    out.write(f"# atoms={cfg.atoms} events={cfg.events} granularity={cfg.granularity} "
              f"trials={cfg.trials} seed={cfg.seed} hits={len(hits)}\n")
    out.write(summary)
    return EXIT_OK


# -- argument parsing ------------------------------------------------------

def _positive_int(text: str) -> int:
    try:
        v = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not an integer: {text!r}") from None
    if v < 1:
        raise argparse.ArgumentTypeError(f"must be positive: {v}")
    return v


def _uint64(text: str) -> int:
    try:
        v = int(text, 0)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not an integer: {text!r}") from None
    if not 0 <= v < 2 ** 64:
        raise argparse.ArgumentTypeError("seed must fit in 64 unsigned bits")
    return v


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="borelbounds",
        description="Exact lower bounds for unions of events and Borel-Cantelli prefix functionals.",
        epilog="exit codes: 0 ok, 1 verification failed, 2 parse/usage, 3 domain, 4 resource guard, 5 I/O",
    )
    sub = ap.add_subparsers(dest="command", required=True)

    b = sub.add_parser("bounds", help="GK, KAT, Chung-Erdős and union probability of a space file",
                       epilog="TSV columns: instance, bound, exact (num/den), decimal (12 significant digits)")
    b.add_argument("--input", required=True, metavar="PATH")
    b.add_argument("--bound", choices=("gk", "kat", "ce", "union", "all"), default="all")
    b.add_argument("--json", action="store_true", help="emit JSON reports with diagnostics")

    sub.add_parser("verify-paper", help="check the built-in six-event instance (GK 54/55 < 1 KAT)")

    d = sub.add_parser("dyadic", help="dyadic-interval sequence: bound chain and MS curve",
                       epilog="chain TSV columns: n, p, moment, rhs, step_a, step_b, step_c, result; "
                              "MS TSV columns: p, ms_value, ms_n, moment, moment_n")
    d.add_argument("--N", type=int, required=True, dest="N")
    d.add_argument("--p", required=True, metavar="LIST", help="comma-separated exponents in (0,1)")
    d.add_argument("--tau", default="identity", metavar="SPEC",
                   help="identity | stride:EXPR (in n, e.g. 2^n) | list:PATH")
    d.add_argument("--window", default="1/2", help="trailing window fraction for limsup surrogates")
    d.add_argument("--ms-grid", default=None, metavar="LIST",
                   help="exponent grid for the MS scan (default 2,1/2,...,1/32)")

    s = sub.add_parser("search", help="random search for systems with KAT > GK",
                       epilog="summary TSV columns: " + ", ".join(SUMMARY_COLUMNS)
                              + "; hit files are <out>/hit_<rank>.space plus <out>/summary.tsv")
    s.add_argument("--atoms", type=_positive_int, required=True)
    s.add_argument("--events", type=_positive_int, required=True)
    s.add_argument("--granularity", type=_positive_int, required=True)
    s.add_argument("--trials", type=_positive_int, required=True)
    s.add_argument("--seed", type=_uint64, default=0)
    s.add_argument("--include", action="append", default=[], metavar="PATH")
    s.add_argument("--out", default=None, metavar="DIR")
    s.add_argument("--workers", type=_positive_int, default=1)
    return ap


def main(argv: Sequence[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.command == "bounds":
            return cmd_bounds(args.input, args.bound, args.json)
        if args.command == "verify-paper":
            return cmd_verify_paper()
        if args.command == "dyadic":
            grid = parse_p_list(args.ms_grid) if args.ms_grid else None
            try:
                window = Fraction(args.window)
            except (ValueError, ZeroDivisionError):
                raise CliError(f"bad window {args.window!r}", EXIT_PARSE) from None
            return cmd_dyadic(args.N, parse_p_list(args.p), args.tau, window, grid)
        if args.command == "search":
            try:
                cfg = SearchConfig(args.atoms, args.events, args.trials, args.seed, args.granularity)
            except ValueError as exc:
                raise CliError(str(exc), EXIT_PARSE) from None
            return cmd_search(cfg, args.out, args.include, args.workers)
    except CliError as exc:
        print(f"borelbounds: error: {exc}", file=sys.stderr)
        return exc.code
    return EXIT_FAIL


if __name__ == "__main__":
    sys.exit(main())
