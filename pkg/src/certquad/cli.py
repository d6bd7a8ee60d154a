"""``certquad`` command line: integrate, bounds, verify, profile.

Exit codes: 0 success, 1 usage error, 2 hypothesis violated,
3 tolerance not reached, 4 verification failures.  Only the requested
artifact goes to stdout; diagnostics go to stderr.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys

from certquad import bounds as B
from certquad import harness as H
from certquad.errors import CertQuadError, HypothesisViolated, NoConvergenceError
from certquad.funcmodel import parse
from certquad.identity import RuleParams
from certquad.integrator import X_MID, X_OPT, integrate_certified

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_HYPOTHESIS = 2
EXIT_TOLERANCE = 3
EXIT_FAILURES = 4


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.prog}: {message}")


def _fmt(v) -> str:
    if v is None:
        return ""
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, float):
        return format(v, ".17g")
    return str(v)


def _x_arg(text: str):
    if text in ("mid", "opt"):
        return text
    try:
        v = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected mid, opt or a number, got {text!r}") from None
    if not math.isfinite(v):
        raise argparse.ArgumentTypeError("x must be finite")
    return v


def _finite(text: str) -> float:
    try:
        v = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a number: {text!r}") from None
    if not math.isfinite(v):
        raise argparse.ArgumentTypeError(f"not finite: {text!r}")
    return v


def _holder_p(text: str) -> float:
    v = _finite(text)
    if v <= 1:
        raise argparse.ArgumentTypeError("p must exceed 1")
    return v


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="certquad", description="Certified-error numerical integration.")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def function_args(sp, need_n=True):
        sp.add_argument("--expr", required=True, help='integrand in x, e.g. "exp(x) - x^2"')
        sp.add_argument("--a", type=_finite, required=True)
        sp.add_argument("--b", type=_finite, required=True)
        if need_n:
            sp.add_argument("--n", type=int, required=True, help="derivative order")
        sp.add_argument("--p", type=_holder_p, default=B.DEFAULT_P, help="Holder exponent (default 2)")
        sp.add_argument("--assume-hypotheses", action="store_true", help="skip the convexity grid check")

    def output_args(sp, formats=("text", "json", "csv"), default="text"):
        sp.add_argument("--format", choices=formats, default=default)
        sp.add_argument("--output", help="write the artifact here instead of stdout")

    sp = sub.add_parser("integrate", help="adaptive certified integration")
    function_args(sp)
    sp.add_argument("--tol", type=_finite, default=1e-8)
    sp.add_argument("--family", choices=B.FAMILIES, default=B.CONVEX)
    sp.add_argument("--x", type=_x_arg, default="mid", help="mid, opt, or a relative position in [0, 1]")
    sp.add_argument("--max-panels", type=int, default=10000)
    output_args(sp)

    sp = sub.add_parser("bounds", help="error bounds for a single rule application")
    function_args(sp)
    sp.add_argument("--family", choices=B.FAMILIES, default=B.CONVEX)
    sp.add_argument("--x", type=_x_arg, default="mid", help="mid, opt, or an absolute point in [a, b]")
    sp.add_argument("--compare", action="store_true", help="all applicable families, minimum flagged")
    output_args(sp)

    sp = sub.add_parser("verify", help="randomised verification suites")
    sp.add_argument("--suite", required=True, choices=H.SUITES + ("all",))
    sp.add_argument("--trials", type=int, default=10000)
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--workers", type=int, default=None, help="processes (default CERTQUAD_THREADS or 1)")
    output_args(sp)

    sp = sub.add_parser("profile", help="tightness ratio |error|/bound as a function of x")
    src = sp.add_mutually_exclusive_group(required=True)
    src.add_argument("--expr", help="explicit integrand")
    src.add_argument("--kind", choices=H.KINDS, help="random function family")
    sp.add_argument("--a", type=_finite)
    sp.add_argument("--b", type=_finite)
    sp.add_argument("--n", type=int, required=True)
    sp.add_argument("--family", choices=(B.CONVEX, B.HOLDER, B.CONCAVE, B.N1), default=B.CONVEX)
    sp.add_argument("--p", type=_holder_p, default=B.DEFAULT_P)
    sp.add_argument("--points", type=int, default=21, help="grid size over [a, b]")
    sp.add_argument("--trials", type=int, default=100)
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--assume-hypotheses", action="store_true")
    sp.add_argument("--output")
    return parser


def _validate(args):
    if getattr(args, "n", None) is not None and args.n < 1:
        raise UsageError("--n must be >= 1")
    if args.command in ("integrate", "bounds") or (args.command == "profile" and args.expr is not None):
        if args.a is None or args.b is None:
            raise UsageError("--a and --b are required")
        if not args.a < args.b:
            raise UsageError("need --a < --b")
    if args.command == "integrate":
        if args.tol <= 0:
            raise UsageError("--tol must be positive")
        if args.max_panels < 1:
            raise UsageError("--max-panels must be >= 1")
        if isinstance(args.x, float) and not 0.0 <= args.x <= 1.0:
            raise UsageError("--x as a number is a relative position and must lie in [0, 1]")
    if args.command == "bounds":
        if isinstance(args.x, float) and not args.a <= args.x <= args.b:
            raise UsageError("--x must lie in [a, b]")
        if args.compare and args.x == "opt":
            raise UsageError("--x opt cannot be combined with --compare")
    if args.command == "verify" and args.trials < 1:
        raise UsageError("--trials must be >= 1")
    if args.command == "profile":
        if args.points < 2:
            raise UsageError("--points must be >= 2")
        if args.trials < 1:
            raise UsageError("--trials must be >= 1")
        if args.kind is not None and (args.a is not None or args.b is not None):
            raise UsageError("--a/--b apply to --expr only; --kind draws its own intervals")


def _write(text: str, path: str | None):
    if path is None:
        sys.stdout.write(text)
    else:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(text)


def _csv(header, rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([_fmt(v) for v in row])
    return buf.getvalue()


# -- subcommands ------------------------------------------------------------------


def _integrate(args) -> int:
    f = parse(args.expr)
    x_choice = {"mid": X_MID, "opt": X_OPT}.get(args.x, args.x)
    res = integrate_certified(
        f, args.a, args.b, args.n, args.family, args.p, args.tol, args.max_panels,
        x_choice, args.assume_hypotheses,
    )
    if args.format == "json":
        out = json.dumps(res.to_dict(), indent=1) + "\n"
    elif args.format == "csv":
        d = res.to_dict(include_panels=False)
        keys = ["estimate", "certified", "n", "family", "tol", "converged", "evaluations", "panel_count"]
        out = _csv(keys, [[d[k] for k in keys]])
    else:
        out = (
            f"estimate   {res.estimate:.17g}\n"
            f"certified  {res.certified:.6g}\n"
            f"panels     {len(res.panels)}\n"
            f"family     {res.family} (n={res.n})\n"
            f"converged  {'yes' if res.converged else 'no'}\n"
        )
    _write(out, args.output)
    if not res.converged:
        print(f"certquad: certified bound {res.certified:.6g} above tol {args.tol:g} "
              f"after {len(res.panels)} panels", file=sys.stderr)
        return EXIT_TOLERANCE
    return EXIT_OK


_REPORT_COLUMNS = ["family", "a", "b", "x", "n", "p", "q", "Fa", "Fb", "Fmid", "value", "lhs_form", "hypothesis"]


def _bounds(args) -> int:
    f = parse(args.expr)
    a, b, n = args.a, args.b, args.n
    if args.compare:
        x = (a + b) / 2 if args.x == "mid" else args.x
        cmp = B.compare_bounds(f, RuleParams(a, b, x, n), args.p, args.assume_hypotheses)
        for fam, why in cmp.skipped.items():
            print(f"certquad: skipped {fam}: {why}", file=sys.stderr)
        rows = [dict(r.to_dict(), minimum=r.family == cmp.minimum) for r in cmp.reports]
        if args.format == "json":
            out = json.dumps({"reports": rows, "minimum": cmp.minimum, "skipped": cmp.skipped}, indent=1) + "\n"
        elif args.format == "csv":
            cols = _REPORT_COLUMNS + ["minimum"]
            out = _csv(cols, [[r[c] for c in cols] for r in rows])
        else:
            lines = [f"{'family':<14}{'value':>24}  form"]
            for r in rows:
                mark = "  <- minimum" if r["minimum"] else ""
                lines.append(f"{r['family']:<14}{r['value']:>24.17g}  {r['lhs_form']}{mark}")
            lines.append(f"minimum={cmp.minimum}")
            out = "\n".join(lines) + "\n"
        _write(out, args.output)
        return EXIT_OK if cmp.reports else EXIT_HYPOTHESIS

    fam = args.family
    verdict = B.check_hypothesis(f, a, b, n, fam, args.p, args.assume_hypotheses)
    if not verdict.ok:
        raise HypothesisViolated(verdict, f"{fam}: {verdict.property} fails near t={verdict.witness}")
    if args.x == "opt":
        x, _ = B.optimize_x(f, a, b, n, fam, args.p, verdict=verdict)
    else:
        x = (a + b) / 2 if args.x == "mid" else args.x
    report = B.bound(f, fam, RuleParams(a, b, x, n), args.p, verdict=verdict)
    d = report.to_dict()
    if args.format == "json":
        out = json.dumps(d, indent=1) + "\n"
    elif args.format == "csv":
        out = _csv(_REPORT_COLUMNS, [[d[c] for c in _REPORT_COLUMNS]])
    else:
        out = f"{report.family}  x={x:.17g}  value={report.value:.17g}  ({d['lhs_form']} form)\n"
    _write(out, args.output)
    return EXIT_OK


def _verify(args) -> int:
    suites = H.SUITES if args.suite == "all" else (args.suite,)
    records, summaries = [], []
    for s in suites:
        recs, summary = H.run_suite(s, args.trials, args.seed, args.workers)
        records.extend(recs)
        summaries.append(summary)
        status = "PASS" if summary.all_passed else "FAIL"
        print(f"{status} {s}: {summary.passed}/{summary.trials} min margin {summary.min_margin:.3g} "
              f"(trial {summary.argmin_index}, {summary.seconds:.1f}s)", file=sys.stderr)
    _write(H.emit_report(records, args.format), args.output)
    return EXIT_OK if all(s.all_passed for s in summaries) else EXIT_FAILURES


def _profile(args) -> int:
    if args.expr is not None:
        f = parse(args.expr)
        if not args.assume_hypotheses:
            verdict = B.check_hypothesis(f, args.a, args.b, args.n, args.family, args.p)
            if not verdict.ok:
                raise HypothesisViolated(verdict, f"{args.family}: {verdict.property} fails near t={verdict.witness}")
        xs = [args.a + (args.b - args.a) * i / (args.points - 1) for i in range(args.points)]
        rows = H.ratio_profile_expr(f, args.a, args.b, args.n, xs, args.family, args.p)
    else:
        grid = [i / (args.points - 1) for i in range(args.points)]
        rows = H.ratio_profile(args.kind, args.n, grid, args.trials, args.seed, args.family, args.p)
    _write(H.profile_csv(rows), args.output)
    return EXIT_OK


_COMMANDS = {"integrate": _integrate, "bounds": _bounds, "verify": _verify, "profile": _profile}


def main(argv=None) -> int:
    try:
        args = build_parser().parse_args(argv)
        _validate(args)
        return _COMMANDS[args.command](args)
    except UsageError as exc:
        print(exc, file=sys.stderr)
        return EXIT_USAGE
    except HypothesisViolated as exc:
        print(f"certquad: hypothesis violated: {exc}", file=sys.stderr)
        return EXIT_HYPOTHESIS
    except NoConvergenceError as exc:
        print(f"certquad: {exc}", file=sys.stderr)
        return EXIT_TOLERANCE
    except (CertQuadError, ValueError, ArithmeticError) as exc:
        print(f"certquad: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except OSError as exc:
        print(f"certquad: {exc}", file=sys.stderr)
        return EXIT_USAGE


def entry() -> None:
    sys.exit(main())


if __name__ == "__main__":
    entry()
