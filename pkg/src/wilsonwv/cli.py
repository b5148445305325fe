"""Command-line front end: ``wilsonwv {expand,wv-scan,polygon,verify}``.

Exit codes: 0 pass, 1 check failure, 2 usage error, 3 numeric abort.
"""
from __future__ import annotations

import argparse
import csv
import io as _io
import os
import sys
import warnings
from fractions import Fraction

from mpmath import mp, mpf

from . import __version__
from .difference_equations import newton_polygon, parse_equation_text
from .errors import (
    DegenerateNodeError,
    EvaluationError,
    GrowthGateWarning,
    PreconditionError,
    SpecParseError,
    TruncationError,
)
from .identities import SUITES, run_all
from .io import dec, digits_for, dump_json, load_json, series_from_obj, series_to_obj
from .scan import log_grid, run_wv_scan
from .series import growth_gate, expand_wilson, parse_function_spec

EXIT_OK, EXIT_FAIL, EXIT_USAGE, EXIT_NUMERIC = 0, 1, 2, 3

ROW_DIGITS = 20


def _default_precision() -> int:
    raw = os.environ.get("WILSON_PRECISION")
    if raw is None:
        return 128
    try:
        return int(raw)
    except ValueError:
        raise SystemExit(f"WILSON_PRECISION must be an integer, got {raw!r}")


def _emit(text: str, path):
    if path:
        with open(path, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _param(q: Fraction):
    # integers stay exact; other rationals become mpf at the working precision
    return int(q) if q.denominator == 1 else mpf(q.numerator) / q.denominator


def _load_function(path):
    if not path:
        raise PreconditionError("--input is required")
    return parse_function_spec(load_json(path))


# ---------------------------------------------------------------- expand


def cmd_expand(args) -> int:
    f = _load_function(args.input)
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always", GrowthGateWarning)
        s = expand_wilson(f, 0, args.n_max, args.precision, gate=not args.no_gate)
    for w in caught:
        print(f"warning: {w.message}", file=sys.stderr)
    _emit(dump_json(series_to_obj(s)), args.output)
    return EXIT_OK


# ---------------------------------------------------------------- wv-scan

ROW_FIELDS = ["r", "status", "nu", "mu", "M", "tau_normal", "evaluable", "tail_ratio"]


def _row_fields(orders):
    cols = list(ROW_FIELDS)
    for i, n in enumerate(orders):
        suffix = "" if i == 0 else f"_n{n}"
        cols += [f"wv_residual_over_bound{suffix}", f"wv_residual_over_M{suffix}"]
    return cols + ["wv_estimate", "mbound"]


def _row_record(row, orders):
    rec = {
        "r": dec(row.r, ROW_DIGITS),
        "status": row.status,
        "nu": "" if row.nu is None else str(row.nu),
        "mu": dec(row.mu, ROW_DIGITS),
        "M": dec(row.M, ROW_DIGITS),
        "tau_normal": dec(row.tau_normal),
        "evaluable": dec(row.evaluable),
        "tail_ratio": dec(row.tail_ratio, ROW_DIGITS),
    }
    for i, n in enumerate(orders):
        suffix = "" if i == 0 else f"_n{n}"
        over_bound, over_m = row.wv.get(n, (None, None))
        rec[f"wv_residual_over_bound{suffix}"] = dec(over_bound, ROW_DIGITS)
        rec[f"wv_residual_over_M{suffix}"] = dec(over_m, ROW_DIGITS)
    rec["wv_estimate"] = dec(row.wv_estimate)
    rec["mbound"] = dec(row.mbound)
    return rec


def _plain(v):
    # summary values as JSON-safe decimal strings
    if isinstance(v, dict):
        return {str(k): _plain(x) for k, x in v.items()}
    if isinstance(v, (list, tuple)):
        return [_plain(x) for x in v]
    if isinstance(v, bool) or v is None or isinstance(v, str):
        return v
    if isinstance(v, (int, Fraction)):
        return str(v)
    return dec(v, ROW_DIGITS)


def cmd_wv_scan(args) -> int:
    f = _load_function(args.input)
    if not (args.omega < args.beta):
        raise PreconditionError("--omega must be below --beta")
    if f.known_order() != 0.0:
        gate = growth_gate(f)
        if not gate.passed:
            msg = f"growth gate failed for {f.label}: value {gate.value:.4g} >= {gate.threshold * (1 - gate.margin):.4g}"
            if not args.force:
                print(f"refused: {msg}; rerun with --force to scan anyway", file=sys.stderr)
                return EXIT_FAIL
            print(f"warning: {msg}", file=sys.stderr)
    series = series_from_obj(load_json(args.series)) if args.series else None
    grid = log_grid(args.rmin, args.rmax, args.ppd)
    delta, gamma, beta, omega = (_param(getattr(args, k)) for k in ("delta", "gamma", "beta", "omega"))
    rep = run_wv_scan(
        f, grid, delta, gamma, beta, omega, args.order_n, args.seed,
        args.precision, args.n_max, series, args.workers,
    )
    orders = rep.config["orders"]
    records = [_row_record(row, orders) for row in rep.rows]
    meta = {
        "label": rep.config["label"],
        "precision_bits": rep.config["prec"],
        "digits": ROW_DIGITS,
        "n_max": str(rep.config["n_max"]),
        "delta": str(args.delta),
        "gamma": str(args.gamma),
        "beta": str(args.beta),
        "omega": str(args.omega),
        "orders": [str(n) for n in orders],
        "seed": str(args.seed),
    }
    summary = _plain(rep.summary)
    if args.format == "csv":
        buf = _io.StringIO()
        writer = csv.DictWriter(buf, fieldnames=_row_fields(orders), lineterminator="\n")
        writer.writeheader()
        writer.writerows(records)
        _emit(buf.getvalue(), args.output)
        if args.output:
            sys.stdout.write(dump_json({"meta": meta, "summary": summary}))
    else:
        text = dump_json({"meta": meta, "rows": records, "summary": summary})
        _emit(text, args.output)
        if args.output:
            sys.stdout.write(dump_json({"summary": summary}))
    aborted = [row for row in rep.rows if row.status in ("truncated", "numeric_abort")]
    for row in aborted:
        print(f"warning: r = {row.r:.6g}: {row.status}: {row.message}", file=sys.stderr)
    if rep.rows and len(aborted) == len(rep.rows):
        # per-radius failures are not fatal unless nothing was evaluated
        return EXIT_NUMERIC
    return EXIT_OK if rep.summary["passed"] else EXIT_FAIL


# ---------------------------------------------------------------- polygon


def cmd_polygon(args) -> int:
    if not args.input:
        raise PreconditionError("--input is required")
    with open(args.input, encoding="utf-8") as fh:
        text = fh.read()
    try:
        eq = parse_equation_text(text)
    except SpecParseError as exc:
        raise SpecParseError(f"{args.input}: {exc}") from exc
    poly = newton_polygon(eq)
    admissible = set(poly.admissible)
    out = {
        "points": [[str(k), str(y)] for k, y in poly.points],
        "hull": [[str(k), str(y)] for k, y in poly.hull_vertices],
        "slopes": [str(q) for q in poly.edge_slopes],
        "admissible": [q in admissible for q in poly.edge_slopes],
        "predicted_orders": [str(q) for q in poly.predicted_orders],
    }
    _emit(dump_json(out), args.output)
    return EXIT_OK


# ---------------------------------------------------------------- verify


def cmd_verify(args) -> int:
    only = args.only or None
    if only:
        bad = [name for name in only if name not in SUITES]
        if bad:
            raise PreconditionError(f"unknown suite(s) {', '.join(bad)}; choose from {', '.join(SUITES)}")
    results = run_all(args.seed, args.precision, only, args.n)
    digits = digits_for(args.precision)
    with mp.workprec(args.precision):
        payload = {
            "precision_bits": args.precision,
            "seed": str(args.seed),
            "suites": [
                {
                    "name": res.name,
                    "passed": res.passed,
                    "max_residual": dec(res.max_residual, min(digits, ROW_DIGITS)),
                    "tolerance": dec(res.tolerance, 3),
                    "samples": str(res.samples),
                    "checks": {name: ok for name, ok in res.extra},
                }
                for res in results
            ],
        }
    payload["passed"] = all(res.passed for res in results)
    _emit(dump_json(payload), args.output)
    return EXIT_OK if payload["passed"] else EXIT_FAIL


# ---------------------------------------------------------------- parser


def _common(p, precision):
    p.add_argument("--input", help="input JSON file")
    p.add_argument("--output", help="output file (default stdout)")
    p.add_argument("--precision", type=int, default=precision, help="working precision in bits")
    p.add_argument("--seed", type=int, default=0)


def build_parser() -> argparse.ArgumentParser:
    precision = _default_precision()
    parser = argparse.ArgumentParser(prog="wilsonwv", description="Wilson operator calculus and Wiman-Valiron scans.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("expand", help="Wilson series coefficients of a function spec")
    _common(p, precision)
    p.add_argument("--n-max", type=int, default=20)
    p.add_argument("--no-gate", action="store_true", help="skip the growth gate")
    p.set_defaults(func=cmd_expand)

    p = sub.add_parser("wv-scan", help="Wiman-Valiron checks over a radius grid")
    _common(p, precision)
    p.add_argument("--format", choices=("json", "csv"), default="json")
    p.add_argument("--series", help="previously expanded series file")
    p.add_argument("--rmin", type=float, default=1e3)
    p.add_argument("--rmax", type=float, default=1e6)
    p.add_argument("--ppd", type=int, default=8, help="points per decade")
    p.add_argument("--delta", type=Fraction, default=Fraction(1))
    p.add_argument("--gamma", type=Fraction, default=Fraction(4))
    p.add_argument("--beta", type=Fraction, default=Fraction(10))
    p.add_argument("--omega", type=Fraction, default=Fraction(9))
    p.add_argument("--order-n", type=int, nargs="+", default=[1], help="difference orders n for the main estimate")
    p.add_argument("--n-max", type=int, default=None, help="fixed expansion length (default: grow from 200)")
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--force", action="store_true", help="scan even when the growth gate fails")
    p.set_defaults(func=cmd_wv_scan)

    p = sub.add_parser("polygon", help="Newton polygon of a difference equation file")
    _common(p, precision)
    p.set_defaults(func=cmd_polygon)

    p = sub.add_parser("verify", help="run the identity suites")
    _common(p, precision)
    p.add_argument("--only", nargs="+", metavar="SUITE", help=f"subset of: {', '.join(SUITES)}")
    p.add_argument("--n", type=int, default=None, help="order for the leibniz/cooper/taurule suites")
    p.set_defaults(func=cmd_verify)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.precision < 53:
        parser.error("--precision must be >= 53")
    if getattr(args, "rmin", 1) < 1:
        parser.error("--rmin must be >= 1")
    if getattr(args, "ppd", 4) < 4:
        parser.error("--ppd must be >= 4")
    try:
        return args.func(args)
    except (TruncationError, DegenerateNodeError, EvaluationError) as exc:
        print(f"numeric abort: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except (PreconditionError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
