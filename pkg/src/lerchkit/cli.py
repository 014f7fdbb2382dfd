"""Command-line front end: ``lerchkit {eval,sample,fit,gof,reproduce,export-datasets}``."""

from __future__ import annotations

import argparse
import json
import math
import sys

import numpy as np

from . import reproduce as repro
from .data import BUILTIN_NAMES, builtin, load_dataset, write_dataset
from .distribution import LerchDist, Truncation
from .errors import LerchError, NoConvergence, NoSolution, SingularMatrix
from .estimate import FitConfig, fit
from .gof import pearson_chi2, ssd
from .sampler import SamplerState, default_rng

EXIT_OK = 0
EXIT_INPUT = 2
EXIT_NO_CONVERGENCE = 3
EXIT_TOLERANCE = 4

EVAL_FUNCTIONS = ("pmf", "cdf", "survival", "hazard", "quantile", "mean", "variance", "mode", "moment:r")


class CliError(Exception):
    def __init__(self, message, code=EXIT_INPUT):
        super().__init__(message)
        self.code = code


# -- formatting ------------------------------------------------------------------

def _num(x):
    if isinstance(x, (bool, np.bool_)):
        return str(bool(x))
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    if x is None:
        return "-"
    return f"{float(x):.6g}"


def _jsonable(obj):
    if isinstance(obj, dict):
        return {k: _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _jsonable(obj.tolist())
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        x = float(obj)
        return x if math.isfinite(x) else str(x)
    return obj


def _table(headers, rows):
    cells = [[str(h) for h in headers]] + [[_num(c) if not isinstance(c, str) else c for c in r] for r in rows]
    widths = [max(len(r[i]) for r in cells) for i in range(len(headers))]
    lines = ["  ".join(c.rjust(w) for c, w in zip(r, widths)) for r in cells]
    lines.insert(1, "  ".join("-" * w for w in widths))
    return "\n".join(lines)


def _emit(args, doc, text):
    if args.format == "json":
        print(json.dumps(_jsonable(doc), indent=2))
    else:
        print(text)


# -- argument helpers -------------------------------------------------------------

def _seed(text):
    try:
        value = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"seed must be an integer, got {text!r}") from None
    if not 0 <= value < 2**64:
        raise argparse.ArgumentTypeError("seed must be a 64-bit unsigned integer")
    return value


def _add_params(p, required=True):
    p.add_argument("--z", type=float, required=required)
    p.add_argument("--s", type=float, required=required)
    p.add_argument("--v", type=float, required=required)
    _add_truncation(p)


def _add_truncation(p, default_a=0):
    p.add_argument("--a", type=int, default=default_a, help="lower support bound")
    p.add_argument("--b", type=int, default=None, help="upper support bound (default: none)")


def _add_data(p):
    src = p.add_mutually_exclusive_group(required=True)
    src.add_argument("--data", metavar="PATH", help="CSV (count,observed) or JSON frequency file")
    src.add_argument("--builtin", choices=BUILTIN_NAMES)


def _dist(args):
    return LerchDist(args.z, args.s, args.v, args.a, args.b)


def _dataset(args):
    ds = builtin(args.builtin) if args.builtin else load_dataset(args.data)
    if args.a is not None or args.b is not None:
        a = args.a if args.a is not None else ds.truncation.a
        b = args.b if args.b is not None else (ds.truncation.b if args.a is None else None)
        ds = type(ds)(ds.name, ds.table, ds.grouping, Truncation(a, b), ds.citation, ds.chi2_size, ds.published)
    return ds


# -- subcommands ---------------------------------------------------------------------

def cmd_eval(args):
    dist = _dist(args)
    fn = args.fn
    call_args = {}
    if fn in ("pmf", "cdf", "survival", "hazard"):
        if args.x is None:
            raise CliError(f"--fn {fn} needs --x")
        call_args["x"] = args.x
        value = getattr(dist, fn)(args.x)
    elif fn == "quantile":
        if args.q is None:
            raise CliError("--fn quantile needs --q")
        call_args["q"] = args.q
        value = dist.quantile(args.q)
    elif fn in ("mean", "variance", "mode"):
        value = getattr(dist, fn)()
    elif fn.startswith("moment:"):
        try:
            r = int(fn.split(":", 1)[1])
        except ValueError:
            raise CliError(f"moment order must be an integer, got {fn!r}") from None
        call_args["r"] = r
        value = dist.moment_uncorrected(r)
    else:
        raise CliError(f"unknown function {fn!r}; choose from {', '.join(EVAL_FUNCTIONS)}")
    value = float(value) if not isinstance(value, (int, np.integer)) else int(value)
    call_args.update(z=args.z, s=args.s, v=args.v, a=args.a, b=args.b)
    doc = {"fn": fn, "args": call_args, "value": value}
    _emit(args, doc, f"{fn} = {_num(value)}")
    return EXIT_OK


def cmd_sample(args):
    if args.n < 0:
        raise CliError("--n must be nonnegative")
    state = SamplerState(_dist(args), default_rng(args.seed))
    draws = state.sample_n(args.n)
    out = sys.stdout
    out.write("".join(f"{int(x)}\n" for x in draws))
    return EXIT_OK


def _gof_block(ds, dist, n_params):
    try:
        report = pearson_chi2(ds.table, dist, ds.grouping, n_params, ds.chi2_size)
    except LerchError:
        return None
    return report


def cmd_fit(args):
    ds = _dataset(args)
    cfg = FitConfig(
        method=args.method, truncation=ds.truncation,
        multistart_count=args.starts, seed=args.seed,
    )
    try:
        result = fit(ds, cfg)
    except NoSolution as exc:
        raise CliError(f"no solution: {exc}", EXIT_NO_CONVERGENCE) from None
    dist = result.dist()
    predicted = ds.table.n_total * np.asarray(dist.pmf(ds.table.counts), dtype=float)
    report = _gof_block(ds, dist, 3)
    doc = result.to_dict()
    doc["dataset"] = ds.name
    doc["gof"] = None if report is None else report.to_dict()
    doc["x2"] = None if report is None else report.x2
    doc["dof"] = None if report is None else report.dof
    doc["p_value"] = None if report is None else report.p_value
    doc["ssd"] = ssd(ds.table, dist)
    doc["predicted"] = [{"count": int(c), "observed": float(o), "expected": float(e)}
                        for (c, o), e in zip(ds.table.classes, predicted)]
    p = result.params
    text = [
        f"{ds.name}: {result.method} fit, converged={result.converged}, starts={result.starts_tried}",
        f"z = {_num(p.z)}   s = {_num(p.s)}   v = {_num(p.v)}   objective = {_num(result.objective)}",
    ]
    se = result.standard_errors()
    if se is not None:
        text.append(f"std. errors: z {_num(se[0])}   s {_num(se[1])}   v {_num(se[2])}")
    if report is not None:
        text.append(f"X2 = {_num(report.x2)}   dof = {report.dof}   p = {_num(report.p_value)}")
    else:
        text.append("X2 test unavailable: no degrees of freedom left")
    text.append(f"SSD = {_num(doc['ssd'])}")
    text.append(_table(["count", "observed", "expected"],
                       [(int(c), float(o), float(e)) for (c, o), e in zip(ds.table.classes, predicted)]))
    _emit(args, doc, "\n".join(text))
    return EXIT_OK if result.converged else EXIT_NO_CONVERGENCE


def cmd_gof(args):
    ds = _dataset(args)
    dist = LerchDist(args.z, args.s, args.v, ds.truncation.a, ds.truncation.b)
    report = pearson_chi2(ds.table, dist, ds.grouping, args.n_params, ds.chi2_size)
    doc = report.to_dict()
    doc["ssd"] = ssd(ds.table, dist)
    rows = [(f"{lo}-{hi}" if hi != lo else str(lo), o, e) for (lo, hi), o, e in report.groups]
    text = "\n".join([
        _table(["classes", "observed", "expected"], rows),
        f"X2 = {_num(report.x2)}   dof = {report.dof}   p = {_num(report.p_value)}   SSD = {_num(doc['ssd'])}",
    ])
    _emit(args, doc, text)
    return EXIT_OK


def _comparison_text(cmp):
    headers = ["count", "observed"] + list(cmp.columns)
    rows = [(c, o, *(col[i] for col in cmp.columns.values()))
            for i, (c, o) in enumerate(zip(cmp.counts, cmp.observed))]
    lines = [f"== {cmp.table} ==", _table(headers, rows)]
    if cmp.fitted is not None:
        p = cmp.fitted.params
        lines.append(f"refit: z = {_num(p.z)}   s = {_num(p.s)}   v = {_num(p.v)}")
    for c in cmp.checks:
        if "E[" in c.label:
            continue
        mark = "ok  " if c.passed else "FAIL"
        lines.append(f"{mark} {c.label:<18} {_num(c.value):>12}  published {_num(c.reference)}")
    bad = [c for c in cmp.failures() if "E[" in c.label]
    cells = [c for c in cmp.checks if "E[" in c.label]
    if cells:
        lines.append(f"{'ok  ' if not bad else 'FAIL'} expected cells      {len(cells) - len(bad)}/{len(cells)} within tolerance")
    for c in bad:
        lines.append(f"FAIL {c.label}: {_num(c.value)} vs {_num(c.reference)}")
    return "\n".join(lines)


def cmd_reproduce(args):
    tables = args.table or list(repro.TABLES)
    cfg = FitConfig(seed=args.seed, multistart_count=args.starts)
    results = [repro.compare(t, refit=args.refit, cfg=cfg) for t in tables]
    doc = {"tables": [r.to_dict() for r in results], "passed": all(r.passed for r in results)}
    _emit(args, doc, "\n\n".join(_comparison_text(r) for r in results))
    failed = [r for r in results if not r.passed]
    if failed:
        for r in failed:
            labels = ", ".join(c.label for c in r.failures())
            print(f"{r.table}: outside tolerance: {labels}", file=sys.stderr)
        return EXIT_TOLERANCE
    return EXIT_OK


def cmd_export(args):
    written = []
    for name in BUILTIN_NAMES:
        written.extend(str(p) for p in write_dataset(builtin(name), args.out))
    _emit(args, {"written": written}, "\n".join(written))
    return EXIT_OK


# -- entry point ----------------------------------------------------------------------

def build_parser():
    fmt_default = "table" if sys.stdout.isatty() else "json"
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--format", choices=("json", "table"), default=fmt_default)

    parser = argparse.ArgumentParser(prog="lerchkit", description="Lerch distribution toolkit")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("eval", parents=[common], help="evaluate a distribution function")
    _add_params(p)
    p.add_argument("--fn", required=True, help="one of " + ", ".join(EVAL_FUNCTIONS))
    p.add_argument("--x", type=int)
    p.add_argument("--q", type=float)
    p.set_defaults(handler=cmd_eval)

    p = sub.add_parser("sample", help="draw random variates, one per line")
    _add_params(p)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--seed", type=_seed, default=0)
    p.set_defaults(handler=cmd_sample)

    p = sub.add_parser("fit", parents=[common], help="estimate parameters from frequency data")
    _add_data(p)
    p.add_argument("--method", choices=("mm", "ml", "minchi2"), default="minchi2")
    p.add_argument("--a", type=int, default=None)
    p.add_argument("--b", type=int, default=None)
    p.add_argument("--seed", type=_seed, default=0)
    p.add_argument("--starts", type=int, default=32)
    p.set_defaults(handler=cmd_fit)

    p = sub.add_parser("gof", parents=[common], help="Pearson X2 and SSD at given parameters")
    _add_data(p)
    p.add_argument("--z", type=float, required=True)
    p.add_argument("--s", type=float, required=True)
    p.add_argument("--v", type=float, required=True)
    p.add_argument("--a", type=int, default=None)
    p.add_argument("--b", type=int, default=None)
    p.add_argument("--n-params", type=int, default=3, help="fitted parameters subtracted from the d.f.")
    p.set_defaults(handler=cmd_gof)

    p = sub.add_parser("reproduce", parents=[common], help="compare against the published tables")
    p.add_argument("--table", action="append", choices=tuple(repro.TABLES))
    p.add_argument("--refit", action="store_true")
    p.add_argument("--seed", type=_seed, default=0)
    p.add_argument("--starts", type=int, default=32)
    p.set_defaults(handler=cmd_reproduce)

    p = sub.add_parser("export-datasets", parents=[common], help="write built-in datasets as CSV and JSON")
    p.add_argument("--out", default="datasets")
    p.set_defaults(handler=cmd_export)
    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    if getattr(args, "starts", 1) < 1:
        parser.error("--starts must be at least 1")
    try:
        return args.handler(args)
    except CliError as exc:
        print(f"lerchkit {args.command}: {exc}", file=sys.stderr)
        return exc.code
    except NoConvergence as exc:
        print(f"lerchkit {args.command}: did not converge: {exc}", file=sys.stderr)
        return EXIT_NO_CONVERGENCE
    except (LerchError, ValueError, KeyError, OverflowError, SingularMatrix, OSError) as exc:
        print(f"lerchkit {args.command}: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
