"""
Command-line front end.

Every command reads one JSON model file, standardizes it at the requested
time and writes a table as CSV (default) or JSON. Thresholds are in
standardized units unless ``--raw`` is given, in which case they are mapped
through x -> (x - E X_t) / sd(X_t) first; both are reported as columns
``x`` and ``y``.

Exit codes: 0 ok, 2 configuration error, 3 condition-gate refusal,
4 numerical failure (divergence or quadrature). Failures also print a JSON
object ``{"error": {...}}`` on stderr.
"""

import argparse
import csv
import io
import json
import math
import sys

import numpy as np

from . import __version__
from .edgeworth import (
    DEFAULT_MAX_ORDER,
    DEFAULT_TOL,
    DIVERGING,
    abs_cdf,
    abs_tail,
    cdf_difference_exact,
    cdf_truncated,
    iid_sum_cdf,
    lower_support_point,
    one_sided_cdf,
    pdf_series,
)
from .errors import ConditionGateError, ModelError, MomentDoesNotExist, QuadratureError
from .levy_model import check_conditions, cumulant_set, load_model, standardize
from .oracles import cf_inversion_cdf, cf_inversion_cdf_diff, simulate_cdf

EXIT_OK, EXIT_CONFIG, EXIT_GATE, EXIT_NUMERIC = 0, 2, 3, 4
WATERMARK = "UNVERIFIED CONDITIONS"


class _ArgumentError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise _ArgumentError(message)


# ---------------------------------------------------------------------------
# Argument parsing
# ---------------------------------------------------------------------------

def _float_list(text):
    try:
        return [float(v) for v in text.split(",") if v.strip()]
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers: {text!r}") from exc


def _int_list(text):
    try:
        return [int(v) for v in text.split(",") if v.strip()]
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers: {text!r}") from exc


def _positive(text):
    v = float(text)
    if not (v > 0 and math.isfinite(v)):
        raise argparse.ArgumentTypeError(f"must be positive and finite: {text!r}")
    return v


def _add_common(p, grid=True):
    p.add_argument("--model", required=True, help="JSON model file")
    p.add_argument("--t", type=_positive, default=1.0, help="time horizon (default 1)")
    if grid:
        g = p.add_mutually_exclusive_group()
        g.add_argument("--x-grid", nargs=3, metavar=("LO", "HI", "N"),
                       help="evenly spaced thresholds (default -3 3 13)")
        g.add_argument("--x", type=_float_list, help="explicit thresholds, comma separated")
        p.add_argument("--raw", action="store_true",
                       help="thresholds are in raw units of X_t")
    p.add_argument("--format", choices=("csv", "json"), default="csv")
    p.add_argument("--output", help="output file (default stdout)")


def _add_exact(p):
    p.add_argument("--tol", type=_positive, default=DEFAULT_TOL)
    p.add_argument("--max-order", type=int, default=DEFAULT_MAX_ORDER)
    p.add_argument("--override-conditions", action="store_true",
                   help="run exact series even when the sufficient conditions fail")


def _add_oracle_flag(p):
    p.add_argument("--with-oracle", action="store_true",
                   help="add characteristic-function inversion columns")


def build_parser():
    parser = _Parser(prog="levyedge", description="Edgeworth expansions for Levy processes.")
    parser.add_argument("--version", action="version", version=f"levyedge {__version__}")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("cumulants", help="cumulants and scaled cumulants of X_t")
    _add_common(p, grid=False)
    p.add_argument("--max-order", type=int, default=8, help="highest cumulant order")

    p = sub.add_parser("check", help="sufficient-condition report")
    _add_common(p, grid=False)

    p = sub.add_parser("cdf", help="truncated expansion of P(X_t < x V)")
    _add_common(p)
    p.add_argument("--order", type=int, default=2)
    p.add_argument("--via-unit-time", action="store_true")
    _add_oracle_flag(p)

    p = sub.add_parser("cdf-exact", help="exact series for P(x1 < X_t/V < x2)")
    _add_common(p)
    p.add_argument("--lower", type=float, default=-8.0,
                   help="fixed lower threshold x1 (default -8, standardized)")
    _add_exact(p)
    _add_oracle_flag(p)

    p = sub.add_parser("pdf", help="density series")
    _add_common(p)
    _add_exact(p)

    p = sub.add_parser("abs", help="P(|X_t| < x V) and its complement")
    _add_common(p)
    _add_exact(p)
    _add_oracle_flag(p)

    p = sub.add_parser("one-sided", help="P(X_t < x V) for spectrally positive models")
    _add_common(p)
    _add_exact(p)
    _add_oracle_flag(p)

    p = sub.add_parser("iid-sum", help="expansion for sums of n copies of X_1")
    _add_common(p)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--k", type=int, default=4)

    p = sub.add_parser("oracle", help="reference CDF values")
    _add_common(p)
    p.add_argument("--method", choices=("cf", "mc"), default="cf")
    p.add_argument("--n-paths", type=int, default=10**6)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--workers", type=int, default=1)

    p = sub.add_parser("convergence-study", help="truncation error against the oracle")
    _add_common(p)
    p.add_argument("--orders", type=_int_list, default=[1, 2, 3])
    p.add_argument("--times", type=_float_list, default=[4.0, 16.0, 64.0, 256.0])
    return parser


# ---------------------------------------------------------------------------
# Run context
# ---------------------------------------------------------------------------

class _Context:
    def __init__(self, args):
        self.args = args
        self.model = load_model(args.model)
        self.affine, self.centered = standardize(self.model, args.t)
        self.unverified = False
        self.diverging = False
        self.warnings = []

    def grid(self):
        a = self.args
        if a.x is not None:
            xs = np.asarray(a.x, dtype=np.float64)
        elif a.x_grid is not None:
            try:
                lo, hi, n = float(a.x_grid[0]), float(a.x_grid[1]), int(a.x_grid[2])
            except ValueError as exc:
                raise ValueError(f"bad --x-grid {a.x_grid}: {exc}") from exc
            if n < 1:
                raise ValueError("--x-grid needs N >= 1")
            xs = np.linspace(lo, hi, n)
        else:
            xs = np.linspace(-3.0, 3.0, 13)
        if not np.all(np.isfinite(xs)):
            raise ValueError("thresholds must be finite")
        ys = self.affine(xs) if a.raw else xs.copy()
        return xs, ys

    def cumulants(self, nu_max):
        return cumulant_set(self.centered, nu_max, self.args.t)

    def note(self, result):
        if result.unverified:
            self.unverified = True
        if result.verdict == DIVERGING:
            self.diverging = True

    def continuity_warning(self):
        # Only laws with atoms can put mass on a user threshold.
        if self.model.has_density or self.model.measure.has_density:
            return
        msg = ("model has neither a Gaussian part nor a jump density; X_t may have "
               "atoms and thresholds may not be continuity points")
        self.warnings.append(msg)
        print(f"warning: {msg}", file=sys.stderr)


def _series_row(res):
    return {
        "value": res.value,
        "verdict": res.verdict,
        "n_terms_used": res.n_terms_used,
        "tail_estimate": res.tail_estimate,
        "unverified": res.unverified,
    }


# ---------------------------------------------------------------------------
# Commands: each returns (columns, rows, diagnostics)
# ---------------------------------------------------------------------------

def cmd_cumulants(ctx):
    a = ctx.args
    if a.max_order < 2:
        raise ValueError("--max-order must be >= 2")
    cs = ctx.cumulants(a.max_order - 2)
    rows = [{"order": k, "gamma": cs.gamma(k), "lambda": cs.lam(k)}
            for k in range(2, a.max_order + 1)]
    return ["order", "gamma", "lambda"], rows, {"V": cs.V}


def cmd_check(ctx):
    report = check_conditions(ctx.centered)
    d = report.to_dict()
    rows = []
    for name in ("bounded_support", "density_tail_decay", "interval_mass_decay", "exp_moment"):
        entry = dict(d[name])
        status = entry.pop("status")
        rows.append({"condition": name, "status": status,
                     "params": json.dumps(_jsonable(entry), sort_keys=True)})
    rows.append({"condition": "cramer_sufficient", "status": str(report.cramer_sufficient).lower(),
                 "params": ""})
    rows.append({"condition": "cramer_declared", "status": str(report.cramer_declared).lower(),
                 "params": ""})
    rows.append({"condition": "strongest_theorem", "status": report.strongest_theorem,
                 "params": ""})
    return ["condition", "status", "params"], rows, {"report": d}


def _oracle_columns(ctx, row, y1, y2):
    if y1 is None:
        est = cf_inversion_cdf(ctx.model, ctx.args.t, y2)
    else:
        est = cf_inversion_cdf_diff(ctx.model, ctx.args.t, y1, y2)
    row["oracle"] = est.value
    row["oracle_error_bound"] = est.error_bound
    row["oracle_flagged"] = est.flagged


def cmd_cdf(ctx):
    a = ctx.args
    if a.order < 0:
        raise ValueError("--order must be >= 0")
    cs = ctx.cumulants(a.order)
    xs, ys = ctx.grid()
    cols = ["x", "y", "value", "normal"] + [f"term_{nu}" for nu in range(1, a.order + 1)]
    if a.with_oracle:
        cols += ["oracle", "oracle_error_bound", "oracle_flagged"]
    rows = []
    for x, y in zip(xs, ys):
        res = cdf_truncated(cs, y, a.order, via_unit_time=a.via_unit_time)
        row = {"x": x, "y": y, "value": res.value, "normal": res.base}
        row.update({f"term_{nu}": v for nu, v in enumerate(res.terms, start=1)})
        if a.with_oracle:
            _oracle_columns(ctx, row, None, y)
        rows.append(row)
    return cols, rows, {}


def _exact_cs(ctx):
    return ctx.cumulants(ctx.args.max_order)


def _exact_kwargs(ctx):
    a = ctx.args
    return {"tol": a.tol, "max_order": a.max_order, "override": a.override_conditions}


def cmd_cdf_exact(ctx):
    a = ctx.args
    cs = _exact_cs(ctx)
    xs, ys = ctx.grid()
    x1 = a.lower
    cols = ["x", "y", "lower", "value", "verdict", "n_terms_used", "tail_estimate", "unverified"]
    if a.with_oracle:
        cols += ["oracle", "oracle_error_bound", "oracle_flagged"]
    if a.override_conditions:
        ctx.continuity_warning()
    rows = []
    for x, y in zip(xs, ys):
        res = cdf_difference_exact(cs, x1, y, **_exact_kwargs(ctx))
        ctx.note(res)
        row = {"x": x, "y": y, "lower": x1, **_series_row(res)}
        if a.with_oracle:
            _oracle_columns(ctx, row, x1, y)
        rows.append(row)
    return cols, rows, {}


def cmd_pdf(ctx):
    cs = _exact_cs(ctx)
    xs, ys = ctx.grid()
    rows = []
    for x, y in zip(xs, ys):
        res = pdf_series(cs, y, **_exact_kwargs(ctx))
        ctx.note(res)
        rows.append({"x": x, "y": y, **_series_row(res)})
    cols = ["x", "y", "value", "verdict", "n_terms_used", "tail_estimate", "unverified"]
    return cols, rows, {"density_units": "standardized"}


def cmd_abs(ctx):
    a = ctx.args
    cs = _exact_cs(ctx)
    xs, ys = ctx.grid()
    if a.raw:
        # |X_t| thresholds are taken relative to the centered variable.
        ys = xs / ctx.affine.scale
    cols = ["x", "y", "abs_cdf", "abs_tail", "verdict", "n_terms_used", "unverified"]
    if a.with_oracle:
        cols += ["oracle", "oracle_error_bound", "oracle_flagged"]
    if a.override_conditions:
        ctx.continuity_warning()
    rows = []
    for x, y in zip(xs, ys):
        inside = abs_cdf(cs, y, **_exact_kwargs(ctx))
        outside = abs_tail(cs, y, **_exact_kwargs(ctx))
        ctx.note(inside)
        ctx.note(outside)
        row = {"x": x, "y": y, "abs_cdf": inside.value, "abs_tail": outside.value,
               "verdict": inside.verdict, "n_terms_used": inside.n_terms_used,
               "unverified": inside.unverified}
        if a.with_oracle:
            _oracle_columns(ctx, row, -y, y)
        rows.append(row)
    return cols, rows, {}


def cmd_one_sided(ctx):
    a = ctx.args
    cs = _exact_cs(ctx)
    xs, ys = ctx.grid()
    low = lower_support_point(cs)
    cols = ["x", "y", "value", "verdict", "n_terms_used", "tail_estimate", "unverified"]
    if a.with_oracle:
        cols += ["oracle", "oracle_error_bound", "oracle_flagged"]
    if a.override_conditions:
        ctx.continuity_warning()
    rows = []
    for x, y in zip(xs, ys):
        res = one_sided_cdf(cs, y, **_exact_kwargs(ctx))
        ctx.note(res)
        row = {"x": x, "y": y, **_series_row(res)}
        if a.with_oracle:
            _oracle_columns(ctx, row, None, y)
        rows.append(row)
    return cols, rows, {"lower_support_point": low}


def cmd_iid_sum(ctx):
    a = ctx.args
    if a.k < 3:
        raise ValueError("--k must be >= 3")
    if a.n < 1:
        raise ValueError("--n must be >= 1")
    summand = cumulant_set(ctx.centered, a.k - 2, 1.0)
    xs, ys = ctx.grid()
    rows = [{"x": x, "y": y, "value": iid_sum_cdf(summand, a.n, y, a.k)} for x, y in zip(xs, ys)]
    return ["x", "y", "value"], rows, {"summand": "X_1 of the model"}


def cmd_oracle(ctx):
    a = ctx.args
    xs, ys = ctx.grid()
    if a.method == "mc":
        ests = simulate_cdf(ctx.model, a.t, ys, a.n_paths, a.seed, workers=a.workers)
    else:
        ests = [cf_inversion_cdf(ctx.model, a.t, y) for y in ys]
    rows = [{"x": x, "y": y, "value": e.value, "error_bound": e.error_bound,
             "std_error": e.std_error, "kind": e.kind, "flagged": e.flagged}
            for x, y, e in zip(xs, ys, ests)]
    return ["x", "y", "value", "error_bound", "std_error", "kind", "flagged"], rows, {}


def cmd_convergence_study(ctx):
    a = ctx.args
    if not a.orders or min(a.orders) < 0:
        raise ValueError("--orders must be non-negative integers")
    if len(a.times) < 2 or min(a.times) <= 0:
        raise ValueError("--times needs at least two positive values")
    _, ys = ctx.grid()
    errors = {}
    flagged = False
    for t in a.times:
        oracle = [cf_inversion_cdf(ctx.model, t, y) for y in ys]
        flagged = flagged or any(e.flagged for e in oracle)
        ref = np.array([e.value for e in oracle])
        cs = cumulant_set(ctx.centered, max(a.orders), t)
        for order in a.orders:
            approx = np.array([cdf_truncated(cs, y, order).value for y in ys])
            errors[(order, t)] = float(np.max(np.abs(approx - ref)))
    rows = []
    slopes = {}
    log_t = np.log(a.times)
    for order in a.orders:
        errs = np.array([errors[(order, t)] for t in a.times])
        slope = float(np.polyfit(log_t, np.log(errs), 1)[0]) if np.all(errs > 0) else math.nan
        expected = -(order + 1) / 2.0
        slopes[order] = {"slope": slope, "expected": expected,
                         "within_0.3": bool(abs(slope - expected) <= 0.3)}
        for t, err in zip(a.times, errs):
            rows.append({"order": order, "t": t, "log_t": math.log(t), "max_error": err,
                         "log_error": math.log(err) if err > 0 else -math.inf,
                         "slope": slope, "expected_slope": expected})
    cols = ["order", "t", "log_t", "max_error", "log_error", "slope", "expected_slope"]
    return cols, rows, {"slopes": slopes, "oracle_flagged": flagged}


COMMANDS = {
    "cumulants": cmd_cumulants,
    "check": cmd_check,
    "cdf": cmd_cdf,
    "cdf-exact": cmd_cdf_exact,
    "pdf": cmd_pdf,
    "abs": cmd_abs,
    "one-sided": cmd_one_sided,
    "iid-sum": cmd_iid_sum,
    "oracle": cmd_oracle,
    "convergence-study": cmd_convergence_study,
}


# ---------------------------------------------------------------------------
# Output
# ---------------------------------------------------------------------------

def _format_cell(v):
    if v is None:
        return ""
    if isinstance(v, (bool, np.bool_)):
        return "true" if v else "false"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        return format(float(v) + 0.0, ".17g")  # + 0.0 folds -0 into 0
    return str(v)


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        v = float(obj)
        if math.isnan(v):
            return None
        if math.isinf(v):
            return "inf" if v > 0 else "-inf"
        return v
    return obj


def _resolved_config(ctx):
    args = {k: v for k, v in vars(ctx.args).items() if k not in ("output", "format")}
    return {
        "version": __version__,
        "args": _jsonable(args),
        "model": _jsonable(ctx.model.to_dict()),
        "affine_map": _jsonable(ctx.affine.to_dict()),
    }


def render(ctx, cols, rows, diagnostics, fmt):
    config = _resolved_config(ctx)
    diagnostics = dict(diagnostics)
    if ctx.unverified:
        diagnostics["watermark"] = WATERMARK
    if ctx.warnings:
        diagnostics["warnings"] = list(ctx.warnings)
    if fmt == "json":
        doc = {"config": config, "results": [{c: r.get(c) for c in cols} for r in rows],
               "diagnostics": diagnostics}
        return json.dumps(_jsonable(doc), indent=2, sort_keys=False, allow_nan=False) + "\n"
    buf = io.StringIO()
    buf.write(f"# levyedge {__version__}\n")
    if ctx.unverified:
        buf.write(f"# {WATERMARK}\n")
    buf.write("# config: " + json.dumps(config, sort_keys=True, allow_nan=False) + "\n")
    if diagnostics:
        buf.write("# diagnostics: " + json.dumps(_jsonable(diagnostics), sort_keys=True) + "\n")
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(cols)
    for r in rows:
        writer.writerow([_format_cell(r.get(c)) for c in cols])
    return buf.getvalue()


def _fail(code, kind, message):
    err = {"error": {"type": kind, "message": message, "exit_code": code}}
    print(json.dumps(err), file=sys.stderr)
    return code


_LIST_OPTIONS = ("--x", "--times", "--orders")


def _join_list_values(argv):
    # "--x -1,2" would read "-1,2" as a flag; rewrite it as "--x=-1,2".
    out = []
    it = iter(argv)
    for token in it:
        if token in _LIST_OPTIONS:
            value = next(it, None)
            out.append(token if value is None else f"{token}={value}")
        else:
            out.append(token)
    return out


def main(argv=None):
    parser = build_parser()
    argv = sys.argv[1:] if argv is None else list(argv)
    try:
        args = parser.parse_args(_join_list_values(argv))
    except _ArgumentError as exc:
        return _fail(EXIT_CONFIG, "ArgumentError", str(exc))
    except SystemExit as exc:  # --help / --version
        return int(exc.code or 0)

    try:
        ctx = _Context(args)
        cols, rows, diagnostics = COMMANDS[args.command](ctx)
        text = render(ctx, cols, rows, diagnostics, args.format)
    except ConditionGateError as exc:
        return _fail(EXIT_GATE, type(exc).__name__, str(exc))
    except MomentDoesNotExist as exc:
        return _fail(EXIT_CONFIG, type(exc).__name__, str(exc))
    except (QuadratureError, ArithmeticError) as exc:
        return _fail(EXIT_NUMERIC, type(exc).__name__, str(exc))
    except (ModelError, ValueError, OSError) as exc:
        return _fail(EXIT_CONFIG, type(exc).__name__, str(exc))

    if args.output:
        with open(args.output, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    if ctx.unverified:
        print(f"warning: {WATERMARK}", file=sys.stderr)
    if ctx.diverging:
        return _fail(EXIT_NUMERIC, "SeriesDivergenceError",
                     "exact series diverged at one or more thresholds (optimal truncation reported)")
    return EXIT_OK


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
