"""Command line entry point ``tmk``.

Every run carries a header with the version, the parsed configuration and
the seed. JSON output goes to stdout (or ``--emit``); text and CSV output put
the header on a leading ``#`` line. Failures print a JSON error record on
stderr and exit with the code of the exception class (2 usage, 3 precision,
4 tolerance, 5 internal).
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import os
import sys
import time
from fractions import Fraction

import numpy as np

from . import __version__, _accel
from .errors import ConfigError, TMKError

def _f17(x):
    return format(x, ".17g")


def _plain(obj):
    """Make numpy scalars, tuples and Fractions JSON-friendly."""
    if isinstance(obj, dict):
        return {str(k): _plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_plain(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _plain(obj.tolist())
    if isinstance(obj, np.generic):
        return obj.item()
    if isinstance(obj, Fraction):
        return f"{obj.numerator}/{obj.denominator}"
    return obj


def _header(args, argv):
    config = {k: v for k, v in vars(args).items() if k not in ("func",)}
    return {"tool": "tmk", "version": __version__, "backend": _accel.BACKEND,
            "argv": list(argv), "config": config, "seed": getattr(args, "seed", None)}


def _write(args, header, result, rows=None, columns=None, text=None):
    fmt = args.format
    if fmt == "json":
        doc = {"header": header, "result": _plain(result)}
        payload = json.dumps(doc, indent=2, sort_keys=True)
    elif fmt == "csv":
        if rows is None:
            raise ConfigError(f"{args.command} has no CSV form; use --format json")
        buf = io.StringIO()
        buf.write("# " + json.dumps(header, sort_keys=True) + "\n")
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(columns)
        for r in rows:
            w.writerow([_f17(v) if isinstance(v, float) else v for v in r])
        payload = buf.getvalue().rstrip("\n")
    else:
        if text is None:
            raise ConfigError(f"{args.command} has no text form; use --format json")
        payload = text
        print("# " + json.dumps(header, sort_keys=True), file=sys.stderr)
    if args.emit:
        with open(args.emit, "w") as fh:
            fh.write(payload + "\n")
    else:
        print(payload)


# -- subcommands -------------------------------------------------------------

def cmd_seq(args, header):
    from .binreal import tm_parity
    from .thue_morse import evil_stream, odious_stream

    if args.count < 1:
        raise ConfigError("--count must be >= 1")
    if args.kind == "evil":
        vals = evil_stream(args.count, args.start)
    elif args.kind == "odious":
        vals = odious_stream(args.count, args.start)
    else:
        vals = tm_parity(np.arange(args.start - 1, args.start - 1 + args.count, dtype=np.int64))
    vals = [int(v) for v in vals]
    rows = [(args.start + i, v) for i, v in enumerate(vals)]
    _write(args, header, {"kind": args.kind, "start": args.start, "values": vals},
           rows, ("k", "value"), ",".join(map(str, vals)))


def cmd_product(args, header):
    from .binreal import parse_alpha
    from .lacunary import sup_bound, trace

    alpha = parse_alpha(args.alpha)
    t = trace(alpha, args.L, args.guard)
    lhs, rhs, holds = sup_bound(alpha, args.L, args.guard)
    res = {"alpha": alpha.describe(), "L": args.L, "guard": args.guard,
           "log_pi": t.log_pi, "log_pi_error": t.log_pi_error,
           "sum_f1": float(t.partial_f1[args.L]), "sum_f1_error": t.residual_f1,
           "sum_f2": float(t.partial_f2[args.L]), "sum_f2_error": t.residual_f2,
           "telescoped_f2": t.telescoped_f2(),
           "sup_bound": {"log_lhs": lhs, "log_rhs": rhs, "holds": holds}}
    text = f"log Pi_L = {_f17(t.log_pi)} +- {t.log_pi_error:.3g}"
    _write(args, header, res, list(t.rows()), ("l", "f1", "f2", "cumsum_f1", "cumsum_f2"), text)


def cmd_expsum(args, header):
    from .binreal import parse_alpha
    from .expsum import evaluate

    alpha = parse_alpha(args.alpha)
    s = evaluate(alpha, args.h, args.N, args.method, args.guard)
    res = {"alpha": alpha.describe(), "h": args.h, "N": args.N, "method": s.method,
           "re": s.re, "im": s.im, "log_scale": s.log_scale, "abs": abs(s),
           "log_abs": s.log_abs, "error_bound": s.error_bound, "ops": s.ops}
    text = f"S = ({_f17(s.re)}) + ({_f17(s.im)})i"
    if s.log_scale:
        text += f" * exp({_f17(s.log_scale)})"
    text += f"  error <= {s.error_bound:.3g}"
    _write(args, header, res, [(s.re, s.im, s.log_scale, s.error_bound)],
           ("re", "im", "log_scale", "error_bound"), text)


def cmd_disc(args, header):
    from .binreal import parse_alpha
    from .discrepancy import (PointSet, cf_disc_bound, cf_expand, erdos_turan_points,
                              explicit_lower_bound, star_disc)
    from . import kernels
    from .expsum import ExpSum

    alpha = parse_alpha(args.alpha)
    if args.N < 1:
        raise ConfigError("--N must be >= 1")
    make = PointSet.thue_morse_kronecker if args.kind == "tmk" else PointSet.kronecker
    ps = make(alpha, args.N)
    D = star_disc(ps, exact=args.exact)
    re, im = kernels.phase_sum(ps.values)
    s1 = ExpSum(re, im, args.N, 1, "points", args.N * (2 * math.pi * ps.error + 4e-16))
    lower = explicit_lower_bound(s1, 1, args.N)
    upper = erdos_turan_points(ps, args.H)
    res = {"alpha": alpha.describe(), "kind": args.kind, "N": args.N, "H": args.H,
           "star_disc": float(D), "N_star_disc": float(D) * args.N, "slack": ps.slack(),
           "lower": lower, "upper": upper}
    if args.exact:
        res["star_disc_exact"] = D
    if args.kind == "kronecker":
        cf = cf_expand(alpha, 64, args.guard)
        b = cf_disc_bound(cf, args.N)
        res["cf"] = {"coefficients": cf.coefficients, "truncated": cf.truncated,
                     "partial_quotient_sum": b.upper_order, "m": b.m, "saturated": b.saturated}
    _write(args, header, res, [(args.N, float(D), lower, upper)],
           ("N", "Dstar", "lower", "upper"), f"D*_N = {_f17(float(D))}")


def cmd_lambda(args, header):
    from .fm_lambda import FO_INTERVAL, enclose_lambda

    grid = args.grid if args.grid else args.tier
    lip = args.lipschitz
    if lip not in (None, "certified", "paper"):
        try:
            lip = float(lip)
        except ValueError:
            raise ConfigError(f"--lipschitz must be certified, paper or a number, got {lip!r}") from None
    e = enclose_lambda(args.k, grid, lip)
    res = {k: v for k, v in e.to_dict().items() if k != "backend"}
    res["grid"] = e.grid_points
    res["width"] = e.width
    res["inside_fo_interval"] = FO_INTERVAL[0] < e.lower and e.upper < FO_INTERVAL[1]
    text = f"{_f17(e.lower)} <= lambda <= {_f17(e.upper)}"
    _write(args, header, res, [(e.k, e.grid_points, e.grid_min, e.grid_max, e.lower, e.upper)],
           ("k", "grid", "grid_min", "grid_max", "lower", "upper"), text)


def _running_slopes(Ls, y):
    out = [math.nan]
    for i in range(2, len(Ls) + 1):
        out.append(float(np.polyfit(np.asarray(Ls[:i], dtype=np.float64), y[:i], 1)[0]))
    return out


def cmd_example(args, header):
    from . import examples as ex
    from .binreal import RuleReal

    if args.which == "4a":
        fit = ex.fit_4a_exponent(args.L_lo, args.L)
        tf = ex.ten_forms_check(ex.alpha_4a_for(args.L), args.L)
        margin = ex.lower_bound_margin(args.L)
        res = {"slope": fit.slope, "target": ex.LOG3_LOG4, "fit_L": fit.Ls, "log2_pi": fit.log2_pi,
               "prefixes": tf.prefixes, "all_listed": tf.all_listed,
               "min_distance": tf.min_distance, "min_lower_bound_margin": float(margin.min())}
        Ls = list(fit.Ls)
        log_pi = [v * math.log(2.0) for v in fit.log2_pi]
        text = f"slope = {_f17(fit.slope)} (log3/log4 = {_f17(ex.LOG3_LOG4)})"
    else:
        b = ex.block_bounds()
        lo, hi = ex.gamma_exponent(b)
        direct = ex.gamma_direct_exponent(args.U)
        res = {"blocks": b.as_dict(), "exponent_lower": lo, "exponent_upper": hi,
               "direct_exponent": direct, "U": args.U,
               "per_position_violations": ex.per_position_check(args.blocks, b)}
        Ls = sorted({8 * int(u) - 1 for u in np.geomspace(64, args.U, 8).round()})
        series = ex.log_pi_series(RuleReal("thue-morse"), Ls[-1])
        log_pi = [float(series[L]) for L in Ls]
        text = f"{_f17(lo)} <= exponent <= {_f17(hi)}; direct {_f17(direct)}"
    slopes = _running_slopes(Ls, np.asarray(log_pi) / math.log(2.0))
    _write(args, header, res, list(zip(Ls, log_pi, slopes)), ("L", "logPi", "fitted_exponent"), text)


def cmd_probe(args, header):
    from .metriclab import PROBES

    fn = PROBES[args.which]
    kw = {"threads": args.threads}
    if args.which == "thm5":
        kw["fspec"] = args.f
    rep = fn(args.samples, args.Lmax, args.seed, **kw)
    doc = {"header": header, "report": rep.to_dict(), "digest": rep.digest()}
    payload = json.dumps(doc, sort_keys=True, indent=None if args.emit else 2)
    if args.emit:
        with open(args.emit, "w") as fh:
            fh.write(payload + "\n")
        print(json.dumps({"emit": args.emit, "digest": rep.digest(),
                          "failures": rep.failures, "statistical_ok": rep.statistical_ok()}))
    else:
        print(payload)
    if rep.failed:
        raise TMKError(f"deterministic properties violated: {', '.join(rep.failures)}")


# -- parser ------------------------------------------------------------------

def _default_threads():
    env = os.environ.get("TMK_THREADS")
    if env:
        try:
            return max(1, int(env))
        except ValueError:
            pass
    return os.cpu_count() or 1


def build_parser():
    p = argparse.ArgumentParser(prog="tmk", description="Thue-Morse-Kronecker numerics")
    p.add_argument("--version", action="version", version=f"tmk {__version__}")
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--threads", type=int, default=None,
                        help="worker threads (default: $TMK_THREADS or all cores)")
    common.add_argument("--emit", default=None, help="write the output to this file")
    common.add_argument("--format", choices=("json", "csv", "text"), default=None)
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("seq", parents=[common], help="evil/odious numbers, Thue-Morse bits")
    s.add_argument("--kind", choices=("evil", "odious", "tm"), default="evil")
    s.add_argument("--count", type=int, required=True)
    s.add_argument("--start", type=int, default=1)
    s.set_defaults(func=cmd_seq, fmt_default="text")

    s = sub.add_parser("product", parents=[common], help="log Pi_L and lacunary sums")
    s.add_argument("--alpha", required=True)
    s.add_argument("--L", type=int, required=True)
    s.add_argument("--guard", type=int, default=128)
    s.set_defaults(func=cmd_product, fmt_default="json")

    s = sub.add_parser("expsum", parents=[common], help="S_h(N) over evil numbers")
    s.add_argument("--alpha", required=True)
    s.add_argument("--h", type=int, default=1)
    s.add_argument("--N", type=int, required=True)
    s.add_argument("--method", choices=("direct", "product", "dyadic"), default="direct")
    s.add_argument("--guard", type=int, default=128)
    s.set_defaults(func=cmd_expsum, fmt_default="json")

    s = sub.add_parser("disc", parents=[common], help="star discrepancy and its bounds")
    s.add_argument("--alpha", required=True)
    s.add_argument("--N", type=int, required=True)
    s.add_argument("--H", "--et", dest="H", type=int, default=8, help="Erdos-Turan cutoff")
    s.add_argument("--kind", "--generator", dest="kind", choices=("tmk", "kronecker"), default="tmk")
    s.add_argument("--exact", action="store_true")
    s.add_argument("--guard", type=int, default=128)
    s.set_defaults(func=cmd_disc, fmt_default="json")

    s = sub.add_parser("lambda", parents=[common], help="certified enclosure of lambda")
    s.add_argument("--k", type=int, default=6)
    s.add_argument("--tier", choices=("ci", "paper"), default="ci")
    s.add_argument("--grid", type=int, default=None, help="grid points (overrides --tier)")
    s.add_argument("--lipschitz", default=None, help="certified (default), paper, or a number")
    s.set_defaults(func=cmd_lambda, fmt_default="json")

    s = sub.add_parser("example", parents=[common], help="the two explicit constructions")
    s.add_argument("--which", choices=("4a", "4b", "gamma"), required=True)
    s.add_argument("--L", type=int, default=4096)
    s.add_argument("--L-lo", dest="L_lo", type=int, default=512)
    s.add_argument("--U", type=int, default=4096)
    s.add_argument("--blocks", type=int, default=1000)
    s.set_defaults(func=cmd_example, fmt_default="json")

    s = sub.add_parser("probe", parents=[common], help="Monte Carlo probes of the metric results")
    s.add_argument("--which", choices=("lil", "thm1", "thm3", "thm5"), required=True)
    s.add_argument("--samples", type=int, default=256)
    s.add_argument("--Lmax", type=int, default=4096)
    s.add_argument("--seed", type=int, default=1)
    s.add_argument("--f", default="f1", help="thm5 function: f1, f2, cos, zero or a1,a2,...")
    s.set_defaults(func=cmd_probe, fmt_default="json")
    return p


def _error(exc, code):
    rec = {"error": type(exc).__name__, "message": str(exc), "exit_code": code}
    for attr in ("index", "distance"):
        if getattr(exc, attr, None) is not None:
            rec[attr] = getattr(exc, attr)
    print(json.dumps(rec), file=sys.stderr)
    return code


def main(argv=None):
    argv = sys.argv[1:] if argv is None else list(argv)
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    if args.threads is None:
        args.threads = _default_threads()
    if args.threads < 1:
        return _error(ConfigError("--threads must be >= 1"), 2)
    if args.format is None and args.emit and args.emit.endswith(".csv"):
        args.format = "csv"
    args.format = args.format or args.fmt_default
    del args.fmt_default
    _accel.set_threads(args.threads)
    header = _header(args, argv)
    t0 = time.perf_counter()
    try:
        args.func(args, header)
    except TMKError as exc:
        return _error(exc, exc.exit_code)
    except (OSError, MemoryError) as exc:
        return _error(exc, 5)
    except Exception as exc:  # noqa: BLE001 - last-resort record for unexpected failures
        return _error(exc, 5)
    finally:
        if os.environ.get("TMK_VERBOSE"):
            print(f"# elapsed {time.perf_counter() - t0:.3f}s", file=sys.stderr)
    return 0


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
