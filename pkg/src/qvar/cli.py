"""Command-line interface: qvar {cdf,pdf,coeffs,quadform,asymptotic,mc,selfcheck}.

Tables are written as CSV (header row, 12 significant digits) in one atomic
step.  With --plot a PNG is written next to the CSV.  Exit codes: 0 success,
1 failed self-check, 2 usage or domain error, 3 convergence failure,
4 invalid density.
"""

import argparse
import csv
import io
import json
import os
import sys
import tempfile
import warnings

import numpy as np

from . import asymptotics, mc
from .cf import cf_at, cf_at_alt, coefficients, sup_q, t_grid
from .density import Beta, from_json, uniform, validate
from .dist import cdf_q, table
from .errors import ConvergenceError, InvalidDensity, QVarError
from .kernel import PsiContext, psi_from_cdf
from .quadform import QuadFormSpec, coefficients_form, cf_form_at
from .special import erf_cplx, gauss_power_int, h_p, h_p_parabolic, kummer_1f1

KS_THRESHOLD = 0.004
FMT = "%.12g"


class UsageError(Exception):
    pass


def _load_json(text):
    if text is None:
        return None
    text = text.strip()
    if not text.startswith("{") and os.path.exists(text):
        with open(text) as fh:
            text = fh.read()
    return json.loads(text)


def _density(args):
    if args.density is None:
        return uniform(), None
    try:
        obj = _load_json(args.density)
    except json.JSONDecodeError as exc:
        raise InvalidDensity("density is not valid JSON: %s" % exc) from exc
    d, smap = from_json(obj)
    validate(d)
    return d, smap


def _grid(spec, top):
    if spec is None:
        spec = "201"
    spec = spec.strip()
    if "," in spec or not spec.isdigit():
        try:
            xs = np.array([float(v) for v in spec.split(",") if v.strip()])
        except ValueError as exc:
            raise UsageError("--grid must be a point count or a list of x values") from exc
        if xs.size == 0:
            raise UsageError("--grid is empty")
    else:
        count = int(spec)
        if count < 2:
            raise UsageError("--grid needs at least two points")
        xs = np.linspace(0.0, top, count)
    if np.any(xs < 0) or np.any(xs > top * (1 + 1e-12)):
        raise UsageError("grid points must lie in [0, %.12g]" % top)
    return np.clip(xs, 0.0, top)


def _fmt(v):
    if isinstance(v, (bool, np.bool_)):
        return "true" if v else "false"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        return FMT % v
    return str(v)


def write_csv(path, header, rows):
    """Write rows as CSV to path (atomically) or to stdout when path is None or '-'."""
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([_fmt(v) for v in row])
    text = buf.getvalue()
    if path in (None, "-"):
        sys.stdout.write(text)
        return
    folder = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(dir=folder, prefix=".qvar-", suffix=".csv")
    try:
        with os.fdopen(fd, "w") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _png_path(args):
    if not args.plot:
        return None
    if args.out in (None, "-"):
        raise UsageError("--plot needs --out")
    return os.path.splitext(args.out)[0] + ".png"


def _check_tol(tol):
    if not 0 < tol <= 1e-2:
        raise UsageError("--tol must lie in (0, 1e-2]")
    return tol


# -- commands ----------------------------------------------------------------

def cmd_table(args, with_pdf):
    d, smap = _density(args)
    tol = _check_tol(args.tol)
    scale = smap.scale if smap is not None else 1.0
    xs = _grid(args.grid, sup_q(args.n) * scale)
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always")
        tab = table(d, args.n, xs / scale, tol=tol, with_pdf=with_pdf)
    for w in caught:
        print("warning: %s" % w.message, file=sys.stderr)
    if with_pdf:
        rows = zip(xs, tab.F, tab.err, tab.f / scale, tab.f_err / scale)
        write_csv(args.out, ["x", "F", "err", "f", "f_err"], rows)
    else:
        write_csv(args.out, ["x", "F", "err"], zip(xs, tab.F, tab.err))
    png = _png_path(args)
    if png:
        from .plotting import plot_table
        plot_table(tab, png, "n = %d" % args.n)
    return 0


def cmd_coeffs(args):
    d, _ = _density(args)
    co = coefficients(PsiContext(d), args.n, _check_tol(args.tol))
    K = co.K if args.k is None else min(args.k, co.K)
    rows = ((k + 1, co.t[k], co.values[k].real, co.values[k].imag, co.tail_bound)
            for k in range(K))
    write_csv(args.out, ["k", "t_k", "re", "im", "tail_bound"], rows)
    png = _png_path(args)
    if png:
        from .plotting import plot_coefficients
        plot_coefficients(co, png, "n = %d" % args.n)
    return 0


def cmd_quadform(args):
    try:
        spec = QuadFormSpec.from_json(_load_json(args.spec))
    except (json.JSONDecodeError, KeyError, TypeError) as exc:
        raise UsageError("malformed quadratic-form JSON: %s" % exc) from exc
    co = coefficients_form(spec, _check_tol(args.tol))
    xs = _grid(args.grid, co.q)
    F, err = cdf_q(co, xs, with_error=True)
    write_csv(args.out, ["x", "F", "err"], zip(xs, F, err))
    return 0


def cmd_asymptotic(args):
    rows = []
    if args.family == "uniform":
        for name, law in (("small_x", asymptotics.uniform_small_x(args.n)),
                          ("upper_tail", asymptotics.uniform_upper_tail(args.n)),
                          ("upper_tail_isotropic",
                           asymptotics.uniform_upper_tail(args.n, displayed=True))):
            rows.append((name, law.exponent, law.constant, law.log_factor, law.regime))
    else:
        if args.p is None:
            raise UsageError("--p is required for the power family")
        law = asymptotics.power_density_law(args.n, args.p)
        rows.append(("small_x", law.exponent, law.constant, law.log_factor, law.regime))
    write_csv(args.out, ["law", "exponent", "constant", "log_factor", "regime"], rows)
    return 0


def cmd_mc(args):
    d, smap = _density(args)
    if smap is not None and (smap.a, smap.b) != (0.0, 1.0):
        raise UsageError("mc works on [0, 1] densities")
    tab = table(d, args.n, args.table_grid, tol=_check_tol(args.tol))
    res = mc.sample_q(d, args.n, args.N, args.seed)
    ks = mc.ks_distance(tab, res)
    if args.dump:
        res.to_csv(args.dump)
    rows = [("n", args.n), ("N", args.N), ("seed", args.seed), ("ks", ks),
            ("threshold", KS_THRESHOLD), ("pass", ks <= KS_THRESHOLD),
            ("mean", res.mean()), ("mean_exact", (args.n - 1) * d.variance())]
    write_csv(args.out, ["key", "value"], rows)
    png = _png_path(args)
    if png:
        from .plotting import plot_mc
        plot_mc(tab, res, png, "n = %d, KS = %.4f" % (args.n, ks))
    return 0


def selfcheck_results():
    """(name, passed, detail) for the quick cross-representation suite."""
    out = []

    def add(name, err, tol):
        out.append((name, bool(err <= tol), "%.2e <= %.0e" % (err, tol)))

    xs = np.linspace(0, 0.5, 201)
    F = table(uniform(), 2, xs, tol=1e-6).F
    add("closed form n=2", float(np.max(np.abs(F - mc.closed_form_n2_uniform(xs)))), 1e-6)
    for name, d in (("uniform", uniform()), ("beta(2,2)", Beta(2, 2))):
        ctx = PsiContext(d)
        for n in (2, 3):
            ts = t_grid(sup_q(n), 10)
            err = max(abs(cf_at(ctx, n, t) - cf_at_alt(ctx, n, t)) for t in ts)
            add("dual representation %s n=%d" % (name, n), err, 1e-8)
    co = coefficients(PsiContext(uniform()), 3, 1e-8)
    err = abs(co.q * (1 - co.constant_sum()) - 2 * uniform().variance())
    add("mean identity uniform n=3", err, 1e-6)
    ctx = PsiContext(uniform())
    err = abs(psi_from_cdf(ctx, 10.0, 0.3) - ctx.psi(10.0, np.array([0.3 + 0j]))[0])
    add("1 - F relation uniform", err, 1e-8)
    spec = QuadFormSpec.sample_variance(3)
    err = max(abs(cf_form_at(spec, t) - cf_at(ctx, 3, t)) for t in t_grid(sup_q(3), 5))
    add("quadratic-form reduction n=3", err, 1e-8)
    from scipy import special as sp
    z = np.array([0.5 + 0.1j, 2.0 - 1.5j, 6.0 + 5.0j])
    add("erf", float(np.max(np.abs(erf_cplx(z) - sp.erf(z)))), 1e-12)
    import mpmath
    add("1F1", abs(kummer_1f1(0.7, 1.6, 60j) - complex(mpmath.hyp1f1(0.7, 1.6, 60j))), 1e-10)
    w = 1.2 - 0.8j
    ref = complex(mpmath.quad(lambda s: mpmath.exp(-(s * w) ** 2) * (s * w) ** 3 * w, [0, 1]))
    add("gauss power integral", abs(complex(gauss_power_int(3, w)) - ref), 1e-12)
    ys = np.array([0.0, 1.0, 4.0])
    err = max(float(np.max(np.abs(h_p(0.5, ys, sg) - h_p_parabolic(0.5, ys, sg))))
              for sg in (1, -1))
    add("h_p", err, 1e-8)
    return out


def cmd_selfcheck(args):
    results = selfcheck_results()
    for name, ok, detail in results:
        print("%s  %s  (%s)" % ("PASS" if ok else "FAIL", name, detail))
    return 0 if all(ok for _, ok, _ in results) else 1


# -- parser --------------------------------------------------------------------

def build_parser():
    p = argparse.ArgumentParser(prog="qvar", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp, grid=True):
        sp.add_argument("--density", help="density JSON, inline or a file path (default uniform)")
        sp.add_argument("--n", type=int, required=True, help="sample size (>= 2)")
        sp.add_argument("--tol", type=float, default=1e-8, help="absolute CDF tolerance")
        if grid:
            sp.add_argument("--grid", help="point count or comma-separated x values")
        sp.add_argument("--out", help="output CSV path (default stdout)")
        sp.add_argument("--plot", action="store_true", help="also write a PNG next to --out")

    common(sub.add_parser("cdf", help="CDF table: x, F, err"))
    common(sub.add_parser("pdf", help="CDF and density table: x, F, err, f, f_err"))
    sp = sub.add_parser("coeffs", help="Fourier coefficients: k, t_k, re, im, tail_bound")
    common(sp, grid=False)
    sp.add_argument("--k", type=int, help="number of rows to emit")
    sp = sub.add_parser("quadform", help="CDF of a one-factorial quadratic form")
    sp.add_argument("--spec", required=True, help="quadratic-form JSON, inline or a file path")
    sp.add_argument("--grid", help="point count or comma-separated x values")
    sp.add_argument("--tol", type=float, default=1e-8)
    sp.add_argument("--out")
    sp = sub.add_parser("asymptotic", help="small-x and upper-tail laws")
    sp.add_argument("--family", choices=("uniform", "power"), default="uniform")
    sp.add_argument("--n", type=int, required=True)
    sp.add_argument("--p", type=float, help="exponent of p x**(p-1)")
    sp.add_argument("--out")
    sp = sub.add_parser("mc", help="Monte Carlo KS check against the exact table")
    common(sp, grid=False)
    sp.add_argument("--N", type=int, default=1_000_000, help="sample count")
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--table-grid", type=int, default=4001, help="exact table size")
    sp.add_argument("--dump", help="write the sorted samples to this CSV")
    sp.set_defaults(tol=1e-6)
    sub.add_parser("selfcheck", help="run the cross-representation checks")
    return p


def run(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    if getattr(args, "n", None) is not None and args.n < 2:
        parser.error("--n must be at least 2")
    handlers = {
        "cdf": lambda a: cmd_table(a, False),
        "pdf": lambda a: cmd_table(a, True),
        "coeffs": cmd_coeffs,
        "quadform": cmd_quadform,
        "asymptotic": cmd_asymptotic,
        "mc": cmd_mc,
        "selfcheck": cmd_selfcheck,
    }
    try:
        return handlers[args.command](args)
    except UsageError as exc:
        parser.print_usage(sys.stderr)
        print("qvar: error: %s" % exc, file=sys.stderr)
        return 2
    except InvalidDensity as exc:
        print("qvar: invalid density: %s" % exc, file=sys.stderr)
        return 4
    except ConvergenceError as exc:
        print("qvar: no convergence: %s" % exc, file=sys.stderr)
        return 3
    except QVarError as exc:
        print("qvar: error: %s" % exc, file=sys.stderr)
        return 2


def main():
    sys.exit(run())


if __name__ == "__main__":
    main()
