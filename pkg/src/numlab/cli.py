"""numlab command line: one subcommand per case study.

Exit codes: 0 success, 1 usage or parse error, 2 non-convergence.
"""
from __future__ import annotations

import argparse
import importlib.resources
import json
import os
import sys
from pathlib import Path
from typing import Sequence

import numpy as np

from . import approx, experiments, linalg, optimize, quadrature, report, rootfind
from .expr import DifferentiationError, EvaluationError, ParseError, free_variables, parse
from .rng import RngState

EXIT_OK, EXIT_USAGE, EXIT_NONCONVERGED = 0, 1, 2
DEFAULT_SEED = 42
DEFAULT_MODEL = "l1*e^(-x) + l2*e^(-l3*x)"


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


# ---------------------------------------------------------------------------
# argument helpers


def _floats(text: str) -> list[float]:
    try:
        return [float(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from None


def _ints(text: str) -> list[int]:
    try:
        return [int(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}") from None


def _names(text: str) -> list[str]:
    return [v.strip() for v in text.split(",") if v.strip()]


def _u64(text: str) -> int:
    try:
        value = int(text, 0)
    except ValueError:
        raise argparse.ArgumentTypeError(f"seed must be an integer, got {text!r}") from None
    if not 0 <= value < 2**64:
        raise argparse.ArgumentTypeError("seed must fit in 64 unsigned bits")
    return value


def _default_seed() -> int:
    env = os.environ.get("NUMLAB_SEED")
    if env is None:
        return DEFAULT_SEED
    try:
        return _u64(env)
    except argparse.ArgumentTypeError as exc:
        raise UsageError(f"NUMLAB_SEED: {exc}") from None


def _xdata(text: str) -> np.ndarray:
    """``start:stop:step`` (stop excluded, like numpy.arange) or a comma list."""
    if ":" in text:
        try:
            start, stop, step = (float(v) for v in text.split(":"))
        except ValueError:
            raise argparse.ArgumentTypeError(f"expected start:stop:step, got {text!r}") from None
        if step <= 0 or stop <= start:
            raise argparse.ArgumentTypeError("need step > 0 and stop > start")
        return np.arange(start, stop, step)
    return np.array(_floats(text))


def _expr(text: str):
    return parse(text)


def _single_var(e, given: str | None) -> str:
    if given:
        return given
    names = sorted(free_variables(e))
    if len(names) > 1:
        raise UsageError(f"expression has several variables {names}; pick one with --var")
    return names[0] if names else "x"


def _read_input(path: str | Path) -> str:
    """Read a user file, falling back to the inputs bundled with the package
    (so ``--system sec34.txt`` works from any directory)."""
    p = Path(path)
    if not p.exists():
        bundled = importlib.resources.files("numlab") / "data" / p.name
        if p.parent == Path(".") and bundled.is_file():
            return bundled.read_text(encoding="utf-8")
    return p.read_text(encoding="utf-8")


def _write(path: str | None, text: str) -> None:
    if path:
        Path(path).write_text(text, encoding="utf-8")


# ---------------------------------------------------------------------------
# subcommands


def cmd_newton(args) -> int:
    f = _expr(args.f)
    var = _single_var(f, args.var)
    cfg = rootfind.ScalarNewtonConfig(args.x0, args.maxn, args.h)
    try:
        root, trace = rootfind.newton_scalar(f, var, cfg)
    except rootfind.NewtonError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_NONCONVERGED
    rows = [(s.index, s.point[0], s.value, s.bracket) for s in trace.steps]
    if args.format == "json":
        out = report.to_json({
            "root": root,
            "converged": trace.converged,
            "stop_reason": trace.stop_reason.value,
            "h": args.h,
            "steps": [{"n": n, "x": x, "f": fx, "bracket": br} for n, x, fx, br in rows],
        })
    elif args.format == "csv":
        out = report.to_csv(["n", "x_n", "f_x_n", "bracket_product"], rows)
    else:
        out = f"Root = {root!r}\n" + report.to_table(
            ["n", "x_n", "f(x_n)", "f(x_n-h)f(x_n+h)"], rows, [None, "#.7g", ".5g", ".4g"]
        )
    sys.stdout.write(out)
    if not trace.converged:
        print(f"no convergence: {trace.stop_reason.value}", file=sys.stderr)
        return EXIT_NONCONVERGED
    return EXIT_OK


def read_system(path: str | Path):
    """Read an equation file: a ``vars:`` line plus one expression per line.

    Blank lines and ``#`` comments are skipped.
    """
    names, exprs = None, []
    for lineno, raw in enumerate(_read_input(path).splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if line.lower().startswith("vars:"):
            names = [v for v in line[5:].replace(",", " ").split()]
            continue
        try:
            exprs.append(parse(line))
        except ParseError as exc:
            raise ParseError(f"line {lineno}: {exc}", exc.offset, line) from None
    if not names:
        raise UsageError(f"{path}: missing 'vars:' declaration")
    if len(names) != len(exprs):
        raise UsageError(f"{path}: {len(exprs)} equations for {len(names)} variables")
    return names, exprs


def cmd_mdnewton(args) -> int:
    names, exprs = read_system(args.system)
    if len(args.x0) != len(names):
        raise UsageError(f"--x0 has {len(args.x0)} values, the system has {len(names)} variables")
    try:
        trace = rootfind.newton_system(exprs, names, args.x0, args.maxiter, args.tol)
    except rootfind.NewtonError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_NONCONVERGED
    rows = [(s.index, *s.point, s.residual_norm) for s in trace.steps]
    if args.format == "json":
        out = report.to_json({
            "vars": names,
            "converged": trace.converged,
            "stop_reason": trace.stop_reason.value,
            "steps": [{"i": s.index, "x": list(s.point), "norm_f": s.residual_norm} for s in trace.steps],
        })
    elif args.format == "csv":
        out = report.to_csv(["i", *names, "norm_f"], rows)
    else:
        table_rows = [
            (s.index, "(" + ", ".join(format(v, ".10g") for v in s.point) + ")", s.residual_norm)
            for s in trace.steps
        ]
        out = report.to_table(["i", "(" + ",".join(names) + ")", "norm(f)"], table_rows, [None, None, ".4g"])
    sys.stdout.write(out)
    if args.path_out:
        _write(args.path_out, report.to_csv(names, [s.point for s in trace.steps]))
    if not trace.converged:
        print(f"no convergence: {trace.stop_reason.value}", file=sys.stderr)
        return EXIT_NONCONVERGED
    return EXIT_OK


def cmd_quad(args) -> int:
    f = _expr(args.f)
    var = _single_var(f, args.var)
    odd = [n for n in args.ns if n < 1 or n % 2]
    if odd:
        raise UsageError(f"Simpson's rule needs even positive n; got {odd}")
    exact = args.exact
    if exact is None:
        exact, _ = quadrature.adaptive_integral(f, args.a, args.b, 1e-12, var)
        print(f"note: --exact not given, using adaptive reference {exact!r}", file=sys.stderr)
    table = quadrature.convergence_table(f, args.a, args.b, exact, args.ns, var)
    rows = [(r.n, r.h, r.err_midpoint, r.err_trapezoid, r.err_simpson) for r in table]
    if args.format == "json":
        out = report.to_json({
            "exact": exact,
            "rows": [
                {"n": n, "h": h, "midpoint": m, "trapezoid": t, "simpson": s}
                for n, h, m, t, s in rows
            ],
        })
    elif args.format == "csv":
        out = report.to_csv(["n", "h", "midpoint", "trapezoid", "simpson"], rows)
    else:
        out = report.to_table(
            ["n", "h", "Midpoint rule", "Trapezoidal rule", "Simpson's rule"],
            rows,
            [None, ".2g", ".6g", ".6g", ".6g"],
        )
    sys.stdout.write(out)
    return EXIT_OK


def cmd_riemann(args) -> int:
    f = _expr(args.f)
    var = _single_var(f, args.var)
    rects = quadrature.riemann_rectangles(f, args.a, args.b, args.n, args.mode, var)
    total = quadrature.rectangles_sum(rects)
    rows = [(r.x_left, r.x_right, r.height) for r in rects]
    headers = ["x_left", "x_right", "height"]
    if args.format == "json":
        out = report.to_json({
            "mode": args.mode,
            "sum": total,
            "rectangles": [dict(zip(headers, r)) for r in rows],
        })
    elif args.format == "csv":
        out = report.to_csv(headers, rows)
    else:
        out = report.to_table(headers, rows, [".6g"] * 3) + f"Sum = {total!r}\n"
    sys.stdout.write(out)
    _write(args.out, report.to_csv(headers, rows))
    return EXIT_OK


def cmd_fit(args) -> int:
    model = _expr(args.model)
    params = args.params
    for name, values in (("--lambda-true", args.lambda_true), ("--lambda0", args.lambda0)):
        if len(values) != len(params):
            raise UsageError(f"{name} has {len(values)} values for {len(params)} parameters")
    if len(args.noise) != 2:
        raise UsageError("--noise takes two values lo,hi")
    seed = args.seed if args.seed is not None else _default_seed()
    xdata = args.xdata
    ydata, _ = optimize.generate_noisy_data(
        model, args.x_var, params, args.lambda_true, xdata, args.noise[0], args.noise[1], RngState(seed)
    )
    opts = optimize.NmOptions(max_iter=args.max_iter)
    fit = optimize.fit_model(model, args.x_var, params, xdata, ydata, args.lambda0, opts)

    if args.format == "json":
        out = report.to_json({
            "seed": seed,
            "params": params,
            "lambda_fit": fit.lambda_fit,
            "s_initial": fit.s_initial,
            "s_final": fit.s_final,
            "iterations": fit.iterations,
            "converged": fit.converged,
            "xdata": xdata,
            "ydata": ydata,
        })
    elif args.format == "csv":
        rows = [(p, v) for p, v in zip(params, fit.lambda_fit)]
        rows += [("s_initial", fit.s_initial), ("s_final", fit.s_final),
                 ("iterations", fit.iterations), ("converged", fit.converged), ("seed", seed)]
        out = report.to_csv(["quantity", "value"], rows)
    else:
        out = report.to_table(["parameter", "fitted"], list(zip(params, fit.lambda_fit)), [None, ".8g"])
        out += (
            f"Object function values: start = {fit.s_initial:.6g}, final = {fit.s_final:.6g}\n"
            f"iterations = {fit.iterations}, converged = {fit.converged}, seed = {seed}\n"
        )
    sys.stdout.write(out)
    if args.curve_out:
        yfit = optimize._model_fn(model, args.x_var, params)(fit.lambda_fit, xdata)
        _write(args.curve_out, report.to_csv(["x", "y_data", "y_fit"], list(zip(xdata, ydata, yfit))))
    if not fit.converged:
        print("no convergence: Nelder-Mead hit max_iter", file=sys.stderr)
        return EXIT_NONCONVERGED
    return EXIT_OK


def cmd_polyapprox(args) -> int:
    g = _expr(args.g)
    var = _single_var(g, args.var)
    nmin = args.nmin if args.nmin is not None else min(2, args.nmax)
    if not 1 <= nmin <= args.nmax:
        raise UsageError("need 1 <= nmin <= nmax")
    results = [approx.l2_polyfit(g, n, args.r1, args.r2, var=var) for n in range(nmin, args.nmax + 1)]

    if args.format == "json":
        out = report.to_json({
            "g": args.g,
            "r1": args.r1,
            "r2": args.r2,
            "results": [
                {"n": r.n, "coeffs": r.coeffs, "max_abs_err": r.max_abs_err,
                 "int_abs_err": r.int_abs_err, "int_sq_err": r.int_sq_err}
                for r in results
            ],
        })
    elif args.format == "csv":
        width = args.nmax
        headers = ["n", "max_abs_err", "int_abs_err", "int_sq_err"] + [f"c{k}" for k in range(1, width + 1)]
        rows = [
            [r.n, r.max_abs_err, r.int_abs_err, r.int_sq_err] + list(r.coeffs) + [None] * (width - r.n)
            for r in results
        ]
        out = report.to_csv(headers, rows)
    else:
        parts = []
        for r in results:
            parts.append(f"n = {r.n}\n")
            parts.append(report.to_table(
                ["k", "power", "c_k"],
                [(k, r.n - k, c) for k, c in enumerate(r.coeffs, 1)],
                [None, None, ".10g"],
            ))
            parts.append(
                f"Abs. error = {r.max_abs_err:.6g} (max), {r.int_abs_err:.6g} (integral), "
                f"{r.int_sq_err:.6g} (integral of square)\n\n"
            )
        out = "".join(parts)
    sys.stdout.write(out)
    if args.grid_out:
        rows = [(r.n, x, gx, px, abs(px - gx)) for r in results for x, gx, px in r.grid]
        _write(args.grid_out, report.to_csv(["n", "x", "g", "p", "abs_err"], rows))
    return EXIT_OK


def cmd_condexp(args) -> int:
    if args.pstep <= 0 or args.pmax < args.pmin:
        raise UsageError("need pstep > 0 and pmax >= pmin")
    seed = args.seed if args.seed is not None else _default_seed()
    exponents = []
    k = 0
    while args.pmin + k * args.pstep <= args.pmax + 1e-9 * args.pstep:
        exponents.append(args.pmin + k * args.pstep)
        k += 1
    records = experiments.condition_error_study(args.n, exponents, RngState(seed))
    note = None
    try:
        slope = experiments.loglog_slope(records)
    except ValueError as exc:
        slope, note = None, f"slope undefined: {exc}"

    rows = [(r.c, r.err) for r in records]
    if args.format == "json":
        summary = {"n": args.n, "seed": seed, "slope": slope,
                   "records": [{"c": c, "err": e} for c, e in rows]}
        if note:
            summary["note"] = note
        out = report.to_json(summary)
    elif args.format == "csv":
        out = report.to_csv(["c", "err"], rows)
    else:
        out = report.to_table(["cond(A_c)", "error"], rows, [".3g", ".6g"])
        out += f"n = {args.n}, seed = {seed}, "
        out += f"loglog slope = {slope:.4f}\n" if slope is not None else f"{note}\n"
    sys.stdout.write(out)
    _write(args.out, report.to_csv(["c", "err"], rows))
    if note:
        print(f"note: {note}", file=sys.stderr)
    return EXIT_OK


def _read_matrix(path: str) -> np.ndarray:
    text = _read_input(path)
    if path.endswith(".json"):
        return linalg.matrix_from_json(json.loads(text))
    return linalg.matrix_from_csv(text)


def cmd_matrix(args) -> int:
    a = _read_matrix(args.matrix)
    n = a.shape[0]
    if a.shape != (n, n):
        raise UsageError(f"matrix must be square, got {a.shape[0]}x{a.shape[1]}")
    result: dict = {
        "determinant": linalg.determinant(a),
        "rank": linalg.rank(a),
        "frobenius_norm": linalg.frobenius_norm(a),
        "condition_number": linalg.condition_number(a),
        "singular_values": linalg.svd(a).s,
    }
    try:
        result["inverse"] = linalg.inverse(a)
        f = linalg.lu_decompose(a)
        result["lu"] = {"perm": f.perm, "L": f.L, "U": f.U}
    except linalg.SingularMatrixError as exc:
        result["inverse"] = None
        result["note"] = str(exc)
    if args.rhs is not None:
        if len(args.rhs) != n:
            raise UsageError(f"--rhs has {len(args.rhs)} values, expected {n}")
        result["solution"] = linalg.solve(a, np.array(args.rhs)) if result["inverse"] is not None else None

    if args.format == "json":
        out = report.to_json(result)
    elif args.format == "csv":
        rows = [(k, result[k]) for k in ("determinant", "rank", "frobenius_norm", "condition_number")]
        out = report.to_csv(["quantity", "value"], rows)
    else:
        lines = [f"{k} = {result[k]!r}" for k in ("determinant", "rank", "frobenius_norm", "condition_number")]
        lines.append("singular values = " + ", ".join(f"{s:.10g}" for s in result["singular_values"]))
        for key in ("inverse",):
            if result.get(key) is not None:
                lines.append(f"{key} =\n{np.array2string(result[key], precision=10)}")
        if "lu" in result:
            lines.append(f"P (row order) = {result['lu']['perm'].tolist()}")
            lines.append(f"L =\n{np.array2string(result['lu']['L'], precision=10)}")
            lines.append(f"U =\n{np.array2string(result['lu']['U'], precision=10)}")
        if result.get("solution") is not None:
            lines.append("solution = " + ", ".join(repr(float(v)) for v in result["solution"]))
        if "note" in result:
            lines.append(f"note: {result['note']}")
        out = "\n".join(lines) + "\n"
    sys.stdout.write(out)
    return EXIT_OK


# ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="numlab", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def add(name, func, help_text):
        p = sub.add_parser(name, help=help_text, description=help_text)
        p.set_defaults(func=func)
        p.add_argument("--format", choices=report.FORMATS, default="table")
        return p

    p = add("newton", cmd_newton, "scalar Newton iteration with the sign-change stopping rule")
    p.add_argument("--f", required=True, help="expression, e.g. 'x^2-3'")
    p.add_argument("--var", help="variable name (default: the expression's only variable)")
    p.add_argument("--x0", type=float, default=2.0)
    p.add_argument("--maxn", type=int, default=10)
    p.add_argument("--h", type=float, default=5e-6, help="half-width of the accuracy bracket")

    p = add("mdnewton", cmd_mdnewton, "Newton iteration for a system of equations")
    p.add_argument("--system", required=True, help="equation file (vars: line + one expression per line)")
    p.add_argument("--x0", type=_floats, required=True, help="comma-separated initial point")
    p.add_argument("--maxiter", type=int, default=12)
    p.add_argument("--tol", type=float, default=1e-10)
    p.add_argument("--path-out", help="write the iteration path as CSV")

    p = add("quad", cmd_quad, "midpoint/trapezoid/Simpson error table")
    p.add_argument("--f", required=True)
    p.add_argument("--var")
    p.add_argument("--a", type=float, required=True)
    p.add_argument("--b", type=float, required=True)
    p.add_argument("--exact", type=float)
    p.add_argument("--ns", type=_ints, default=[4, 10, 20, 50, 100])

    p = add("riemann", cmd_riemann, "rectangles of a Riemann sum")
    p.add_argument("--f", required=True)
    p.add_argument("--var")
    p.add_argument("--a", type=float, required=True)
    p.add_argument("--b", type=float, required=True)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--mode", choices=("midpoint", "left", "right"), default="midpoint")
    p.add_argument("--out", help="write rectangles as CSV (x_left,x_right,height)")

    p = add("fit", cmd_fit, "Nelder-Mead least-squares fit to noisy synthetic data")
    p.add_argument("--model", type=str, default=DEFAULT_MODEL)
    p.add_argument("--params", type=_names, default=["l1", "l2", "l3"])
    p.add_argument("--x-var", default="x")
    p.add_argument("--xdata", type=_xdata, default=np.arange(0, 1.15, 0.05),
                   help="start:stop:step or comma list (default 0:1.15:0.05)")
    p.add_argument("--lambda-true", type=_floats, default=[0.2, 1.5, 0.7])
    p.add_argument("--noise", type=_floats, default=[0.97, 1.02], help="lo,hi multiplicative noise")
    p.add_argument("--lambda0", type=_floats, default=[1.0, 1.0, 1.0])
    p.add_argument("--seed", type=_u64, help="default: $NUMLAB_SEED or 42")
    p.add_argument("--max-iter", type=int, default=2000)
    p.add_argument("--curve-out", help="write x,y_data,y_fit as CSV")

    p = add("polyapprox", cmd_polyapprox, "L2 polynomial approximation via normal equations")
    p.add_argument("--g", default="e^x")
    p.add_argument("--var")
    p.add_argument("--r1", type=float, default=-1.0)
    p.add_argument("--r2", type=float, default=1.0)
    p.add_argument("--nmax", type=int, default=3)
    p.add_argument("--nmin", type=int, help="default: min(2, nmax)")
    p.add_argument("--grid-out", help="write n,x,g,p,abs_err on the error grid as CSV")

    p = add("condexp", cmd_condexp, "solution error versus prescribed condition number")
    p.add_argument("--n", type=int, default=experiments.DEFAULT_N)
    p.add_argument("--pmin", type=float, default=1.0)
    p.add_argument("--pmax", type=float, default=15.0)
    p.add_argument("--pstep", type=float, default=2.0)
    p.add_argument("--seed", type=_u64, help="default: $NUMLAB_SEED or 42")
    p.add_argument("--out", help="write c,err as CSV")

    p = add("matrix", cmd_matrix, "determinant, rank, norms, inverse, LU and solve for one matrix")
    p.add_argument("--matrix", required=True, help="CSV (one row per line) or JSON {rows, cols, data}")
    p.add_argument("--rhs", type=_floats)
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ParseError as exc:
        print(f"syntax error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (UsageError, DifferentiationError, EvaluationError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
