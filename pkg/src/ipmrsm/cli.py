"""Command-line entry point: ``ipmrsm <subcommand> [options]``.

Every subcommand prints one JSON report on stdout and, with ``--out DIR``,
also writes it to ``DIR/<subcommand>.json`` next to any CSV tables.

Exit codes: 0 success, 1 input error, 2 numerical failure, 3 fit did not
converge.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .bootstrap import bootstrap_fit
from .dataset import ingest_csv
from .design import (
    ccd,
    check_orthogonality,
    check_rotatability,
    check_uniform_precision,
    design_moments,
    full_factorial,
)
from .diagnostics import adequacy_report, normal_scores
from .exceptions import ConvergenceError, InputError, RSMError
from .linear import grid_nodes, variance_surface_grid
from .model import ParamVector, eval_response, reciprocal_ols_start, resolve_model
from .report import dumps, grid_csv, table_csv
from .solver import (
    NonStationaryError,
    SolverConfig,
    asymptotic_ci,
    gauss_newton,
    refit_from_solution,
)
from .terms import model_matrix

EXIT_OK, EXIT_INPUT, EXIT_NUMERIC, EXIT_NOT_CONVERGED = 0, 1, 2, 3


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_INPUT, f"{self.prog}: error: {message}\n")


def _positive_int(text):
    v = int(text)
    if v < 1:
        raise argparse.ArgumentTypeError(f"must be a positive integer, got {text}")
    return v


def _seed(text):
    v = int(text)
    if not 0 <= v < 2**64:
        raise argparse.ArgumentTypeError("seed must be a 64-bit unsigned integer")
    return v


def _floats(text):
    try:
        return [float(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}")


def _points(text):
    try:
        return np.array([[float(v) for v in p.split(",")] for p in text.split(";") if p.strip()])
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected points like '1,1;2,3', got {text!r}")


def _grid(text):
    axes = []
    for part in text.split(","):
        bits = part.split(":")
        if len(bits) != 3:
            raise argparse.ArgumentTypeError(f"grid axis must be start:stop:step, got {part!r}")
        try:
            axes.append(tuple(float(b) for b in bits))
        except ValueError:
            raise argparse.ArgumentTypeError(f"bad grid axis {part!r}")
    return axes


def _alpha(text):
    if text == "rotatable":
        return text
    try:
        return float(text)
    except ValueError:
        raise argparse.ArgumentTypeError("alpha must be 'rotatable' or a positive number")


def _add_output(p):
    p.add_argument("--out", type=Path, help="directory for report and CSV files")


def _add_data(p, required=True):
    p.add_argument("--input", type=Path, required=required, help="CSV with x1..xk and y")
    p.add_argument("--response", default="y", help="response column name (default y)")
    p.add_argument("--model", default="ipm1", help="ipm1, ipm2 or comma-separated term labels")
    p.add_argument("--delta", type=float, default=1e-6)
    p.add_argument("--max-iterations", type=_positive_int, default=50)
    p.add_argument("--no-step-halving", action="store_true")
    p.add_argument("--theta0", type=_floats, help="starting coefficients in model order")


def _add_design(p, required=True):
    p.add_argument("--k", type=int, required=required, help="number of factors")
    p.add_argument("--n0", type=int, default=0, help="center runs")
    p.add_argument("--alpha", type=_alpha, default="rotatable")


def build_parser():
    parser = _Parser(prog="ipmrsm", description="Response-surface designs and inverse polynomial fits.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("design", help="build a CCD or factorial and check its properties")
    _add_design(p)
    p.add_argument("--factorial-levels", type=_floats, help="levels for a full factorial instead of a CCD")
    p.add_argument("--order", type=int, choices=(1, 2), default=2)
    _add_output(p)

    p = sub.add_parser("fit", help="Gauss-Newton fit of an inverse polynomial")
    _add_data(p)
    p.add_argument("--level", type=float, default=0.95)
    _add_output(p)

    p = sub.add_parser("bootstrap", help="case-resampling bootstrap of a fit")
    _add_data(p)
    p.add_argument("--B", type=_positive_int, default=1000)
    p.add_argument("--seed", type=_seed)
    p.add_argument("--jobs", type=_positive_int, default=1)
    p.add_argument("--level", type=float, default=0.95)
    _add_output(p)

    p = sub.add_parser("diagnose", help="residuals and the Shapiro-Wilk adequacy test")
    _add_data(p)
    _add_output(p)

    p = sub.add_parser("predict", help="evaluate a fitted or supplied model at points")
    _add_data(p, required=False)
    p.add_argument("--theta", type=_floats, help="coefficients in model order")
    p.add_argument("--points", type=_points, required=True, help="points as '1,1;2,3'")
    _add_output(p)

    p = sub.add_parser("surface", help="response and prediction-variance grids")
    _add_data(p, required=False)
    p.add_argument("--theta", type=_floats)
    p.add_argument("--grid", type=_grid, help="natural-unit grid, e.g. 1:4:0.5,1:4:0.5")
    _add_design(p, required=False)
    p.add_argument("--order", type=int, choices=(1, 2), default=2)
    p.add_argument("--variance-grid", type=_grid, help="coded grid for the variance surface")
    _add_output(p)
    return parser


def _config(args):
    return SolverConfig(
        delta=args.delta,
        max_iterations=args.max_iterations,
        step_halving=not args.no_step_halving,
    )


def _solver_echo(args):
    return {
        "input": str(args.input) if args.input else None,
        "response": args.response,
        "model": args.model,
        "delta": args.delta,
        "max_iterations": args.max_iterations,
        "step_halving": not args.no_step_halving,
        "theta0": args.theta0,
    }


def _fit(args, model, data):
    start = (
        ParamVector(model.labels, args.theta0)
        if args.theta0
        else reciprocal_ols_start(model, data.X, data.y)
    )
    return start, gauss_newton(model, data.X, data.y, start, _config(args))


def _fit_section(fit, start):
    return {
        "terms": list(fit.theta_hat.labels),
        "start": start.as_dict(),
        "estimates": fit.theta_hat.as_dict(),
        "sse": fit.sse,
        "iterations": fit.iterations,
        "converged": fit.converged,
        "achieved_tolerance": fit.achieved_tolerance,
        "sse_trace": list(fit.sse_trace),
        "covariance": fit.covariance,
    }


def _write(args, name, doc, files=None):
    text = dumps(doc)
    sys.stdout.write(text)
    if args.out is not None:
        args.out.mkdir(parents=True, exist_ok=True)
        (args.out / f"{name}.json").write_text(text)
        for fname, content in (files or {}).items():
            (args.out / fname).write_text(content)


def _report_property(rep):
    return {"holds": rep.holds, "evidence": rep.evidence, "tolerances": rep.tolerances, "reason": rep.reason}


def run_design(args):
    if args.factorial_levels:
        if args.k is None or args.k < 1:
            raise InputError("--k must be a positive integer")
        design = full_factorial([args.factorial_levels] * args.k)
    else:
        if args.k < 1:
            raise InputError("--k must be a positive integer")
        design = ccd(args.k, args.n0, args.alpha)
    moments = design_moments(design)
    doc = {
        "command": "design",
        "config": {
            "k": args.k,
            "n0": args.n0,
            "alpha": args.alpha,
            "factorial_levels": args.factorial_levels,
            "order": args.order,
        },
        "runs": design.n_runs,
        "design": [{"kind": kd, "x": list(row)} for kd, row in zip(design.kinds, design.rows)],
        "moments": {"N": moments.N, "b": moments.b, "c": moments.c, "d": moments.d},
        "properties": {
            "orthogonal": _report_property(check_orthogonality(design, args.order)),
            "rotatable": _report_property(check_rotatability(design, args.order)),
            "uniform_precision": _report_property(check_uniform_precision(design, args.order)),
        },
    }
    rows = design.rows
    table = table_csv(
        ["kind"] + [f"x{i}" for i in range(1, design.k + 1)],
        [list(design.kinds)] + [list(rows[:, j]) for j in range(design.k)],
    )
    _write(args, "design", doc, {"design.csv": table})
    return EXIT_OK


def run_fit(args):
    model = resolve_model(args.model)
    data = ingest_csv(args.input, args.response)
    start, fit = _fit(args, model, data)
    doc = {"command": "fit", "config": {**_solver_echo(args), "level": args.level}, "n_obs": data.n_rows}
    doc["fit"] = _fit_section(fit, start)
    if fit.converged:
        doc["confidence_intervals"] = asymptotic_ci(fit, args.level)
        adequacy = adequacy_report(model, fit, data.X, data.y)
        doc["adequacy"] = _adequacy_section(adequacy)
        try:
            again = refit_from_solution(model, data.X, data.y, fit, _config(args))
            doc["refit"] = {"iterations": again.iterations, "sse": again.sse, "stationary": True}
        except NonStationaryError as exc:
            doc["refit"] = {"iterations": exc.result.iterations, "sse": exc.result.sse, "stationary": False}
    _write(args, "fit", doc)
    return EXIT_OK if fit.converged else EXIT_NOT_CONVERGED


def _adequacy_section(adequacy):
    out = {"sse": adequacy.sse, "verdict": adequacy.verdict, "alpha": adequacy.alpha}
    if adequacy.normality is not None:
        out["shapiro_wilk"] = {
            "W": adequacy.normality.W,
            "p_value": adequacy.normality.p_value,
            "n": adequacy.normality.n,
        }
    out["residual_sum"] = float(np.sum(adequacy.residuals))
    return out


def run_bootstrap(args):
    model = resolve_model(args.model)
    data = ingest_csv(args.input, args.response)
    seed = args.seed
    if seed is None:
        seed = int(np.random.SeedSequence().entropy % 2**64)
        print(f"seed: {seed}", file=sys.stderr)
    start, fit = _fit(args, model, data)
    if not fit.converged:
        raise ConvergenceError("observed-sample fit did not converge")
    result = bootstrap_fit(model, data, B=args.B, config=_config(args), seed=seed,
                           level=args.level, n_jobs=args.jobs, observed=fit)
    doc = {
        "command": "bootstrap",
        "config": {**_solver_echo(args), "B": args.B, "seed": seed, "level": args.level},
        "n_obs": data.n_rows,
        "observed": fit.theta_hat.as_dict(),
        "observed_intervals": asymptotic_ci(fit, args.level),
        "bootstrap": {
            "replicates": int(result.estimates.shape[0]),
            "failures": result.failures,
            "mean": dict(zip(result.labels, result.mean)),
            "std_error": dict(zip(result.labels, result.std_error)),
            "bias": dict(zip(result.labels, result.bias)),
            "intervals": result.intervals,
        },
    }
    table = table_csv(list(result.labels), [list(c) for c in result.estimates.T])
    _write(args, "bootstrap", doc, {"replicates.csv": table})
    return EXIT_OK


def run_diagnose(args):
    model = resolve_model(args.model)
    data = ingest_csv(args.input, args.response)
    start, fit = _fit(args, model, data)
    if not fit.converged:
        raise ConvergenceError("fit did not converge; diagnostics need a converged fit")
    adequacy = adequacy_report(model, fit, data.X, data.y)
    fitted = eval_response(model, fit.theta_hat, data.X)
    doc = {
        "command": "diagnose",
        "config": _solver_echo(args),
        "n_obs": data.n_rows,
        "estimates": fit.theta_hat.as_dict(),
        "adequacy": _adequacy_section(adequacy),
        "residuals": list(adequacy.residuals),
        "standardized_residuals": list(adequacy.standardized),
    }
    order = np.argsort(adequacy.standardized, kind="stable")
    qq = table_csv(
        ["normal_score", "standardized_residual"],
        [list(normal_scores(data.n_rows)), list(adequacy.standardized[order])],
    )
    res = table_csv(
        [f"x{i}" for i in range(1, data.k + 1)] + ["y", "fitted", "residual", "standardized"],
        [list(data.X[:, j]) for j in range(data.k)]
        + [list(data.y), list(fitted), list(adequacy.residuals), list(adequacy.standardized)],
    )
    _write(args, "diagnose", doc, {"qq.csv": qq, "residuals.csv": res})
    return EXIT_OK


def _theta_for(args, model):
    if args.theta is not None:
        return ParamVector(model.labels, args.theta), None
    if args.input is None:
        raise InputError("supply --theta or --input to obtain coefficients")
    data = ingest_csv(args.input, args.response)
    _, fit = _fit(args, model, data)
    if not fit.converged:
        raise ConvergenceError("fit did not converge")
    return fit.theta_hat, fit


def run_predict(args):
    model = resolve_model(args.model)
    theta, _ = _theta_for(args, model)
    pts = args.points
    if pts.ndim != 2 or pts.shape[1] != model.k:
        raise InputError(f"points need {model.k} coordinates each")
    y = eval_response(model, theta, pts)
    doc = {
        "command": "predict",
        "config": {**_solver_echo(args), "theta": args.theta},
        "estimates": theta.as_dict(),
        "predictions": [{"x": list(p), "y": v} for p, v in zip(pts, y)],
    }
    _write(args, "predict", doc)
    return EXIT_OK


def run_surface(args):
    if args.grid is None and args.k is None:
        raise InputError("supply --grid (response surface) and/or --k (variance surface)")
    doc = {"command": "surface", "config": {
        **_solver_echo(args), "theta": args.theta, "grid": args.grid,
        "k": args.k, "n0": args.n0, "alpha": args.alpha, "order": args.order,
        "variance_grid": args.variance_grid,
    }}
    files = {}
    if args.grid is not None:
        model = resolve_model(args.model)
        if len(args.grid) != model.k:
            raise InputError(f"--grid needs {model.k} axes")
        theta, _ = _theta_for(args, model)
        nodes, shape = grid_nodes(args.grid)
        eta = model_matrix(nodes, model) @ theta.values
        with np.errstate(divide="ignore"):
            values = np.where(eta != 0, 1.0 / eta, np.nan)
        doc["estimates"] = theta.as_dict()
        doc["response_grid"] = {"file": "response.csv", "shape": list(shape),
                                "min": float(np.nanmin(values)), "max": float(np.nanmax(values))}
        files["response.csv"] = grid_csv(nodes, values)
    if args.k is not None:
        if args.k < 1:
            raise InputError("--k must be a positive integer")
        design = ccd(args.k, args.n0, args.alpha)
        axes = args.variance_grid or [(-2.0, 2.0, 0.25)] * args.k
        if len(axes) != args.k:
            raise InputError(f"--variance-grid needs {args.k} axes")
        surf = variance_surface_grid(design, args.order, axes)
        doc["variance_grid"] = {"file": "variance.csv", "shape": list(surf.shape),
                                "n_runs": design.n_runs,
                                "min": float(surf.values.min()), "max": float(surf.values.max())}
        files["variance.csv"] = grid_csv(surf.nodes, surf.values)
    _write(args, "surface", doc, files)
    return EXIT_OK


COMMANDS = {
    "design": run_design,
    "fit": run_fit,
    "bootstrap": run_bootstrap,
    "diagnose": run_diagnose,
    "predict": run_predict,
    "surface": run_surface,
}


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        return COMMANDS[args.command](args)
    except InputError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except ConvergenceError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_NOT_CONVERGED
    except (RSMError, ArithmeticError, np.linalg.LinAlgError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())
