"""Command-line interface.

Exit codes: 0 success, 2 bad input (malformed or empty CSV, dimension
mismatch, invalid parameters), 3 node limit reached with the optimality gap
above its threshold (the incumbent model is still written).
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import os
import sys

import numpy as np

from . import estimator, feasibility, oracle, synth
from .data import DataSet
from .errors import QuasifitError
from .shape import ShapeSpec
from .solver import SolverParams

EXIT_OK, EXIT_INPUT, EXIT_NODE_LIMIT = 0, 2, 3


class InputError(Exception):
    pass


# ---------------------------------------------------------------------------
# CSV helpers


def read_csv(path, column: str | None = "y"):
    """Read a CSV whose header starts with x1..xd.

    Returns ``(X, values)`` where ``values`` is the column named ``column``
    (None when ``column`` is None). Other columns are ignored.
    """
    try:
        with (sys.stdin if path == "-" else open(path, newline="", encoding="utf-8")) as fh:
            rows = [r for r in csv.reader(fh) if any(c.strip() for c in r)]
    except OSError as exc:
        raise InputError(str(exc)) from exc
    if not rows:
        raise InputError(f"{path}: empty file")
    header = [h.strip() for h in rows[0]]
    d = 0
    while d < len(header) and header[d] == f"x{d + 1}":
        d += 1
    if d == 0:
        raise InputError(f"{path}: header must start with x1..xd")
    if column is not None and column not in header:
        raise InputError(f"{path}: missing column '{column}'")
    if len(rows) < 2:
        raise InputError(f"{path}: no data rows")
    try:
        vals = np.array([[float(c) for c in r] for r in rows[1:]], dtype=float)
    except ValueError as exc:
        raise InputError(f"{path}: non-numeric entry ({exc})") from exc
    if vals.ndim != 2 or vals.shape[1] != len(header):
        raise InputError(f"{path}: every row must have {len(header)} fields")
    if not np.all(np.isfinite(vals)):
        raise InputError(f"{path}: non-finite entry")
    col = vals[:, header.index(column)] if column is not None else None
    return vals[:, :d], col


def write_csv(path, header, rows):
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for r in rows:
        w.writerow([repr(float(v)) if isinstance(v, (float, np.floating)) else v for v in r])
    if path in (None, "-"):
        sys.stdout.write(buf.getvalue())
    else:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(buf.getvalue())


def emit_json(obj, path=None):
    text = json.dumps(obj, indent=2)
    if path in (None, "-"):
        print(text)
    else:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(text + "\n")


# ---------------------------------------------------------------------------
# argument plumbing


def _shape(args) -> ShapeSpec:
    return ShapeSpec(args.curvature, args.monotone)


def _params(args) -> SolverParams:
    return SolverParams(m_z=args.big_m, m_xi=args.big_m, eps=args.eps, gamma=args.gamma,
                        gap=args.gap, max_nodes=args.max_nodes,
                        threads=args.threads or (os.cpu_count() or 1))


def _add_shape(p, monotone="decreasing"):
    p.add_argument("--curvature", choices=["quasiconvex", "quasiconcave"], default="quasiconvex")
    p.add_argument("--monotone", choices=["decreasing", "increasing", "none"], default=monotone)


def _add_solver(p):
    g = p.add_argument_group("solver")
    g.add_argument("--big-m", type=float, default=None, help="value used for both big-M constants")
    g.add_argument("--eps", type=float, default=None, help="separation margin")
    g.add_argument("--gamma", type=float, default=None, help="bound on |fitted values|")
    g.add_argument("--gap", type=float, default=None, help="absolute optimality gap")
    g.add_argument("--max-nodes", type=int, default=20000)
    g.add_argument("--threads", type=int, default=None, help="default: number of cores")


# ---------------------------------------------------------------------------
# commands


def cmd_fit(args) -> int:
    X, y = read_csv(args.input)
    model = estimator.fit(DataSet(X, y), _shape(args), _params(args))
    if args.output:
        estimator.save_model(model, args.output)
    keys = ("objective", "gap", "nodes", "wall_ms", "m_z", "m_xi", "eps", "gamma", "status")
    emit_json({k: model.stats[k] for k in keys}, args.report)
    if model.stats["status"] != "optimal":
        return EXIT_NODE_LIMIT
    return EXIT_OK


def cmd_predict(args) -> int:
    model = estimator.load_model(args.model)
    X, _ = read_csv(args.input, column=None)
    if X.shape[1] != model.d:
        raise InputError(f"model has dimension {model.d}, points have {X.shape[1]}")
    pred = estimator.predict(model, X)
    header = [f"x{k + 1}" for k in range(model.d)] + ["prediction"]
    write_csv(args.output, header, [list(x) + [p] for x, p in zip(X, pred)])
    return EXIT_OK


def cmd_check(args) -> int:
    X, z = read_csv(args.input, column=args.column)
    report = feasibility.check(z, X, _shape(args))
    out = {"feasible": report.feasible}
    if not report.feasible:
        out["witness"] = report.index + 1
        out["set"] = [j + 1 for j in report.below]
    emit_json(out, args.output)
    return EXIT_OK


def cmd_oracle(args) -> int:
    X, y = read_csv(args.input)
    res = oracle.brute_force(DataSet(X, y), _shape(args), gamma=args.gamma, cap=args.cap)
    emit_json({"objective": res.objective, "optima": [t.tolist() for t in res.thetas]}, args.output)
    return EXIT_OK


def _synth_config(args, n, seed) -> synth.SynthConfig:
    return synth.SynthConfig(n=n, d=args.d, xi=args.xi, sigma2=args.sigma2,
                             misspecified=args.misspecified, seed=seed)


def cmd_simulate(args) -> int:
    sd = synth.generate(_synth_config(args, args.n, args.seed))
    header = [f"x{k + 1}" for k in range(args.d)] + ["y", "truth"]
    rows = [list(x) + [yv, t] for x, yv, t in zip(sd.data.X, sd.data.y, sd.truth)]
    write_csv(args.output, header, rows)
    return EXIT_OK


def bench_rows(args):
    shape = ShapeSpec("quasiconvex", "increasing")
    params = _params(args)
    for n in args.n:
        for rep in range(args.reps):
            seed = args.seed + 100003 * n + rep
            sd = synth.generate(_synth_config(args, n, seed))
            lse = estimator.fit(sd.data, shape, params)
            iso = estimator.fit_isotonic(sd.data, "increasing")
            yield {
                "n": n, "rep": rep, "seed": seed,
                "lse_loss": float(np.sum((lse.fitted - sd.truth) ** 2)),
                "iso_loss": float(np.sum((iso.fitted - sd.truth) ** 2)),
                "lse_sse": lse.stats["objective"], "iso_sse": iso.stats["objective"],
                "nodes": lse.stats["nodes"], "wall_ms": lse.stats["wall_ms"],
                "status": lse.stats["status"],
            }


def cmd_bench(args) -> int:
    rows = list(bench_rows(args))
    header = list(rows[0].keys())
    write_csv(args.output, header, [[r[k] for k in header] for r in rows])
    return EXIT_OK


# ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="quasifit", description="Shape-restricted least squares.")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("fit", help="fit a model to x1..xd,y data")
    p.add_argument("input")
    p.add_argument("-o", "--output", help="model JSON path")
    p.add_argument("--report", help="report JSON path (default stdout)")
    _add_shape(p)
    _add_solver(p)
    p.set_defaults(func=cmd_fit)

    p = sub.add_parser("predict", help="evaluate a saved model at x1..xd points")
    p.add_argument("model")
    p.add_argument("input")
    p.add_argument("-o", "--output")
    p.set_defaults(func=cmd_predict)

    p = sub.add_parser("check", help="certify fitted values for a shape")
    p.add_argument("input", help="CSV x1..xd,z")
    p.add_argument("--column", default="z", help="name of the value column")
    p.add_argument("-o", "--output")
    _add_shape(p)
    p.set_defaults(func=cmd_check)

    p = sub.add_parser("oracle", help="brute-force fit for tiny data")
    p.add_argument("input")
    p.add_argument("--gamma", type=float, default=None)
    p.add_argument("--cap", type=int, default=oracle.DEFAULT_CAP)
    p.add_argument("-o", "--output")
    _add_shape(p)
    p.set_defaults(func=cmd_oracle)

    for name, fn in (("simulate", cmd_simulate), ("bench", cmd_bench)):
        p = sub.add_parser(name, help="synthetic data" if name == "simulate" else
                           "LSE vs isotonic losses over replications")
        if name == "simulate":
            p.add_argument("--n", type=int, default=100)
        else:
            p.add_argument("--n", type=int, nargs="+", default=[20, 40])
            p.add_argument("--reps", type=int, default=10)
            _add_solver(p)
        p.add_argument("--d", type=int, default=2)
        p.add_argument("--xi", type=float, default=1.0)
        p.add_argument("--sigma2", type=float, default=0.1)
        p.add_argument("--misspecified", action="store_true")
        p.add_argument("--seed", type=int, default=0)
        p.add_argument("-o", "--output")
        p.set_defaults(func=fn)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (InputError, QuasifitError, ValueError) as exc:
        print(f"quasifit: error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
