"""Command-line front end: `bak-solve bench` and `bak-solve select`."""

from __future__ import annotations

import argparse
import sys
import time

from .bakp import DivergenceError
from .bench import (RunSpec, SuiteFormatError, bundled_suite_path, emit_report,
                    run_case, run_suite)
from .core import SystemSpec
from .matio import MatrixFormatError, load_matrix, load_vector
from .select import FeatureSelectConfig, select_features, stepwise_baseline

_PRECISIONS = {"f32": "single", "f64": "double"}


def _record_line(r):
    if r.failed:
        return f"{r.case_id}: {r.solver} {r.obs}x{r.vars} FAILED: {r.error}"
    line = (f"{r.case_id}: {r.solver} {r.obs}x{r.vars} precision={r.precision} "
            f"wall={r.wall_time_s:.4g}s sweeps={r.sweeps} "
            f"mape={r.mape:.3e} rel_residual={r.rel_residual:.3e}")
    if r.mape_fallback:
        line += " (mape fell back to mean absolute error)"
    return line


def _cmd_bench(args):
    if args.suite is not None:
        suite = args.suite
        if suite == "table1_desk":
            suite = bundled_suite_path()
        if args.dump_coeffs:
            raise SystemExit("--dump-coeffs applies to single cases, not suites")
        records = run_suite(suite, on_record=lambda r: print(_record_line(r), flush=True))
    else:
        if args.obs is None or args.vars is None:
            raise SystemExit("either --suite or both --obs and --vars are required")
        spec = RunSpec(
            case_id=f"{args.solver}-{args.obs}x{args.vars}-s{args.seed}",
            solver=args.solver,
            system=SystemSpec(obs=args.obs, vars=args.vars, seed=args.seed,
                              distribution=args.distribution,
                              coeff_distribution=args.distribution,
                              noise_sigma=args.noise_sigma),
            precision=_PRECISIONS[args.precision],
            thr=args.thr,
            workers=args.workers,
            tol=args.tol,
            max_iter=args.max_iter,
            repetitions=args.reps,
            mape_base=args.mape_base,
        )
        records = [run_case(spec, dump_coeffs=args.dump_coeffs)]
        print(_record_line(records[0]))
    if args.out:
        emit_report(records, args.out)
        print(f"report written to {args.out}")
    return 1 if any(r.failed for r in records) else 0


def _cmd_select(args):
    x = load_matrix(args.input)
    y = load_vector(args.target)
    t0 = time.perf_counter()
    if args.method == "bakf":
        cfg = FeatureSelectConfig(max_feat=args.max_feat, refit=args.refit,
                                  stop_tol=args.stop_tol)
        report = select_features(x, y, cfg)
    else:
        report = stepwise_baseline(x, y, args.max_feat)
    wall = time.perf_counter() - t0
    print(f"{args.method}: selected {report.selected} in {wall:.4g}s")
    for step, (j, rn) in enumerate(zip(report.selected, report.residual_norms), start=1):
        print(f"  step {step}: column {j}, residual_sq={rn:.6e}")
    if args.out:
        import csv
        with open(args.out, "w", encoding="utf-8", newline="") as f:
            w = csv.writer(f)
            w.writerow(["step", "column", "residual_sq", "coeff"])
            for step, (j, rn, c) in enumerate(
                    zip(report.selected, report.residual_norms, report.final_coeffs),
                    start=1):
                w.writerow([step, j, f"{rn:.9g}", f"{float(c):.9g}"])
        print(f"report written to {args.out}")
    return 0


def build_parser():
    p = argparse.ArgumentParser(
        prog="bak-solve",
        description="Benchmark per-column least-squares solvers and run feature selection.")
    sub = p.add_subparsers(dest="command", required=True)

    b = sub.add_parser("bench", help="run solver benchmark cases")
    b.add_argument("--suite", help="suite CSV path, or the bundled name 'table1_desk'")
    b.add_argument("--obs", type=int, help="rows of the generated system")
    b.add_argument("--vars", type=int, help="columns of the generated system")
    b.add_argument("--seed", type=int, default=0)
    b.add_argument("--solver", choices=("bak", "bakp", "qr"), default="bak")
    b.add_argument("--thr", type=int, default=50, help="block width for bakp")
    b.add_argument("--workers", type=int, default=0, help="bakp worker threads, 0 = auto")
    b.add_argument("--tol", type=float, default=1e-6)
    b.add_argument("--max-iter", type=int, default=1000)
    b.add_argument("--precision", choices=sorted(_PRECISIONS), default="f32")
    b.add_argument("--reps", type=int, default=10, help="repetitions; min wall time is kept")
    b.add_argument("--noise-sigma", type=float, default=0.0)
    b.add_argument("--distribution", choices=("uniform", "normal"), default="uniform")
    b.add_argument("--mape-base", choices=("targets", "coeffs"), default="targets",
                   help="MAPE against predicted targets or against true coefficients")
    b.add_argument("--out", help="write a report CSV here")
    b.add_argument("--dump-coeffs", help="write solved coefficients as a binary matrix")
    b.set_defaults(func=_cmd_bench)

    s = sub.add_parser("select", help="greedy feature selection on matrix files")
    s.add_argument("--input", required=True, help="matrix file (CSV or binary)")
    s.add_argument("--target", required=True, help="target vector file")
    s.add_argument("--method", choices=("bakf", "stepwise"), default="bakf")
    s.add_argument("--max-feat", type=int, required=True)
    s.add_argument("--refit", choices=("qr", "bak"), default="qr")
    s.add_argument("--stop-tol", type=float, default=0.0)
    s.add_argument("--out", help="write a per-step CSV here")
    s.set_defaults(func=_cmd_select)
    return p


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (SuiteFormatError, MatrixFormatError, DivergenceError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
