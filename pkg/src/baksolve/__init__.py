"""Least-squares solvers built on per-column residual updates.

The sequential solver sweeps the columns one at a time; the blocked variant
trades a little per-sweep progress for batched updates; the greedy selector
reuses the single-column update to rank candidate features.  A Householder QR
baseline, matrix file I/O, and a benchmark harness round out the package.
"""

from .bak import (DRIFT_TOL, SolveConfig, SolveReport, coordinate_update,
                  residual_norm, solve_bak)
from .bakp import (DIVERGENCE_FACTOR, BlockConfig, DivergenceError,
                   block_deltas, solve_bakp)
from .bench import (MAPE_FLOOR, BenchmarkRecord, MapeResult, RunSpec,
                    SuiteFormatError, bundled_suite_path, emit_report, mape,
                    parse_suite, run_case, run_suite)
from .core import (GeneratedSystem, SystemSpec, as_matrix, as_vector,
                   axpy_sub, column_norms_sq, column_view, dot,
                   generate_system, matvec, precision_dtype, rng_for)
from .matio import MatrixFormatError, load_matrix, load_vector, save_matrix
from .qr import (QRFactors, QRSolution, default_rank_tol, normal_equations_solve,
                 qr_factor, qr_least_squares)
from .select import (FeatureSelectConfig, FeatureSelectionReport,
                     SelectionExhaustedError, score_all_columns,
                     select_features, stepwise_baseline)

__version__ = "0.1.0"

__all__ = [
    "BenchmarkRecord", "BlockConfig", "DIVERGENCE_FACTOR", "DRIFT_TOL",
    "DivergenceError", "FeatureSelectConfig", "FeatureSelectionReport",
    "GeneratedSystem", "MAPE_FLOOR", "MapeResult", "MatrixFormatError",
    "QRFactors", "QRSolution", "RunSpec", "SelectionExhaustedError",
    "SolveConfig", "SolveReport", "SuiteFormatError", "SystemSpec",
    "as_matrix", "as_vector", "axpy_sub", "block_deltas", "bundled_suite_path",
    "column_norms_sq", "column_view", "coordinate_update", "default_rank_tol",
    "dot", "emit_report", "generate_system", "load_matrix", "load_vector",
    "mape", "matvec", "normal_equations_solve", "parse_suite",
    "precision_dtype", "qr_factor", "qr_least_squares", "residual_norm",
    "rng_for", "run_case", "run_suite", "save_matrix", "score_all_columns",
    "select_features", "solve_bak", "solve_bakp", "stepwise_baseline",
]
