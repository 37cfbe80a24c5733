"""Command-line front end: single runs, the 2x2 experiment matrix, snapshots.

Output conventions: CSVs are comma-delimited with a header row, LF line
endings, and a ``.`` decimal point regardless of locale.  Values are
formatted with 17 significant digits (exact float round-trip); timing
columns use 6 decimal places.  JSON reports keep native floats (Python
``repr``, also exact round-trip).
"""

from __future__ import annotations

import argparse
import csv
import json
import sys
from dataclasses import dataclass
from pathlib import Path
from typing import List, Optional

import numpy as np

from .acquisition import AcquisitionConfig, AcquisitionKind
from .driver import BoConfig, RunReport, first_iteration_snapshot, run_bo
from .gp import KernelParams
from .objectives import grid_argmax, multimodal
from .optimizers import Bounds, Method

ORACLE_GRID_POINTS = 10**6

# matrix layout mirrors the timing table: optimizer rows, acquisition columns
MATRIX_ROWS = (Method.LBFGS, Method.TNC)
MATRIX_COLS = (AcquisitionKind.MPI, AcquisitionKind.EI)


def fmt_value(x: float) -> str:
    """17 significant digits: parses back to the identical double."""
    return format(float(x), ".17g")


def fmt_seconds(x: float) -> str:
    return format(float(x), ".6f")


def _fmt_point(x: np.ndarray) -> str:
    x = np.atleast_1d(x)
    return fmt_value(x[0]) if x.size == 1 else ";".join(fmt_value(v) for v in x)


@dataclass
class MatrixCell:
    acquisition: AcquisitionKind
    method: Method
    mean_proposal_seconds: float
    final_best: float
    iterations_to_tolerance: Optional[int]


@dataclass
class MatrixSummary:
    """One row per (acquisition, method) pair of the default 2x2 matrix."""

    rows: List[MatrixCell]
    tolerance: float
    oracle_best: float


def _parse_bounds(text: str) -> Bounds:
    try:
        lo, hi = (float(part) for part in text.split(","))
        return Bounds(np.array([lo]), np.array([hi]))
    except (ValueError, TypeError) as err:
        raise argparse.ArgumentTypeError(
            f"bounds must be 'LO,HI' with LO < HI, got {text!r}"
        ) from err


def _add_common_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--iterations", type=int, default=10, help="BO iterations (default 10)")
    p.add_argument("--seed", type=int, default=42, help="master seed (default 42)")
    p.add_argument("--noise-std", type=float, default=0.2,
                   help="observation noise std (default 0.2)")
    p.add_argument("--bounds", type=_parse_bounds, default="-2,2", metavar="LO,HI",
                   help="search interval (default -2,2)")
    p.add_argument("--xi", type=float, default=0.01, help="improvement margin (default 0.01)")
    p.add_argument("--restarts", type=int, default=25,
                   help="inner-optimizer restarts (default 25)")
    p.add_argument("--theta0", type=float, default=1.0, help="kernel signal variance")
    p.add_argument("--lengthscale", type=float, default=1.0, help="kernel lengthscale")
    p.add_argument("--out", type=Path, default=Path("results"), help="output directory")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="bobench",
        description="Gaussian-process Bayesian optimization benchmark harness",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="one full BO run")
    p_run.add_argument("--acquisition", choices=[k.value for k in AcquisitionKind],
                       default="ei")
    p_run.add_argument("--optimizer", choices=[m.value for m in Method], default="lbfgs")
    _add_common_flags(p_run)
    p_run.set_defaults(func=cmd_run)

    p_matrix = sub.add_parser("matrix", help="all four acquisition/optimizer pairs")
    _add_common_flags(p_matrix)
    p_matrix.set_defaults(func=cmd_matrix)

    p_snap = sub.add_parser("snapshot", help="first-iteration surrogate/acquisition grid")
    p_snap.add_argument("--acquisition", choices=[k.value for k in AcquisitionKind],
                        default="ei")
    _add_common_flags(p_snap)
    p_snap.set_defaults(func=cmd_snapshot)
    return parser


def _config_from_args(args, acquisition: str, optimizer: str) -> BoConfig:
    if isinstance(args.bounds, Bounds):
        bounds = args.bounds
    else:
        bounds = _parse_bounds(args.bounds)
    return BoConfig(
        acquisition=AcquisitionConfig(kind=AcquisitionKind(acquisition), xi=args.xi),
        method=Method(optimizer),
        bounds=bounds,
        iterations=args.iterations,
        noise_std=args.noise_std,
        kernel=KernelParams(theta0=args.theta0, lengthscales=np.array([args.lengthscale])),
        n_restarts=args.restarts,
        seed=args.seed,
    )


def _tag(config: BoConfig) -> str:
    return f"{config.acquisition.kind.value}_{config.method.value}_{config.seed}"


def _write_csv(path: Path, header: List[str], rows: List[List[str]]) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        writer.writerows(rows)


def write_convergence_csv(path: Path, report: RunReport) -> None:
    rows = [
        [
            str(t.iteration),
            _fmt_point(t.x_proposed),
            fmt_value(t.best_so_far),
            "" if t.distance_from_previous is None else fmt_value(t.distance_from_previous),
        ]
        for t in report.trials
    ]
    _write_csv(path, ["iteration", "x_proposed", "best_so_far", "distance_from_previous"], rows)


def write_timing_csv(path: Path, report: RunReport) -> None:
    rows = [[str(t.iteration), fmt_seconds(t.proposal_seconds)] for t in report.trials]
    _write_csv(path, ["iteration", "proposal_seconds"], rows)


def report_to_dict(report: RunReport) -> dict:
    config = report.config
    return {
        "schema": "bobench-run-report/1",
        "config": {
            "acquisition": config.acquisition.kind.value,
            "xi": config.acquisition.xi,
            "optimizer": config.method.value,
            "iterations": config.iterations,
            "initial_points": config.initial_points.tolist(),
            "bounds": {
                "lower": config.bounds.lower.tolist(),
                "upper": config.bounds.upper.tolist(),
            },
            "noise_std": config.noise_std,
            "kernel": {
                "theta0": config.kernel.theta0,
                "lengthscales": config.kernel.lengthscales.tolist(),
            },
            "optimizer_settings": {
                "memory": config.optimizer.memory,
                "max_iterations": config.optimizer.max_iterations,
                "gradient_tolerance": config.optimizer.gradient_tolerance,
                "cg_max_iterations": config.optimizer.cg_max_iterations,
                "cg_residual_tolerance": config.optimizer.cg_residual_tolerance,
                "line_search_c1": config.optimizer.line_search_c1,
                "line_search_c2": config.optimizer.line_search_c2,
            },
            "n_restarts": config.n_restarts,
            "seed": config.seed,
        },
        "initial": {
            "x": report.initial_points.tolist(),
            "y": report.initial_values.tolist(),
        },
        "trials": [
            {
                "iteration": t.iteration,
                "x_proposed": t.x_proposed.tolist(),
                "y_observed": t.y_observed,
                "best_so_far": t.best_so_far,
                "proposal_seconds": t.proposal_seconds,
                "distance_from_previous": t.distance_from_previous,
            }
            for t in report.trials
        ],
        "final_best": {"x": report.final_best_x.tolist(), "y": report.final_best_y},
        "mean_proposal_seconds": report.mean_proposal_seconds,
        "gp_snapshots": {
            "grid": [] if report.snapshot_grid is None else report.snapshot_grid.tolist(),
            "mean": [m.tolist() for m in report.snapshot_means],
            "sigma": [s.tolist() for s in report.snapshot_sigmas],
        },
    }


def write_report_json(path: Path, report: RunReport) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(report_to_dict(report), fh, indent=2)
        fh.write("\n")


def _write_run_artifacts(out: Path, report: RunReport) -> List[Path]:
    tag = _tag(report.config)
    paths = [
        out / f"{tag}_report.json",
        out / f"{tag}_convergence.csv",
        out / f"{tag}_timing.csv",
    ]
    write_report_json(paths[0], report)
    write_convergence_csv(paths[1], report)
    write_timing_csv(paths[2], report)
    return paths


def cmd_run(args) -> int:
    out = args.out
    out.mkdir(parents=True, exist_ok=True)
    config = _config_from_args(args, args.acquisition, args.optimizer)
    report = run_bo(config)
    for path in _write_run_artifacts(out, report):
        print(path)
    print(
        f"final best: x={_fmt_point(report.final_best_x)} "
        f"y={fmt_value(report.final_best_y)}"
    )
    return 0


def run_matrix(args) -> MatrixSummary:
    """Run the four cells with one shared seed and write all artifacts."""
    out = args.out
    out.mkdir(parents=True, exist_ok=True)
    bounds = args.bounds if isinstance(args.bounds, Bounds) else _parse_bounds(args.bounds)
    _, oracle_f = grid_argmax(
        multimodal, float(bounds.lower[0]), float(bounds.upper[0]), ORACLE_GRID_POINTS
    )
    tolerance = 0.1 + 2.0 * args.noise_std

    cells: List[MatrixCell] = []
    timing: dict = {}
    for method in MATRIX_ROWS:
        for kind in MATRIX_COLS:
            config = _config_from_args(args, kind.value, method.value)
            report = run_bo(config)
            _write_run_artifacts(out, report)
            reached = None
            for t in report.trials:
                if t.best_so_far >= oracle_f - tolerance:
                    reached = t.iteration
                    break
            cells.append(
                MatrixCell(
                    acquisition=kind,
                    method=method,
                    mean_proposal_seconds=report.mean_proposal_seconds,
                    final_best=report.final_best_y,
                    iterations_to_tolerance=reached,
                )
            )
            timing[(method, kind)] = report.mean_proposal_seconds

    rows = [
        [method.value] + [fmt_seconds(timing[(method, kind)]) for kind in MATRIX_COLS]
        for method in MATRIX_ROWS
    ]
    _write_csv(
        out / "matrix_summary.csv",
        ["optimizer"] + [k.value for k in MATRIX_COLS],
        rows,
    )
    return MatrixSummary(rows=cells, tolerance=tolerance, oracle_best=oracle_f)


def cmd_matrix(args) -> int:
    summary = run_matrix(args)
    print(args.out / "matrix_summary.csv")
    for cell in summary.rows:
        reached = (
            "not reached" if cell.iterations_to_tolerance is None
            else f"iteration {cell.iterations_to_tolerance}"
        )
        print(
            f"{cell.method.value:>5s} x {cell.acquisition.value}: "
            f"mean proposal {fmt_seconds(cell.mean_proposal_seconds)} s, "
            f"final best {cell.final_best:.6f} "
            f"(within {summary.tolerance:.2f} of oracle at {reached})"
        )
    return 0


def cmd_snapshot(args) -> int:
    out = args.out
    out.mkdir(parents=True, exist_ok=True)
    config = _config_from_args(args, args.acquisition, Method.LBFGS.value)
    snapshot = first_iteration_snapshot(config)

    tag = _tag(config)
    rows = [
        [fmt_value(x), fmt_value(m), fmt_value(s), fmt_value(a)]
        for x, m, s, a in zip(
            snapshot.grid, snapshot.gp_mean, snapshot.gp_sigma, snapshot.acquisition_values
        )
    ]
    csv_path = out / f"{tag}_snapshot.csv"
    _write_csv(csv_path, ["x", "gp_mean", "gp_sigma", "acquisition_value"], rows)

    proposal_path = out / f"{tag}_snapshot.json"
    with open(proposal_path, "w", encoding="utf-8") as fh:
        json.dump(
            {
                "acquisition": config.acquisition.kind.value,
                "xi": config.acquisition.xi,
                "x_proposed": snapshot.x_proposed.tolist(),
                "initial_points": snapshot.initial_points.tolist(),
                "initial_values": snapshot.initial_values.tolist(),
            },
            fh,
            indent=2,
        )
        fh.write("\n")
    print(csv_path)
    print(proposal_path)
    print(f"x_proposed={_fmt_point(snapshot.x_proposed)}")
    return 0


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except Exception as err:  # runtime failure -> exit 1 with diagnostic
        print(f"bobench: error: {err}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
