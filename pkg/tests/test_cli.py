"""Command-line interface: artifacts, formats, exit codes."""

import csv
import io
import json
import subprocess
import sys

import jsonschema
import numpy as np
import pytest

from bobench.cli import fmt_seconds, fmt_value, main

TIMING_COLUMNS = {"proposal_seconds", "mpi", "ei"}
TEXT_COLUMNS = {"optimizer"}
INT_COLUMNS = {"iteration"}


def _fast(*extra):
    return ["--iterations", "3", "--restarts", "6", *extra]


def _read_csv(path):
    with open(path, newline="", encoding="utf-8") as fh:
        rows = list(csv.reader(fh))
    return rows[0], rows[1:]


def _reserialize(path) -> bytes:
    """Parse a CSV and re-emit it with the canonical per-column formatting."""
    header, rows = _read_csv(path)
    out = io.StringIO()
    writer = csv.writer(out, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        rebuilt = []
        for name, cell in zip(header, row):
            if cell == "" or name in TEXT_COLUMNS:
                rebuilt.append(cell)
            elif name in INT_COLUMNS:
                rebuilt.append(str(int(cell)))
            elif name in TIMING_COLUMNS:
                rebuilt.append(fmt_seconds(float(cell)))
            else:
                rebuilt.append(fmt_value(float(cell)))
        writer.writerow(rebuilt)
    return out.getvalue().encode()


class TestRunCommand:
    def test_happy_path_writes_three_files(self, tmp_path):
        code = main(["run", "--acquisition", "ei", "--optimizer", "lbfgs",
                     "--seed", "42", *_fast("--out", str(tmp_path))])
        assert code == 0
        for suffix in ("report.json", "convergence.csv", "timing.csv"):
            assert (tmp_path / f"ei_lbfgs_42_{suffix}").exists()

    def test_single_iteration_has_single_row(self, tmp_path):
        code = main(["run", "--iterations", "1", "--noise-std", "0",
                     "--restarts", "4", "--out", str(tmp_path)])
        assert code == 0
        _, rows = _read_csv(tmp_path / "ei_lbfgs_42_convergence.csv")
        assert len(rows) == 1

    def test_invalid_acquisition_is_usage_error(self, tmp_path, capsys):
        with pytest.raises(SystemExit) as exc:
            main(["run", "--acquisition", "bogus", "--out", str(tmp_path)])
        assert exc.value.code == 2
        assert "bogus" in capsys.readouterr().err

    def test_missing_command_is_usage_error(self):
        with pytest.raises(SystemExit) as exc:
            main([])
        assert exc.value.code == 2

    def test_runtime_failure_exits_one(self, tmp_path, capsys):
        blocker = tmp_path / "occupied"
        blocker.write_text("not a directory")
        code = main(["run", *_fast("--out", str(blocker))])
        assert code == 1
        assert "error" in capsys.readouterr().err

    def test_convergence_csv_round_trips(self, tmp_path):
        main(["run", *_fast("--out", str(tmp_path))])
        path = tmp_path / "ei_lbfgs_42_convergence.csv"
        assert _reserialize(path) == path.read_bytes()

    def test_timing_csv_round_trips(self, tmp_path):
        main(["run", *_fast("--out", str(tmp_path))])
        path = tmp_path / "ei_lbfgs_42_timing.csv"
        assert _reserialize(path) == path.read_bytes()

    def test_report_validates_against_schema(self, tmp_path, repo_root):
        main(["run", *_fast("--out", str(tmp_path))])
        report = json.loads((tmp_path / "ei_lbfgs_42_report.json").read_text())
        schema = json.loads((repo_root / "docs" / "run_report_schema.json").read_text())
        jsonschema.validate(report, schema)

    def test_custom_bounds_flag(self, tmp_path):
        # the = form keeps argparse from reading the leading '-' as a flag
        code = main(["run", "--bounds=-1,1", "--iterations", "2",
                     "--restarts", "4", "--out", str(tmp_path)])
        assert code == 0
        report = json.loads((tmp_path / "ei_lbfgs_42_report.json").read_text())
        assert report["config"]["bounds"] == {"lower": [-1.0], "upper": [1.0]}
        xs = [t["x_proposed"][0] for t in report["trials"]]
        assert all(-1.0 <= x <= 1.0 for x in xs)

    def test_bad_bounds_is_usage_error(self, tmp_path, capsys):
        with pytest.raises(SystemExit) as exc:
            main(["run", "--bounds", "nope", "--out", str(tmp_path)])
        assert exc.value.code == 2


@pytest.fixture(scope="module")
def matrix_dirs(tmp_path_factory):
    """Two identical matrix invocations, kept small for speed."""
    dirs = []
    for name in ("m1", "m2"):
        out = tmp_path_factory.mktemp(name)
        assert main(["matrix", *_fast("--out", str(out))]) == 0
        dirs.append(out)
    return dirs


class TestMatrixCommand:
    def test_artifact_inventory(self, matrix_dirs):
        out = matrix_dirs[0]
        names = sorted(p.name for p in out.iterdir())
        expected = sorted(
            [f"{a}_{m}_42_{s}" for a in ("ei", "mpi") for m in ("lbfgs", "tnc")
             for s in ("report.json", "convergence.csv", "timing.csv")]
            + ["matrix_summary.csv"]
        )
        assert names == expected

    def test_summary_is_2x2_table(self, matrix_dirs):
        header, rows = _read_csv(matrix_dirs[0] / "matrix_summary.csv")
        assert header == ["optimizer", "mpi", "ei"]
        assert [r[0] for r in rows] == ["lbfgs", "tnc"]
        for row in rows:
            for cell in row[1:]:
                assert float(cell) > 0

    def test_summary_cells_match_timing_means(self, matrix_dirs):
        out = matrix_dirs[0]
        header, rows = _read_csv(out / "matrix_summary.csv")
        for row in rows:
            method = row[0]
            for kind, cell in zip(header[1:], row[1:]):
                _, timing_rows = _read_csv(out / f"{kind}_{method}_42_timing.csv")
                mean = np.mean([float(r[1]) for r in timing_rows])
                # cell and column entries are each rounded to 6 decimals,
                # so the identity holds to two rounding layers
                assert abs(float(cell) - mean) <= 1e-6

    def test_matrix_runs_identical_apart_from_timing(self, matrix_dirs):
        m1, m2 = matrix_dirs
        for a in ("ei", "mpi"):
            for m in ("lbfgs", "tnc"):
                tag = f"{a}_{m}_42"
                assert (m1 / f"{tag}_convergence.csv").read_bytes() == (
                    m2 / f"{tag}_convergence.csv"
                ).read_bytes()
                r1 = json.loads((m1 / f"{tag}_report.json").read_text())
                r2 = json.loads((m2 / f"{tag}_report.json").read_text())
                _strip_timing(r1)
                _strip_timing(r2)
                assert r1 == r2

    def test_summary_round_trips(self, matrix_dirs):
        path = matrix_dirs[0] / "matrix_summary.csv"
        assert _reserialize(path) == path.read_bytes()


def _strip_timing(report: dict) -> None:
    report.pop("mean_proposal_seconds", None)
    for t in report.get("trials", []):
        t.pop("proposal_seconds", None)


class TestSnapshotCommand:
    def test_grid_csv_has_500_rows(self, tmp_path):
        code = main(["snapshot", "--acquisition", "mpi", "--out", str(tmp_path)])
        assert code == 0
        header, rows = _read_csv(tmp_path / "mpi_lbfgs_42_snapshot.csv")
        assert header == ["x", "gp_mean", "gp_sigma", "acquisition_value"]
        assert len(rows) == 500

    def test_ei_snapshot_values_non_negative(self, tmp_path):
        main(["snapshot", "--acquisition", "ei", "--out", str(tmp_path)])
        _, rows = _read_csv(tmp_path / "ei_lbfgs_42_snapshot.csv")
        assert all(float(r[3]) >= 0 for r in rows)

    def test_mpi_snapshot_values_in_unit_interval(self, tmp_path):
        main(["snapshot", "--acquisition", "mpi", "--out", str(tmp_path)])
        _, rows = _read_csv(tmp_path / "mpi_lbfgs_42_snapshot.csv")
        assert all(0.0 <= float(r[3]) <= 1.0 for r in rows)

    def test_proposal_sidecar_written(self, tmp_path):
        main(["snapshot", "--acquisition", "mpi", "--noise-std", "0",
              "--out", str(tmp_path)])
        side = json.loads((tmp_path / "mpi_lbfgs_42_snapshot.json").read_text())
        assert side["acquisition"] == "mpi"
        assert len(side["x_proposed"]) == 1
        assert -2.0 <= side["x_proposed"][0] <= 2.0

    def test_snapshot_csv_round_trips(self, tmp_path):
        main(["snapshot", "--out", str(tmp_path)])
        path = tmp_path / "ei_lbfgs_42_snapshot.csv"
        assert _reserialize(path) == path.read_bytes()


class TestEntryPoint:
    def test_module_invocation(self, tmp_path):
        proc = subprocess.run(
            [sys.executable, "-m", "bobench", "run", "--iterations", "1",
             "--restarts", "4", "--out", str(tmp_path)],
            capture_output=True,
            text=True,
        )
        assert proc.returncode == 0
        assert "ei_lbfgs_42_report.json" in proc.stdout

    def test_cross_process_reproducibility(self, tmp_path):
        """A subprocess run and an in-process run with equal seeds produce
        byte-identical convergence CSVs."""
        sub_out = tmp_path / "sub"
        in_out = tmp_path / "inproc"
        flags = _fast()
        proc = subprocess.run(
            [sys.executable, "-m", "bobench", "run", *flags, "--out", str(sub_out)],
            capture_output=True,
        )
        assert proc.returncode == 0
        assert main(["run", *flags, "--out", str(in_out)]) == 0
        name = "ei_lbfgs_42_convergence.csv"
        assert (sub_out / name).read_bytes() == (in_out / name).read_bytes()
