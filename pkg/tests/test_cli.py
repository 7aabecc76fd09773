import json

import numpy as np
import pytest
from click.testing import CliRunner

from cli.cli_main import cli
from conftest import LOG2_LOG3, cantor_endpoints
from fractals.geometry import PointSet
from fractals.ifs import cantor_system, discretize_depth
from fractals.measure import DiscreteMeasure
from utils.file_operations import save_json, save_measure_csv, save_points_csv


@pytest.fixture
def runner():
    return CliRunner(mix_stderr=False)


@pytest.fixture
def example_two_file(tmp_path):
    path = tmp_path / "example_two.json"
    save_json(cantor_system(1 / 3, (1 / 3, 2 / 3)).to_dict(), path)
    return str(path)


@pytest.fixture
def two_atom_file(tmp_path):
    path = tmp_path / "two.csv"
    save_measure_csv(DiscreteMeasure([[0.0], [1.0]], [0.5, 0.5]), path)
    return str(path)


@pytest.fixture
def grid_file(tmp_path):
    path = tmp_path / "grid.csv"
    size = 1024
    save_measure_csv(DiscreteMeasure(((np.arange(size) + 0.5) / size).reshape(-1, 1), np.full(size, 1 / size)), path)
    return str(path)


class TestGlSolve:
    def test_example_two(self, runner, example_two_file):
        result = runner.invoke(cli, ["gl-solve", example_two_file, "--r", "2"])
        assert result.exit_code == 0, result.stderr
        report = json.loads(result.stdout)
        assert report["D"] == pytest.approx(0.6183, abs=5e-4)
        assert abs(report["residual"]) <= 1e-12

    def test_csv_output(self, runner, example_two_file):
        result = runner.invoke(cli, ["--format", "csv", "gl-solve", example_two_file])
        assert result.exit_code == 0
        assert result.stdout.splitlines()[0] == "D,residual,x"

    def test_out_file(self, runner, example_two_file, tmp_path):
        out = tmp_path / "gl.json"
        result = runner.invoke(cli, ["--out", str(out), "gl-solve", example_two_file])
        assert result.exit_code == 0
        assert result.stdout == ""
        assert json.loads(out.read_text())["D"] == pytest.approx(0.6183, abs=5e-4)

    def test_missing_file_is_a_parse_error(self, runner, tmp_path):
        result = runner.invoke(cli, ["gl-solve", str(tmp_path / "absent.json")])
        assert result.exit_code == 2
        assert "no such file" in result.stderr

    def test_malformed_json(self, runner, tmp_path):
        path = tmp_path / "bad.json"
        path.write_text("{")
        assert runner.invoke(cli, ["gl-solve", str(path)]).exit_code == 2

    def test_invalid_system(self, runner, tmp_path):
        path = tmp_path / "bad.json"
        path.write_text(json.dumps({
            "dim": 1,
            "maps": [{"ratio": 0.3, "offset": [0.0]}, {"ratio": 0.3, "offset": [0.7]}],
            "probabilities": [0.5, 0.6],
        }))
        result = runner.invoke(cli, ["gl-solve", str(path)])
        assert result.exit_code == 3
        assert result.stderr.startswith("error:")

    def test_non_numeric_ratio_is_invalid_input(self, runner, tmp_path):
        path = tmp_path / "words.json"
        path.write_text(json.dumps({
            "dim": 1,
            "maps": [{"ratio": "abc", "offset": [0.0]}, {"ratio": 0.3, "offset": [0.7]}],
            "probabilities": [0.5, 0.5],
        }))
        result = runner.invoke(cli, ["gl-solve", str(path)])
        assert result.exit_code == 3
        assert result.stderr.startswith("error:")

    def test_usage_error(self, runner):
        assert runner.invoke(cli, ["gl-solve"]).exit_code == 2


class TestQuantize:
    def test_exact(self, runner, two_atom_file):
        result = runner.invoke(cli, ["quantize", two_atom_file, "--n", "1", "--r", "2"])
        assert result.exit_code == 0
        report = json.loads(result.stdout)
        assert report["V"] == pytest.approx(0.25)
        assert report["centers"] == [[0.5]]
        assert report["exact"] is True

    def test_enough_centers(self, runner, two_atom_file):
        result = runner.invoke(cli, ["quantize", two_atom_file, "--n", "5"])
        assert json.loads(result.stdout)["V"] == 0.0

    def test_lloyd_is_reproducible(self, runner, grid_file):
        args = ["--seed", "3", "quantize", grid_file, "--n", "4", "--lloyd", "--restarts", "2"]
        first, second = runner.invoke(cli, args), runner.invoke(cli, args)
        assert first.exit_code == 0
        assert first.stdout == second.stdout

    def test_planar_exact_is_unsupported(self, runner, tmp_path):
        path = tmp_path / "planar.csv"
        save_measure_csv(DiscreteMeasure([[0.0, 0.0], [1.0, 1.0]], [0.5, 0.5]), path)
        assert runner.invoke(cli, ["quantize", str(path), "--n", "1"]).exit_code == 4

    def test_missing_weight_column(self, runner, tmp_path):
        path = tmp_path / "bad.csv"
        path.write_text("x1\n0\n")
        assert runner.invoke(cli, ["quantize", str(path), "--n", "1"]).exit_code == 2


class TestDim:
    def test_lower_set(self, runner, tmp_path):
        path = tmp_path / "cantor.csv"
        save_points_csv(PointSet(cantor_endpoints(10)), path)
        dump = tmp_path / "witnesses.csv"
        result = runner.invoke(cli, [
            "dim", "lower-set", str(path),
            "--r-min", repr(3 ** -9), "--r-max", repr(3 ** -2), "--dump", str(dump),
        ])
        assert result.exit_code == 0, result.stderr
        report = json.loads(result.stdout)
        assert report["value"] == pytest.approx(LOG2_LOG3, abs=0.1)
        assert report["witness"]["exponent"] == report["value"]
        assert dump.read_text().splitlines()[0] == "cx1,r,R,exponent"

    def test_lower_measure_of_atoms(self, runner, two_atom_file):
        result = runner.invoke(cli, ["dim", "lower-measure", two_atom_file, "--r-min", "0.01", "--r-max", "0.5"])
        assert result.exit_code == 0
        assert json.loads(result.stdout)["value"] <= 0.05

    def test_lower_measure_example_two(self, runner, tmp_path):
        path = tmp_path / "example_two.csv"
        save_measure_csv(discretize_depth(cantor_system(1 / 3, (1 / 3, 2 / 3)), 8).measure, path)
        result = runner.invoke(cli, ["dim", "lower-measure", str(path), "--r-min", repr(3 ** -7), "--r-max", repr(3 ** -2), "--levels", "6"])
        assert result.exit_code == 0
        assert json.loads(result.stdout)["value"] == pytest.approx(0.3691, abs=0.1)

    def test_quant(self, runner, grid_file, tmp_path):
        dump = tmp_path / "curve.csv"
        result = runner.invoke(cli, ["dim", "quant", grid_file, "--n-max", "32", "--dump", str(dump)])
        assert result.exit_code == 0
        assert json.loads(result.stdout)["value"] == pytest.approx(1.0, abs=0.1)
        assert len(dump.read_text().splitlines()) == 33

    def test_quant_with_too_few_points(self, runner, grid_file):
        assert runner.invoke(cli, ["dim", "quant", grid_file, "--n-max", "2"]).exit_code == 5

    def test_grid_without_pairs(self, runner, two_atom_file):
        result = runner.invoke(cli, ["dim", "lower-measure", two_atom_file, "--r-min", "0.2", "--r-max", "0.5"])
        assert result.exit_code == 5


class TestApprox:
    def test_set_report(self, runner, tmp_path):
        path = tmp_path / "pts.csv"
        save_points_csv(PointSet([[0.0], [1.0]]), path)
        result = runner.invoke(cli, ["approx", "set", str(path), "--epsilon", "0.1", "--gamma", "0.5"])
        assert result.exit_code == 0, result.stderr
        report = json.loads(result.stdout)
        assert report["hausdorff_check"] < 0.1
        assert report["certified_lower_dim"] == pytest.approx(0.5, abs=1e-12)
        assert "cross_check" in report

    def test_set_needs_gamma(self, runner, tmp_path):
        path = tmp_path / "pts.csv"
        save_points_csv(PointSet([[0.0]]), path)
        assert runner.invoke(cli, ["approx", "set", str(path), "--epsilon", "0.1"]).exit_code == 2

    def test_split_files(self, runner, tmp_path):
        path = tmp_path / "pts.csv"
        save_points_csv(PointSet([[0.0], [5.0]]), path)
        base = tmp_path / "split"
        result = runner.invoke(cli, [
            "--out", str(base), "--depth", "6",
            "approx", "set", str(path), "--epsilon", "0.5", "--kind", "split",
        ])
        assert result.exit_code == 0, result.stderr
        for suffix in ("_symbolic.json", "_realized.csv", "_report.json"):
            assert (tmp_path / f"split{suffix}").exists()
        report = json.loads((tmp_path / "split_report.json").read_text())
        assert report["certified_hausdorff_dim"] == 1.0

    def test_measure_lower_files(self, runner, two_atom_file, tmp_path):
        base = tmp_path / "run"
        result = runner.invoke(cli, [
            "--out", str(base), "--depth", "6",
            "approx", "measure-lower", two_atom_file, "--epsilon", "0.1", "--beta", "0.5", "--no-verify",
        ])
        assert result.exit_code == 0, result.stderr
        symbolic = json.loads((tmp_path / "run_symbolic.json").read_text())
        assert symbolic["op"] == "convolve"
        report = json.loads((tmp_path / "run_report.json").read_text())
        assert report["certified"]["lower_dim"] == pytest.approx(0.5, abs=1e-12)
        assert report["certified"]["certificate"]["lower_dim"] == ["example-2-lower", "1179", "convothm"]
        assert report["kantorovich_check"] < 0.1
        assert (tmp_path / "run_realized.csv").read_text().splitlines()[0] == "x1,w"

    def test_measure_quant_report(self, runner, two_atom_file):
        result = runner.invoke(cli, [
            "--depth", "6", "approx", "measure-quant", two_atom_file, "--epsilon", "0.1", "--alpha", repr(LOG2_LOG3),
        ])
        assert result.exit_code == 0, result.stderr
        report = json.loads(result.stdout)
        assert report["certified"]["quant_dim"] == pytest.approx(LOG2_LOG3, abs=1e-10)
        assert report["certified"]["certificate"]["quant_dim"] == ["example-2-graf-luschgy", "1179", "lipdim1"]
        assert "quant_estimate" in report["cross_check"]

    def test_budget_failure(self, runner, two_atom_file):
        result = runner.invoke(cli, [
            "--depth", "21", "approx", "measure-lower", two_atom_file, "--epsilon", "0.1", "--beta", "0.5",
        ])
        assert result.exit_code == 6
        assert "budget" in result.stderr

    def test_target_out_of_range(self, runner, two_atom_file):
        result = runner.invoke(cli, ["approx", "measure-lower", two_atom_file, "--epsilon", "0.1", "--beta", "2"])
        assert result.exit_code == 3


class TestVerify:
    def test_product_suite(self, runner):
        result = runner.invoke(cli, ["--trials", "5", "verify", "product"])
        assert result.exit_code == 0, result.stdout
        report = json.loads(result.stdout)
        assert report["passed"] is True
        assert set(report["suites"]) == {"product"}

    @pytest.mark.slow
    def test_all_suites(self, runner):
        result = runner.invoke(cli, ["--trials", "10", "--seed", "1", "verify"])
        assert result.exit_code == 0, result.stdout
        assert json.loads(result.stdout)["passed"] is True

    def test_unknown_suite(self, runner):
        assert runner.invoke(cli, ["verify", "associativity"]).exit_code == 2
