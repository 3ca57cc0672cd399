import csv
import io
import json
import subprocess
import sys

import numpy as np
import pytest

from rkdist.ball import PointSet
from rkdist.cli import main
from rkdist.errors import ParseError, RKDistError, ValidationError
from rkdist.io import ResultRow, load_pointset, load_targets, rows_to_csv, rows_to_json, save_pointset


def write(tmp_path, name, obj):
    p = tmp_path / name
    p.write_text(json.dumps(obj) if not isinstance(obj, str) else obj)
    return str(p)


class TestLoad:
    def test_short_form(self, tmp_path):
        X = load_pointset(write(tmp_path, "x.json", {"d": 1, "points": [[0, 0], [0.5, 0]]}))
        assert (X.n, X.dim) == (2, 1)
        assert X[1][0] == 0.5

    def test_nested_form(self, tmp_path):
        X = load_pointset(write(tmp_path, "x.json", {"d": 2, "points": [[[0, 0], [0.1, 0.2]], [[0.3, 0], [0, 0]]]}))
        assert X[0][1] == 0.1 + 0.2j

    def test_round_trip(self, tmp_path, rng):
        X = PointSet(0.3 * (rng.standard_normal((3, 2)) + 1j * rng.standard_normal((3, 2))))
        save_pointset(X, tmp_path / "x.json")
        np.testing.assert_array_equal(load_pointset(tmp_path / "x.json").points, X.points)

    def test_boundary(self, tmp_path):
        with pytest.raises(ValidationError):
            load_pointset(write(tmp_path, "x.json", {"d": 1, "points": [[0, 0], [1.0, 0]]}))

    def test_duplicates(self, tmp_path):
        with pytest.raises(ValidationError):
            load_pointset(write(tmp_path, "x.json", {"d": 1, "points": [[0.2, 0], [0.2, 0]]}))

    @pytest.mark.parametrize(
        "payload",
        ["{not json", {"points": [[0, 0]]}, {"d": 0, "points": [[0, 0]]}, {"d": 2, "points": [[[0, 0]]]}, {"d": 1, "points": [["a", 0]]}],
    )
    def test_parse_errors(self, tmp_path, payload):
        with pytest.raises(ParseError):
            load_pointset(write(tmp_path, "x.json", payload))

    def test_missing_file(self, tmp_path):
        with pytest.raises(ParseError):
            load_pointset(tmp_path / "nope.json")

    def test_targets(self, tmp_path):
        T = load_targets(write(tmp_path, "t.json", {"m": 1, "targets": [[0, 0], [0.25, 0]]}))
        assert T.shape == (2, 1)


class TestRows:
    def test_csv_layout(self):
        a = ResultRow("b", {"k": 2})
        a.add("v", 0.1, "EXACT")
        b = ResultRow("a", {"k": 1})
        b.add("n", 3, "EXACT")
        text = rows_to_csv([a, b])
        lines = list(csv.reader(io.StringIO(text)))
        assert lines[0] == ["experiment", "param:k", "metric:n", "metric:v", "cert:n", "cert:v"]
        assert lines[1] == ["a", "1", "3", "", "EXACT", ""]
        assert lines[2] == ["b", "2", "", "0.1", "", "EXACT"]

    def test_json(self):
        r = ResultRow("x", {"s": 0.5})
        r.add("m", 1.5, "UPPER_BOUND")
        data = json.loads(rows_to_json([r]))
        assert data == [{"certificates": {"m": "UPPER_BOUND"}, "experiment": "x", "metrics": {"m": 1.5}, "params": {"s": 0.5}}]

    def test_rejects_nonfinite(self):
        with pytest.raises(RKDistError):
            ResultRow("x").add("m", float("nan"), "EXACT")


@pytest.fixture
def sets(tmp_path):
    X = write(tmp_path, "x.json", {"d": 1, "points": [[0, 0], [0.3, 0], [0, 0.5]]})
    Y = write(tmp_path, "y.json", {"d": 1, "points": [[0.1, 0], [0.35, 0], [0, 0.45]]})
    return X, Y


class TestCli:
    def test_dist(self, sets, capsys):
        assert main(["dist", *sets, "--kind", "symmetric"]) == 0
        out = capsys.readouterr().out
        assert "metric:symmetric" in out and "EXACT" in out

    def test_dist_all_json(self, sets, capsys):
        assert main(["dist", *sets, "--format", "json", "--restarts", "8"]) == 0
        data = json.loads(capsys.readouterr().out)
        m = data[0]["metrics"]
        assert m["hausdorff"] <= m["symmetric"]
        assert m["invariant_hausdorff"] <= m["invariant_symmetric"] <= m["symmetric"] + 1e-12
        assert data[0]["certificates"]["invariant_symmetric"] == "UPPER_BOUND"

    def test_rkbm_and_multbm(self, sets, capsys):
        assert main(["rkbm", *sets]) == 0
        assert "metric:delta_rk" in capsys.readouterr().out
        assert main(["multbm", *sets, "--format", "json"]) == 0
        data = json.loads(capsys.readouterr().out)
        assert data[0]["metrics"]["delta_m_lower"] <= data[0]["metrics"]["delta_m_upper"]

    def test_pick(self, tmp_path, capsys):
        nodes = write(tmp_path, "n.json", {"d": 1, "points": [[0, 0], [0.5, 0]]})
        targets = write(tmp_path, "t.json", {"m": 1, "targets": [[0, 0], [0.25, 0]]})
        assert main(["pick", nodes, targets, "--format", "json"]) == 0
        data = json.loads(capsys.readouterr().out)
        assert data[0]["metrics"]["min_multiplier_norm"] == pytest.approx(0.5, abs=1e-10)

    def test_procrustes(self, sets, capsys):
        assert main(["procrustes", *sets]) == 0
        assert "metric:residual" in capsys.readouterr().out

    def test_truncation(self, tmp_path, capsys):
        V = write(tmp_path, "v.json", {"d": 1, "points": [[0, 0]]})
        assert main(["truncation-order", V, "--eps", "0.1", "--r", "0.5", "--format", "json"]) == 0
        assert json.loads(capsys.readouterr().out)[0]["metrics"]["N"] == 1

    def test_output_file(self, sets, tmp_path):
        out = tmp_path / "r.csv"
        assert main(["dist", *sets, "--kind", "hausdorff", "-o", str(out)]) == 0
        assert out.read_text().startswith("experiment,")

    def test_validation_exit_code(self, tmp_path, capsys):
        bad = write(tmp_path, "b.json", {"d": 1, "points": [[1.0, 0]]})
        assert main(["rkbm", bad, bad]) == 2
        assert "error" in capsys.readouterr().err

    def test_cardinality_exit_code(self, sets, tmp_path):
        Z = write(tmp_path, "z.json", {"d": 1, "points": [[0, 0]]})
        assert main(["rkbm", sets[0], Z]) == 2

    def test_numerical_exit_code(self, tmp_path):
        V = write(tmp_path, "v.json", {"d": 1, "points": [[0, 0]]})
        assert main(["truncation-order", V, "--eps", "1e-300", "--r", "0.999999999"]) == 3

    def test_experiment_check(self, capsys):
        assert main(["experiment", "counterexample_s_vs_h", "--check"]) == 0
        assert "PASS" in capsys.readouterr().err

    def test_deterministic_subprocess(self, sets):
        cmd = [sys.executable, "-m", "rkdist", "dist", *sets, "--seed", "3", "--restarts", "8"]
        a = subprocess.run(cmd, capture_output=True, check=True).stdout
        b = subprocess.run(cmd, capture_output=True, check=True).stdout
        assert a == b and a
