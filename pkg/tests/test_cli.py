import json

import numpy as np
import pytest

from linexplore.cli import main
from linexplore.harness import NORM_HEADER, RUN_HEADER


@pytest.fixture
def canon_csv(tmp_path):
    path = tmp_path / "arms.csv"
    path.write_text("1.0,0.0\n0.0,1.0\n")
    return str(path)


class TestWidthCommand:
    def test_ball_width(self, capsys):
        code = main(["width", "--set", "ball:4", "--draws", "20000", "--seed", "3"])
        assert code == 0
        payload = json.loads(capsys.readouterr().out)
        assert payload["mean"] == pytest.approx(3.76, rel=0.05)

    def test_multitask_uses_uniform_design(self, capsys):
        code = main(["width", "--set", "multitask:2,2", "--draws", "5000"])
        assert code == 0
        assert json.loads(capsys.readouterr().out)["mean"] > 0


class TestDesignCommand:
    def test_writes_design_json(self, tmp_path, canon_csv):
        out = tmp_path / "design.json"
        code = main(["design", "--set", f"finite:{canon_csv}", "--kind", "mix",
                     "--T", "400", "--out", str(out)])
        assert code == 0
        payload = json.loads(out.read_text())
        assert sum(payload["counts"]) == 400
        assert payload["quality"]["ratio"] < 2.0

    def test_not_spanning_is_numerical_failure(self, tmp_path):
        arms = tmp_path / "flat.csv"
        arms.write_text("1.0,0.0\n2.0,0.0\n")
        code = main(["design", "--set", f"finite:{arms}", "--kind", "g", "--T", "400"])
        assert code == 3


class TestBaiCommand:
    def test_end_to_end(self, tmp_path, canon_csv, capsys):
        out = tmp_path / "run.csv"
        code = main(["bai", "--set", f"finite:{canon_csv}", "--algo", "fixed",
                     "--theta", "gen:spike:0.5:0", "--eps", "0.3", "--trials", "5",
                     "--budget-override", "500", "--seed", "7", "--out", str(out)])
        assert code == 0
        lines = out.read_text().splitlines()
        assert lines[0] == RUN_HEADER
        assert len(lines) == 6
        summary = json.loads(capsys.readouterr().out)
        assert summary["trials"] == 5

    def test_bad_set_spec_exits_two(self, capsys):
        code = main(["bai", "--set", "nope:4", "--eps", "0.3"])
        assert code == 2

    def test_config_file(self, tmp_path, canon_csv, capsys):
        config = {"experiment": "bai", "set_spec": f"finite:{canon_csv}",
                  "algo": "fixed", "theta": "gen:zeros", "eps": 0.5, "delta": 0.1,
                  "trials": 2, "master_seed": 1,
                  "budget": {"budget_override": 400, "enforce_min_budget": False}}
        path = tmp_path / "config.json"
        path.write_text(json.dumps(config))
        code = main(["bai", "--set", "ignored:x", "--eps", "0.9",
                     "--config", str(path)])
        assert code == 0
        assert json.loads(capsys.readouterr().out)["trials"] == 2


class TestNormCommand:
    def test_fixed_r(self, tmp_path, capsys):
        out = tmp_path / "norm.csv"
        code = main(["norm", "--d", "4", "--r", "1.0", "--eps", "0.25",
                     "--trials", "4", "--seed", "2", "--out", str(out)])
        assert code == 0
        assert out.read_text().splitlines()[0] == NORM_HEADER
        assert json.loads(capsys.readouterr().out)["trials"] == 4


class TestHardCommand:
    def test_thetas_csv_loadable(self, tmp_path):
        out = tmp_path / "thetas.csv"
        code = main(["hard", "--family", "multitask:2,2", "--eps", "0.1",
                     "--count", "3", "--seed", "5", "--out", str(out)])
        assert code == 0
        data = np.loadtxt(str(out), delimiter=",", ndmin=2)
        assert data.shape == (3, 4)
        assert np.allclose(data.sum(axis=1), 1.0)  # spikes sum to 10 eps


class TestReportCommand:
    def test_round_trip(self, tmp_path, canon_csv, capsys):
        out = tmp_path / "run.csv"
        main(["bai", "--set", f"finite:{canon_csv}", "--algo", "fixed",
              "--theta", "gen:zeros", "--eps", "0.5", "--trials", "3",
              "--budget-override", "400", "--seed", "9", "--out", str(out)])
        direct = json.loads(capsys.readouterr().out)
        code = main(["report", "--in", str(out)])
        assert code == 0
        assert json.loads(capsys.readouterr().out) == direct
