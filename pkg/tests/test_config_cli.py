import csv
import json
import math

import numpy as np
import pytest

from kahler_decoherence.cli import bracket_table, main, read_harmonics_csv
from kahler_decoherence.config import parse_config
from kahler_decoherence.errors import ParseError, ValidationError


def run_cli(tmp_path, cfg, name="run"):
    path = tmp_path / f"{name}.json"
    path.write_text(json.dumps(cfg))
    out = tmp_path / name
    return main(["--config", str(path), "--out", str(out), "--quiet"]), out


class TestParse:
    def test_minimal(self):
        cfg = parse_config('{"command": "check", "rates": [1, 2, 3]}')
        assert cfg.rates == (1.0, 2.0, 3.0) and cfg.l_max == 32 and cfg.scan == (64, 128)

    def test_round_trip(self):
        text = json.dumps({
            "command": "evolve-distribution",
            "schedule": [{"t": 0, "rates": [1, 0, 0]}, {"t": 2, "rates": [0, 1, 1]}],
            "density": [[0.5, [0.1, -0.2]], [[0.1, 0.2], 0.5]],
            "hamiltonian": [0, 0, 0, 1],
            "t_grid": {"start": 0, "stop": 2, "count": 5},
            "grid_times": [0, 4],
            "l_max": 4,
        })
        cfg = parse_config(text)
        assert parse_config(json.dumps(cfg.to_dict())) == cfg
        assert cfg.density[0][1] == complex(0.1, -0.2)

    def test_parse_error_location(self):
        with pytest.raises(ParseError) as exc:
            parse_config('{"command": "check",\n  "rates": [1, 2,]}')
        assert exc.value.line == 2

    @pytest.mark.parametrize(
        "cfg, field",
        [
            ({"command": "check"}, "rates"),
            ({"command": "check", "rates": [1, 2]}, "rates"),
            ({"command": "check", "rates": [1, 2, 3], "bogus": 1}, "bogus"),
            ({"command": "fly", "rates": [1, 2, 3]}, "command"),
            ({"command": "evolve-density", "rates": [1, 1, 1]}, "initial"),
            ({"command": "evolve-density", "rates": [1, 1, 1], "bloch": [1, 0, 0], "density": [[1, 0], [0, 0]]}, "initial"),
            ({"command": "evolve-density", "rates": [1, 1, 1], "bloch": [1, 1, 0]}, "bloch"),
            ({"command": "classify", "schedule": {"samples": [[1, [1, 1, 1]], [0, [1, 1, 1]]]}}, "schedule.samples"),
            ({"command": "check", "rates": [1, 1, 1], "t_grid": {"count": 0}}, "t_grid.count"),
            ({"command": "check", "rates": [1, 1, 1], "step": -1}, "step"),
            ({"command": "check", "rates": [1, 1, 1], "n_theta": 0}, "n_theta"),
        ],
    )
    def test_validation(self, cfg, field):
        with pytest.raises(ValidationError) as exc:
            parse_config(json.dumps(cfg))
        assert exc.value.field == field

    def test_demo_default_rates(self):
        assert parse_config('{"command": "demo-negativity"}').rates == (1.0, 1.0, -0.6)


class TestCommands:
    def test_check_exit_codes(self, tmp_path):
        code, out = run_cli(tmp_path, {"command": "check", "rates": [1, 2, 3]}, "cp")
        assert code == 0 and json.loads((out / "verdict.json").read_text())["elliptic"]
        code, out = run_cli(tmp_path, {"command": "check", "rates": [1, 1, -0.6]}, "po")
        v = json.loads((out / "verdict.json").read_text())
        assert code == 1 and abs(v["witness"]["theta"] - math.pi / 2) < 1e-12

    def test_error_exit(self, tmp_path, capsys):
        path = tmp_path / "bad.json"
        path.write_text("{not json")
        assert main(["--config", str(path), "--out", str(tmp_path)]) == 2
        assert "error" in capsys.readouterr().err

    def test_stdin(self, tmp_path, monkeypatch, capsys):
        import io

        monkeypatch.setattr("sys.stdin", io.StringIO('{"command": "bracket-table"}'))
        assert main(["--stdin", "--out", str(tmp_path)]) == 0
        assert json.loads(capsys.readouterr().out)["su2_relations_hold"]

    def test_evolve_density(self, tmp_path):
        cfg = {"command": "evolve-density", "rates": [0.5, 0.5, 0.5], "bloch": [1, 0, 0],
               "t_grid": {"start": 0, "stop": 1, "count": 3}}
        code, out = run_cli(tmp_path, cfg)
        rows = list(csv.DictReader(open(out / "bloch.csv")))
        assert code == 0 and abs(float(rows[-1]["x1"]) - math.exp(-1)) < 1e-15
        assert json.loads((out / "report.json").read_text())["max_deviation"] < 1e-10

    def test_evolve_distribution(self, tmp_path):
        cfg = {"command": "evolve-distribution", "rates": [1, 2, 3], "bloch": [0, 0, 1], "l_max": 4,
               "n_theta": 8, "n_phi": 16, "t_grid": {"stop": 1, "count": 3}, "grid_times": [2]}
        code, out = run_cli(tmp_path, cfg)
        rep = json.loads((out / "report.json").read_text())
        assert code == 0 and not rep["became_negative"]
        assert np.allclose(rep["normalization"], 1, atol=1e-12)
        assert len(list(csv.reader(open(out / "grid_2.csv")))) == 8 * 16 + 1
        hf = read_harmonics_csv_at(out / "harmonics.csv", 1.0)
        assert abs(hf[(1, 0)] - math.sqrt(4 * math.pi / 3) / math.pi * math.exp(-3)) < 1e-12

    def test_harmonics_file_input(self, tmp_path):
        src = tmp_path / "p0.csv"
        src.write_text(f"l,m,re,im\n0,0,{math.sqrt(4 * math.pi) / math.pi!r},0\n2,0,0.1,0\n")
        hf = read_harmonics_csv(src, 2)
        assert hf.coefficient(2, 0) == 0.1
        cfg = {"command": "evolve-distribution", "rates": [1, 1, 1], "harmonics_file": str(src), "l_max": 2,
               "n_theta": 8, "n_phi": 16, "t_grid": {"stop": 1, "count": 2}}
        code, out = run_cli(tmp_path, cfg)
        assert code == 0

    def test_classify(self, tmp_path):
        code, _ = run_cli(tmp_path, {"command": "classify", "rates": [1, 2, 3], "scan": [8, 16]}, "a")
        assert code == 0
        code, out = run_cli(tmp_path, {"command": "classify", "rates": [1, 1, -0.6], "scan": [8, 16]}, "b")
        assert code == 1 and json.loads((out / "report.json").read_text())["overall"] == "PDivisible"

    def test_bracket_table(self):
        rows = {(i, j): (c0, c1, c2, c3) for i, j, c0, c1, c2, c3 in bracket_table()}
        assert rows[(1, 2)] == (0, 0, 0, 4) and rows[(3, 1)] == (0, 0, 4, 0) and rows[(0, 2)] == (0, 0, 0, 0)

    def test_demo_negativity(self, tmp_path):
        code, out = run_cli(tmp_path, {"command": "demo-negativity"})
        rep = json.loads((out / "report.json").read_text())
        assert code == 0 and rep["found"] and rep["admissibility"] == "PositiveOnly"

    def test_deterministic_output(self, tmp_path):
        cfg = {"command": "evolve-distribution", "rates": [1, 1, -0.6], "bloch": [0.2, 0.1, 0.3], "l_max": 3,
               "n_theta": 8, "n_phi": 16, "t_grid": {"stop": 1, "count": 4}, "grid_times": [3]}
        _, a = run_cli(tmp_path, cfg, "first")
        _, b = run_cli(tmp_path, cfg, "second")
        for name in ("harmonics.csv", "summary.csv", "grid_3.csv", "report.json"):
            assert (a / name).read_bytes() == (b / name).read_bytes()


def read_harmonics_csv_at(path, t):
    out = {}
    for row in csv.DictReader(open(path)):
        if float(row["t"]) == t:
            out[(int(row["l"]), int(row["m"]))] = complex(float(row["re"]), float(row["im"]))
    return out
