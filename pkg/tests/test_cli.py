import json

import pytest
from click.testing import CliRunner

from harmex.cli import main


@pytest.fixture
def runner():
    return CliRunner()


POLY = json.dumps({"kind": "polynomial", "n": 2, "K": 6, "params": {"coeffs": [1.0, 0.5]}})


class TestProfileCommand:
    def test_constant_profile(self, runner):
        spec = json.dumps({"kind": "polynomial", "n": 2, "K": 3, "params": {"coeffs": [1.0]}})
        res = runner.invoke(main, ["profile", "--function", spec, "--functional", "M1", "--levels", "6"])
        assert res.exit_code == 0
        lines = res.output.strip().splitlines()
        assert lines[1] == "r,value"
        values = [float(line.split(",")[1]) for line in lines[2:]]
        assert all(abs(v - 1.0) < 1e-10 for v in values)

    def test_poisson_sup_profile_closed_form(self, runner):
        spec = json.dumps({"kind": "poisson", "n": 2, "K": 400, "params": {}})
        res = runner.invoke(
            main, ["profile", "--function", spec, "--functional", "Minf", "--levels", "5"]
        )
        assert res.exit_code == 0
        rows = [line.split(",") for line in res.output.strip().splitlines()[2:]]
        for r_str, v_str in rows:
            r, v = float(r_str), float(v_str)
            if r <= 0.9:
                assert v == pytest.approx((1 + r) / (1 - r), rel=1e-8)

    def test_missing_flag_usage_error(self, runner):
        res = runner.invoke(main, ["profile", "--functional", "M1"])
        assert res.exit_code == 2

    def test_bad_spec_usage_error(self, runner):
        res = runner.invoke(main, ["profile", "--function", "{not json"])
        assert res.exit_code == 2


class TestDecomposeCommand:
    def test_multipliers_table(self, runner):
        res = runner.invoke(
            main,
            ["decompose", "--function", POLY, "--order", "1.0", "--interval", "0:0.5"],
        )
        assert res.exit_code == 0
        lines = res.output.strip().splitlines()
        assert lines[1] == "k,w"
        k0, w0 = lines[2].split(",")
        assert int(k0) == 0
        assert float(w0) == pytest.approx(7.0 / 16.0, abs=1e-12)

    def test_requires_interval(self, runner):
        res = runner.invoke(main, ["decompose", "--function", POLY, "--order", "1.0"])
        assert res.exit_code == 2

    def test_bad_order(self, runner):
        res = runner.invoke(
            main, ["decompose", "--function", POLY, "--order", "-2.0", "--interval", "0:0.5"]
        )
        assert res.exit_code == 2


class TestDistanceCommand:
    def test_unknown_theorem_exit_2(self, runner):
        res = runner.invoke(main, ["distance", "--theorem", "T99"])
        assert res.exit_code == 2

    def test_invalid_alpha_names_range(self, runner):
        res = runner.invoke(main, ["distance", "--theorem", "T3", "--alpha", "-2.0"])
        assert res.exit_code == 2
        assert "alpha > 0" in res.output

    def test_polynomial_corpus_trivial(self, runner, tmp_path):
        cfg = {
            "corpus": [{"kind": "polynomial", "n": 2, "K": 8, "params": {"coeffs": [1.0, 0.5]}}],
            "theorems": ["T3"],
            "alpha": 1.0,
            "p": 2.0,
            "levels": 7,
            "epsilon_count": 6,
        }
        path = tmp_path / "cfg.json"
        path.write_text(json.dumps(cfg))
        out = tmp_path / "out.csv"
        res = runner.invoke(main, ["distance", "--config", str(path), "--output", str(out)])
        assert res.exit_code == 0, res.output
        lines = out.read_text().splitlines()
        assert lines[0].startswith("# harmex=")
        assert "config_sha256=" in lines[0]
        header = lines[1].split(",")
        assert header[:5] == ["function", "theorem", "epsilon_star", "s1_upper", "ratio"]
        row = lines[2].split(",")
        assert float(row[2]) == 0.0  # epsilon_star
        assert float(row[3]) < 1e-6  # s1_upper

    def test_determinism_byte_identical(self, runner, tmp_path):
        cfg = {
            "corpus": [
                {"kind": "q_kernel", "n": 2, "K": 2432, "params": {"beta": 0.0, "rho0": 1.0}},
                {"kind": "random", "n": 2, "K": 12, "params": {"seed": 5, "decay": 1.5}},
            ],
            "theorems": ["T3"],
            "alpha": 1.0,
            "p": 2.0,
            "levels": 7,
            "epsilon_count": 5,
        }
        path = tmp_path / "cfg.json"
        path.write_text(json.dumps(cfg))
        out1, out2 = tmp_path / "a.csv", tmp_path / "b.csv"
        r1 = runner.invoke(main, ["distance", "--config", str(path), "--output", str(out1)])
        r2 = runner.invoke(main, ["distance", "--config", str(path), "--output", str(out2)])
        assert r1.exit_code == 0 and r2.exit_code == 0
        assert out1.read_bytes() == out2.read_bytes()

    def test_json_format(self, runner, tmp_path):
        cfg = {
            "corpus": [{"kind": "polynomial", "n": 2, "K": 6, "params": {"coeffs": [2.0]}}],
            "theorems": ["T5"],
            "alpha": 1.0,
            "p": 2.0,
            "levels": 7,
            "format": "json",
        }
        path = tmp_path / "cfg.json"
        path.write_text(json.dumps(cfg))
        res = runner.invoke(main, ["distance", "--config", str(path)])
        assert res.exit_code == 0
        lines = res.output.strip().splitlines()
        meta = json.loads(lines[0])
        assert "config_sha256" in meta["meta"]
        rec = json.loads(lines[1])
        assert rec["theorem"] == "T5"


class TestVerifyCommand:
    def test_csv_header_contract(self, runner, tmp_path):
        out = tmp_path / "checks.csv"
        res = runner.invoke(main, ["verify", "--fast", "--output", str(out)])
        lines = out.read_text().splitlines()
        assert lines[1] == "check,params,max_violation,fitted_C,pass"
        assert res.exit_code == 0
        # at least eight checks in the battery
        assert len(lines) - 2 >= 8

    def test_config_space_validation(self, runner, tmp_path):
        path = tmp_path / "cfg.json"
        path.write_text(json.dumps({"space": {"family": "B_pq", "p": 1.0, "q": 1.0, "alpha": -2.0}}))
        res = runner.invoke(main, ["verify", "--config", str(path)])
        assert res.exit_code == 2
        assert "alpha > 0" in res.output
