import json

import pytest

from polycarleson.cli import ExperimentConfig, load_symbol, main


def run_cli(args):
    return main(args)


class TestConfigRoundTrip:
    def test_lossless(self, tmp_path):
        cfg = ExperimentConfig(subcommand="exponent", symbol="product2", beta=0.5,
                               budget=12345, seed=7, delta_grid=[0.5, 0.25, 0.125, 0.0625],
                               shrink=[1, 0], only=[4], tolerances={"quad_tol": 1e-7})
        path = tmp_path / "cfg.json"
        path.write_text(json.dumps(cfg.to_dict()))
        back = ExperimentConfig.from_dict(json.loads(path.read_text()))
        assert back == cfg

    def test_unknown_key_rejected(self):
        with pytest.raises(ValueError):
            ExperimentConfig.from_dict({"no_such_key": 1})


class TestSymbolLoading:
    def test_registry_name(self):
        sym = load_symbol("product2")
        assert sym.n_in == 2

    def test_inline_literal(self):
        sym = load_symbol("[[[1.0, 0.0, 1, 1]]]")
        assert sym.n_in == 2
        assert sym.n_out == 1

    def test_file_literal(self, tmp_path):
        path = tmp_path / "sym.json"
        path.write_text(json.dumps([[[1.0, 0.0, 1, 0]], [[1.0, 0.0, 0, 2]]]))
        sym = load_symbol(str(path))
        assert sym.n_out == 2

    def test_unknown(self):
        with pytest.raises(ValueError):
            load_symbol("nonsense_name")


class TestDecideCommand:
    def test_identity_bidisc(self, tmp_path, capsys):
        code = run_cli(["decide", "--symbol", "identity2", "--out-dir", str(tmp_path)])
        out = capsys.readouterr().out
        assert code == 0
        data = json.loads(out)
        assert data["outcome"] == "Bounded"
        assert (tmp_path / "decide_identity2.json").exists()

    def test_mean_product_unbounded(self, tmp_path, capsys):
        code = run_cli(["decide", "--symbol", "mean_product", "--out-dir", str(tmp_path)])
        data = json.loads(capsys.readouterr().out)
        assert code == 0
        assert data["outcome"] == "Unbounded"
        assert "witness" in data

    def test_tridisc_beta_rejected(self, tmp_path):
        code = run_cli(["decide", "--symbol", "identity3", "--beta", "1.0",
                        "--out-dir", str(tmp_path)])
        assert code == 2


class TestExponentCommand:
    def test_small_run_writes_artifacts(self, tmp_path, capsys):
        code = run_cli([
            "exponent", "--symbol", "product2", "--budget", "200000",
            "--delta-grid", "0.0625,0.03125,0.015625,0.0078125",
            "--seed", "3", "--out-dir", str(tmp_path),
        ])
        assert code == 0
        data = json.loads(capsys.readouterr().out)
        assert abs(data["slope"] - 3.0) < 0.3
        csv = (tmp_path / "exponent_product2.csv").read_text().splitlines()
        assert csv[0] == "delta,estimate,stderr,hits,region_mass,trusted"
        assert len(csv) == 5
        svg = (tmp_path / "exponent_product2.svg").read_text()
        assert svg.startswith("<svg") and "slope" in svg

    def test_config_file_with_flag_override(self, tmp_path, capsys):
        cfg = ExperimentConfig(subcommand="exponent", symbol="product2",
                               budget=100000, seed=1,
                               delta_grid=[0.25, 0.125, 0.0625, 0.03125],
                               out_dir=str(tmp_path))
        path = tmp_path / "cfg.json"
        path.write_text(json.dumps(cfg.to_dict()))
        code = run_cli(["exponent", "--config", str(path), "--seed", "9"])
        assert code == 0

    def test_bad_config_exit_2(self, tmp_path):
        path = tmp_path / "bad.json"
        path.write_text("{not json")
        assert run_cli(["exponent", "--config", str(path)]) == 2


class TestCarlesonCommand:
    def test_scan(self, tmp_path, capsys):
        code = run_cli([
            "carleson", "--symbol", "identity2", "--shrink", "1,1",
            "--budget", "100000", "--delta-grid", "0.125,0.0625,0.03125,0.015625",
            "--seed", "2", "--out-dir", str(tmp_path),
        ])
        assert code == 0
        data = json.loads(capsys.readouterr().out)
        assert abs(data["slope"]) < 0.2
        assert (tmp_path / "carleson_identity2.csv").exists()
        assert (tmp_path / "carleson_identity2.svg").exists()

    def test_missing_shrink_exit_2(self, tmp_path):
        assert run_cli(["carleson", "--symbol", "identity2",
                        "--out-dir", str(tmp_path)]) == 2


class TestContactCommand:
    def test_dump(self, tmp_path, capsys):
        code = run_cli(["contact", "--symbol", "mixed_pair", "--index-set", "1,2",
                        "--out-dir", str(tmp_path)])
        assert code == 0
        data = json.loads(capsys.readouterr().out)
        assert data["kind"] == "finite"
        csv = (tmp_path / "contact_mixed_pair.csv").read_text().splitlines()
        assert csv[0] == "theta_1,theta_2,residual,kind"
        assert len(csv) == 3


class TestCheckPropsCommand:
    def test_all_pass(self, tmp_path, capsys):
        code = run_cli(["check-props", "--seed", "5", "--out-dir", str(tmp_path)])
        assert code == 0
        lines = [json.loads(l) for l in capsys.readouterr().out.strip().splitlines()]
        assert all(entry["passed"] for entry in lines)
        assert any(entry["name"] == "mobius_margin" for entry in lines)


class TestBatteryCommand:
    def test_single_fast_criterion(self, tmp_path, capsys):
        code = run_cli(["battery", "--only", "4", "--out-dir", str(tmp_path)])
        out = capsys.readouterr().out
        assert code == 0
        assert "[PASS] criterion 4" in out
        summary = json.loads((tmp_path / "battery_summary.json").read_text())
        assert summary["exit_code"] == 0


class TestThreadsEnvVar:
    def test_env_fallback(self, tmp_path, capsys, monkeypatch):
        monkeypatch.setenv("POLYCARLESON_THREADS", "2")
        code = run_cli(["decide", "--symbol", "identity2", "--out-dir", str(tmp_path)])
        assert code == 0
