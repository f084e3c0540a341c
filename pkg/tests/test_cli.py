import csv
import io
import json
from importlib import resources

import jsonschema
import pytest

from rydberg_repeater.cli import CNOT_TRUTH_TABLE, ERROR_COLUMNS, RATE_COLUMNS, main


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def schema(name):
    return json.loads(resources.files("rydberg_repeater").joinpath(f"data/{name}").read_text())


class TestVerifyProtocol:
    def test_full_pass(self, capsys):
        code, out, _ = run(capsys, "verify-protocol")
        assert code == 0
        assert out.rstrip().splitlines()[-1].startswith("result: PASS")
        for row in CNOT_TRUTH_TABLE:
            assert row in out

    def test_single_row(self, capsys):
        code, out, _ = run(capsys, "verify-protocol", "--row", "3")
        assert code == 0
        assert "row 3: t_Bu s_Bd -> t_Bu s_Bd -> t_Bu r_Bd -> t_Bu t_Bd -> t_Bu t_Bd -> t_Bu t_Bd" in out
        assert "row 1" not in out

    def test_corrupt_fails(self, capsys):
        code, out, _ = run(capsys, "verify-protocol", "--corrupt-convention")
        assert code == 1
        assert "first failure: bell generation" in out

    def test_bad_row(self, capsys):
        code, _, err = run(capsys, "verify-protocol", "--row", "7")
        assert code == 2 and "config error" in err

    def test_stable_text(self, capsys):
        assert run(capsys, "verify-protocol") == run(capsys, "verify-protocol")


class TestErrorSweep:
    def test_csv(self, capsys):
        code, out, _ = run(capsys, "error-sweep", "--tau-us", "300", "--delta-dd-mhz", "20", "100")
        assert code == 0
        rows = list(csv.DictReader(io.StringIO(out)))
        assert tuple(rows[0]) == ERROR_COLUMNS
        assert len(rows) == 2
        assert float(rows[0]["e_cnot_min"]) == pytest.approx(1.9242e-3, rel=1e-4)

    def test_default_grid(self, capsys):
        _, out, _ = run(capsys, "error-sweep", "--format", "json")
        rows = json.loads(out)
        assert len(rows) == 34

    def test_convention_flag(self, capsys):
        _, a, _ = run(capsys, "error-sweep", "--tau-us", "300", "--delta-dd-mhz", "20", "--format", "json")
        _, b, _ = run(
            capsys, "error-sweep", "--tau-us", "300", "--delta-dd-mhz", "20", "--format", "json",
            "--angular-convention", "1",
        )
        assert json.loads(b)[0]["e_cnot_min"] > json.loads(a)[0]["e_cnot_min"]

    def test_plot(self, capsys, tmp_path):
        out = tmp_path / "err.csv"
        code, _, _ = run(capsys, "error-sweep", "--out", str(out), "--plot")
        assert code == 0
        assert out.exists()
        png = tmp_path / "err.png"
        assert png.read_bytes()[:8] == b"\x89PNG\r\n\x1a\n"

    def test_plot_needs_location(self, capsys):
        code, _, err = run(capsys, "error-sweep", "--plot")
        assert code == 2


class TestRateSweep:
    ARGS = ("rate-sweep", "--L-km", "500", "1000", "--trials", "1500")

    def test_columns_and_values(self, capsys):
        code, out, _ = run(capsys, *self.ARGS)
        assert code == 0
        rows = list(csv.DictReader(io.StringIO(out)))
        assert tuple(rows[0]) == RATE_COLUMNS
        assert len(rows) == 6
        assert {r["variant"] for r in rows} == {"no_purify", "purify_0.99", "purify_0.98"}

    def test_byte_identical(self, capsys, tmp_path):
        a, b = tmp_path / "a.csv", tmp_path / "b.csv"
        run(capsys, *self.ARGS, "--out", str(a))
        run(capsys, *self.ARGS, "--out", str(b), "--workers", "2")
        assert a.read_bytes() == b.read_bytes()

    def test_seed_changes_output(self, capsys):
        _, a, _ = run(capsys, *self.ARGS)
        _, b, _ = run(capsys, *self.ARGS, "--seed", "7")
        assert a != b

    def test_plot_path(self, capsys, tmp_path):
        png = tmp_path / "rate.png"
        code, _, _ = run(capsys, "rate-sweep", "--L-km", "500", "--trials", "200", "--plot", str(png))
        assert code == 0 and png.stat().st_size > 0


class TestSimulate:
    def test_schema_and_fields(self, capsys, tmp_path):
        traj = tmp_path / "traj.csv"
        code, out, _ = run(capsys, "simulate", "--trials", "2000", "--trajectory", str(traj))
        assert code == 0
        report = json.loads(out)
        jsonschema.validate(report, schema("simulate_report.schema.json"))
        assert 0.06 < report["T_analytic_s"] < 0.1
        assert report["config"]["rng_seed"] == 20100201
        assert traj.read_text().startswith("level,action,F,q1,success_prob\n")

    def test_variant(self, capsys):
        _, out, _ = run(capsys, "simulate", "--trials", "500", "--variant", "purify_0.98")
        report = json.loads(out)
        assert report["purify_rounds"] == 4
        assert report["final"]["F"] >= 0.94

    def test_deterministic(self, capsys):
        a = run(capsys, "simulate", "--trials", "800", "--L-km", "600")
        assert a == run(capsys, "simulate", "--trials", "800", "--L-km", "600")

    def test_zero_trials(self, capsys):
        assert run(capsys, "simulate", "--trials", "0")[0] == 2


class TestPhysics:
    def test_text(self, capsys):
        code, out, err = run(capsys, "physics")
        assert code == 0
        assert "critical distance r_c" in out and "[ok] diameter within blockade radius" in out
        assert not err

    def test_json_schema(self, capsys):
        _, out, _ = run(capsys, "physics", "--json")
        jsonschema.validate(json.loads(out), schema("physics_report.schema.json"))

    def test_oversized_ensemble_warns(self, capsys):
        code, out, err = run(capsys, "physics", "--diameter-um", "10")
        assert code == 0
        assert "[FAIL] diameter within blockade radius" in out
        assert "warning:" in err


class TestConfigErrors:
    def test_missing_file(self, capsys, tmp_path):
        assert run(capsys, "physics", "--config", str(tmp_path / "nope.json"))[0] == 2

    def test_bad_json(self, capsys, tmp_path):
        p = tmp_path / "bad.json"
        p.write_text("{not json")
        assert run(capsys, "error-sweep", "--config", str(p))[0] == 2

    def test_unknown_key(self, capsys, tmp_path):
        p = tmp_path / "bad.json"
        p.write_text(json.dumps({"chain": {"bogus": 1}}))
        code, _, err = run(capsys, "simulate", "--config", str(p))
        assert code == 2 and "bogus" in err

    def test_bad_value(self, capsys, tmp_path):
        p = tmp_path / "bad.json"
        p.write_text(json.dumps({"chain": {"eta_d": 3.0}}))
        assert run(capsys, "simulate", "--config", str(p))[0] == 2

    def test_partial_config_merges(self, capsys, tmp_path):
        p = tmp_path / "cfg.json"
        p.write_text(json.dumps({"seed": 5, "chain": {"L": 500.0}}))
        code, out, _ = run(capsys, "simulate", "--config", str(p), "--trials", "300")
        assert code == 0
        cfg = json.loads(out)["config"]
        assert cfg["L"] == 500.0 and cfg["rng_seed"] == 5 and cfg["n"] == 4

    def test_negative_seed(self, capsys):
        assert run(capsys, "simulate", "--seed", "-1")[0] == 2
