import json

import pytest

from invtrack.cli import main
from invtrack.reporting import CSV_COLUMNS

VERDICT_KEYS = ("command", "pass", "metrics", "tolerances", "scenario_digest")


def write_config(tmp_path, doc):
    path = tmp_path / "config.json"
    path.write_text(json.dumps(doc), encoding="utf-8")
    return str(path)


def read_report(out_dir, name="report.json"):
    return json.loads((out_dir / name).read_text(encoding="utf-8"))


class TestVerdicts:
    def test_eigs_passes(self, tmp_path, capsys):
        out = tmp_path / "out"
        assert main(["eigs", "--out", str(out)]) == 0
        assert capsys.readouterr().out == "eigs: pass\n"
        report = read_report(out, "eigs.json")
        assert report["command"] == "eigs"
        assert report["pass"] is True
        assert report["metrics"]["controller_abscissa"] < 0.0
        assert report["metrics"]["union_mismatch"] < 1e-9

    def test_verdict_key_order(self, tmp_path):
        out = tmp_path / "out"
        main(["eigs", "--out", str(out)])
        pairs = json.loads(
            (out / "eigs.json").read_text(encoding="utf-8"),
            object_pairs_hook=lambda p: p,
        )
        assert tuple(k for k, _ in pairs) == VERDICT_KEYS

    def test_separation_passes(self, tmp_path):
        out = tmp_path / "out"
        assert main(["separation", "--out", str(out)]) == 0
        report = read_report(out)
        assert report["metrics"]["linearization_match"] <= 1e-4
        assert report["tolerances"]["spectrum_union"] == 1e-6

    def test_invariance_passes(self, tmp_path):
        out = tmp_path / "out"
        assert main(["invariance", "--out", str(out)]) == 0
        report = read_report(out)
        assert report["metrics"]["closed_loop_drift"] <= 1e-6
        assert report["metrics"]["input_variation"] == 0.0

    def test_ekf_compare_passes(self, tmp_path):
        out = tmp_path / "out"
        assert main(["ekf-compare", "--out", str(out)]) == 0
        report = read_report(out)
        assert report["metrics"]["ekf_drift"] > 0.1
        assert report["metrics"]["observer_drift"] <= 1e-6

    def test_ekf_compare_coarse_step_is_diagnosed(self, tmp_path, capsys):
        out = tmp_path / "out"
        assert main(["ekf-compare", "--out", str(out), "--dt", "0.01"]) == 2
        assert "reduce dt" in capsys.readouterr().err

    def test_mech_lemma_passes(self, tmp_path):
        out = tmp_path / "out"
        assert main(["mech-lemma", "--out", str(out)]) == 0
        report = read_report(out)
        assert report["metrics"]["velocity_force_drift"] <= 1e-6
        assert report["metrics"]["attitude_force_drift"] >= 1e-2
        assert report["metrics"]["energy_drift"] <= 1e-8


class TestSimulate:
    def test_perfect_start_stays_put(self, tmp_path):
        out = tmp_path / "out"
        assert main(["simulate", "--out", str(out), "--t-end", "2.0"]) == 0
        text = (out / "timeseries.csv").read_text(encoding="utf-8")
        rows = text.strip().split("\n")
        assert rows[0] == ",".join(CSV_COLUMNS)
        i0 = CSV_COLUMNS.index("eta_x")
        for row in rows[1:]:
            vals = [float(v) for v in row.split(",")]
            assert max(abs(v) for v in vals[i0 : i0 + 6]) < 1e-9

    def test_sample_count_follows_dt(self, tmp_path):
        out = tmp_path / "out"
        main(["simulate", "--out", str(out), "--t-end", "1.0", "--dt", "0.01"])
        assert read_report(out)["metrics"]["samples"] == 101

    def test_unconverged_run_fails(self, tmp_path, capsys):
        cfg = write_config(tmp_path, {"initial_tracking_error": [0.1, 0.0, 0.0]})
        out = tmp_path / "out"
        rc = main(["simulate", "--config", cfg, "--out", str(out), "--t-end", "0.5"])
        assert rc == 1
        assert capsys.readouterr().out == "simulate: FAIL\n"
        report = read_report(out)
        assert report["pass"] is False
        assert report["metrics"]["final_tracking_error"] > 1e-3

    def test_tol_override(self, tmp_path):
        cfg = write_config(tmp_path, {"initial_tracking_error": [0.1, 0.0, 0.0]})
        out = tmp_path / "out"
        rc = main(
            ["simulate", "--config", cfg, "--out", str(out), "--t-end", "0.5", "--tol", "0.5"]
        )
        assert rc == 0
        assert read_report(out)["tolerances"]["final_error"] == 0.5


class TestFailureModes:
    def test_wobble_breaks_invariance(self, tmp_path):
        cfg = write_config(tmp_path, {"trajectory": {"v_wobble": {}}})
        out = tmp_path / "out"
        assert main(["invariance", "--config", cfg, "--out", str(out)]) == 1
        report = read_report(out)
        assert report["pass"] is False
        assert report["metrics"]["closed_loop_drift"] > 1e-2

    def test_missing_config(self, tmp_path, capsys):
        out = tmp_path / "out"
        rc = main(["eigs", "--config", str(tmp_path / "nope.json"), "--out", str(out)])
        assert rc == 2
        assert capsys.readouterr().err.startswith("error:")
        assert not (out / "eigs.json").exists()

    def test_invalid_json(self, tmp_path, capsys):
        path = tmp_path / "broken.json"
        path.write_text("{not json", encoding="utf-8")
        out = tmp_path / "out"
        assert main(["eigs", "--config", str(path), "--out", str(out)]) == 2
        assert "not valid JSON" in capsys.readouterr().err

    def test_unknown_field(self, tmp_path, capsys):
        cfg = write_config(tmp_path, {"rolll": 1})
        out = tmp_path / "out"
        assert main(["eigs", "--config", cfg, "--out", str(out)]) == 2
        assert "unknown field" in capsys.readouterr().err


class TestDeterminism:
    def test_simulate_is_byte_identical(self, tmp_path):
        args = ["simulate", "--t-end", "2.0"]
        out1, out2 = tmp_path / "a", tmp_path / "b"
        assert main(args + ["--out", str(out1)]) == 0
        assert main(args + ["--out", str(out2)]) == 0
        assert (out1 / "report.json").read_bytes() == (out2 / "report.json").read_bytes()
        assert (
            out1 / "timeseries.csv"
        ).read_bytes() == (out2 / "timeseries.csv").read_bytes()

    def test_eigs_is_byte_identical(self, tmp_path):
        out1, out2 = tmp_path / "a", tmp_path / "b"
        main(["eigs", "--out", str(out1)])
        main(["eigs", "--out", str(out2)])
        assert (out1 / "eigs.json").read_bytes() == (out2 / "eigs.json").read_bytes()

    def test_nested_out_dir_is_created(self, tmp_path):
        out = tmp_path / "deep" / "er" / "out"
        assert main(["eigs", "--out", str(out)]) == 0
        assert (out / "eigs.json").exists()
