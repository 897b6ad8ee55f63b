import csv
import io
import json

import numpy as np
import pytest

from fraclab import cli


def _run(tmp_path, *argv, name="out.json"):
    out = tmp_path / name
    code = cli.main([*argv, "--out", str(out)])
    return code, out


class TestExitCodes:
    def test_eigen_pass(self, tmp_path):
        code, out = _run(tmp_path, "eigen", "--N", "1", "--s", "0.5", "--V", "0")
        assert code == cli.EXIT_OK
        rep = json.loads(out.read_text())
        assert rep["result"]["status"] == "pass"
        assert rep["result"]["sigmas"][0] == pytest.approx(1.1578, abs=0.005)

    def test_uncertified_potential_is_not_a_pass(self, tmp_path):
        code, out = _run(tmp_path, "eigen", "--N", "2", "--s", "0.5", "--V=-r^2", "--n-basis", "16")
        assert code == cli.EXIT_FAIL
        rep = json.loads(out.read_text())
        assert rep["result"]["potential_certified_nondecreasing"] is False
        assert "note" in rep["result"]

    @pytest.mark.parametrize("argv", [
        ["eigen", "--s", "1.5"],
        ["eigen", "--s", "0"],
        ["eigen", "--V", "sin(r)"],
        ["eigen", "--grid-size", "100"],
        ["eigen", "--k", "0"],
        ["groundstate", "--N", "3", "--s", "0.5", "--p", "6"],
        ["groundstate", "--lambda", "-1"],
        ["verify", "--only", "nosuch"],
        ["sweep", "--axis", "s", "--start", "0.2", "--end", "1.2", "--steps", "2"],
        ["sweep", "--axis", "s", "--start", "0.2", "--end", "0.8", "--steps", "0"],
        ["eigen", "--bogus"],
        ["nosuch"],
    ])
    def test_config_errors(self, argv, tmp_path, capsys):
        assert cli.main([*argv, "--out", str(tmp_path / "x")]) == cli.EXIT_CONFIG
        assert not (tmp_path / "x").exists()

    def test_bad_worker_count(self, monkeypatch, tmp_path):
        monkeypatch.setenv("FRACLAB_WORKERS", "zero")
        argv = ["sweep", "--axis", "t", "--start", "0", "--end", "1", "--steps", "1"]
        assert cli.main([*argv, "--out", str(tmp_path / "x")]) == cli.EXIT_CONFIG

    def test_tampered_stiffness_fails_verify(self, monkeypatch, tmp_path):
        import fraclab.discretization as disc

        orig = disc.stiffness_coefficient
        monkeypatch.setattr(disc, "stiffness_coefficient", lambda n, params: orig(n, params) * (1 + 1e-2))
        code, out = _run(tmp_path, "verify", "--only", "discretization", "--n-basis", "16")
        assert code == cli.EXIT_FAIL
        rep = json.loads(out.read_text())
        failed = {r["check_id"].split("[")[0] for r in rep["result"]["records"] if r["status"] != "pass"}
        assert "discretization.stiffness_vs_oracle" in failed

    def test_suite_exception_is_recorded(self, monkeypatch, tmp_path):
        from fraclab import verify

        def boom(cfg):
            raise RuntimeError("broken")
            yield

        monkeypatch.setitem(verify.SUITES, "specfun", boom)
        code, out = _run(tmp_path, "verify", "--only", "specfun")
        assert code == cli.EXIT_FAIL
        rec = json.loads(out.read_text())["result"]["records"]
        assert rec[0]["status"] == "error" and "broken" in rec[0]["measured"]


class TestReports:
    def test_json_is_deterministic_and_replayable(self, tmp_path):
        argv = ["eigen", "--N", "2", "--s", "0.25", "--V", "10*r^2", "--n-basis", "16"]
        (tmp_path / "one").mkdir()
        (tmp_path / "two").mkdir()
        _, a = _run(tmp_path / "one", *argv)
        _, b = _run(tmp_path / "two", *argv)
        # the output path is part of the embedded config, so compare with it normalised
        assert a.read_text().replace("/one/", "/x/") == b.read_text().replace("/two/", "/x/")
        code = cli.main(["eigen", "--config", str(a), "--out", str(tmp_path / "c.json")])
        assert code == cli.EXIT_OK
        rep_a = json.loads(a.read_text())
        rep_c = json.loads((tmp_path / "c.json").read_text())
        assert rep_a["result"] == rep_c["result"]
        assert rep_c["config"]["V"] == "10*r^2" and rep_c["config"]["n_basis"] == 16

    def test_config_command_mismatch(self, tmp_path):
        _, a = _run(tmp_path, "eigen", "--n-basis", "8")
        assert cli.main(["groundstate", "--config", str(a)]) == cli.EXIT_CONFIG
        assert cli.main(["eigen", "--config", str(tmp_path / "missing.json")]) == cli.EXIT_CONFIG

    def test_csv_eigen(self, tmp_path):
        _, out = _run(tmp_path, "eigen", "--n-basis", "12", "--format", "csv", name="e.csv")
        rows = list(csv.reader(io.StringIO(out.read_text())))
        assert rows[0] == ["field", "value"]
        fields = {r[0] for r in rows[1:]}
        assert "result.sigmas[0]" in fields and "config.N" in fields

    def test_groundstate(self, tmp_path):
        code, out = _run(tmp_path, "groundstate", "--N", "1", "--s", "0.5", "--p", "2", "--lambda", "1",
                         "--n-basis", "24")
        assert code == cli.EXIT_OK
        res = json.loads(out.read_text())["result"]
        assert res["summary"]["converged"] is True
        assert all(res["flags"].values())

    def test_full_precision_floats(self):
        text = cli.dumps({"a": 0.1 + 0.2, "b": float("nan"), "c": np.float64(1 / 3), "d": [1, np.int64(2)]})
        data = json.loads(text)
        assert data["a"] == 0.1 + 0.2
        assert data["b"] is None
        assert data["c"] == 1 / 3
        assert data["d"] == [1, 2]


class TestSweep:
    def test_rows_sorted_and_serial_equals_parallel(self, monkeypatch, tmp_path):
        argv = ["sweep", "--axis", "t", "--start", "1", "--end", "0", "--steps", "3", "--V", "10*r^2",
                "--n-basis", "12"]
        code, serial = _run(tmp_path, *argv, name="serial.csv")
        assert code == cli.EXIT_OK
        monkeypatch.setenv("FRACLAB_WORKERS", "2")
        code, par = _run(tmp_path, *argv, name="par.csv")
        assert code == cli.EXIT_OK
        assert serial.read_bytes() == par.read_bytes()
        rows = list(csv.DictReader(io.StringIO(serial.read_text())))
        ts = [float(r["t"]) for r in rows]
        assert ts == sorted(ts) and len(ts) == 4
        assert all(r["status"] == "pass" for r in rows)
        assert {"sigma1", "sigma2", "sign_changes_w2"} <= set(rows[0])

    def test_failed_row_does_not_abort(self, tmp_path, monkeypatch):
        orig = cli.ground_state

        def flaky(N, s, p, lam, params):
            if lam > 0.5:
                raise RuntimeError("no convergence")
            return orig(N, s, p, lam, params)

        monkeypatch.setattr(cli, "ground_state", flaky)
        code, out = _run(tmp_path, "sweep", "--axis", "lambda", "--start", "0", "--end", "1", "--steps", "1",
                         "--n-basis", "16", "--format", "json")
        assert code == cli.EXIT_FAIL
        rows = json.loads(out.read_text())["result"]["rows"]
        assert [r["status"] for r in rows] == ["pass", "error"]


class TestExtend:
    def test_outputs(self, tmp_path):
        out = tmp_path / "field.csv"
        code = cli.main(["extend", "--N", "1", "--s", "0.5", "--k", "2", "--n-basis", "16", "--grid-size", "60",
                         "--out", str(out)])
        assert code == cli.EXIT_OK
        rows = list(csv.reader(io.StringIO(out.read_text())))
        assert rows[0] == ["r", "t", "W"]
        assert len(rows) == 1 + 60 * 61
        summ = json.loads((tmp_path / "field.csv.summary.json").read_text())["result"]["summary"]
        assert summ["nodal_count"] == 2 and all(summ["touches_bottom"])
        assert summ["source"] == "w2"
        assert summ["extension_consistency"] <= 1e-2
        assert set(summ["tail_moment"]) == {"10", "50", "100"}
